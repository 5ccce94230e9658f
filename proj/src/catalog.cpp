#include "storm_audit/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <system_error>

namespace storm_audit::catalog {

namespace fs = std::filesystem;

namespace {

const std::regex& detail_pattern() {
    static const std::regex pattern(R"(StormEvents_details-ftp_v1\.0_d(\d{4})_c(\d{8})\.csv(\.gz|\.bz2)?)");
    return pattern;
}

std::string_view basename_of(std::string_view ref) {
    auto cut = ref.find_first_of("?#");
    if (cut != std::string_view::npos) ref = ref.substr(0, cut);
    auto slash = ref.find_last_of('/');
    return slash == std::string_view::npos ? ref : ref.substr(slash + 1);
}

// .csv.gz is preferred over .csv.bz2 over plain .csv when one (year, stamp)
// is published in several encodings.
int suffix_rank(std::string_view filename) {
    if (filename.ends_with(".gz")) return 0;
    if (filename.ends_with(".bz2")) return 1;
    return 2;
}

bool order_by_snapshot(const RemoteFile& a, const RemoteFile& b) {
    return std::tie(a.data_year, a.created_stamp) < std::tie(b.data_year, b.created_stamp);
}

std::vector<RemoteFile> dedupe_and_sort(std::vector<RemoteFile> files) {
    std::sort(files.begin(), files.end(), [](const RemoteFile& a, const RemoteFile& b) {
        auto ra = suffix_rank(a.filename);
        auto rb = suffix_rank(b.filename);
        return std::tie(a.data_year, a.created_stamp, ra, a.url) <
               std::tie(b.data_year, b.created_stamp, rb, b.url);
    });
    auto last = std::unique(files.begin(), files.end(), [](const RemoteFile& a, const RemoteFile& b) {
        return a.data_year == b.data_year && a.created_stamp == b.created_stamp;
    });
    files.erase(last, files.end());
    return files;
}

} // namespace

std::optional<FilenameParts> parse_filename(std::string_view filename) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(filename.begin(), filename.end(), m, detail_pattern())) return std::nullopt;
    int year = std::stoi(m[1].str());
    if (year < 1950) return std::nullopt;
    return FilenameParts{year, m[2].str()};
}

std::string resolve_url(std::string_view base_url, std::string_view href) {
    if (href.find("://") != std::string_view::npos) return std::string(href);

    std::string base(base_url);
    if (!href.empty() && href.front() == '/') {
        auto scheme = base.find("://");
        auto host_end = scheme == std::string::npos ? std::string::npos : base.find('/', scheme + 3);
        return (host_end == std::string::npos ? base : base.substr(0, host_end)) + std::string(href);
    }
    if (href.starts_with("./")) href.remove_prefix(2);
    if (base.empty() || base.back() != '/') base += '/';
    return base + std::string(href);
}

std::vector<RemoteFile> discover_remote_files(std::string_view base_url, std::string_view listing_body) {
    static const std::regex href_re(R"re(href\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+)))re", std::regex::icase);

    std::vector<std::string> candidates;
    std::size_t href_count = 0;
    std::string body(listing_body);
    for (auto it = std::sregex_iterator(body.begin(), body.end(), href_re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        for (int g = 1; g <= 3; ++g) {
            if (m[g].matched) {
                candidates.push_back(m[g].str());
                break;
            }
        }
        ++href_count;
    }

    // plain-text listings: any whitespace-delimited token
    std::size_t token_matches = 0;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto start = body.find_first_not_of(" \t\r\n", pos);
        if (start == std::string::npos) break;
        auto end = body.find_first_of(" \t\r\n", start);
        if (end == std::string::npos) end = body.size();
        std::string_view token(body.data() + start, end - start);
        if (!token.starts_with("href") && !token.starts_with("HREF") && parse_filename(basename_of(token))) {
            candidates.emplace_back(token);
            ++token_matches;
        }
        pos = end;
    }

    if (href_count == 0 && token_matches == 0) {
        throw MalformedListing("no links found in listing for " + std::string(base_url));
    }

    std::vector<RemoteFile> files;
    for (const auto& ref : candidates) {
        auto name = basename_of(ref);
        auto parts = parse_filename(name);
        if (!parts) continue;
        files.push_back(RemoteFile{resolve_url(base_url, ref), std::string(name), parts->data_year,
                                   parts->created_stamp});
    }
    return dedupe_and_sort(std::move(files));
}

SnapshotSelection select_latest_per_year(const std::vector<RemoteFile>& files) {
    std::map<int, std::vector<RemoteFile>> by_year;
    for (const auto& f : files) by_year[f.data_year].push_back(f);

    SnapshotSelection out;
    for (auto& [year, group] : by_year) {
        std::sort(group.begin(), group.end(), order_by_snapshot);
        const RemoteFile& winner = group.back();
        out.kept.push_back(winner);
        for (std::size_t i = 0; i + 1 < group.size(); ++i) {
            out.discarded.push_back(AnomalyRecord{
                AnomalyKind::DuplicateSnapshotYear, group[i].filename, std::nullopt,
                "year " + std::to_string(year) + " also published as " + winner.filename + "; older stamp " +
                    group[i].created_stamp + " discarded",
                std::nullopt});
        }
    }
    return out;
}

TransferStatus get_to_string(Transport& transport, const std::string& url, std::string& body) {
    body.clear();
    return transport.get(url, [&body](std::string_view chunk) {
        body.append(chunk);
        return true;
    });
}

CacheEntry fetch_file(const RemoteFile& remote, const fs::path& cache_dir, Transport& transport, int retries) {
    std::error_code ec;
    if (!fs::is_directory(cache_dir, ec)) {
        throw CacheUnwritable("cache directory does not exist: " + cache_dir.string());
    }

    const fs::path target = cache_dir / remote.filename;
    if (fs::is_regular_file(target, ec)) {
        auto size = fs::file_size(target, ec);
        if (!ec && size > 0) return CacheEntry{remote, target, size, false};
    }

    const fs::path partial = cache_dir / (remote.filename + ".part");
    std::string last_error;
    for (int attempt = 0; attempt <= std::max(retries, 0); ++attempt) {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) throw CacheUnwritable("cannot write into " + cache_dir.string());

        bool write_failed = false;
        auto status = transport.get(remote.url, [&](std::string_view chunk) {
            out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
            write_failed = !out;
            return !write_failed;
        });
        out.close();

        if (write_failed) {
            fs::remove(partial, ec);
            throw CacheUnwritable("write failed for " + partial.string());
        }
        if (status.ok) {
            auto size = fs::file_size(partial, ec);
            if (!ec && size > 0) {
                fs::rename(partial, target, ec);
                if (ec) {
                    fs::remove(partial, ec);
                    throw CacheUnwritable("cannot rename into " + target.string());
                }
                return CacheEntry{remote, target, size, true};
            }
            last_error = "empty body";
        } else {
            last_error = status.error.empty() ? "HTTP " + std::to_string(status.http_status) : status.error;
        }
        fs::remove(partial, ec);
    }
    throw TransferFailed(remote.url + ": " + last_error);
}

std::vector<RemoteFile> scan_cache(const fs::path& cache_dir) {
    std::vector<RemoteFile> files;
    for (const auto& entry : fs::directory_iterator(cache_dir)) {
        if (!entry.is_regular_file()) continue;
        auto name = entry.path().filename().string();
        auto parts = parse_filename(name);
        if (!parts) continue;
        files.push_back(RemoteFile{entry.path().string(), name, parts->data_year, parts->created_stamp});
    }
    return dedupe_and_sort(std::move(files));
}

} // namespace storm_audit::catalog
