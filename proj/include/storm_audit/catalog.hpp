#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "storm_audit/anomaly.hpp"

/// Discovery and local caching of Storm Events detail files.
namespace storm_audit::catalog {

inline constexpr std::string_view kDefaultBaseUrl =
    "http://www1.ncdc.noaa.gov/pub/data/swdi/stormevents/csvfiles/";

struct RemoteFile {
    std::string url;
    std::string filename;
    int data_year{0};
    std::string created_stamp; // YYYYMMDD

    friend bool operator==(const RemoteFile&, const RemoteFile&) = default;
};

struct CacheEntry {
    RemoteFile remote;
    std::filesystem::path local_path;
    std::uint64_t size_bytes{0};
    bool fetched{false}; // true when this call transferred the file
};

struct FilenameParts {
    int data_year{0};
    std::string created_stamp;

    friend bool operator==(const FilenameParts&, const FilenameParts&) = default;
};

class MalformedListing : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TransferFailed : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CacheUnwritable : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matches the detail-file pattern against a basename (no directories).
std::optional<FilenameParts> parse_filename(std::string_view filename);

/// Extracts every detail file referenced by a directory listing. Anchor hrefs
/// are collected first; whitespace-delimited tokens are also scanned so plain
/// text listings work. The result is deduplicated and strictly sorted by
/// (data_year, created_stamp). Throws MalformedListing when the body yields
/// neither an href nor a matching token.
std::vector<RemoteFile> discover_remote_files(std::string_view base_url, std::string_view listing_body);

/// Resolves a (possibly relative) href against a directory URL.
std::string resolve_url(std::string_view base_url, std::string_view href);

struct SnapshotSelection {
    std::vector<RemoteFile> kept;
    std::vector<AnomalyRecord> discarded; // DuplicateSnapshotYear
};

/// Keeps the greatest created_stamp per data year.
SnapshotSelection select_latest_per_year(const std::vector<RemoteFile>& files);

struct TransferStatus {
    bool ok{false};
    int http_status{0};
    std::string error;
};

/// Byte-fetch capability. The sink returns false to abort the transfer.
class Transport {
public:
    using Sink = std::function<bool(std::string_view chunk)>;

    virtual ~Transport() = default;
    virtual TransferStatus get(const std::string& url, const Sink& sink) = 0;
};

/// Convenience wrapper: buffers a whole (small) body, e.g. a listing page.
TransferStatus get_to_string(Transport& transport, const std::string& url, std::string& body);

/// Downloads remote into cache_dir unless a non-empty copy is already there.
/// The body is streamed to "<filename>.part" and renamed on success; on
/// failure the partial file is removed. `retries` extra attempts are made
/// after the first failure.
CacheEntry fetch_file(const RemoteFile& remote, const std::filesystem::path& cache_dir, Transport& transport,
                      int retries = 0);

/// Lists detail files already present in a cache directory, sorted like
/// discover_remote_files. Non-matching files are ignored.
std::vector<RemoteFile> scan_cache(const std::filesystem::path& cache_dir);

} // namespace storm_audit::catalog
