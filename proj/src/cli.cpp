#include "storm_audit/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "storm_audit/http_transport.hpp"
#include "storm_audit/storm_csv.hpp"

namespace storm_audit::cli {

namespace fs = std::filesystem;

namespace {

int current_year() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    return utc.tm_year + 1900;
}

std::optional<int> parse_int(std::string_view s) {
    if (s.empty() || s.size() > 6) return std::nullopt;
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

std::string percent(std::uint64_t count, std::uint64_t population) {
    return report::ratio_string(count * 100, population, 2) + "%";
}

/// Reads the selected cache files into a pipeline result; returns an exit
/// code on failure.
std::variant<pipeline::PipelineResult, int> load(const RunConfig& config, const normalize::CanonicalCatalog& catalog,
                                                 const Environment& env) {
    auto& err = *env.err;
    std::error_code ec;
    if (!fs::is_directory(config.cache_dir, ec)) {
        err << "error: cache directory not found: " << config.cache_dir.string() << '\n';
        return kEnvironment;
    }
    pipeline::CacheSelection selection;
    try {
        selection = pipeline::select_cached_files(config.cache_dir, config.years);
    } catch (const std::exception& e) {
        err << "error: cannot scan cache: " << e.what() << '\n';
        return kEnvironment;
    }
    if (selection.files.empty()) {
        err << "error: no Storm Events detail files in " << config.cache_dir.string() << '\n';
        return kEnvironment;
    }
    if (!selection.missing_years.empty()) {
        err << "error: cache lacks year(s):";
        for (int y : selection.missing_years) err << ' ' << y;
        err << '\n';
        return kEnvironment;
    }

    pipeline::PipelineOptions options;
    options.catalog = &catalog;
    options.policy =
        config.missing_as_zero ? normalize::TotalPolicy::MissingAsZero : normalize::TotalPolicy::MissingPropagates;
    options.workers = config.workers;
    try {
        auto result = pipeline::run(selection.files, options);
        for (auto& a : selection.anomalies) result.anomalies.push_back(std::move(a));
        return result;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kEnvironment;
    }
}

report::RunParameters parameters_of(const RunConfig& config) {
    report::RunParameters p;
    p.catalog_label = config.catalog;
    p.top_n = config.top_n;
    p.frequency_k = config.frequency_k;
    p.outlier_threshold = config.outlier_threshold;
    p.histogram.bins = config.bins;
    p.histogram.scale = config.histogram_scale;
    p.missing_as_zero = config.missing_as_zero;
    return p;
}

std::optional<normalize::CanonicalCatalog> load_catalog(const RunConfig& config, const Environment& env) {
    try {
        return normalize::CanonicalCatalog::resolve(config.catalog);
    } catch (const std::exception& e) {
        *env.err << "error: " << e.what() << '\n';
        return std::nullopt;
    }
}

void print_summary(const report::QualityReport& r, std::ostream& out) {
    std::uint64_t outliers = 0;
    for (const auto& a : r.anomalies) outliers += a.kind == AnomalyKind::OutlierEpisode ? 1 : 0;

    out << "files: " << r.snapshot.size() << '\n';
    out << "population: " << r.population << '\n';
    for (const auto& [name, count] : r.missing.entries()) {
        out << "missing " << name << ": " << percent(count, r.population) << " (" << count << ")\n";
    }
    out << "distinct event names: " << (r.cumulative_names.empty() ? 0 : r.cumulative_names.back().cumulative_count)
        << '\n';
    std::set<std::string> nonstandard;
    for (const auto& y : r.year_names) nonstandard.insert(y.distinct_nonstandard.begin(), y.distinct_nonstandard.end());
    out << "non-standard event names: " << nonstandard.size() << '\n';
    if (r.top_episodes.empty()) {
        out << "top episode: none\n";
    } else {
        const auto& t = r.top_episodes.front();
        out << "top episode: " << t.episode_id << ' ' << t.year << ' ' << t.month << ' ' << t.total_damage.to_string()
            << '\n';
    }
    out << "outlier episodes: " << outliers << '\n';
    out << "anomalies: " << r.anomalies.size() << '\n';
}

void print_table(std::span<const audit::EpisodeDamageSummary> rows, std::ostream& out) {
    std::vector<std::array<std::string, 4>> cells{{"EpisodeID", "Year", "Month", "TotDamage"}};
    for (const auto& e : rows) {
        cells.push_back({e.episode_id, std::to_string(e.year), e.month, e.total_damage.to_string()});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    }
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 4; ++c) {
            if (c == 3) {
                out << std::setw(static_cast<int>(width[c])) << std::right << row[c];
            } else {
                out << std::setw(static_cast<int>(width[c])) << std::left << row[c] << "  ";
            }
        }
        out << '\n';
    }
}

} // namespace

std::optional<pipeline::YearRange> parse_year_range(std::string_view text) {
    auto sep = text.find("..");
    std::optional<int> first;
    std::optional<int> last;
    if (sep == std::string_view::npos) {
        first = last = parse_int(text);
    } else {
        first = parse_int(text.substr(0, sep));
        last = parse_int(text.substr(sep + 2));
    }
    if (!first || !last || *first > *last) return std::nullopt;
    if (*first < 1950 || *last > current_year()) return std::nullopt;
    return pipeline::YearRange{*first, *last};
}

Environment Environment::process() {
    Environment env;
    env.out = &std::cout;
    env.err = &std::cerr;
    env.make_transport = [] { return std::make_unique<catalog::HttpTransport>(); };
    env.getenv = [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (v == nullptr || *v == '\0') return std::nullopt;
        return std::string(v);
    };
    return env;
}

int cmd_fetch(const RunConfig& config, const Environment& env) {
    auto& out = *env.out;
    auto& err = *env.err;
    if (!catalog::split_url(config.base_url)) {
        err << "error: bad base URL: " << config.base_url << '\n';
        return kEnvironment;
    }
    auto transport = env.make_transport();

    std::string listing;
    auto status = catalog::get_to_string(*transport, config.base_url, listing);
    if (!status.ok) {
        err << "error: cannot fetch listing " << config.base_url << ": "
            << (status.error.empty() ? "HTTP " + std::to_string(status.http_status) : status.error) << '\n';
        return kEnvironment;
    }

    std::vector<catalog::RemoteFile> remote;
    try {
        remote = catalog::discover_remote_files(config.base_url, listing);
    } catch (const catalog::MalformedListing& e) {
        err << "error: " << e.what() << '\n';
        return kEnvironment;
    }
    auto selection = catalog::select_latest_per_year(remote);
    for (const auto& a : selection.discarded) out << "skipped " << a.source_file << ": " << a.detail << '\n';

    std::error_code ec;
    fs::create_directories(config.cache_dir, ec);
    if (!fs::is_directory(config.cache_dir, ec)) {
        err << "error: cannot create cache directory " << config.cache_dir.string() << '\n';
        return kEnvironment;
    }

    std::vector<std::string> failed;
    for (const auto& f : selection.kept) {
        if (config.years && !config.years->contains(f.data_year)) continue;
        try {
            auto entry = catalog::fetch_file(f, config.cache_dir, *transport, config.retries);
            out << (entry.fetched ? "fetched " : "cached ") << f.filename << " (" << entry.size_bytes << " bytes)\n";
        } catch (const catalog::CacheUnwritable& e) {
            err << "error: " << e.what() << '\n';
            return kEnvironment;
        } catch (const std::exception& e) {
            out << "failed " << f.filename << ": " << e.what() << '\n';
            failed.push_back(f.filename);
        }
    }
    if (!failed.empty()) {
        err << failed.size() << " files were not downloaded!\n";
        return kPartialFetch;
    }
    return kSuccess;
}

int cmd_audit(const RunConfig& config, const Environment& env) {
    auto catalog = load_catalog(config, env);
    if (!catalog) return kEnvironment;
    auto loaded = load(config, *catalog, env);
    if (auto* code = std::get_if<int>(&loaded)) return *code;
    const auto& result = std::get<pipeline::PipelineResult>(loaded);

    auto report = pipeline::assemble_report(result, *catalog, parameters_of(config));
    auto formats = config.formats.empty() ? std::set<std::string>{"json", "csv", "svg"} : config.formats;

    try {
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        if (formats.contains("json")) {
            auto path = config.output_dir / "report.json";
            auto tmp = config.output_dir / ".report.json.tmp";
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            auto body = report::emit_json(report);
            f.write(body.data(), static_cast<std::streamsize>(body.size()));
            f.close();
            if (!f) {
                fs::remove(tmp, ec);
                throw report::IoFailure("cannot write " + path.string());
            }
            fs::rename(tmp, path, ec);
            if (ec) throw report::IoFailure("cannot write " + path.string());
        }
        if (formats.contains("csv")) report::emit_csv_tables(report, config.output_dir);
        if (formats.contains("svg")) report::emit_figures(report, config.output_dir);
    } catch (const report::IoFailure& e) {
        *env.err << "error: " << e.what() << '\n';
        return kEnvironment;
    }

    print_summary(report, *env.out);
    bool outliers = std::any_of(report.anomalies.begin(), report.anomalies.end(),
                                [](const AnomalyRecord& a) { return a.kind == AnomalyKind::OutlierEpisode; });
    return outliers ? kOutliersFound : kSuccess;
}

int cmd_top(const RunConfig& config, std::size_t n, const Environment& env) {
    if (n == 0) {
        *env.err << "error: n must be at least 1\n";
        return kUsage;
    }
    auto catalog = load_catalog(config, env);
    if (!catalog) return kEnvironment;
    auto loaded = load(config, *catalog, env);
    if (auto* code = std::get_if<int>(&loaded)) return *code;
    const auto& result = std::get<pipeline::PipelineResult>(loaded);

    auto episodes = result.accumulator.episodes();
    auto top = audit::top_episodes(episodes.summaries, n);
    if (config.formats.contains("csv")) {
        *env.out << report::top_episodes_csv(top);
    } else {
        print_table(top, *env.out);
    }
    return kSuccess;
}

int cmd_hist(const RunConfig& config, const std::string& event_type, const std::string& kind_name,
             const std::optional<fs::path>& svg_path, const Environment& env) {
    auto kind = audit::damage_kind_from_string(kind_name);
    if (!kind) {
        *env.err << "error: --kind must be property, crop or total\n";
        return kUsage;
    }
    auto catalog = load_catalog(config, env);
    if (!catalog) return kEnvironment;
    auto loaded = load(config, *catalog, env);
    if (auto* code = std::get_if<int>(&loaded)) return *code;
    const auto& result = std::get<pipeline::PipelineResult>(loaded);

    audit::HistogramSpec spec;
    spec.bins = config.bins;
    spec.scale = config.histogram_scale;
    const auto canonical = normalize::canonicalize_event_type(event_type);
    auto distribution = result.accumulator.distribution(*kind, canonical, spec);
    *env.out << report::distribution_json(distribution);

    if (svg_path) {
        std::ofstream f(*svg_path, std::ios::binary | std::ios::trunc);
        f << report::histogram_svg(distribution, std::string(audit::to_string(*kind)) + " damage for " + canonical);
        if (!f) {
            *env.err << "error: cannot write " << svg_path->string() << '\n';
            return kEnvironment;
        }
    }
    return kSuccess;
}

int run(const std::vector<std::string>& args, const Environment& env) {
    CLI::App app{"Storm Events Database reliability audit", "storm-audit"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig config;
    if (auto v = env.getenv("STORM_AUDIT_BASE_URL")) config.base_url = *v;
    if (auto v = env.getenv("STORM_AUDIT_CACHE")) config.cache_dir = *v;

    std::string years_text;
    std::string threshold_text;
    std::string scale_text;
    std::string formats_text;
    std::string cache_text;
    int top_n = static_cast<int>(config.top_n);
    int frequency_k = static_cast<int>(config.frequency_k);
    int bins = static_cast<int>(config.bins);
    int workers = static_cast<int>(config.workers);

    app.add_option("--base-url", config.base_url, "Directory listing URL (env STORM_AUDIT_BASE_URL)");
    app.add_option("--cache-dir", cache_text, "Local cache directory (env STORM_AUDIT_CACHE)");
    app.add_option("--years", years_text, "Inclusive year range A..B (filename years)");
    app.add_option("--catalog", config.catalog, "directive-55, legacy-48 or a catalog file");
    app.add_option("--top-n", top_n, "Episodes in the top table");
    app.add_option("--freq-k", frequency_k, "Event types in the frequency table");
    app.add_option("--outlier-threshold", threshold_text, "Episode total (USD) flagged as outlier");
    app.add_option("--bins", bins, "Histogram bins");
    app.add_option("--scale", scale_text, "Histogram scale in USD");
    app.add_option("--out", config.output_dir, "Output directory");
    app.add_option("--format", formats_text, "Comma list of json,csv,svg");
    app.add_option("--workers", workers, "Parallel file workers");
    app.add_flag("--missing-as-zero", config.missing_as_zero, "Treat a missing damage side as 0 in totals");
    app.add_option("--retries", config.retries, "Extra download attempts per file");

    auto* fetch = app.add_subcommand("fetch", "Download detail files into the cache");
    auto* audit_cmd = app.add_subcommand("audit", "Run the full audit on the cache");
    auto* top = app.add_subcommand("top", "Print the costliest episodes");
    int top_positional = -1;
    top->add_option("n", top_positional, "Number of episodes (defaults to --top-n)");
    auto* hist = app.add_subcommand("hist", "Damage distribution for one event type");
    std::string event_type;
    std::string kind = "total";
    std::string svg_text;
    hist->add_option("event_type", event_type, "Event type, any case")->required();
    hist->add_option("--kind", kind, "property, crop or total");
    hist->add_option("--svg", svg_text, "Also write an SVG histogram here");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        *env.out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        *env.out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        *env.err << "usage error: " << e.what() << '\n';
        return kUsage;
    }

    auto usage = [&](const std::string& msg) {
        *env.err << "usage error: " << msg << '\n';
        return kUsage;
    };

    if (!cache_text.empty()) config.cache_dir = cache_text;
    if (!years_text.empty()) {
        config.years = parse_year_range(years_text);
        if (!config.years) return usage("--years expects A..B within 1950.." + std::to_string(current_year()));
    }
    if (top_n < 1) return usage("--top-n must be >= 1");
    if (frequency_k < 1) return usage("--freq-k must be >= 1");
    if (bins < 1) return usage("--bins must be >= 1");
    if (workers < 1) return usage("--workers must be >= 1");
    if (config.retries < 0) return usage("--retries must be >= 0");
    config.top_n = static_cast<std::size_t>(top_n);
    config.frequency_k = static_cast<std::size_t>(frequency_k);
    config.bins = static_cast<std::size_t>(bins);
    config.workers = static_cast<std::size_t>(workers);

    auto positive_decimal = [](const std::string& text) -> std::optional<Decimal> {
        auto d = Decimal::parse(text);
        if (!d || *d <= Decimal(0)) return std::nullopt;
        return d;
    };
    if (!threshold_text.empty()) {
        auto d = positive_decimal(threshold_text);
        if (!d) return usage("--outlier-threshold must be a positive decimal");
        config.outlier_threshold = *d;
    }
    if (!scale_text.empty()) {
        auto d = positive_decimal(scale_text);
        if (!d) return usage("--scale must be a positive decimal");
        config.histogram_scale = *d;
    }
    if (!formats_text.empty()) {
        std::stringstream ss(formats_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item != "json" && item != "csv" && item != "svg") return usage("unknown format " + item);
            config.formats.insert(item);
        }
    }

    if (fetch->parsed()) return cmd_fetch(config, env);
    if (audit_cmd->parsed()) return cmd_audit(config, env);
    if (top->parsed()) {
        if (top_positional == 0 || top_positional < -1) return usage("n must be >= 1");
        auto n = top_positional > 0 ? static_cast<std::size_t>(top_positional) : config.top_n;
        return cmd_top(config, n, env);
    }
    if (hist->parsed()) {
        std::optional<fs::path> svg;
        if (!svg_text.empty()) svg = svg_text;
        return cmd_hist(config, event_type, kind, svg, env);
    }
    return usage("no command given");
}

} // namespace storm_audit::cli
