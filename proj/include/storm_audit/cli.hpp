#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "storm_audit/catalog.hpp"
#include "storm_audit/decimal.hpp"
#include "storm_audit/pipeline.hpp"

/// Command-line front end. Exit codes: 0 success, 1 usage, 2 environment or
/// input problem, 3 partial fetch, 4 outlier episodes found.
namespace storm_audit::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kEnvironment = 2,
    kPartialFetch = 3,
    kOutliersFound = 4,
};

struct RunConfig {
    std::string base_url{catalog::kDefaultBaseUrl};
    std::filesystem::path cache_dir{"storm-cache"};
    std::optional<pipeline::YearRange> years;
    std::string catalog{"directive-55"};
    std::size_t top_n{10};
    std::size_t frequency_k{5};
    Decimal outlier_threshold{Decimal::pow10(11)};
    std::size_t bins{50};
    Decimal histogram_scale{1000};
    std::filesystem::path output_dir{"storm-report"};
    std::set<std::string> formats; // empty = command default
    std::size_t workers{1};
    bool missing_as_zero{false};
    int retries{0};
};

/// Parses "1950..1954" or a single year "2006".
std::optional<pipeline::YearRange> parse_year_range(std::string_view text);

struct Environment {
    std::ostream* out{nullptr};
    std::ostream* err{nullptr};
    std::function<std::unique_ptr<catalog::Transport>()> make_transport;
    std::function<std::optional<std::string>(const std::string&)> getenv;

    /// stdout/stderr, HTTP transport, process environment.
    static Environment process();
};

int run(const std::vector<std::string>& args, const Environment& env);

int cmd_fetch(const RunConfig& config, const Environment& env);
int cmd_audit(const RunConfig& config, const Environment& env);
int cmd_top(const RunConfig& config, std::size_t n, const Environment& env);
int cmd_hist(const RunConfig& config, const std::string& event_type, const std::string& kind,
             const std::optional<std::filesystem::path>& svg_path, const Environment& env);

} // namespace storm_audit::cli
