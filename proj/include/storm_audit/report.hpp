#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "storm_audit/anomaly.hpp"
#include "storm_audit/audit.hpp"
#include "storm_audit/decimal.hpp"

/// QualityReport assembly and serialization (JSON, CSV tables, SVG charts).
namespace storm_audit::report {

inline constexpr std::string_view kSchemaVersion = "1";

struct SnapshotFile {
    std::string filename;
    int data_year{0};
    std::string created_stamp;

    friend bool operator==(const SnapshotFile&, const SnapshotFile&) = default;
};

/// Every knob that shaped the numbers, recorded inside the report.
struct RunParameters {
    std::string catalog_label{"directive-55"};
    std::size_t top_n{10};
    std::size_t frequency_k{5};
    Decimal outlier_threshold{Decimal::pow10(11)};
    audit::HistogramSpec histogram;
    std::string quantile_method{"nearest-rank"};
    bool missing_as_zero{false};

    friend bool operator==(const RunParameters&, const RunParameters&) = default;
};

/// Row accounting from ingestion, before the audit population is formed.
struct IngestCounts {
    std::uint64_t data_rows{0};
    std::uint64_t malformed_rows{0};
    std::uint64_t bad_year_rows{0};

    friend bool operator==(const IngestCounts&, const IngestCounts&) = default;
};

struct QualityReport {
    std::string schema_version{kSchemaVersion};
    std::vector<SnapshotFile> snapshot;
    std::uint64_t population{0};
    RunParameters parameters;
    IngestCounts ingest;
    audit::MissingStats missing;
    std::vector<audit::YearNameStats> year_names;
    std::vector<audit::CumulativePoint> cumulative_names;
    audit::FrequencyTable frequencies;
    std::vector<audit::DamageDistribution> distributions;
    std::uint64_t episode_count{0};
    std::uint64_t events_without_episode{0};
    std::vector<audit::EpisodeDamageSummary> top_episodes;
    std::vector<AnomalyRecord> anomalies;

    const std::string& catalog_label() const { return parameters.catalog_label; }

    friend bool operator==(const QualityReport&, const QualityReport&) = default;
};

class PopulationMismatch : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class IoFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ReportParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReportInputs {
    std::vector<SnapshotFile> snapshot;
    RunParameters parameters;
    IngestCounts ingest;
    audit::MissingStats missing;
    std::vector<audit::YearNameStats> year_names;
    audit::FrequencyTable frequencies;
    std::vector<audit::DamageDistribution> distributions;
    audit::EpisodeTotals episodes;
    std::vector<audit::EpisodeDamageSummary> top_episodes;
    std::vector<AnomalyRecord> anomalies;
};

/// Checks that every statistic saw the same population, derives the
/// cumulative name curve and sorts anomalies.
QualityReport build_report(ReportInputs inputs);

/// Canonical JSON: sorted keys, USD as decimal strings, trailing newline.
std::string emit_json(const QualityReport& report);
QualityReport parse_json(std::string_view json);

/// Writes missing.csv, year_names.csv, frequencies.csv, top_episodes.csv,
/// anomalies.csv and distributions.csv. All files are staged and renamed
/// together; on failure none of them is left behind.
std::vector<std::filesystem::path> emit_csv_tables(const QualityReport& report, const std::filesystem::path& out_dir);

/// Static SVG bar charts and one histogram per distribution.
std::vector<std::filesystem::path> emit_figures(const QualityReport& report, const std::filesystem::path& out_dir);

/// Exact decimal rendering of num/den rounded half-up to `digits` places,
/// trailing zeros dropped ("0.62", "0.333333", "0").
std::string ratio_string(std::uint64_t num, std::uint64_t den, int digits = 6);

/// RFC-4180 quoting of a single field.
std::string csv_field(std::string_view value);

/// Top-episode table as CSV text (header EpisodeID,Year,Month,TotDamage).
std::string top_episodes_csv(std::span<const audit::EpisodeDamageSummary> rows);

/// JSON for one distribution (the `hist` command output).
std::string distribution_json(const audit::DamageDistribution& distribution);

/// SVG histogram for one distribution.
std::string histogram_svg(const audit::DamageDistribution& distribution, const std::string& title);

} // namespace storm_audit::report
