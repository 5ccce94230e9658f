#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "storm_audit/audit.hpp"
#include "storm_audit/normalize.hpp"
#include "storm_audit/report.hpp"

/// File-level orchestration: parse -> normalize -> accumulate, fanned out over
/// a worker pool and merged back in file order.
namespace storm_audit::pipeline {

struct SourceFile {
    std::filesystem::path path;
    std::string filename;
    std::optional<int> data_year; // from the filename, when it follows the naming pattern
    std::string created_stamp;
};

struct YearRange {
    int first{1950};
    int last{9999};

    bool contains(int year) const { return year >= first && year <= last; }
};

struct CacheSelection {
    std::vector<SourceFile> files;
    std::vector<AnomalyRecord> anomalies; // DuplicateSnapshotYear
    std::vector<int> missing_years;       // inside an explicit range but not cached
};

/// Picks the latest snapshot per year from a cache directory and filters by
/// filename year. missing_years is only filled when `years` is given.
CacheSelection select_cached_files(const std::filesystem::path& cache_dir, const std::optional<YearRange>& years);

struct PipelineOptions {
    const normalize::CanonicalCatalog* catalog{&normalize::CanonicalCatalog::directive55()};
    normalize::TotalPolicy policy{normalize::TotalPolicy::MissingPropagates};
    std::size_t workers{1};
};

struct PipelineResult {
    audit::AuditAccumulator accumulator;
    std::vector<AnomalyRecord> anomalies;
    report::IngestCounts ingest;
    std::vector<SourceFile> sources;
};

/// Streams every file once. Throws csv::UnreadableFile or
/// csv::HeaderMissingRequired for the first failing file (in input order).
PipelineResult run(const std::vector<SourceFile>& files, const PipelineOptions& options);

/// Turns a pipeline result into a QualityReport: missing stats, year names,
/// top-k frequencies, Property/Crop/Total distributions plus a Total
/// distribution for the most frequent event type, top-n episodes and outlier
/// flags.
report::QualityReport assemble_report(const PipelineResult& result, const normalize::CanonicalCatalog& catalog,
                                      const report::RunParameters& parameters);

} // namespace storm_audit::pipeline
