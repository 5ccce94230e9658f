#include "storm_audit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "storm_audit/catalog.hpp"
#include "storm_audit/storm_csv.hpp"

namespace storm_audit::pipeline {

CacheSelection select_cached_files(const std::filesystem::path& cache_dir, const std::optional<YearRange>& years) {
    auto chosen = catalog::select_latest_per_year(catalog::scan_cache(cache_dir));

    CacheSelection out;
    out.anomalies = std::move(chosen.discarded);
    for (const auto& f : chosen.kept) {
        if (years && !years->contains(f.data_year)) continue;
        out.files.push_back(SourceFile{f.url, f.filename, f.data_year, f.created_stamp});
    }
    if (years) {
        for (int y = years->first; y <= years->last; ++y) {
            bool present = std::any_of(out.files.begin(), out.files.end(),
                                       [y](const SourceFile& f) { return f.data_year == y; });
            if (!present) out.missing_years.push_back(y);
        }
    }
    return out;
}

namespace {

struct FileOutcome {
    audit::AuditAccumulator accumulator;
    std::vector<AnomalyRecord> anomalies;
    report::IngestCounts ingest;
    std::exception_ptr error;
};

void process_file(const SourceFile& file, const PipelineOptions& options, FileOutcome& out) {
    csv::EventStream stream(file.path);
    normalize::RecordContext context{file.filename, 0};

    while (auto row = stream.next()) {
        context.row_number = row->row_number;
        auto outcome = normalize::normalize_record(row->record, *options.catalog, context, options.policy);
        for (auto& a : outcome.anomalies) out.anomalies.push_back(std::move(a));
        if (!outcome.event) {
            ++out.ingest.bad_year_rows;
            continue;
        }
        if (file.data_year && outcome.event->year != *file.data_year) {
            out.anomalies.push_back(AnomalyRecord{
                AnomalyKind::BadYear, file.filename, row->row_number,
                "YEAR " + std::to_string(outcome.event->year) + " differs from filename year " +
                    std::to_string(*file.data_year) + "; record kept",
                outcome.event->episode_id});
        }
        out.accumulator.add(*outcome.event);
    }

    out.ingest.data_rows = stream.data_rows();
    out.ingest.malformed_rows = stream.skipped_rows();
    for (auto& a : stream.take_anomalies()) out.anomalies.push_back(std::move(a));
}

} // namespace

PipelineResult run(const std::vector<SourceFile>& files, const PipelineOptions& options) {
    std::vector<FileOutcome> outcomes(files.size());
    std::atomic<std::size_t> next_index{0};

    auto worker = [&] {
        for (std::size_t i = next_index++; i < files.size(); i = next_index++) {
            try {
                process_file(files[i], options, outcomes[i]);
            } catch (...) {
                outcomes[i].error = std::current_exception();
            }
        }
    };

    const std::size_t n_workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(files.size(), 1));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    PipelineResult result;
    result.sources = files;
    for (auto& o : outcomes) {
        if (o.error) std::rethrow_exception(o.error);
        result.accumulator.merge(o.accumulator);
        result.ingest.data_rows += o.ingest.data_rows;
        result.ingest.malformed_rows += o.ingest.malformed_rows;
        result.ingest.bad_year_rows += o.ingest.bad_year_rows;
        for (auto& a : o.anomalies) result.anomalies.push_back(std::move(a));
    }
    sort_anomalies(result.anomalies);
    return result;
}

report::QualityReport assemble_report(const PipelineResult& result, const normalize::CanonicalCatalog& catalog,
                                      const report::RunParameters& parameters) {
    const auto& acc = result.accumulator;
    report::ReportInputs in;
    for (const auto& f : result.sources) {
        in.snapshot.push_back(report::SnapshotFile{f.filename, f.data_year.value_or(0), f.created_stamp});
    }
    in.parameters = parameters;
    in.parameters.catalog_label = catalog.source_label();
    in.ingest = result.ingest;
    in.missing = acc.missing();
    in.year_names = acc.year_names(catalog);
    in.frequencies = acc.frequencies(std::max<std::size_t>(parameters.frequency_k, 1));

    for (auto kind : {audit::DamageKind::Property, audit::DamageKind::Crop, audit::DamageKind::Total}) {
        in.distributions.push_back(acc.distribution(kind, std::nullopt, parameters.histogram));
    }
    if (!in.frequencies.top.empty()) {
        in.distributions.push_back(
            acc.distribution(audit::DamageKind::Total, in.frequencies.top.front().event_type, parameters.histogram));
    }

    in.episodes = acc.episodes();
    in.top_episodes = audit::top_episodes(in.episodes.summaries, std::max<std::size_t>(parameters.top_n, 1));
    in.anomalies = result.anomalies;
    for (auto& a : audit::flag_outliers(in.episodes.summaries, parameters.outlier_threshold)) {
        in.anomalies.push_back(std::move(a));
    }
    return report::build_report(std::move(in));
}

} // namespace storm_audit::pipeline
