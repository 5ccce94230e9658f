#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storm_audit {

enum class AnomalyKind {
    MalformedRow,
    BadYear,
    UnknownMagnitude,
    UnparseableMantissa,
    DigitMagnitude,
    BareMagnitude,
    OutlierEpisode,
    DuplicateSnapshotYear,
    EncodingReplacement,
    HeaderIssue,
};

std::string_view to_string(AnomalyKind kind);
std::optional<AnomalyKind> anomaly_kind_from_string(std::string_view name);

/// One flagged irregularity. source_file plus row_number (or episode_id for
/// episode-level flags) is enough to relocate the offending input.
struct AnomalyRecord {
    AnomalyKind kind{AnomalyKind::MalformedRow};
    std::string source_file;
    std::optional<std::uint64_t> row_number;
    std::string detail;
    std::optional<std::string> episode_id;

    friend bool operator==(const AnomalyRecord&, const AnomalyRecord&) = default;
};

/// Total order used for report output: (source_file, row_number, kind), then
/// detail and episode_id so equal keys still sort deterministically.
bool anomaly_less(const AnomalyRecord& a, const AnomalyRecord& b);
void sort_anomalies(std::vector<AnomalyRecord>& anomalies);

} // namespace storm_audit
