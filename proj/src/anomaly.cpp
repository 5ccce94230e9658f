#include "storm_audit/anomaly.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <utility>

namespace storm_audit {

namespace {

constexpr std::array<std::pair<AnomalyKind, std::string_view>, 10> kKindNames{{
    {AnomalyKind::MalformedRow, "MalformedRow"},
    {AnomalyKind::BadYear, "BadYear"},
    {AnomalyKind::UnknownMagnitude, "UnknownMagnitude"},
    {AnomalyKind::UnparseableMantissa, "UnparseableMantissa"},
    {AnomalyKind::DigitMagnitude, "DigitMagnitude"},
    {AnomalyKind::BareMagnitude, "BareMagnitude"},
    {AnomalyKind::OutlierEpisode, "OutlierEpisode"},
    {AnomalyKind::DuplicateSnapshotYear, "DuplicateSnapshotYear"},
    {AnomalyKind::EncodingReplacement, "EncodingReplacement"},
    {AnomalyKind::HeaderIssue, "HeaderIssue"},
}};

} // namespace

std::string_view to_string(AnomalyKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "Unknown";
}

std::optional<AnomalyKind> anomaly_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

bool anomaly_less(const AnomalyRecord& a, const AnomalyRecord& b) {
    return std::tie(a.source_file, a.row_number, a.kind, a.detail, a.episode_id) <
           std::tie(b.source_file, b.row_number, b.kind, b.detail, b.episode_id);
}

void sort_anomalies(std::vector<AnomalyRecord>& anomalies) {
    std::sort(anomalies.begin(), anomalies.end(), anomaly_less);
}

} // namespace storm_audit
