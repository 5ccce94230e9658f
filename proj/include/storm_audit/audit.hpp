#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "storm_audit/anomaly.hpp"
#include "storm_audit/decimal.hpp"
#include "storm_audit/normalize.hpp"

/// Audit statistics over a population of normalized events.
///
/// Every statistic is backed by a partial accumulator with an associative,
/// commutative merge, so per-file partials can be combined in any order and
/// still give identical results. The span-taking free functions are the
/// one-shot forms used by tests and small callers.
namespace storm_audit::audit {

using normalize::CanonicalCatalog;
using normalize::NormalizedEvent;

/// count/population as a double, 0 for an empty population.
double fraction(std::uint64_t count, std::uint64_t population);

struct MissingStats {
    std::uint64_t population{0};
    std::uint64_t episode_id{0};
    std::uint64_t property_damage{0};
    std::uint64_t crop_damage{0};
    std::uint64_t event_type{0};

    /// (variable name, missing count) in a fixed order.
    std::vector<std::pair<std::string, std::uint64_t>> entries() const;

    friend bool operator==(const MissingStats&, const MissingStats&) = default;
};

struct YearNameStats {
    int year{0};
    std::set<std::string> distinct_names;
    std::set<std::string> distinct_nonstandard;
    /// Non-standard names whose first appearance (over the whole population) is this year.
    std::set<std::string> first_seen_nonstandard;
    std::uint64_t total_event_count{0};
    std::uint64_t nonstandard_event_count{0};

    double nonstandard_fraction() const { return fraction(nonstandard_event_count, total_event_count); }

    friend bool operator==(const YearNameStats&, const YearNameStats&) = default;
};

struct CumulativePoint {
    int year{0};
    std::uint64_t cumulative_count{0};

    friend bool operator==(const CumulativePoint&, const CumulativePoint&) = default;
};

struct FrequencyEntry {
    std::string event_type;
    std::uint64_t count{0};

    friend bool operator==(const FrequencyEntry&, const FrequencyEntry&) = default;
};

struct FrequencyTable {
    std::uint64_t population{0};
    std::uint64_t missing_event_type{0};
    std::vector<FrequencyEntry> top;

    friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

enum class DamageKind { Property, Crop, Total };

std::string_view to_string(DamageKind kind);
std::optional<DamageKind> damage_kind_from_string(std::string_view name);

/// Histogram of log10(1 + value/scale) over [0, log10(domain_upper)].
struct HistogramSpec {
    std::size_t bins{50};
    Decimal scale{1000};
    Decimal domain_upper{2500};

    friend bool operator==(const HistogramSpec&, const HistogramSpec&) = default;
};

struct HistogramBin {
    double lower{0};
    double upper{0};
    std::uint64_t count{0};

    friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct Quantile {
    std::string probability; // "0", "0.25", ..., "1"
    Decimal value;

    friend bool operator==(const Quantile&, const Quantile&) = default;
};

/// Probabilities reported for every distribution, in permille.
inline constexpr std::array<int, 7> kQuantilePermille{0, 250, 500, 750, 900, 990, 1000};

struct DamageDistribution {
    DamageKind kind{DamageKind::Total};
    std::optional<std::string> filter_event_type;
    std::uint64_t present_count{0};
    std::uint64_t zero_count{0};
    std::vector<Quantile> quantiles; // nearest-rank; empty when present_count == 0
    HistogramSpec spec;
    std::vector<HistogramBin> histogram; // empty when present_count == 0
    std::uint64_t overflow_count{0};     // values above the histogram domain

    friend bool operator==(const DamageDistribution&, const DamageDistribution&) = default;
};

struct EpisodeDamageSummary {
    std::string episode_id;
    int year{0};
    std::string month;
    Decimal total_damage;
    std::uint64_t event_count{0};

    friend bool operator==(const EpisodeDamageSummary&, const EpisodeDamageSummary&) = default;
};

struct EpisodeTotals {
    std::vector<EpisodeDamageSummary> summaries; // sorted by (episode_id, year, month)
    std::uint64_t events_seen{0};
    std::uint64_t events_without_episode{0};
};

/// Exact multiset of damage values.
class ValueCounts {
public:
    void add(const Decimal& value, std::uint64_t times = 1);
    void merge(const ValueCounts& other);

    std::uint64_t total() const { return total_; }
    std::uint64_t count_of(const Decimal& value) const;
    const std::map<Decimal, std::uint64_t>& counts() const { return counts_; }

    /// Nearest-rank: the smallest value whose cumulative count reaches
    /// max(1, ceil(p * n)).
    Decimal nearest_rank(int permille) const;

    DamageDistribution distribution(DamageKind kind, std::optional<std::string> filter,
                                    const HistogramSpec& spec) const;

private:
    std::map<Decimal, std::uint64_t> counts_;
    std::uint64_t total_{0};
};

/// Bin lower edges for a spec, shared by the accumulator and the renderer.
std::vector<HistogramBin> empty_histogram(const HistogramSpec& spec);

/// Index of the bin holding value, or nullopt when it lies above the domain.
std::optional<std::size_t> histogram_bin(const Decimal& value, const HistogramSpec& spec,
                                         std::span<const HistogramBin> bins);

/// Mergeable partial state for every audit statistic.
class AuditAccumulator {
public:
    void add(const NormalizedEvent& event);
    void merge(const AuditAccumulator& other);

    std::uint64_t population() const { return missing_.population; }

    MissingStats missing() const { return missing_; }
    std::vector<YearNameStats> year_names(const CanonicalCatalog& catalog) const;
    FrequencyTable frequencies(std::size_t k) const;
    DamageDistribution distribution(DamageKind kind, const std::optional<std::string>& filter_event_type,
                                    const HistogramSpec& spec) const;
    EpisodeTotals episodes() const;

private:
    using EpisodeKey = std::tuple<std::string, int, std::string>;
    struct EpisodeSum {
        Decimal total;
        std::uint64_t events{0};
    };

    MissingStats missing_;
    std::map<int, std::map<std::string, std::uint64_t>> names_by_year_;
    std::array<ValueCounts, 3> values_;
    std::map<std::string, std::array<ValueCounts, 3>> values_by_type_;
    std::map<EpisodeKey, EpisodeSum> episodes_;
    std::uint64_t without_episode_{0};
};

MissingStats missing_value_stats(std::span<const NormalizedEvent> events);

std::vector<YearNameStats> year_name_stats(std::span<const NormalizedEvent> events, const CanonicalCatalog& catalog);

/// Cardinality of the running union of distinct names. Input must be sorted by year.
std::vector<CumulativePoint> cumulative_distinct_names(std::span<const YearNameStats> stats);

/// Top-k event types by count, ties by name ascending. Events with an empty
/// event type are counted in missing_event_type, not ranked.
FrequencyTable event_type_frequencies(std::span<const NormalizedEvent> events, std::size_t k);

DamageDistribution damage_distribution(std::span<const NormalizedEvent> events, DamageKind kind,
                                       const std::optional<std::string>& filter_event_type,
                                       const HistogramSpec& spec = {});

/// Groups by (episode_id, year, month) and sums the present total damages.
EpisodeTotals episode_totals(std::span<const NormalizedEvent> events);

/// Descending total, ties by episode_id then year then month.
std::vector<EpisodeDamageSummary> top_episodes(std::span<const EpisodeDamageSummary> summaries, std::size_t n);

/// One OutlierEpisode anomaly per summary with total_damage >= threshold.
std::vector<AnomalyRecord> flag_outliers(std::span<const EpisodeDamageSummary> summaries, const Decimal& threshold);

} // namespace storm_audit::audit
