#include "storm_audit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace storm_audit::audit {

double fraction(std::uint64_t count, std::uint64_t population) {
    return population == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(population);
}

std::vector<std::pair<std::string, std::uint64_t>> MissingStats::entries() const {
    return {{"EpisodeID", episode_id},
            {"PropertyDamage", property_damage},
            {"CropDamage", crop_damage},
            {"EventType", event_type}};
}

std::string_view to_string(DamageKind kind) {
    switch (kind) {
    case DamageKind::Property:
        return "Property";
    case DamageKind::Crop:
        return "Crop";
    case DamageKind::Total:
        return "Total";
    }
    return "Total";
}

std::optional<DamageKind> damage_kind_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "property") return DamageKind::Property;
    if (lower == "crop") return DamageKind::Crop;
    if (lower == "total") return DamageKind::Total;
    return std::nullopt;
}

// ---- ValueCounts ----------------------------------------------------------

void ValueCounts::add(const Decimal& value, std::uint64_t times) {
    if (times == 0) return;
    counts_[value] += times;
    total_ += times;
}

void ValueCounts::merge(const ValueCounts& other) {
    for (const auto& [value, n] : other.counts_) counts_[value] += n;
    total_ += other.total_;
}

std::uint64_t ValueCounts::count_of(const Decimal& value) const {
    auto it = counts_.find(value);
    return it == counts_.end() ? 0 : it->second;
}

Decimal ValueCounts::nearest_rank(int permille) const {
    if (total_ == 0) throw std::logic_error("nearest_rank on an empty multiset");
    // ceil(permille * n / 1000) without floating point
    std::uint64_t rank = (static_cast<std::uint64_t>(permille) * total_ + 999) / 1000;
    rank = std::clamp<std::uint64_t>(rank, 1, total_);
    std::uint64_t seen = 0;
    for (const auto& [value, n] : counts_) {
        seen += n;
        if (seen >= rank) return value;
    }
    return counts_.rbegin()->first;
}

std::vector<HistogramBin> empty_histogram(const HistogramSpec& spec) {
    if (spec.bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    const double top = std::log10(spec.domain_upper.to_double());
    const double width = top / static_cast<double>(spec.bins);
    std::vector<HistogramBin> bins(spec.bins);
    for (std::size_t i = 0; i < spec.bins; ++i) {
        bins[i].lower = width * static_cast<double>(i);
        bins[i].upper = i + 1 == spec.bins ? top : width * static_cast<double>(i + 1);
    }
    return bins;
}

std::optional<std::size_t> histogram_bin(const Decimal& value, const HistogramSpec& spec,
                                         std::span<const HistogramBin> bins) {
    // exact domain test: 1 + value/scale > upper  <=>  value > (upper - 1) * scale
    if (value > (spec.domain_upper - Decimal(1)) * spec.scale) return std::nullopt;
    const double x = std::log10(1.0 + value.to_double() / spec.scale.to_double());
    auto it = std::upper_bound(bins.begin(), bins.end(), x,
                               [](double v, const HistogramBin& b) { return v < b.lower; });
    if (it == bins.begin()) return 0;
    return static_cast<std::size_t>(std::distance(bins.begin(), it) - 1);
}

DamageDistribution ValueCounts::distribution(DamageKind kind, std::optional<std::string> filter,
                                             const HistogramSpec& spec) const {
    if (spec.bins == 0) throw std::invalid_argument("bins must be >= 1");
    if (spec.scale <= Decimal(0)) throw std::invalid_argument("scale must be > 0");

    DamageDistribution d;
    d.kind = kind;
    d.filter_event_type = std::move(filter);
    d.spec = spec;
    d.present_count = total_;
    d.zero_count = count_of(Decimal(0));
    if (total_ == 0) return d;

    for (int p : kQuantilePermille) {
        d.quantiles.push_back(Quantile{Decimal(p).scaled_by_pow10(-3).to_string(), nearest_rank(p)});
    }
    d.histogram = empty_histogram(spec);
    for (const auto& [value, n] : counts_) {
        if (auto bin = histogram_bin(value, spec, d.histogram)) {
            d.histogram[*bin].count += n;
        } else {
            d.overflow_count += n;
        }
    }
    return d;
}

// ---- AuditAccumulator -----------------------------------------------------

void AuditAccumulator::add(const NormalizedEvent& ev) {
    ++missing_.population;
    if (!ev.episode_id) ++missing_.episode_id;
    if (!ev.property_damage) ++missing_.property_damage;
    if (!ev.crop_damage) ++missing_.crop_damage;
    if (ev.event_type.empty()) ++missing_.event_type;

    names_by_year_[ev.year][ev.event_type] += 1;

    const std::array<const std::optional<Decimal>*, 3> by_kind{&ev.property_damage, &ev.crop_damage,
                                                                &ev.total_damage};
    auto& typed = values_by_type_[ev.event_type];
    for (std::size_t k = 0; k < by_kind.size(); ++k) {
        if (!*by_kind[k]) continue;
        values_[k].add(**by_kind[k]);
        typed[k].add(**by_kind[k]);
    }

    if (!ev.episode_id) {
        ++without_episode_;
    } else if (ev.total_damage) {
        auto& sum = episodes_[EpisodeKey{*ev.episode_id, ev.year, ev.month}];
        sum.total += *ev.total_damage;
        ++sum.events;
    }
}

void AuditAccumulator::merge(const AuditAccumulator& other) {
    missing_.population += other.missing_.population;
    missing_.episode_id += other.missing_.episode_id;
    missing_.property_damage += other.missing_.property_damage;
    missing_.crop_damage += other.missing_.crop_damage;
    missing_.event_type += other.missing_.event_type;

    for (const auto& [year, names] : other.names_by_year_) {
        auto& mine = names_by_year_[year];
        for (const auto& [name, n] : names) mine[name] += n;
    }
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k].merge(other.values_[k]);
    for (const auto& [type, kinds] : other.values_by_type_) {
        auto& mine = values_by_type_[type];
        for (std::size_t k = 0; k < kinds.size(); ++k) mine[k].merge(kinds[k]);
    }
    for (const auto& [key, sum] : other.episodes_) {
        auto& mine = episodes_[key];
        mine.total += sum.total;
        mine.events += sum.events;
    }
    without_episode_ += other.without_episode_;
}

std::vector<YearNameStats> AuditAccumulator::year_names(const CanonicalCatalog& catalog) const {
    std::vector<YearNameStats> out;
    std::set<std::string> seen_nonstandard;
    for (const auto& [year, names] : names_by_year_) {
        YearNameStats s;
        s.year = year;
        for (const auto& [name, n] : names) {
            if (name.empty()) continue; // missing event type is not a name
            s.total_event_count += n;
            s.distinct_names.insert(name);
            if (normalize::classify_event_type(name, catalog) == normalize::EventClass::NonStandard) {
                s.distinct_nonstandard.insert(name);
                s.nonstandard_event_count += n;
                if (seen_nonstandard.insert(name).second) s.first_seen_nonstandard.insert(name);
            }
        }
        if (s.total_event_count == 0) continue;
        out.push_back(std::move(s));
    }
    return out;
}

FrequencyTable AuditAccumulator::frequencies(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::map<std::string, std::uint64_t> totals;
    for (const auto& [year, names] : names_by_year_) {
        for (const auto& [name, n] : names) {
            if (!name.empty()) totals[name] += n;
        }
    }
    FrequencyTable table;
    table.population = missing_.population;
    table.missing_event_type = missing_.event_type;
    for (const auto& [name, n] : totals) table.top.push_back(FrequencyEntry{name, n});
    std::stable_sort(table.top.begin(), table.top.end(), [](const FrequencyEntry& a, const FrequencyEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.event_type < b.event_type;
    });
    if (table.top.size() > k) table.top.resize(k);
    return table;
}

DamageDistribution AuditAccumulator::distribution(DamageKind kind, const std::optional<std::string>& filter,
                                                  const HistogramSpec& spec) const {
    const auto k = static_cast<std::size_t>(kind);
    if (!filter) return values_[k].distribution(kind, std::nullopt, spec);
    auto it = values_by_type_.find(*filter);
    if (it == values_by_type_.end()) return ValueCounts{}.distribution(kind, filter, spec);
    return it->second[k].distribution(kind, filter, spec);
}

EpisodeTotals AuditAccumulator::episodes() const {
    EpisodeTotals out;
    out.events_seen = missing_.population;
    out.events_without_episode = without_episode_;
    out.summaries.reserve(episodes_.size());
    for (const auto& [key, sum] : episodes_) {
        const auto& [id, year, month] = key;
        out.summaries.push_back(EpisodeDamageSummary{id, year, month, sum.total, sum.events});
    }
    return out;
}

// ---- one-shot forms -------------------------------------------------------

namespace {

AuditAccumulator accumulate(std::span<const NormalizedEvent> events) {
    AuditAccumulator acc;
    for (const auto& ev : events) acc.add(ev);
    return acc;
}

} // namespace

MissingStats missing_value_stats(std::span<const NormalizedEvent> events) { return accumulate(events).missing(); }

std::vector<YearNameStats> year_name_stats(std::span<const NormalizedEvent> events, const CanonicalCatalog& catalog) {
    return accumulate(events).year_names(catalog);
}

std::vector<CumulativePoint> cumulative_distinct_names(std::span<const YearNameStats> stats) {
    std::vector<CumulativePoint> out;
    std::set<std::string_view> seen;
    for (const auto& s : stats) {
        seen.insert(s.distinct_names.begin(), s.distinct_names.end());
        out.push_back(CumulativePoint{s.year, seen.size()});
    }
    return out;
}

FrequencyTable event_type_frequencies(std::span<const NormalizedEvent> events, std::size_t k) {
    return accumulate(events).frequencies(k);
}

DamageDistribution damage_distribution(std::span<const NormalizedEvent> events, DamageKind kind,
                                       const std::optional<std::string>& filter_event_type,
                                       const HistogramSpec& spec) {
    return accumulate(events).distribution(kind, filter_event_type, spec);
}

EpisodeTotals episode_totals(std::span<const NormalizedEvent> events) { return accumulate(events).episodes(); }

std::vector<EpisodeDamageSummary> top_episodes(std::span<const EpisodeDamageSummary> summaries, std::size_t n) {
    if (n == 0) throw std::invalid_argument("n must be >= 1");
    std::vector<EpisodeDamageSummary> out(summaries.begin(), summaries.end());
    auto by_rank = [](const EpisodeDamageSummary& a, const EpisodeDamageSummary& b) {
        if (a.total_damage != b.total_damage) return a.total_damage > b.total_damage;
        return std::tie(a.episode_id, a.year, a.month) < std::tie(b.episode_id, b.year, b.month);
    };
    const auto keep = std::min(n, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), by_rank);
    out.resize(keep);
    return out;
}

std::vector<AnomalyRecord> flag_outliers(std::span<const EpisodeDamageSummary> summaries, const Decimal& threshold) {
    if (threshold <= Decimal(0)) throw std::invalid_argument("outlier threshold must be > 0");
    std::vector<AnomalyRecord> out;
    for (const auto& s : summaries) {
        if (s.total_damage < threshold) continue;
        out.push_back(AnomalyRecord{AnomalyKind::OutlierEpisode, "", std::nullopt,
                                    "episode " + s.episode_id + " (" + s.month + " " + std::to_string(s.year) +
                                        ") total damage " + s.total_damage.to_string() + " >= threshold " +
                                        threshold.to_string(),
                                    s.episode_id});
    }
    return out;
}

} // namespace storm_audit::audit
