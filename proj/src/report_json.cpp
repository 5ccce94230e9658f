#include "storm_audit/report.hpp"

#include <json.hpp>

namespace storm_audit::report {

using nlohmann::json;

namespace {

json opt_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_opt_string(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

Decimal read_decimal(const json& j) {
    auto d = Decimal::parse(j.get<std::string>());
    if (!d) throw ReportParseError("not a decimal string: " + j.dump());
    return *d;
}

json names_json(const std::set<std::string>& names) { return json(std::vector<std::string>(names.begin(), names.end())); }

std::set<std::string> read_names(const json& j) {
    auto v = j.get<std::vector<std::string>>();
    return {v.begin(), v.end()};
}

json spec_json(const audit::HistogramSpec& spec) {
    return json{{"bins", spec.bins}, {"scale", spec.scale.to_string()}, {"domain_upper", spec.domain_upper.to_string()}};
}

audit::HistogramSpec read_spec(const json& j) {
    audit::HistogramSpec spec;
    spec.bins = j.at("bins").get<std::size_t>();
    spec.scale = read_decimal(j.at("scale"));
    spec.domain_upper = read_decimal(j.at("domain_upper"));
    return spec;
}

json distribution_to_json(const audit::DamageDistribution& d) {
    json quantiles = json::array();
    for (const auto& q : d.quantiles) quantiles.push_back(json{{"p", q.probability}, {"value", q.value.to_string()}});
    json bins = json::array();
    for (const auto& b : d.histogram) bins.push_back(json{{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
    return json{
        {"kind", std::string(audit::to_string(d.kind))},
        {"filter_event_type", opt_string(d.filter_event_type)},
        {"present_count", d.present_count},
        {"zero_count", d.zero_count},
        {"quantiles", quantiles},
        {"histogram",
         {{"spec", spec_json(d.spec)},
          {"scale_transform", "log10(1 + value/scale)"},
          {"bins", bins},
          {"overflow_count", d.overflow_count}}},
    };
}

audit::DamageDistribution distribution_from_json(const json& j) {
    audit::DamageDistribution d;
    auto kind = audit::damage_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw ReportParseError("unknown distribution kind");
    d.kind = *kind;
    d.filter_event_type = read_opt_string(j.at("filter_event_type"));
    d.present_count = j.at("present_count").get<std::uint64_t>();
    d.zero_count = j.at("zero_count").get<std::uint64_t>();
    for (const auto& q : j.at("quantiles")) {
        d.quantiles.push_back(audit::Quantile{q.at("p").get<std::string>(), read_decimal(q.at("value"))});
    }
    const auto& h = j.at("histogram");
    d.spec = read_spec(h.at("spec"));
    for (const auto& b : h.at("bins")) {
        d.histogram.push_back(
            audit::HistogramBin{b.at("lower").get<double>(), b.at("upper").get<double>(), b.at("count").get<std::uint64_t>()});
    }
    d.overflow_count = h.at("overflow_count").get<std::uint64_t>();
    return d;
}

json episode_json(const audit::EpisodeDamageSummary& e) {
    return json{{"episode_id", e.episode_id},
                {"year", e.year},
                {"month", e.month},
                {"total_damage", e.total_damage.to_string()},
                {"event_count", e.event_count}};
}

json to_json(const QualityReport& r) {
    json snapshot = json::array();
    for (const auto& s : r.snapshot) {
        snapshot.push_back(json{{"filename", s.filename}, {"data_year", s.data_year}, {"created_stamp", s.created_stamp}});
    }

    const auto& p = r.parameters;
    json parameters{
        {"catalog_label", p.catalog_label},
        {"top_n", p.top_n},
        {"frequency_k", p.frequency_k},
        {"outlier_threshold", p.outlier_threshold.to_string()},
        {"histogram", spec_json(p.histogram)},
        {"quantile_method", p.quantile_method},
        {"missing_as_zero", p.missing_as_zero},
    };

    json variables = json::object();
    for (const auto& [name, count] : r.missing.entries()) {
        variables[name] = json{{"missing_count", count}, {"fraction", ratio_string(count, r.missing.population)}};
    }

    json years = json::array();
    for (const auto& y : r.year_names) {
        years.push_back(json{
            {"year", y.year},
            {"distinct_names", names_json(y.distinct_names)},
            {"distinct_nonstandard", names_json(y.distinct_nonstandard)},
            {"first_seen_nonstandard", names_json(y.first_seen_nonstandard)},
            {"distinct_count", y.distinct_names.size()},
            {"distinct_nonstandard_count", y.distinct_nonstandard.size()},
            {"total_event_count", y.total_event_count},
            {"nonstandard_event_count", y.nonstandard_event_count},
            {"nonstandard_fraction", ratio_string(y.nonstandard_event_count, y.total_event_count)},
        });
    }

    json cumulative = json::array();
    for (const auto& c : r.cumulative_names) cumulative.push_back(json{{"year", c.year}, {"cumulative_count", c.cumulative_count}});

    json top_types = json::array();
    for (const auto& f : r.frequencies.top) top_types.push_back(json{{"event_type", f.event_type}, {"count", f.count}});

    json distributions = json::array();
    for (const auto& d : r.distributions) distributions.push_back(distribution_to_json(d));

    json top = json::array();
    for (const auto& e : r.top_episodes) top.push_back(episode_json(e));

    json anomalies = json::array();
    std::map<std::string, std::uint64_t> anomaly_counts;
    for (const auto& a : r.anomalies) {
        anomalies.push_back(json{{"kind", std::string(to_string(a.kind))},
                                 {"source_file", a.source_file},
                                 {"row_number", a.row_number ? json(*a.row_number) : json(nullptr)},
                                 {"detail", a.detail},
                                 {"episode_id", opt_string(a.episode_id)}});
        anomaly_counts[std::string(to_string(a.kind))] += 1;
    }

    return json{
        {"schema_version", r.schema_version},
        {"snapshot", snapshot},
        {"population", r.population},
        {"catalog_label", r.catalog_label()},
        {"parameters", parameters},
        {"ingest",
         {{"data_rows", r.ingest.data_rows},
          {"malformed_rows", r.ingest.malformed_rows},
          {"bad_year_rows", r.ingest.bad_year_rows}}},
        {"missing", {{"population", r.missing.population}, {"variables", variables}}},
        {"year_names", years},
        {"cumulative_names", cumulative},
        {"frequencies",
         {{"population", r.frequencies.population},
          {"missing_event_type", r.frequencies.missing_event_type},
          {"top", top_types}}},
        {"distributions", distributions},
        {"episodes", {{"count", r.episode_count}, {"events_without_episode", r.events_without_episode}}},
        {"top_episodes", top},
        {"anomalies", anomalies},
        {"anomaly_counts", anomaly_counts},
    };
}

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

} // namespace

std::string emit_json(const QualityReport& report) { return dump(to_json(report)); }

std::string distribution_json(const audit::DamageDistribution& distribution) {
    return dump(distribution_to_json(distribution));
}

QualityReport parse_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ReportParseError(std::string("invalid report JSON: ") + e.what());
    }

    try {
        QualityReport r;
        r.schema_version = j.at("schema_version").get<std::string>();
        if (r.schema_version != kSchemaVersion) throw ReportParseError("unsupported schema_version " + r.schema_version);
        for (const auto& s : j.at("snapshot")) {
            r.snapshot.push_back(SnapshotFile{s.at("filename").get<std::string>(), s.at("data_year").get<int>(),
                                              s.at("created_stamp").get<std::string>()});
        }
        r.population = j.at("population").get<std::uint64_t>();

        const auto& p = j.at("parameters");
        r.parameters.catalog_label = p.at("catalog_label").get<std::string>();
        r.parameters.top_n = p.at("top_n").get<std::size_t>();
        r.parameters.frequency_k = p.at("frequency_k").get<std::size_t>();
        r.parameters.outlier_threshold = read_decimal(p.at("outlier_threshold"));
        r.parameters.histogram = read_spec(p.at("histogram"));
        r.parameters.quantile_method = p.at("quantile_method").get<std::string>();
        r.parameters.missing_as_zero = p.at("missing_as_zero").get<bool>();

        const auto& ingest = j.at("ingest");
        r.ingest.data_rows = ingest.at("data_rows").get<std::uint64_t>();
        r.ingest.malformed_rows = ingest.at("malformed_rows").get<std::uint64_t>();
        r.ingest.bad_year_rows = ingest.at("bad_year_rows").get<std::uint64_t>();

        const auto& m = j.at("missing");
        r.missing.population = m.at("population").get<std::uint64_t>();
        const auto& vars = m.at("variables");
        r.missing.episode_id = vars.at("EpisodeID").at("missing_count").get<std::uint64_t>();
        r.missing.property_damage = vars.at("PropertyDamage").at("missing_count").get<std::uint64_t>();
        r.missing.crop_damage = vars.at("CropDamage").at("missing_count").get<std::uint64_t>();
        r.missing.event_type = vars.at("EventType").at("missing_count").get<std::uint64_t>();

        for (const auto& y : j.at("year_names")) {
            audit::YearNameStats s;
            s.year = y.at("year").get<int>();
            s.distinct_names = read_names(y.at("distinct_names"));
            s.distinct_nonstandard = read_names(y.at("distinct_nonstandard"));
            s.first_seen_nonstandard = read_names(y.at("first_seen_nonstandard"));
            s.total_event_count = y.at("total_event_count").get<std::uint64_t>();
            s.nonstandard_event_count = y.at("nonstandard_event_count").get<std::uint64_t>();
            r.year_names.push_back(std::move(s));
        }
        for (const auto& c : j.at("cumulative_names")) {
            r.cumulative_names.push_back(
                audit::CumulativePoint{c.at("year").get<int>(), c.at("cumulative_count").get<std::uint64_t>()});
        }

        const auto& f = j.at("frequencies");
        r.frequencies.population = f.at("population").get<std::uint64_t>();
        r.frequencies.missing_event_type = f.at("missing_event_type").get<std::uint64_t>();
        for (const auto& e : f.at("top")) {
            r.frequencies.top.push_back(audit::FrequencyEntry{e.at("event_type").get<std::string>(), e.at("count").get<std::uint64_t>()});
        }

        for (const auto& d : j.at("distributions")) r.distributions.push_back(distribution_from_json(d));

        r.episode_count = j.at("episodes").at("count").get<std::uint64_t>();
        r.events_without_episode = j.at("episodes").at("events_without_episode").get<std::uint64_t>();
        for (const auto& e : j.at("top_episodes")) {
            r.top_episodes.push_back(audit::EpisodeDamageSummary{
                e.at("episode_id").get<std::string>(), e.at("year").get<int>(), e.at("month").get<std::string>(),
                read_decimal(e.at("total_damage")), e.at("event_count").get<std::uint64_t>()});
        }

        for (const auto& a : j.at("anomalies")) {
            auto kind = anomaly_kind_from_string(a.at("kind").get<std::string>());
            if (!kind) throw ReportParseError("unknown anomaly kind " + a.at("kind").dump());
            AnomalyRecord rec;
            rec.kind = *kind;
            rec.source_file = a.at("source_file").get<std::string>();
            if (!a.at("row_number").is_null()) rec.row_number = a.at("row_number").get<std::uint64_t>();
            rec.detail = a.at("detail").get<std::string>();
            rec.episode_id = read_opt_string(a.at("episode_id"));
            r.anomalies.push_back(std::move(rec));
        }
        return r;
    } catch (const json::exception& e) {
        throw ReportParseError(std::string("malformed report: ") + e.what());
    }
}

} // namespace storm_audit::report
