#include <doctest.h>

#include <regex>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "storm_audit/report.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace storm_audit;
using namespace storm_audit::report;
using storm_audit::testing::read_file;
using storm_audit::testing::TempDir;

namespace {

ReportInputs inputs_from(const std::vector<normalize::NormalizedEvent>& events, std::size_t top_n = 10) {
    const auto& cat = normalize::CanonicalCatalog::directive55();
    audit::AuditAccumulator acc;
    for (const auto& e : events) acc.add(e);
    ReportInputs in;
    in.parameters.top_n = top_n;
    in.missing = acc.missing();
    in.year_names = acc.year_names(cat);
    in.frequencies = acc.frequencies(5);
    in.distributions.push_back(acc.distribution(audit::DamageKind::Total, std::nullopt, {}));
    in.episodes = acc.episodes();
    if (!in.episodes.summaries.empty()) in.top_episodes = audit::top_episodes(in.episodes.summaries, top_n);
    in.anomalies = audit::flag_outliers(in.episodes.summaries, in.parameters.outlier_threshold);
    return in;
}

std::vector<normalize::NormalizedEvent> table_events() {
    std::vector<normalize::NormalizedEvent> events;
    for (int i = 0; i < 12; ++i) {
        normalize::NormalizedEvent e;
        e.episode_id = std::to_string(1000 + i);
        e.year = 2000 + i;
        e.month = "May";
        e.event_type = i % 2 ? "HAIL" : "FLOOD";
        e.property_damage = Decimal(i + 1).scaled_by_pow10(6);
        e.crop_damage = i < 10 ? std::optional<Decimal>(Decimal(0)) : std::nullopt;
        if (e.crop_damage) e.total_damage = *e.property_damage + *e.crop_damage;
        events.push_back(e);
    }
    normalize::NormalizedEvent napa;
    napa.episode_id = "1203478";
    napa.year = 2006;
    napa.month = "January";
    napa.event_type = "FLOOD";
    napa.property_damage = Decimal(115).scaled_by_pow10(9);
    napa.crop_damage = Decimal(0);
    napa.total_damage = napa.property_damage;
    events.push_back(napa);
    return events;
}

bool well_formed_xml(const std::string& text) {
    try {
        std::istringstream in(text);
        boost::property_tree::ptree tree;
        boost::property_tree::read_xml(in, tree);
        return tree.count("svg") == 1;
    } catch (const std::exception&) {
        return false;
    }
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

} // namespace

TEST_CASE("ratio_string") {
    CHECK(ratio_string(62, 100) == "0.62");
    CHECK(ratio_string(1, 3) == "0.333333");
    CHECK(ratio_string(2, 3) == "0.666667");
    CHECK(ratio_string(0, 0) == "0");
    CHECK(ratio_string(5, 5) == "1");
    CHECK(ratio_string(1, 8, 2) == "0.13");
}

TEST_CASE("csv_field quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("build_report") {
    auto in = inputs_from(table_events());
    auto rep = build_report(in);
    CHECK(rep.population == 13);
    CHECK(rep.schema_version == "1");
    CHECK(rep.cumulative_names.back().cumulative_count == 2);
    CHECK(rep.top_episodes.front().episode_id == "1203478");

    auto bad = inputs_from(table_events());
    bad.frequencies.population -= 1;
    CHECK_THROWS_AS(build_report(bad), PopulationMismatch);

    auto empty = build_report(inputs_from({}));
    CHECK(empty.population == 0);
    CHECK(empty.year_names.empty());
    CHECK(empty.top_episodes.empty());
}

TEST_CASE("anomalies are sorted by file, row, kind") {
    auto in = inputs_from({});
    in.anomalies = {{AnomalyKind::BadYear, "b.csv", 3, "x", std::nullopt},
                    {AnomalyKind::MalformedRow, "a.csv", 9, "x", std::nullopt},
                    {AnomalyKind::MalformedRow, "b.csv", 3, "x", std::nullopt},
                    {AnomalyKind::BadYear, "a.csv", 2, "x", std::nullopt}};
    auto rep = build_report(in);
    CHECK(rep.anomalies[0].row_number == 2u);
    CHECK(rep.anomalies[1].row_number == 9u);
    CHECK(rep.anomalies[2].kind == AnomalyKind::MalformedRow);
    CHECK(rep.anomalies[3].kind == AnomalyKind::BadYear);
}

TEST_CASE("emit_json is canonical and exact") {
    auto rep = build_report(inputs_from(table_events()));
    auto a = emit_json(rep);
    auto b = emit_json(rep);
    CHECK(a == b);
    CHECK(a.back() == '\n');
    CHECK(a.find("\"115000000000\"") != std::string::npos);
    CHECK(a.find("1.15e") == std::string::npos);
    CHECK(a.find("E+") == std::string::npos);

    auto j = nlohmann::json::parse(a);
    CHECK(j["top_episodes"][0]["total_damage"] == "115000000000");
    // keys are emitted in sorted order
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(std::is_sorted(keys.begin(), keys.end()));

    auto back = parse_json(a);
    CHECK(back == rep);
}

TEST_CASE("empty report JSON has every section") {
    auto rep = build_report(inputs_from({}));
    auto j = nlohmann::json::parse(emit_json(rep));
    for (const char* key : {"anomalies", "cumulative_names", "distributions", "episodes", "frequencies", "ingest",
                            "missing", "parameters", "population", "schema_version", "snapshot", "top_episodes",
                            "year_names"}) {
        INFO(key);
        CHECK(j.contains(key));
    }
    CHECK(j["population"] == 0);
    CHECK(parse_json(emit_json(rep)) == rep);
    CHECK_THROWS_AS(parse_json("{not json"), ReportParseError);
}

TEST_CASE("emit_csv_tables") {
    TempDir dir;
    auto rep = build_report(inputs_from(table_events()));
    auto written = emit_csv_tables(rep, dir.path());
    CHECK(written.size() == 6);
    auto top = read_file(dir / "top_episodes.csv");
    CHECK(line_count(top) == 11);
    CHECK(top.starts_with("EpisodeID,Year,Month,TotDamage\n1203478,2006,January,115000000000\n"));
    CHECK(read_file(dir / "missing.csv").find("CropDamage,2,13,") != std::string::npos);
    for (const auto& p : fs::directory_iterator(dir.path())) CHECK(p.path().filename().string().front() != '.');

    TempDir empty_dir;
    emit_csv_tables(build_report(inputs_from({})), empty_dir.path());
    for (const char* name : {"missing.csv", "year_names.csv", "frequencies.csv", "top_episodes.csv", "anomalies.csv",
                             "distributions.csv"}) {
        INFO(std::string(name));
        CHECK(line_count(read_file(empty_dir / name)) == 1);
    }
}

TEST_CASE("emit_csv_tables leaves nothing behind on failure") {
    TempDir dir;
    storm_audit::testing::write_file(dir / "blocker", "file");
    CHECK_THROWS_AS(emit_csv_tables(build_report(inputs_from({})), dir / "blocker"), IoFailure);

    // a directory squatting on one target name makes the final rename fail
    auto out = dir / "out";
    fs::create_directories(out / "top_episodes.csv" / "occupied");
    CHECK_THROWS_AS(emit_csv_tables(build_report(inputs_from(table_events())), out), IoFailure);
    std::vector<std::string> left;
    for (const auto& p : fs::directory_iterator(out)) left.push_back(p.path().filename().string());
    CHECK(left == std::vector<std::string>{"top_episodes.csv"});
}

TEST_CASE("emit_figures") {
    TempDir dir;
    auto events = table_events();
    auto rep = build_report(inputs_from(events));
    auto written = emit_figures(rep, dir.path());
    CHECK(written.size() == 5);
    for (const auto& p : written) CHECK(well_formed_xml(read_file(p)));

    auto cumulative = read_file(dir / "cumulative_names.svg");
    CHECK(cumulative.find("class=\"refline\" data-value=\"48\"") != std::string::npos);
    CHECK(cumulative.find("class=\"refline\" data-value=\"55\"") != std::string::npos);

    TempDir empty_dir;
    for (const auto& p : emit_figures(build_report(inputs_from({})), empty_dir.path())) {
        INFO(p.string());
        CHECK(well_formed_xml(read_file(p)));
    }
}

TEST_CASE("missing-value bar height is the fraction of the axis") {
    std::vector<normalize::NormalizedEvent> events(100);
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].year = 2000;
        events[i].event_type = "HAIL";
        events[i].property_damage = Decimal(0);
        if (i >= 62) events[i].crop_damage = Decimal(0);
    }
    TempDir dir;
    emit_figures(build_report(inputs_from(events)), dir.path());
    auto svg = read_file(dir / "missing_values.svg");
    CHECK(svg.find("data-y-max=\"1\"") != std::string::npos);
    CHECK(svg.find("data-plot-height=\"300\"") != std::string::npos);
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, std::regex(R"re(data-label="CropDamage" data-value="0.62"[^>]* height="([0-9.]+)")re")));
    CHECK(std::stod(m[1].str()) / 300.0 == doctest::Approx(0.62));
}

TEST_CASE("histogram_svg and distribution_json") {
    std::vector<normalize::NormalizedEvent> events(3);
    for (auto& e : events) {
        e.event_type = "HAIL";
        e.total_damage = Decimal(5000);
    }
    auto d = audit::damage_distribution(events, audit::DamageKind::Total, "HAIL");
    CHECK(well_formed_xml(histogram_svg(d, "Total <HAIL> & co")));
    auto j = nlohmann::json::parse(distribution_json(d));
    CHECK(j["present_count"] == 3);
    CHECK(j["quantiles"][0]["value"] == "5000");
}
