#include <doctest.h>

#include <map>
#include <sstream>

#include <json.hpp>

#include "storm_audit/cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace storm_audit;
using storm_audit::testing::fixture_dir;
using storm_audit::testing::read_file;
using storm_audit::testing::TempDir;
using storm_audit::testing::write_file;

namespace {

constexpr const char* kBase = "http://mirror.test/csvfiles/";

struct Served {
    std::map<std::string, std::string> bodies;
    std::map<std::string, int> calls;
};

class MapTransport : public catalog::Transport {
public:
    explicit MapTransport(std::shared_ptr<Served> served) : served_(std::move(served)) {}
    catalog::TransferStatus get(const std::string& url, const Sink& sink) override {
        ++served_->calls[url];
        auto it = served_->bodies.find(url);
        if (it == served_->bodies.end()) return {false, 404, ""};
        if (!sink(it->second)) return {false, 200, "sink refused"};
        return {true, 200, ""};
    }

private:
    std::shared_ptr<Served> served_;
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args, std::shared_ptr<Served> served = std::make_shared<Served>(),
           std::map<std::string, std::string> env_vars = {}) {
    std::ostringstream out;
    std::ostringstream err;
    cli::Environment env;
    env.out = &out;
    env.err = &err;
    env.make_transport = [served] { return std::make_unique<MapTransport>(served); };
    env.getenv = [env_vars](const std::string& name) -> std::optional<std::string> {
        auto it = env_vars.find(name);
        if (it == env_vars.end()) return std::nullopt;
        return it->second;
    };
    int code = cli::run(args, env);
    return {code, out.str(), err.str()};
}

std::string detail_name(int year) {
    return "StormEvents_details-ftp_v1.0_d" + std::to_string(year) + "_c20160223.csv.gz";
}

const std::string kHeader = "EPISODE_ID,YEAR,MONTH_NAME,EVENT_TYPE,DAMAGE_PROPERTY,DAMAGE_CROPS,EPISODE_NARRATIVE\n";

std::shared_ptr<Served> listing_with(const std::vector<int>& years) {
    auto served = std::make_shared<Served>();
    std::string html = "<html><body>\n";
    for (int y : years) {
        html += "<a href=\"" + detail_name(y) + "\">" + detail_name(y) + "</a>\n";
        served->bodies[std::string(kBase) + detail_name(y)] = kHeader + "1," + std::to_string(y) + ",May,HAIL,1K,0K,x\n";
    }
    served->bodies[kBase] = html + "</body></html>\n";
    return served;
}

} // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"--no-such-flag", "audit"}).code == cli::kUsage);
    CHECK(run({"--years", "1949..1950", "audit"}).code == cli::kUsage);
    CHECK(run({"--years", "1960..1950", "audit"}).code == cli::kUsage);
    CHECK(run({"--years", "1950..3000", "audit"}).code == cli::kUsage);
    CHECK(run({"--workers", "0", "audit"}).code == cli::kUsage);
    CHECK(run({"--outlier-threshold", "-5", "audit"}).code == cli::kUsage);
    CHECK(run({"--scale", "abc", "audit"}).code == cli::kUsage);
    CHECK(run({"--format", "json,pdf", "audit"}).code == cli::kUsage);
    CHECK(run({"top", "0"}).code == cli::kUsage);
    CHECK(run({"--top-n", "0", "audit"}).code == cli::kUsage);
    CHECK(run({"hist"}).code == cli::kUsage);
    auto help = run({"--help"});
    CHECK(help.code == cli::kSuccess);
    CHECK(help.out.find("audit") != std::string::npos);
}

TEST_CASE("parse_year_range") {
    auto r = cli::parse_year_range("1950..1954");
    REQUIRE(r);
    CHECK(r->first == 1950);
    CHECK(r->last == 1954);
    CHECK(cli::parse_year_range("2006")->first == 2006);
    CHECK_FALSE(cli::parse_year_range("1950-1954"));
    CHECK_FALSE(cli::parse_year_range(""));
}

TEST_CASE("fetch") {
    TempDir cache;
    auto served = listing_with({1950, 1951, 1952});

    auto first = run({"--base-url", kBase, "--cache-dir", cache.path().string(), "fetch"}, served);
    CHECK(first.code == cli::kSuccess);
    CHECK(first.out.find("fetched " + detail_name(1950)) != std::string::npos);
    CHECK(fs::exists(cache / detail_name(1952)));

    SUBCASE("everything cached: exit 0 and no file transfers") {
        served->calls.clear();
        auto again = run({"--base-url", kBase, "--cache-dir", cache.path().string(), "fetch"}, served);
        CHECK(again.code == cli::kSuccess);
        CHECK(served->calls.size() == 1); // the listing only
        CHECK(again.out.find("cached " + detail_name(1951)) != std::string::npos);
    }
    SUBCASE("one failed download: exit 3, others intact") {
        TempDir fresh;
        served->calls.clear();
        served->bodies.erase(std::string(kBase) + detail_name(1951));
        auto partial = run({"--base-url", kBase, "--cache-dir", fresh.path().string(), "--retries", "1", "fetch"}, served);
        CHECK(partial.code == cli::kPartialFetch);
        CHECK(partial.err.find("files were not downloaded!") != std::string::npos);
        CHECK(fs::exists(fresh / detail_name(1950)));
        CHECK(fs::exists(fresh / detail_name(1952)));
        CHECK_FALSE(fs::exists(fresh / detail_name(1951)));
        CHECK_FALSE(fs::exists(fresh / (detail_name(1951) + ".part")));
        CHECK(served->calls[std::string(kBase) + detail_name(1951)] == 2);
    }
    SUBCASE("year filter") {
        TempDir fresh;
        auto some = run({"--base-url", kBase, "--cache-dir", fresh.path().string(), "--years", "1951..1951", "fetch"},
                        served);
        CHECK(some.code == cli::kSuccess);
        CHECK(fs::exists(fresh / detail_name(1951)));
        CHECK_FALSE(fs::exists(fresh / detail_name(1950)));
    }
}

TEST_CASE("fetch environment failures exit 2") {
    TempDir cache;
    CHECK(run({"--base-url", "not a url", "--cache-dir", cache.path().string(), "fetch"}).code == cli::kEnvironment);
    CHECK(run({"--base-url", kBase, "--cache-dir", cache.path().string(), "fetch"}).code == cli::kEnvironment);
    auto served = std::make_shared<Served>();
    served->bodies[kBase] = "nothing to see";
    CHECK(run({"--base-url", kBase, "--cache-dir", cache.path().string(), "fetch"}, served).code == cli::kEnvironment);
    // base URL from the environment
    auto listed = listing_with({1990});
    auto r = run({"--cache-dir", cache.path().string(), "fetch"}, listed, {{"STORM_AUDIT_BASE_URL", kBase}});
    CHECK(r.code == cli::kSuccess);
}

TEST_CASE("audit on the fixture corpus") {
    TempDir out;
    auto r = run({"--cache-dir", (fixture_dir() / "corpus").string(), "--out", out.path().string(), "audit"});
    CHECK(r.code == cli::kSuccess);
    CHECK(r.out.find("population: 9999") != std::string::npos);
    CHECK(r.out.find("missing CropDamage: ") != std::string::npos);
    CHECK(r.out.find("top episode: ") != std::string::npos);
    for (const char* f : {"report.json", "missing.csv", "top_episodes.csv", "cumulative_names.svg",
                          "histogram_total.svg"}) {
        INFO(f);
        CHECK(fs::exists(out / f));
    }
    auto j = nlohmann::json::parse(read_file(out / "report.json"));
    CHECK(j["ingest"]["malformed_rows"] == 1);
    CHECK(j["ingest"]["bad_year_rows"] == 1);
    CHECK(j["anomaly_counts"]["DuplicateSnapshotYear"] == 1);
    CHECK(j["anomaly_counts"]["BadYear"] == 2);
}

TEST_CASE("audit exit 4 on the planted outlier, 0 above it") {
    TempDir out;
    auto dir = (fixture_dir() / "planted").string();
    auto r = run({"--cache-dir", dir, "--out", out.path().string(), "--format", "json", "audit"});
    CHECK(r.code == cli::kOutliersFound);
    CHECK(r.out.find("top episode: 1203478 2006 January 115032500000") != std::string::npos);
    CHECK(r.out.find("missing CropDamage: 62%") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "missing.csv"));

    auto high = run({"--cache-dir", dir, "--out", out.path().string(), "--outlier-threshold", "200000000000", "audit"});
    CHECK(high.code == cli::kSuccess);
}

TEST_CASE("audit input failures exit 2") {
    TempDir cache;
    TempDir out;
    CHECK(run({"--cache-dir", (cache / "nope").string(), "audit"}).code == cli::kEnvironment);
    CHECK(run({"--cache-dir", cache.path().string(), "audit"}).code == cli::kEnvironment); // empty cache
    write_file(cache / "StormEvents_details-ftp_v1.0_d1950_c20160223.csv", kHeader + "1,1950,May,TORNADO,1K,0K,x\n");
    CHECK(run({"--cache-dir", cache.path().string(), "--out", out.path().string(), "--years", "1950..1951", "audit"})
              .code == cli::kEnvironment);
    write_file(cache / "StormEvents_details-ftp_v1.0_d1951_c20160223.csv", "EPISODE_ID,YEAR\n1,1951\n");
    CHECK(run({"--cache-dir", cache.path().string(), "--out", out.path().string(), "audit"}).code == cli::kEnvironment);
    CHECK(run({"--cache-dir", cache.path().string(), "--catalog", (cache / "nocat.txt").string(), "audit"}).code ==
          cli::kEnvironment);
}

TEST_CASE("year range selects files by filename year") {
    TempDir cache;
    TempDir out;
    write_file(cache / "StormEvents_details-ftp_v1.0_d1950_c20160223.csv",
               kHeader + "1,1950,May,TORNADO,1K,0K,x\n2,1950,June,Tornado,,0K,x\n");
    write_file(cache / "StormEvents_details-ftp_v1.0_d1955_c20160223.csv", kHeader + "3,1955,May,HAIL,1K,0K,x\n");
    auto r = run({"--cache-dir", cache.path().string(), "--out", out.path().string(), "--years", "1950..1954",
                  "--format", "json", "audit"},
                 std::make_shared<Served>());
    CHECK(r.code == cli::kEnvironment); // 1951..1954 absent from the cache

    r = run({"--cache-dir", cache.path().string(), "--out", out.path().string(), "--years", "1950", "--format", "json",
             "audit"});
    REQUIRE(r.code == cli::kSuccess);
    auto j = nlohmann::json::parse(read_file(out / "report.json"));
    REQUIRE(j["frequencies"]["top"].size() == 1);
    CHECK(j["frequencies"]["top"][0]["event_type"] == "TORNADO");
}

TEST_CASE("cache dir from the environment") {
    TempDir out;
    auto r = run({"--out", out.path().string(), "--format", "json", "audit"}, std::make_shared<Served>(),
                 {{"STORM_AUDIT_CACHE", (fixture_dir() / "planted").string()}});
    CHECK(r.code == cli::kOutliersFound);
}

TEST_CASE("top") {
    auto dir = (fixture_dir() / "planted").string();
    auto r = run({"--cache-dir", dir, "top", "2"});
    REQUIRE(r.code == cli::kSuccess);
    std::istringstream lines(r.out);
    std::string header;
    std::string first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header.starts_with("EpisodeID"));
    CHECK(first.starts_with("1203478"));
    CHECK(first.ends_with("115032500000"));
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);

    auto csv = run({"--cache-dir", dir, "--format", "csv", "top", "1"});
    CHECK(csv.out == "EpisodeID,Year,Month,TotDamage\n1203478,2006,January,115032500000\n");

    auto defaulted = run({"--cache-dir", dir, "--top-n", "3", "--format", "csv", "top"});
    CHECK(std::count(defaulted.out.begin(), defaulted.out.end(), '\n') == 4);

    TempDir empty;
    write_file(empty / "StormEvents_details-ftp_v1.0_d1950_c20160223.csv", kHeader);
    auto none = run({"--cache-dir", empty.path().string(), "--format", "csv", "top", "5"});
    CHECK(none.code == cli::kSuccess);
    CHECK(none.out == "EpisodeID,Year,Month,TotDamage\n");

    CHECK(run({"--cache-dir", (empty / "nope").string(), "top", "5"}).code == cli::kEnvironment);
}

TEST_CASE("hist") {
    auto dir = (fixture_dir() / "planted").string();
    auto lower = run({"--cache-dir", dir, "hist", "thunderstorm wind"});
    auto upper = run({"--cache-dir", dir, "hist", "THUNDERSTORM  WIND"});
    REQUIRE(lower.code == cli::kSuccess);
    CHECK(lower.out == upper.out);
    auto j = nlohmann::json::parse(lower.out);
    CHECK(j["filter_event_type"] == "THUNDERSTORM WIND");
    CHECK(j["zero_count"] == 0);
    CHECK(j["present_count"] == 37);

    auto unknown = run({"--cache-dir", dir, "hist", "XYZZY"});
    CHECK(unknown.code == cli::kSuccess);
    CHECK(nlohmann::json::parse(unknown.out)["present_count"] == 0);

    TempDir out;
    auto svg = run({"--cache-dir", dir, "hist", "flood", "--kind", "property", "--svg", (out / "flood.svg").string()});
    CHECK(svg.code == cli::kSuccess);
    CHECK(read_file(out / "flood.svg").find("<svg") != std::string::npos);
    CHECK(run({"--cache-dir", dir, "hist", "flood", "--kind", "bogus"}).code == cli::kUsage);
}

TEST_CASE("worker count and repetition do not change any output byte") {
    auto corpus = (fixture_dir() / "corpus").string();
    std::vector<std::map<std::string, std::string>> outputs;
    for (const char* workers : {"1", "3", "1"}) {
        TempDir out;
        auto r = run({"--cache-dir", corpus, "--out", out.path().string(), "--workers", workers, "audit"});
        REQUIRE(r.code == cli::kSuccess);
        std::map<std::string, std::string> files;
        for (const auto& p : fs::directory_iterator(out.path())) files[p.path().filename().string()] = read_file(p);
        outputs.push_back(files);
    }
    CHECK(outputs[0].size() >= 11);
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);
}
