#include "storm_audit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace storm_audit::report {

namespace fs = std::filesystem;

std::string ratio_string(std::uint64_t num, std::uint64_t den, int digits) {
    if (den == 0 || num == 0) return "0";
    using boost::multiprecision::cpp_int;
    cpp_int scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    cpp_int scaled = (cpp_int(num) * scale * 2 + den) / (cpp_int(den) * 2); // round half up
    return Decimal(scaled, -digits).to_string();
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

QualityReport build_report(ReportInputs in) {
    const auto population = in.missing.population;
    auto mismatch = [&](const std::string& what, std::uint64_t got) {
        throw PopulationMismatch(what + " computed over " + std::to_string(got) + " events, missing stats over " +
                                 std::to_string(population));
    };

    if (in.frequencies.population != population) mismatch("frequencies", in.frequencies.population);
    if (in.episodes.events_seen != population) mismatch("episode totals", in.episodes.events_seen);
    std::uint64_t named = in.frequencies.missing_event_type;
    for (const auto& y : in.year_names) named += y.total_event_count;
    if (named != population) mismatch("year name stats", named);
    for (const auto& d : in.distributions) {
        if (d.present_count > population) mismatch("a damage distribution", d.present_count);
    }
    if (in.ingest.data_rows != 0 &&
        in.ingest.data_rows - in.ingest.malformed_rows - in.ingest.bad_year_rows != population) {
        mismatch("ingest accounting", in.ingest.data_rows - in.ingest.malformed_rows - in.ingest.bad_year_rows);
    }

    QualityReport r;
    r.snapshot = std::move(in.snapshot);
    r.population = population;
    r.parameters = std::move(in.parameters);
    r.ingest = in.ingest;
    r.missing = in.missing;
    r.cumulative_names = audit::cumulative_distinct_names(in.year_names);
    r.year_names = std::move(in.year_names);
    r.frequencies = std::move(in.frequencies);
    r.distributions = std::move(in.distributions);
    r.episode_count = in.episodes.summaries.size();
    r.events_without_episode = in.episodes.events_without_episode;
    r.top_episodes = std::move(in.top_episodes);
    r.anomalies = std::move(in.anomalies);
    sort_anomalies(r.anomalies);
    return r;
}

std::string top_episodes_csv(std::span<const audit::EpisodeDamageSummary> rows) {
    std::string out = "EpisodeID,Year,Month,TotDamage\n";
    for (const auto& e : rows) {
        out += csv_field(e.episode_id) + ',' + std::to_string(e.year) + ',' + csv_field(e.month) + ',' +
               e.total_damage.to_string() + '\n';
    }
    return out;
}

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::string join_names(const std::set<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ';';
        out += n;
    }
    return out;
}

std::string missing_csv(const QualityReport& r) {
    std::string out = "Variable,MissingCount,Population,Fraction\n";
    if (r.missing.population == 0) return out;
    for (const auto& [name, count] : r.missing.entries()) {
        out += name + ',' + std::to_string(count) + ',' + std::to_string(r.missing.population) + ',' +
               ratio_string(count, r.missing.population) + '\n';
    }
    return out;
}

std::string year_names_csv(const QualityReport& r) {
    std::string out = "Year,DistinctNames,DistinctNonStandard,CumulativeDistinct,TotalEvents,NonStandardEvents,"
                      "NonStandardFraction,NonStandardNames,FirstSeenNonStandard\n";
    for (std::size_t i = 0; i < r.year_names.size(); ++i) {
        const auto& y = r.year_names[i];
        auto cumulative = i < r.cumulative_names.size() ? r.cumulative_names[i].cumulative_count : 0;
        out += std::to_string(y.year) + ',' + std::to_string(y.distinct_names.size()) + ',' +
               std::to_string(y.distinct_nonstandard.size()) + ',' + std::to_string(cumulative) + ',' +
               std::to_string(y.total_event_count) + ',' + std::to_string(y.nonstandard_event_count) + ',' +
               ratio_string(y.nonstandard_event_count, y.total_event_count) + ',' +
               csv_field(join_names(y.distinct_nonstandard)) + ',' + csv_field(join_names(y.first_seen_nonstandard)) +
               '\n';
    }
    return out;
}

std::string frequencies_csv(const QualityReport& r) {
    std::string out = "EventType,Count\n";
    for (const auto& f : r.frequencies.top) out += csv_field(f.event_type) + ',' + std::to_string(f.count) + '\n';
    return out;
}

std::string anomalies_csv(const QualityReport& r) {
    std::string out = "Kind,SourceFile,Row,EpisodeID,Detail\n";
    for (const auto& a : r.anomalies) {
        out += std::string(to_string(a.kind)) + ',' + csv_field(a.source_file) + ',' +
               (a.row_number ? std::to_string(*a.row_number) : "") + ',' + csv_field(a.episode_id.value_or("")) +
               ',' + csv_field(a.detail) + '\n';
    }
    return out;
}

std::string distributions_csv(const QualityReport& r) {
    std::string out = "Kind,Filter,Section,Key,Value,BinLower,BinUpper\n";
    for (const auto& d : r.distributions) {
        if (d.present_count == 0) continue; // nothing to tabulate
        const std::string prefix =
            std::string(audit::to_string(d.kind)) + ',' + csv_field(d.filter_event_type.value_or("")) + ',';
        out += prefix + "count,present," + std::to_string(d.present_count) + ",,\n";
        out += prefix + "count,zero," + std::to_string(d.zero_count) + ",,\n";
        out += prefix + "count,overflow," + std::to_string(d.overflow_count) + ",,\n";
        for (const auto& q : d.quantiles) out += prefix + "quantile," + q.probability + ',' + q.value.to_string() + ",,\n";
        for (std::size_t i = 0; i < d.histogram.size(); ++i) {
            const auto& b = d.histogram[i];
            out += prefix + "bin," + std::to_string(i) + ',' + std::to_string(b.count) + ',' + fixed(b.lower, 6) + ',' +
                   fixed(b.upper, 6) + '\n';
        }
    }
    return out;
}

/// Stages every file as ".<name>.tmp" then renames them all.
std::vector<fs::path> write_all(const fs::path& out_dir, const std::vector<std::pair<std::string, std::string>>& files) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir, ec)) throw IoFailure("output directory unavailable: " + out_dir.string());

    std::vector<fs::path> staged;
    auto discard = [&] {
        for (const auto& p : staged) fs::remove(p, ec);
    };
    for (const auto& [name, content] : files) {
        fs::path tmp = out_dir / ("." + name + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out) staged.push_back(tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            discard();
            throw IoFailure("cannot write " + (out_dir / name).string());
        }
    }

    std::vector<fs::path> written;
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::path target = out_dir / files[i].first;
        fs::rename(staged[i], target, ec);
        if (ec) {
            discard();
            for (const auto& p : written) fs::remove(p, ec);
            throw IoFailure("cannot rename into " + target.string());
        }
        written.push_back(target);
    }
    return written;
}

// ---- SVG ------------------------------------------------------------------

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Bar {
    std::string label;
    double value{0};
    std::string value_text;
};

struct ChartLayout {
    static constexpr double kLeft = 70;
    static constexpr double kTop = 40;
    static constexpr double kPlotWidth = 640;
    static constexpr double kPlotHeight = 300;
    static constexpr double kWidth = kLeft + kPlotWidth + 30;
    static constexpr double kHeight = kTop + kPlotHeight + 80;
};

double nice_max(double v) {
    if (v <= 0) return 1;
    double magnitude = std::pow(10.0, std::floor(std::log10(v)));
    for (double step : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (step * magnitude >= v) return step * magnitude;
    }
    return 10 * magnitude;
}

/// Plain bar chart. Bar height is value / y_max of the plot height.
std::string bar_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Bar>& bars, double y_max, const std::vector<double>& reference_lines) {
    using L = ChartLayout;
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fixed(L::kWidth, 0) << "\" height=\""
      << fixed(L::kHeight, 0) << "\" data-y-max=\"" << fixed(y_max, 6) << "\" data-plot-height=\""
      << fixed(L::kPlotHeight, 0) << "\">\n"
      << "  <title>" << xml_escape(title) << "</title>\n"
      << "  <rect x=\"0\" y=\"0\" width=\"" << fixed(L::kWidth, 0) << "\" height=\"" << fixed(L::kHeight, 0)
      << "\" fill=\"white\"/>\n"
      << "  <text x=\"" << fixed(L::kWidth / 2, 1) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\" "
      << "font-weight=\"bold\">" << xml_escape(title) << "</text>\n";

    const double base = L::kTop + L::kPlotHeight;
    s << "  <line class=\"axis\" x1=\"" << fixed(L::kLeft, 1) << "\" y1=\"" << fixed(base, 1) << "\" x2=\""
      << fixed(L::kLeft + L::kPlotWidth, 1) << "\" y2=\"" << fixed(base, 1) << "\" stroke=\"black\"/>\n"
      << "  <line class=\"axis\" x1=\"" << fixed(L::kLeft, 1) << "\" y1=\"" << fixed(L::kTop, 1) << "\" x2=\""
      << fixed(L::kLeft, 1) << "\" y2=\"" << fixed(base, 1) << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        double v = y_max * i / 4.0;
        double y = base - L::kPlotHeight * i / 4.0;
        s << "  <text class=\"tick\" x=\"" << fixed(L::kLeft - 6, 1) << "\" y=\"" << fixed(y + 4, 1)
          << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(v, 4) << "</text>\n";
    }

    if (!bars.empty()) {
        const double slot = L::kPlotWidth / static_cast<double>(bars.size());
        const double width = slot * 0.8;
        for (std::size_t i = 0; i < bars.size(); ++i) {
            const auto& b = bars[i];
            double h = y_max > 0 ? L::kPlotHeight * std::clamp(b.value / y_max, 0.0, 1.0) : 0;
            double x = L::kLeft + slot * static_cast<double>(i) + (slot - width) / 2;
            s << "  <rect class=\"bar\" data-label=\"" << xml_escape(b.label) << "\" data-value=\""
              << xml_escape(b.value_text) << "\" x=\"" << fixed(x, 3) << "\" y=\"" << fixed(base - h, 3)
              << "\" width=\"" << fixed(width, 3) << "\" height=\"" << fixed(h, 3)
              << "\" fill=\"dodgerblue\" stroke=\"black\"/>\n";
            s << "  <text class=\"label\" x=\"" << fixed(x + width / 2, 3) << "\" y=\"" << fixed(base + 12, 1)
              << "\" text-anchor=\"end\" font-size=\"8\" transform=\"rotate(-45 " << fixed(x + width / 2, 3) << ' '
              << fixed(base + 12, 1) << ")\">" << xml_escape(b.label) << "</text>\n";
        }
    }

    for (double ref : reference_lines) {
        double y = base - L::kPlotHeight * std::clamp(ref / y_max, 0.0, 1.0);
        s << "  <line class=\"refline\" data-value=\"" << fixed(ref, 6) << "\" x1=\"" << fixed(L::kLeft, 1)
          << "\" y1=\"" << fixed(y, 3) << "\" x2=\"" << fixed(L::kLeft + L::kPlotWidth, 1) << "\" y2=\""
          << fixed(y, 3) << "\" stroke=\"black\"/>\n";
    }

    s << "  <text x=\"" << fixed(L::kLeft + L::kPlotWidth / 2, 1) << "\" y=\"" << fixed(L::kHeight - 8, 1)
      << "\" text-anchor=\"middle\" font-size=\"11\">" << xml_escape(x_label) << "</text>\n"
      << "  <text x=\"14\" y=\"" << fixed(L::kTop + L::kPlotHeight / 2, 1)
      << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 "
      << fixed(L::kTop + L::kPlotHeight / 2, 1) << ")\">" << xml_escape(y_label) << "</text>\n"
      << "</svg>\n";
    return s.str();
}

std::string nonstandard_per_year_svg(const QualityReport& r) {
    std::vector<Bar> bars;
    double top = 0;
    for (const auto& y : r.year_names) {
        auto n = static_cast<double>(y.distinct_nonstandard.size());
        bars.push_back(Bar{std::to_string(y.year), n, std::to_string(y.distinct_nonstandard.size())});
        top = std::max(top, n);
    }
    return bar_chart_svg("Non-standard event names per year", "Year", "Yearly totals", bars, nice_max(top), {});
}

std::string cumulative_names_svg(const QualityReport& r) {
    std::vector<Bar> bars;
    double top = 55;
    for (const auto& c : r.cumulative_names) {
        auto n = static_cast<double>(c.cumulative_count);
        bars.push_back(Bar{std::to_string(c.year), n, std::to_string(c.cumulative_count)});
        top = std::max(top, n);
    }
    return bar_chart_svg("Distinct event names (cumulative)", "Year", "Cumulative totals", bars, nice_max(top),
                         {48, 55});
}

std::string nonstandard_fraction_svg(const QualityReport& r) {
    std::vector<Bar> bars;
    double top = 0;
    for (const auto& y : r.year_names) {
        double f = y.nonstandard_fraction();
        bars.push_back(Bar{std::to_string(y.year), f, ratio_string(y.nonstandard_event_count, y.total_event_count)});
        top = std::max(top, f);
    }
    return bar_chart_svg("Share of events with non-standard names", "Year", "Fraction", bars, nice_max(top), {});
}

std::string missing_values_svg(const QualityReport& r) {
    auto entries = r.missing.entries();
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<Bar> bars;
    for (const auto& [name, count] : entries) {
        bars.push_back(
            Bar{name, audit::fraction(count, r.missing.population), ratio_string(count, r.missing.population)});
    }
    return bar_chart_svg("Missing values per variable", "Variable", "Missing fraction", bars, 1.0, {});
}

std::string distribution_file_stem(const audit::DamageDistribution& d) {
    std::string stem = "histogram_" + std::string(audit::to_string(d.kind));
    if (d.filter_event_type) {
        stem += '_';
        for (char c : *d.filter_event_type) {
            bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
            stem += keep ? c : '_';
        }
    }
    std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
    return stem;
}

} // namespace

std::string histogram_svg(const audit::DamageDistribution& d, const std::string& title) {
    std::vector<Bar> bars;
    double top = 0;
    for (const auto& b : d.histogram) {
        auto n = static_cast<double>(b.count);
        bars.push_back(Bar{fixed(b.lower, 3), n, std::to_string(b.count)});
        top = std::max(top, n);
    }
    return bar_chart_svg(title, "log10(1 + damage/" + d.spec.scale.to_string() + ")", "Count", bars, nice_max(top), {});
}

std::vector<fs::path> emit_csv_tables(const QualityReport& report, const fs::path& out_dir) {
    return write_all(out_dir, {
                                  {"missing.csv", missing_csv(report)},
                                  {"year_names.csv", year_names_csv(report)},
                                  {"frequencies.csv", frequencies_csv(report)},
                                  {"top_episodes.csv", top_episodes_csv(report.top_episodes)},
                                  {"anomalies.csv", anomalies_csv(report)},
                                  {"distributions.csv", distributions_csv(report)},
                              });
}

std::vector<fs::path> emit_figures(const QualityReport& report, const fs::path& out_dir) {
    std::vector<std::pair<std::string, std::string>> files{
        {"nonstandard_names_per_year.svg", nonstandard_per_year_svg(report)},
        {"cumulative_names.svg", cumulative_names_svg(report)},
        {"nonstandard_fraction.svg", nonstandard_fraction_svg(report)},
        {"missing_values.svg", missing_values_svg(report)},
    };
    for (const auto& d : report.distributions) {
        std::string title = std::string(audit::to_string(d.kind)) + " damage distribution";
        if (d.filter_event_type) title += " for " + *d.filter_event_type;
        files.emplace_back(distribution_file_stem(d) + ".svg", histogram_svg(d, title));
    }
    return write_all(out_dir, files);
}

} // namespace storm_audit::report
