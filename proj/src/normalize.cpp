#include "storm_audit/normalize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace storm_audit::normalize {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

const std::vector<std::string>& directive_names() {
    static const std::vector<std::string> names = [] {
        const std::vector<std::string_view> mixed_case{
            "Astronomical Low Tide", "Avalanche", "Blizzard", "Coastal Flood", "Cold/Wind Chill", "Debris Flow",
            "Dense Fog", "Dense Smoke", "Drought", "Dust Devil", "Dust Storm", "Excessive Heat",
            "Extreme Cold/Wind Chill", "Flash Flood", "Flood", "Frost/Freeze", "Funnel Cloud", "Freezing Fog",
            "Hail", "Heat", "Heavy Rain", "Heavy Snow", "High Surf", "High Wind", "Hurricane (Typhoon)",
            "Ice Storm", "Lake-Effect Snow", "Lakeshore Flood", "Lightning", "Marine Dense Fog", "Marine Hail",
            "Marine Heavy Freezing Spray", "Marine High Wind", "Marine Hurricane/Typhoon", "Marine Lightning",
            "Marine Strong Wind", "Marine Thunderstorm Wind", "Marine Tropical Depression",
            "Marine Tropical Storm", "Rip Current", "Seiche", "Sleet", "Sneaker Wave", "Storm Surge/Tide",
            "Strong Wind", "Thunderstorm Wind", "Tornado", "Tropical Depression", "Tropical Storm", "Tsunami",
            "Volcanic Ash", "Waterspout", "Wildfire", "Winter Storm", "Winter Weather"};
        std::vector<std::string> out;
        out.reserve(mixed_case.size());
        for (auto n : mixed_case) out.push_back(canonicalize_event_type(n));
        return out;
    }();
    return names;
}

// Introduced by the current directive; absent from the 48-name list.
constexpr std::array<std::string_view, 7> kDirectiveAdditions{
    "MARINE DENSE FOG",           "MARINE HEAVY FREEZING SPRAY", "MARINE HURRICANE/TYPHOON", "MARINE LIGHTNING",
    "MARINE TROPICAL DEPRESSION", "MARINE TROPICAL STORM",       "SNEAKER WAVE"};

} // namespace

std::vector<std::string_view> flag_names(DamageFlags flags) {
    std::vector<std::string_view> out;
    if (flags.has(DamageFlag::Missing)) out.emplace_back("MISSING");
    if (flags.has(DamageFlag::BareMagnitude)) out.emplace_back("BARE_MAGNITUDE");
    if (flags.has(DamageFlag::DigitMagnitudeSuspect)) out.emplace_back("DIGIT_MAGNITUDE_SUSPECT");
    if (flags.has(DamageFlag::UnknownMagnitude)) out.emplace_back("UNKNOWN_MAGNITUDE");
    if (flags.has(DamageFlag::UnparseableMantissa)) out.emplace_back("UNPARSEABLE_MANTISSA");
    return out;
}

std::optional<int> magnitude_exponent(char code) {
    if (code >= '0' && code <= '9') return code - '0';
    switch (code) {
    case 'H':
    case 'h':
        return 2;
    case 'K':
    case 'k':
        return 3;
    case 'M':
    case 'm':
        return 6;
    case 'B':
    case 'b':
        return 9;
    default:
        return std::nullopt;
    }
}

DamageParseResult parse_damage(std::string_view raw) {
    raw = trim(raw);
    if (raw.empty()) return {std::nullopt, DamageFlag::Missing};

    const char code = raw.back();
    const std::string_view mantissa = raw.substr(0, raw.size() - 1);
    const auto exponent = magnitude_exponent(code);
    if (!exponent) return {std::nullopt, DamageFlag::UnknownMagnitude};

    const bool digit_code = code >= '0' && code <= '9';
    if (mantissa.empty()) {
        if (digit_code) return {Decimal(0), DamageFlag::BareMagnitude};
        return {std::nullopt, DamageFlag::UnparseableMantissa};
    }

    auto value = Decimal::parse(mantissa);
    if (!value || value->is_negative() || mantissa.front() == '-') {
        return {std::nullopt, DamageFlag::UnparseableMantissa};
    }
    DamageParseResult result{value->scaled_by_pow10(*exponent), {}};
    if (digit_code) result.flags |= DamageFlag::DigitMagnitudeSuspect;
    return result;
}

std::string canonicalize_event_type(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : trim(raw)) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
    }
    return out;
}

CanonicalCatalog::CanonicalCatalog(std::vector<std::string> names, std::string source_label)
    : source_label_(std::move(source_label)) {
    for (auto& n : names) {
        auto canonical = canonicalize_event_type(n);
        if (canonical.empty()) continue;
        if (lookup_.insert(canonical).second) names_.push_back(std::move(canonical));
    }
}

const CanonicalCatalog& CanonicalCatalog::directive55() {
    static const CanonicalCatalog catalog(directive_names(), "directive-55");
    return catalog;
}

const CanonicalCatalog& CanonicalCatalog::legacy48() {
    static const CanonicalCatalog catalog = [] {
        std::vector<std::string> names;
        for (const auto& n : directive_names()) {
            if (std::find(kDirectiveAdditions.begin(), kDirectiveAdditions.end(), n) == kDirectiveAdditions.end()) {
                names.push_back(n);
            }
        }
        return CanonicalCatalog(std::move(names), "legacy-48");
    }();
    return catalog;
}

CanonicalCatalog CanonicalCatalog::from_text(std::string_view text, std::string source_label) {
    std::vector<std::string> names;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        auto line = text.substr(pos, eol - pos);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) names.emplace_back(line);
        pos = eol + 1;
    }
    return CanonicalCatalog(std::move(names), std::move(source_label));
}

CanonicalCatalog CanonicalCatalog::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CatalogError("cannot read catalog file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto catalog = from_text(buffer.str(), path.string());
    if (catalog.size() == 0) throw CatalogError("catalog file has no names: " + path.string());
    return catalog;
}

CanonicalCatalog CanonicalCatalog::resolve(const std::string& label_or_path) {
    if (label_or_path == "directive-55") return directive55();
    if (label_or_path == "legacy-48") return legacy48();
    return from_file(label_or_path);
}

bool CanonicalCatalog::contains(std::string_view name) const { return lookup_.find(name) != lookup_.end(); }

EventClass classify_event_type(std::string_view canonical_name, const CanonicalCatalog& catalog) {
    return catalog.contains(canonical_name) ? EventClass::Standard : EventClass::NonStandard;
}

namespace {

void damage_anomalies(std::string_view column, std::string_view raw, const DamageParseResult& parsed,
                      const RecordContext& context, const std::optional<std::string>& episode,
                      std::vector<AnomalyRecord>& out) {
    auto add = [&](AnomalyKind kind, std::string detail) {
        out.push_back(AnomalyRecord{kind, context.source_file, context.row_number,
                                    std::string(column) + "=\"" + std::string(raw) + "\" " + detail, episode});
    };
    const auto& f = parsed.flags;
    if (f.has(DamageFlag::UnknownMagnitude)) add(AnomalyKind::UnknownMagnitude, "has an unknown magnitude code");
    if (f.has(DamageFlag::UnparseableMantissa)) add(AnomalyKind::UnparseableMantissa, "has no usable mantissa");
    if (f.has(DamageFlag::BareMagnitude)) add(AnomalyKind::BareMagnitude, "is a bare magnitude digit, read as 0");
    if (f.has(DamageFlag::DigitMagnitudeSuspect)) {
        add(AnomalyKind::DigitMagnitude, "uses a digit magnitude code, read as " + parsed.value_usd->to_string());
    }
}

} // namespace

NormalizeOutcome normalize_record(const csv::RawEventRecord& raw, const CanonicalCatalog& catalog,
                                  const RecordContext& context, TotalPolicy policy) {
    NormalizeOutcome outcome;
    std::optional<std::string> episode;
    if (!raw.episode_id.empty()) episode = raw.episode_id;

    auto year_text = trim(raw.year);
    int year = 0;
    auto [end, ec] = std::from_chars(year_text.data(), year_text.data() + year_text.size(), year);
    if (year_text.empty() || ec != std::errc() || end != year_text.data() + year_text.size()) {
        outcome.anomalies.push_back(AnomalyRecord{AnomalyKind::BadYear, context.source_file, context.row_number,
                                                  "YEAR=\"" + raw.year + "\" is not an integer; record dropped",
                                                  episode});
        return outcome;
    }

    NormalizedEvent ev;
    ev.episode_id = episode;
    ev.year = year;
    ev.month = raw.month;
    ev.event_type = canonicalize_event_type(raw.event_type);
    ev.is_standard = !ev.event_type.empty() &&
                     classify_event_type(ev.event_type, catalog) == EventClass::Standard;

    auto property = parse_damage(raw.damage_property_raw);
    auto crops = parse_damage(raw.damage_crops_raw);
    damage_anomalies("DAMAGE_PROPERTY", raw.damage_property_raw, property, context, episode, outcome.anomalies);
    damage_anomalies("DAMAGE_CROPS", raw.damage_crops_raw, crops, context, episode, outcome.anomalies);

    ev.property_damage = property.value_usd;
    ev.crop_damage = crops.value_usd;
    ev.flags = property.flags | crops.flags;
    if (ev.property_damage && ev.crop_damage) {
        ev.total_damage = *ev.property_damage + *ev.crop_damage;
    } else if (policy == TotalPolicy::MissingAsZero) {
        ev.total_damage = ev.property_damage.value_or(Decimal(0)) + ev.crop_damage.value_or(Decimal(0));
    }
    outcome.event = std::move(ev);
    return outcome;
}

} // namespace storm_audit::normalize
