#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "storm_audit/anomaly.hpp"
#include "storm_audit/decimal.hpp"
#include "storm_audit/storm_csv.hpp"

/// Damage decoding, event-type canonicalization and record assembly.
namespace storm_audit::normalize {

enum class DamageFlag : std::uint8_t {
    Missing = 1U << 0U,
    BareMagnitude = 1U << 1U,
    DigitMagnitudeSuspect = 1U << 2U,
    UnknownMagnitude = 1U << 3U,
    UnparseableMantissa = 1U << 4U,
};

/// Small bit set of DamageFlag values.
class DamageFlags {
public:
    constexpr DamageFlags() = default;
    constexpr DamageFlags(DamageFlag f) : bits_(static_cast<std::uint8_t>(f)) {} // NOLINT

    constexpr bool has(DamageFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr DamageFlags& operator|=(DamageFlags other) {
        bits_ |= other.bits_;
        return *this;
    }
    friend constexpr DamageFlags operator|(DamageFlags a, DamageFlags b) { return a |= b; }
    friend constexpr bool operator==(DamageFlags, DamageFlags) = default;

    constexpr std::uint8_t bits() const { return bits_; }

private:
    std::uint8_t bits_{0};
};

std::vector<std::string_view> flag_names(DamageFlags flags);

struct DamageParseResult {
    std::optional<Decimal> value_usd;
    DamageFlags flags;
};

/// Power of ten for a magnitude code, or nullopt when the code is unknown.
/// Digits d map to 10^d; H/h, K/k, M/m, B/b to 10^2, 10^3, 10^6, 10^9.
std::optional<int> magnitude_exponent(char code);

/// Decodes a DAMAGE_PROPERTY / DAMAGE_CROPS field such as "1.55B".
///
/// The last character is the magnitude code and everything before it is a
/// non-negative plain decimal mantissa. Surrounding whitespace is ignored.
/// A lone digit ("0") decodes to 0 with BareMagnitude; a lone letter code
/// has no mantissa and is UnparseableMantissa. Failures never throw, they
/// leave value_usd empty and set a flag.
DamageParseResult parse_damage(std::string_view raw);

/// ASCII uppercase, trimmed, inner whitespace runs collapsed to one space.
std::string canonicalize_event_type(std::string_view raw);

class CatalogError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Authoritative list of event-type names (uppercase, insertion ordered).
class CanonicalCatalog {
public:
    CanonicalCatalog(std::vector<std::string> names, std::string source_label);

    /// The 55 names of the current directive.
    static const CanonicalCatalog& directive55();
    /// The 48 names in use before the seven marine/sneaker-wave additions.
    static const CanonicalCatalog& legacy48();

    /// One name per line, '#' starts a comment, names are canonicalized.
    static CanonicalCatalog from_file(const std::filesystem::path& path);
    static CanonicalCatalog from_text(std::string_view text, std::string source_label);

    /// "directive-55", "legacy-48", or a path to a catalog file.
    static CanonicalCatalog resolve(const std::string& label_or_path);

    const std::vector<std::string>& names() const { return names_; }
    const std::string& source_label() const { return source_label_; }
    bool contains(std::string_view name) const;
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::set<std::string, std::less<>> lookup_;
    std::string source_label_;
};

enum class EventClass { Standard, NonStandard };

EventClass classify_event_type(std::string_view canonical_name, const CanonicalCatalog& catalog);

struct NormalizedEvent {
    std::optional<std::string> episode_id;
    int year{0};
    std::string month;
    std::string event_type; // canonical; empty when the source field was empty
    bool is_standard{false};
    std::optional<Decimal> property_damage;
    std::optional<Decimal> crop_damage;
    std::optional<Decimal> total_damage;
    DamageFlags flags;

    friend bool operator==(const NormalizedEvent&, const NormalizedEvent&) = default;
};

enum class TotalPolicy {
    MissingPropagates, // total absent unless both sides are present
    MissingAsZero,     // absent sides count as 0
};

struct RecordContext {
    std::string source_file;
    std::uint64_t row_number{0};
};

struct NormalizeOutcome {
    std::optional<NormalizedEvent> event; // empty when the record was rejected
    std::vector<AnomalyRecord> anomalies;
};

/// Builds a NormalizedEvent. A YEAR that does not parse as an integer drops
/// the record with a BadYear anomaly; damage flags become per-row anomalies.
NormalizeOutcome normalize_record(const csv::RawEventRecord& raw, const CanonicalCatalog& catalog,
                                  const RecordContext& context = {},
                                  TotalPolicy policy = TotalPolicy::MissingPropagates);

} // namespace storm_audit::normalize
