#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "storm_audit/anomaly.hpp"

/// Streaming reader for Storm Events detail CSV exports.
namespace storm_audit::csv {

/// Full export schema, in export order. The published field list has 51
/// names even though it is commonly described as 48 variables.
inline constexpr std::array<std::string_view, 51> kSchemaColumns{
    "BEGIN_YEARMONTH",    "BEGIN_DAY",         "BEGIN_TIME",        "END_YEARMONTH",   "END_DAY",
    "END_TIME",           "EPISODE_ID",        "EVENT_ID",          "STATE",           "STATE_FIPS",
    "YEAR",               "MONTH_NAME",        "EVENT_TYPE",        "CZ_TYPE",         "CZ_FIPS",
    "CZ_NAME",            "WFO",               "BEGIN_DATE_TIME",   "CZ_TIMEZONE",     "END_DATE_TIME",
    "INJURIES_DIRECT",    "INJURIES_INDIRECT", "DEATHS_DIRECT",     "DEATHS_INDIRECT", "DAMAGE_PROPERTY",
    "DAMAGE_CROPS",       "SOURCE",            "MAGNITUDE",         "MAGNITUDE_TYPE",  "FLOOD_CAUSE",
    "CATEGORY",           "TOR_F_SCALE",       "TOR_LENGTH",        "TOR_WIDTH",       "TOR_OTHER_WFO",
    "TOR_OTHER_CZ_STATE", "TOR_OTHER_CZ_FIPS", "TOR_OTHER_CZ_NAME", "BEGIN_RANGE",     "BEGIN_AZIMUTH",
    "BEGIN_LOCATION",     "END_RANGE",         "END_AZIMUTH",       "END_LOCATION",    "BEGIN_LAT",
    "BEGIN_LON",          "END_LAT",           "END_LON",           "EPISODE_NARRATIVE", "EVENT_NARRATIVE",
    "DATA_SOURCE",
};

/// The seven projected columns, in RawEventRecord field order.
inline constexpr std::array<std::string_view, 7> kRequiredColumns{
    "EPISODE_ID", "YEAR", "MONTH_NAME", "EVENT_TYPE", "DAMAGE_PROPERTY", "DAMAGE_CROPS", "EPISODE_NARRATIVE",
};

bool is_schema_column(std::string_view name);

/// One projected row, bytes as found in the file (after lossy UTF-8 repair).
/// Empty string means missing.
struct RawEventRecord {
    std::string episode_id;
    std::string year;
    std::string month;
    std::string event_type;
    std::string damage_property_raw;
    std::string damage_crops_raw;
    std::string narrative;

    friend bool operator==(const RawEventRecord&, const RawEventRecord&) = default;
};

struct SourceRow {
    std::uint64_t row_number{0}; // physical line where the record starts; header is line 1
    RawEventRecord record;
};

struct HeaderReport {
    std::vector<std::string> found_columns;
    std::vector<std::string> missing_required;
    std::vector<std::string> extra_columns;
    std::size_t column_count{0};

    bool ok() const { return missing_required.empty(); }
};

HeaderReport validate_header(std::span<const std::string> header_fields);

class UnreadableFile : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class HeaderMissingRequired : public std::runtime_error {
public:
    HeaderMissingRequired(const std::string& file, HeaderReport report);
    const HeaderReport& report() const { return report_; }

private:
    HeaderReport report_;
};

/// RFC-4180 record splitter over a byte stream: quoted fields may hold
/// commas, doubled quotes and line breaks. CRLF and LF both end a record.
/// Blank lines are skipped. Stray quotes inside unquoted fields are kept as
/// literal bytes.
class RecordTokenizer {
public:
    explicit RecordTokenizer(std::istream& in, std::size_t buffer_size = 1 << 16);

    /// Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    std::uint64_t record_line() const { return record_line_; }
    /// True when the last record hit end of input inside a quoted field.
    bool unterminated() const { return unterminated_; }

private:
    bool fill();

    std::istream& in_;
    std::vector<char> buffer_;
    std::size_t pos_{0};
    std::size_t len_{0};
    std::uint64_t lines_consumed_{0};
    std::uint64_t record_line_{0};
    bool pending_cr_{false};
    bool unterminated_{false};
};

enum class Compression { Plain, Gzip, Bzip2 };

Compression detect_compression(std::span<const unsigned char> magic);

/// Replaces invalid UTF-8 sequences with U+FFFD in place; returns the number
/// of replacements.
std::size_t repair_utf8(std::string& text);

/// Pull-style reader over one detail file. Construction opens the file,
/// sniffs compression and validates the header.
class EventStream {
public:
    explicit EventStream(const std::filesystem::path& path);
    EventStream(EventStream&&) noexcept;
    EventStream& operator=(EventStream&&) noexcept;
    ~EventStream();

    /// Next well-formed row, or nullopt at end of file. Malformed rows are
    /// skipped and recorded as anomalies.
    std::optional<SourceRow> next();

    const HeaderReport& header() const;
    const std::string& source_name() const;

    std::uint64_t data_rows() const;
    std::uint64_t skipped_rows() const;
    std::uint64_t encoding_replacements() const;

    /// Moves out anomalies gathered so far.
    std::vector<AnomalyRecord> take_anomalies();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

inline EventStream open_event_stream(const std::filesystem::path& path) { return EventStream(path); }

} // namespace storm_audit::csv
