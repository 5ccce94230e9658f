#include "storm_audit/storm_csv.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>

namespace storm_audit::csv {

namespace io = boost::iostreams;

bool is_schema_column(std::string_view name) {
    return std::find(kSchemaColumns.begin(), kSchemaColumns.end(), name) != kSchemaColumns.end();
}

HeaderReport validate_header(std::span<const std::string> header_fields) {
    HeaderReport report;
    report.found_columns.assign(header_fields.begin(), header_fields.end());
    report.column_count = header_fields.size();

    std::set<std::string_view> present(header_fields.begin(), header_fields.end());
    for (auto required : kRequiredColumns) {
        if (!present.contains(required)) report.missing_required.emplace_back(required);
    }
    for (const auto& name : header_fields) {
        if (!is_schema_column(name)) report.extra_columns.push_back(name);
    }
    return report;
}

namespace {

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

} // namespace

HeaderMissingRequired::HeaderMissingRequired(const std::string& file, HeaderReport report)
    : std::runtime_error(file + ": header lacks required column(s): " + join(report.missing_required)),
      report_(std::move(report)) {}

RecordTokenizer::RecordTokenizer(std::istream& in, std::size_t buffer_size) : in_(in), buffer_(buffer_size) {}

bool RecordTokenizer::fill() {
    in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    len_ = static_cast<std::size_t>(in_.gcount());
    pos_ = 0;
    return len_ > 0;
}

bool RecordTokenizer::next(std::vector<std::string>& fields) {
    enum class State { FieldStart, Unquoted, Quoted, QuoteInQuoted };

    std::size_t used = 0;
    auto field = [&]() -> std::string& {
        if (fields.size() <= used) fields.emplace_back();
        return fields[used];
    };
    auto finish_field = [&] { ++used; };

    State state = State::FieldStart;
    bool record_started = false;
    unterminated_ = false;
    if (!fields.empty()) fields.front().clear();

    while (true) {
        if (pos_ == len_ && !fill()) {
            if (!record_started) {
                fields.clear();
                return false;
            }
            unterminated_ = state == State::Quoted;
            finish_field();
            fields.resize(used);
            return true;
        }

        char c = buffer_[pos_++];

        if (pending_cr_) {
            pending_cr_ = false;
            if (c == '\n') {
                ++lines_consumed_;
                continue;
            }
        }

        if (!record_started) {
            if (c == '\n') {
                ++lines_consumed_;
                continue;
            }
            if (c == '\r') {
                pending_cr_ = true;
                continue;
            }
            record_started = true;
            record_line_ = lines_consumed_ + 1;
            field().clear();
        }

        switch (state) {
        case State::Quoted:
            if (c == '"') {
                state = State::QuoteInQuoted;
            } else {
                if (c == '\n') ++lines_consumed_;
                field().push_back(c);
            }
            continue;
        case State::FieldStart:
            if (c == '"') {
                state = State::Quoted;
                continue;
            }
            break;
        case State::QuoteInQuoted:
            if (c == '"') {
                field().push_back('"');
                state = State::Quoted;
                continue;
            }
            break;
        case State::Unquoted:
            break;
        }

        // FieldStart, Unquoted and QuoteInQuoted share delimiter handling.
        if (c == ',') {
            finish_field();
            field().clear();
            state = State::FieldStart;
        } else if (c == '\n' || c == '\r') {
            if (c == '\n') {
                ++lines_consumed_;
            } else {
                pending_cr_ = true;
            }
            finish_field();
            fields.resize(used);
            return true;
        } else {
            field().push_back(c);
            state = State::Unquoted;
        }
    }
}

Compression detect_compression(std::span<const unsigned char> magic) {
    if (magic.size() >= 2 && magic[0] == 0x1F && magic[1] == 0x8B) return Compression::Gzip;
    if (magic.size() >= 3 && magic[0] == 'B' && magic[1] == 'Z' && magic[2] == 'h') return Compression::Bzip2;
    return Compression::Plain;
}

std::size_t repair_utf8(std::string& text) {
    if (std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; })) {
        return 0;
    }
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

    std::string out;
    out.reserve(text.size() + 8);
    std::size_t replacements = 0;
    const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char b = bytes[i];
        if (b < 0x80) {
            out.push_back(static_cast<char>(b));
            ++i;
            continue;
        }
        std::size_t need = 0;
        unsigned char lo = 0x80;
        unsigned char hi = 0xBF;
        if (b >= 0xC2 && b <= 0xDF) {
            need = 1;
        } else if (b >= 0xE0 && b <= 0xEF) {
            need = 2;
            if (b == 0xE0) lo = 0xA0;
            if (b == 0xED) hi = 0x9F;
        } else if (b >= 0xF0 && b <= 0xF4) {
            need = 3;
            if (b == 0xF0) lo = 0x90;
            if (b == 0xF4) hi = 0x8F;
        } else {
            out += kReplacement;
            ++replacements;
            ++i;
            continue;
        }
        // maximal subpart: consume the valid prefix, replace it once
        std::size_t j = 1;
        bool valid = true;
        for (; j <= need; ++j) {
            if (i + j >= n) {
                valid = false;
                break;
            }
            unsigned char cb = bytes[i + j];
            unsigned char l = j == 1 ? lo : 0x80;
            unsigned char h = j == 1 ? hi : 0xBF;
            if (cb < l || cb > h) {
                valid = false;
                break;
            }
        }
        if (valid) {
            out.append(text, i, need + 1);
            i += need + 1;
        } else {
            out += kReplacement;
            ++replacements;
            i += j;
        }
    }
    text = std::move(out);
    return replacements;
}

struct EventStream::Impl {
    std::string source_name;
    std::ifstream file;
    io::filtering_istream in;
    std::unique_ptr<RecordTokenizer> tokenizer;
    HeaderReport header;
    std::array<std::size_t, kRequiredColumns.size()> column_index{};
    std::vector<std::string> fields;
    std::vector<AnomalyRecord> anomalies;
    std::uint64_t data_rows = 0;
    std::uint64_t skipped_rows = 0;
    std::uint64_t replacements = 0;

    bool read(std::vector<std::string>& out) {
        try {
            return tokenizer->next(out);
        } catch (const std::exception& e) {
            throw UnreadableFile(source_name + ": " + e.what());
        }
    }
};

EventStream::EventStream(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
    auto& s = *impl_;
    s.source_name = path.filename().string();
    s.file.open(path, std::ios::binary);
    if (!s.file) throw UnreadableFile("cannot open " + path.string());

    std::array<unsigned char, 3> magic{};
    s.file.read(reinterpret_cast<char*>(magic.data()), magic.size());
    auto got = static_cast<std::size_t>(s.file.gcount());
    s.file.clear();
    s.file.seekg(0);

    switch (detect_compression(std::span(magic.data(), got))) {
    case Compression::Gzip:
        s.in.push(io::gzip_decompressor());
        break;
    case Compression::Bzip2:
        s.in.push(io::bzip2_decompressor());
        break;
    case Compression::Plain:
        break;
    }
    s.in.push(s.file);
    s.in.exceptions(std::ios::badbit);
    s.tokenizer = std::make_unique<RecordTokenizer>(s.in);

    std::vector<std::string> header_fields;
    if (!s.read(header_fields)) throw UnreadableFile(s.source_name + ": empty file, no header");
    if (!header_fields.empty() && header_fields.front().starts_with("\xEF\xBB\xBF")) {
        header_fields.front().erase(0, 3);
    }
    s.header = validate_header(header_fields);
    if (!s.header.ok()) throw HeaderMissingRequired(s.source_name, s.header);

    for (std::size_t k = 0; k < kRequiredColumns.size(); ++k) {
        auto it = std::find(header_fields.begin(), header_fields.end(), kRequiredColumns[k]);
        s.column_index[k] = static_cast<std::size_t>(it - header_fields.begin());
    }
    if (!s.header.extra_columns.empty()) {
        s.anomalies.push_back(AnomalyRecord{AnomalyKind::HeaderIssue, s.source_name, 1,
                                            "unexpected column(s): " + join(s.header.extra_columns), std::nullopt});
    }
    std::set<std::string> seen;
    for (const auto& name : header_fields) {
        if (!seen.insert(name).second) {
            s.anomalies.push_back(AnomalyRecord{AnomalyKind::HeaderIssue, s.source_name, 1,
                                                "duplicate column " + name + "; first occurrence used",
                                                std::nullopt});
        }
    }
}

EventStream::EventStream(EventStream&&) noexcept = default;
EventStream& EventStream::operator=(EventStream&&) noexcept = default;
EventStream::~EventStream() = default;

std::optional<SourceRow> EventStream::next() {
    auto& s = *impl_;
    while (s.read(s.fields)) {
        ++s.data_rows;
        const auto row = s.tokenizer->record_line();
        if (s.tokenizer->unterminated()) {
            ++s.skipped_rows;
            s.anomalies.push_back(AnomalyRecord{AnomalyKind::MalformedRow, s.source_name, row,
                                                "quoted field not terminated before end of file", std::nullopt});
            continue;
        }
        if (s.fields.size() != s.header.column_count) {
            ++s.skipped_rows;
            s.anomalies.push_back(AnomalyRecord{AnomalyKind::MalformedRow, s.source_name, row,
                                                "expected " + std::to_string(s.header.column_count) +
                                                    " fields, found " + std::to_string(s.fields.size()),
                                                std::nullopt});
            continue;
        }

        SourceRow out;
        out.row_number = row;
        auto& r = out.record;
        std::array<std::string*, kRequiredColumns.size()> targets{
            &r.episode_id, &r.year, &r.month, &r.event_type, &r.damage_property_raw, &r.damage_crops_raw,
            &r.narrative};
        std::size_t repaired = 0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            *targets[k] = std::move(s.fields[s.column_index[k]]);
            repaired += repair_utf8(*targets[k]);
        }
        if (repaired > 0) {
            s.replacements += repaired;
            s.anomalies.push_back(AnomalyRecord{AnomalyKind::EncodingReplacement, s.source_name, row,
                                                std::to_string(repaired) + " invalid UTF-8 sequence(s) replaced",
                                                r.episode_id.empty() ? std::nullopt
                                                                     : std::optional<std::string>(r.episode_id)});
        }
        return out;
    }
    return std::nullopt;
}

const HeaderReport& EventStream::header() const { return impl_->header; }
const std::string& EventStream::source_name() const { return impl_->source_name; }
std::uint64_t EventStream::data_rows() const { return impl_->data_rows; }
std::uint64_t EventStream::skipped_rows() const { return impl_->skipped_rows; }
std::uint64_t EventStream::encoding_replacements() const { return impl_->replacements; }

std::vector<AnomalyRecord> EventStream::take_anomalies() {
    std::vector<AnomalyRecord> out;
    out.swap(impl_->anomalies);
    return out;
}

} // namespace storm_audit::csv
