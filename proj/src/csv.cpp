#include "corrtext/csv.hpp"

#include "corrtext/errors.hpp"

#include <charconv>
#include <cmath>

namespace corrtext {

CsvReader::CsvReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open '" + path.string() + "' for reading");
}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    record_line_ = line_;

    std::string field;
    bool quoted = false;
    bool any = false;
    for (;;) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            any = true;
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\r' && i + 1 == line.size()) {
                // CRLF line ending
            } else {
                field.push_back(c);
            }
        }
        if (!quoted) break;
        // Embedded newline inside a quoted field.
        if (!std::getline(in_, line)) break;
        ++line_;
        field.push_back('\n');
    }
    if (any || !fields.empty()) fields.push_back(std::move(field));
    return true;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
}

CsvWriter& CsvWriter::field(std::string_view value) {
    if (!first_) out_.put(',');
    first_ = false;
    const bool needs_quotes = value.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) {
        out_ << value;
        return *this;
    }
    out_.put('"');
    for (char c : value) {
        if (c == '"') out_.put('"');
        out_.put(c);
    }
    out_.put('"');
    return *this;
}

CsvWriter& CsvWriter::field(double value) {
    if (std::isnan(value)) return empty();
    return field(format_double(value));
}

CsvWriter& CsvWriter::field(long long value) { return field(std::to_string(value)); }

CsvWriter& CsvWriter::empty() { return field(std::string_view{}); }

void CsvWriter::end_row() {
    out_.put('\n');
    first_ = true;
    if (!out_) throw IoError("write failed");
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
    for (auto n : names) field(n);
    end_row();
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(n);
    end_row();
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<long long> parse_integer(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    return value;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char delimiter) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(delimiter, start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

CsvHeader::CsvHeader(const std::vector<std::string>& fields) {
    names_.reserve(fields.size());
    for (const auto& f : fields) {
        std::string n = trim(f);
        // Strip a UTF-8 byte order mark on the first column.
        if (n.size() >= 3 && static_cast<unsigned char>(n[0]) == 0xEF &&
            static_cast<unsigned char>(n[1]) == 0xBB && static_cast<unsigned char>(n[2]) == 0xBF) {
            n.erase(0, 3);
        }
        names_.push_back(std::move(n));
    }
}

std::optional<std::size_t> CsvHeader::find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t CsvHeader::require(std::string_view name, const std::filesystem::path& path) const {
    auto idx = find(name);
    if (!idx) {
        throw DataError("'" + path.string() + "': missing column '" + std::string(name) + "'");
    }
    return *idx;
}

}  // namespace corrtext
