#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace corrtext {

// Minimal RFC 4180 reader: quoted fields may contain commas, doubled quotes
// and newlines.
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path);

    // Reads the next record into fields. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based line number where the last record returned by next() started.
    std::size_t line() const { return record_line_; }

private:
    std::ifstream in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);

    CsvWriter& field(std::string_view value);
    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& empty();
    void end_row();

    void header(std::initializer_list<std::string_view> names);
    void header(const std::vector<std::string>& names);

private:
    std::ofstream out_;
    bool first_ = true;
};

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

// Maps column names to indices; throws when a required column is missing.
class CsvHeader {
public:
    CsvHeader() = default;
    explicit CsvHeader(const std::vector<std::string>& fields);

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t require(std::string_view name, const std::filesystem::path& path) const;
    std::size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
};

}  // namespace corrtext
