#include "corrtext/ingest.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace corrtext {

namespace {

std::set<std::string> parse_codes(std::string_view text) {
    std::set<std::string> codes;
    for (auto& part : split(text, '|')) {
        auto code = trim(part);
        if (!code.empty()) codes.insert(std::move(code));
    }
    return codes;
}

std::string join_codes(const std::set<std::string>& codes) {
    std::string out;
    for (const auto& c : codes) {
        if (!out.empty()) out.push_back('|');
        out += c;
    }
    return out;
}

void sort_by_time(std::vector<NewsItem>& items) {
    std::stable_sort(items.begin(), items.end(), [](const NewsItem& a, const NewsItem& b) {
        return a.published_at < b.published_at;
    });
}

template <typename Parse>
void load_dated_series(const std::filesystem::path& path, std::string_view value_column,
                       std::vector<Date>& dates, std::vector<double>& values, Parse check) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty file");
    const CsvHeader header(fields);
    const auto date_col = header.require("date", path);
    const auto value_col = header.require(value_column, path);

    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto where = "'" + path.string() + "' line " + std::to_string(reader.line());
        if (fields.size() != header.size()) throw DataError(where + ": wrong field count");
        auto date = parse_date(trim(fields[date_col]));
        if (!date) throw DataError(where + ": invalid date '" + fields[date_col] + "'");
        auto value = parse_double(fields[value_col]);
        if (!value) throw DataError(where + ": invalid " + std::string(value_column));
        check(*value, where);
        if (!dates.empty()) {
            if (*date == dates.back()) {
                throw DataError(where + ": duplicate date " + format_date(*date));
            }
            if (*date < dates.back()) {
                throw DataError(where + ": date " + format_date(*date) + " out of order");
            }
        }
        dates.push_back(*date);
        values.push_back(*value);
    }
}

}  // namespace

std::optional<double> RateSeries::as_of(Date d) const {
    auto it = std::upper_bound(dates.begin(), dates.end(), d);
    if (it == dates.begin()) return std::nullopt;
    return rates[std::distance(dates.begin(), it) - 1];
}

NewsLoadResult load_news(const std::filesystem::path& path, std::optional<DateRange> date_range) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty file");
    const CsvHeader header(fields);
    const auto id_col = header.require("id", path);
    const auto time_col = header.require("published_at", path);
    const auto head_col = header.require("headline", path);
    const auto codes_col = header.require("topic_codes", path);
    const auto key_col = header.find("dedup_key");

    NewsLoadResult result;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto line = reader.line();
        if (fields.size() != header.size()) {
            result.errors.push_back({line, "expected " + std::to_string(header.size()) +
                                               " fields, found " + std::to_string(fields.size())});
            continue;
        }
        auto ts = parse_timestamp(trim(fields[time_col]));
        if (!ts) {
            result.errors.push_back({line, "invalid published_at '" + fields[time_col] + "'"});
            continue;
        }
        std::string headline = trim(fields[head_col]);
        if (headline.empty()) {
            result.errors.push_back({line, "empty headline"});
            continue;
        }
        if (date_range && !date_range->contains(date_of(*ts))) continue;

        NewsItem item;
        item.id = trim(fields[id_col]);
        item.published_at = *ts;
        item.headline = std::move(headline);
        item.topic_codes = parse_codes(fields[codes_col]);
        if (key_col) item.dedup_key = trim(fields[*key_col]);
        result.items.push_back(std::move(item));
    }
    sort_by_time(result.items);
    return result;
}

void save_news(const std::vector<NewsItem>& items, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"id", "published_at", "dedup_key", "headline", "topic_codes"});
    for (const auto& item : items) {
        out.field(item.id)
            .field(format_timestamp(item.published_at))
            .field(item.dedup_key)
            .field(item.headline)
            .field(join_codes(item.topic_codes));
        out.end_row();
    }
}

std::vector<NewsItem> dedupe_first_instance(std::vector<NewsItem> items) {
    sort_by_time(items);
    constexpr auto window = std::chrono::days{7};

    std::unordered_set<std::string> seen_keys;
    // headline -> time of the transmission that opened the current window
    std::unordered_map<std::string, Timestamp> first_by_text;
    std::vector<NewsItem> kept;
    kept.reserve(items.size());
    for (auto& item : items) {
        if (!item.dedup_key.empty()) {
            if (!seen_keys.insert(item.dedup_key).second) continue;
        } else {
            auto [it, inserted] = first_by_text.try_emplace(item.headline, item.published_at);
            if (!inserted) {
                if (item.published_at - it->second < window) continue;
                it->second = item.published_at;
            }
        }
        kept.push_back(std::move(item));
    }
    return kept;
}

std::vector<NewsItem> filter_topics(const std::vector<NewsItem>& items,
                                    const std::set<std::string>& required,
                                    const std::set<std::string>& excluded) {
    std::vector<NewsItem> kept;
    for (const auto& item : items) {
        const auto has_any = [&](const std::set<std::string>& codes) {
            return std::any_of(item.topic_codes.begin(), item.topic_codes.end(),
                               [&](const std::string& c) { return codes.count(c) > 0; });
        };
        if (!required.empty() && !has_any(required)) continue;
        if (has_any(excluded)) continue;
        kept.push_back(item);
    }
    return kept;
}

PriceSeries load_price_series(const std::filesystem::path& path) {
    std::vector<Date> dates;
    std::vector<double> values;
    load_dated_series(path, "level", dates, values, [](double v, const std::string& where) {
        if (!(v > 0.0)) throw DataError(where + ": non-positive level");
    });
    PriceSeries series;
    series.asset_id = path.stem().string();
    series.dates = std::move(dates);
    series.levels = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return series;
}

RateSeries load_rate_series(const std::filesystem::path& path) {
    std::vector<Date> dates;
    std::vector<double> values;
    load_dated_series(path, "rate_pct", dates, values, [](double, const std::string&) {});
    RateSeries series;
    series.dates = std::move(dates);
    series.rates = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return series;
}

void save_price_series(const PriceSeries& series, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"date", "level"});
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.field(format_date(series.dates[i])).field(series.levels[static_cast<Eigen::Index>(i)]);
        out.end_row();
    }
}

void save_rate_series(const RateSeries& series, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"date", "rate_pct"});
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.field(format_date(series.dates[i])).field(series.rates[static_cast<Eigen::Index>(i)]);
        out.end_row();
    }
}

}  // namespace corrtext
