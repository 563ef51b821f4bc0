#pragma once

#include "corrtext/dates.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace corrtext {

struct NewsItem {
    std::string id;
    Timestamp published_at;
    std::string headline;
    std::set<std::string> topic_codes;
    // Story identifier shared by re-transmissions; empty when the source has none.
    std::string dedup_key;

    bool operator==(const NewsItem&) const = default;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct NewsLoadResult {
    std::vector<NewsItem> items;  // ordered by published_at
    std::vector<RowError> errors;
};

// Daily index levels on business dates.
struct PriceSeries {
    std::string asset_id;
    std::vector<Date> dates;
    Eigen::VectorXd levels;

    std::size_t size() const { return dates.size(); }
    bool operator==(const PriceSeries& other) const {
        return asset_id == other.asset_id && dates == other.dates && levels == other.levels;
    }
};

struct RateSeries {
    std::vector<Date> dates;
    Eigen::VectorXd rates;  // percent per annum

    std::size_t size() const { return dates.size(); }
    bool operator==(const RateSeries& other) const {
        return dates == other.dates && rates == other.rates;
    }
    // Last observation on or before d.
    std::optional<double> as_of(Date d) const;
};

// News CSV: id,published_at,dedup_key,headline,topic_codes (topic codes '|'-separated).
// Malformed rows are reported and skipped. Rows outside date_range are dropped silently.
NewsLoadResult load_news(const std::filesystem::path& path,
                         std::optional<DateRange> date_range = std::nullopt);
void save_news(const std::vector<NewsItem>& items, const std::filesystem::path& path);

// Keeps the earliest item of each story. Items without a dedup key are matched on
// identical headline text within 7 days of the first transmission.
std::vector<NewsItem> dedupe_first_instance(std::vector<NewsItem> items);

// Kept iff codes intersect `required` (or `required` is empty) and miss `excluded`.
std::vector<NewsItem> filter_topics(const std::vector<NewsItem>& items,
                                    const std::set<std::string>& required,
                                    const std::set<std::string>& excluded);

// Price CSV: date,level. Rate CSV: date,rate_pct. Violations throw DataError.
PriceSeries load_price_series(const std::filesystem::path& path);
RateSeries load_rate_series(const std::filesystem::path& path);
void save_price_series(const PriceSeries& series, const std::filesystem::path& path);
void save_rate_series(const RateSeries& series, const std::filesystem::path& path);

}  // namespace corrtext
