#pragma once

#include "corrtext/dates.hpp"
#include "corrtext/ingest.hpp"
#include "corrtext/market.hpp"
#include "corrtext/textscore.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corrtext {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct FeatureOptions {
    std::size_t window_weeks = 12;
    std::size_t diff_weeks = 13;  // "three months" on a weekly grid
    std::size_t max_ffill_weeks = 8;
    double vol_epsilon = 1e-9;
    bool include_rates = true;
    bool include_minutes = false;
};

// Externally scored central-bank minutes. CSV: date,infl_score,eg_score.
struct MinutesSeries {
    std::vector<Date> dates;
    Eigen::VectorXd infl;
    Eigen::VectorXd eg;
};

MinutesSeries load_minutes(const std::filesystem::path& path);

std::vector<std::string> feature_names(const FeatureOptions& options);

// One week's features by name; NaN marks a missing value.
struct FeatureVector {
    Date week_end;
    std::map<std::string, double> values;
};

// Weekly features on consecutive Sundays. Rows are weeks, columns are `names`.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<Date> weeks;
    Eigen::MatrixXd values;

    std::size_t rows() const { return weeks.size(); }
    FeatureVector row(std::size_t i) const;
};

FeatureTable build_features(const TopicScoreSeries& inflation, const TopicScoreSeries& growth,
                            const RateSeries* rates, const MinutesSeries* minutes,
                            const FeatureOptions& options = {});

// Forward fill over at most max_gap weeks; NaN beyond.
Eigen::VectorXd forward_fill(const Eigen::VectorXd& values, std::size_t max_gap);

// Training/evaluation rows keyed by week, each with its label window end.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<Date> weeks;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<Date> label_window_end;

    std::size_t rows() const { return weeks.size(); }
    std::size_t cols() const { return names.size(); }
    bool row_complete(std::size_t i) const;
    FeatureVector row(std::size_t i) const;

    FeatureMatrix select_rows(const std::vector<std::size_t>& indices) const;
    FeatureMatrix complete_rows() const;
    FeatureMatrix select_features(const std::vector<std::string>& keep) const;
};

// Inner join on week (target anchors map to the Sunday closing their week). Rows
// whose features are all missing are dropped. Throws DataError on an empty join.
FeatureMatrix assemble_dataset(const FeatureTable& features, const TargetSeries& targets);

// Rows whose label window closed strictly before cutoff.
FeatureMatrix leakage_guard(const FeatureMatrix& m, Date cutoff);

// Per-column median of the non-missing values (NaN for an all-missing column).
Eigen::VectorXd column_medians(const FeatureMatrix& m);
// Replaces NaN entries with the column's median.
Eigen::MatrixXd impute(const Eigen::MatrixXd& x, const Eigen::VectorXd& medians);

// CSV: week_end,<feature names...>,target,label_window_end (missing = empty field).
void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

}  // namespace corrtext
