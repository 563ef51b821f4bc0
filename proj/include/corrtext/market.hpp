#pragma once

#include "corrtext/dates.hpp"
#include "corrtext/ingest.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace corrtext {

inline constexpr std::size_t kDefaultHorizon = 125;

struct ReturnSeries {
    std::string asset_id;
    std::vector<Date> dates;
    Eigen::VectorXd values;  // simple returns; values[i] covers dates[i-1] -> dates[i]

    std::size_t size() const { return dates.size(); }
};

// Two return series restricted to the dates present in both.
struct JointReturns {
    std::vector<Date> dates;
    Eigen::VectorXd a;
    Eigen::VectorXd b;

    std::size_t size() const { return dates.size(); }
};

struct CorrEntry {
    Date date;
    double corr = 0.0;
    std::size_t index = 0;  // position of `date` in the joint calendar
};

struct CorrSeries {
    std::size_t window_len = 0;
    std::vector<Date> calendar;  // joint calendar the windows were taken from
    std::vector<CorrEntry> entries;

    std::optional<double> at(Date d) const;
    const CorrEntry* find(Date d) const;
};

struct TargetEntry {
    Date anchor;
    double delta_corr = 0.0;
    Date label_window_end;

    bool operator==(const TargetEntry&) const = default;
};

struct TargetSeries {
    std::size_t horizon = kDefaultHorizon;
    std::vector<TargetEntry> entries;
};

// Pearson correlation with explicit mean removal (two passes). Empty when either
// side has zero variance or fewer than two observations.
template <typename DerivedA, typename DerivedB>
std::optional<typename DerivedA::Scalar> pearson(const Eigen::MatrixBase<DerivedA>& x,
                                                 const Eigen::MatrixBase<DerivedB>& y) {
    using Scalar = typename DerivedA::Scalar;
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const auto dx = (x.array() - x.mean()).eval();
    const auto dy = (y.array() - y.mean()).eval();
    const Scalar sxx = dx.square().sum();
    const Scalar syy = dy.square().sum();
    if (sxx == Scalar(0) || syy == Scalar(0)) return std::nullopt;
    const Scalar r = (dx * dy).sum() / std::sqrt(sxx * syy);
    return std::clamp(r, Scalar(-1), Scalar(1));
}

// r_d = level_d / level_{d-1} - 1. Throws DataError for fewer than two levels.
ReturnSeries daily_returns(const PriceSeries& prices);

JointReturns align(const ReturnSeries& a, const ReturnSeries& b);

// Correlation of the `window` most recent joint pairs ending at each date.
// Windows with zero variance are skipped.
CorrSeries rolling_correlation(const ReturnSeries& a, const ReturnSeries& b, std::size_t window);
CorrSeries rolling_correlation(const JointReturns& joint, std::size_t window);

// Weekly anchors (last joint day of each Monday..Sunday week). Past window is the
// `horizon` joint days ending at the anchor, future window the next `horizon`.
TargetSeries correlation_change_target(const ReturnSeries& a, const ReturnSeries& b,
                                       std::size_t horizon = kDefaultHorizon);

// Indices of the last joint day in each week.
std::vector<std::size_t> weekly_anchor_indices(const std::vector<Date>& calendar);

// Month-end resample, monthly simple returns, rolling 24-month correlation.
CorrSeries replicate_fig1(const PriceSeries& stock, const PriceSeries& bond,
                          std::size_t window_months = 24);

// CSV: anchor_date,delta_corr,label_window_end
void save_targets(const TargetSeries& targets, const std::filesystem::path& path);
TargetSeries load_targets(const std::filesystem::path& path);
// CSV: date,corr
void save_corr(const CorrSeries& corr, const std::filesystem::path& path);

}  // namespace corrtext
