#include "corrtext/market.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace corrtext {

std::optional<double> CorrSeries::at(Date d) const {
    const auto* e = find(d);
    if (!e) return std::nullopt;
    return e->corr;
}

const CorrEntry* CorrSeries::find(Date d) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), d,
                               [](const CorrEntry& e, Date v) { return e.date < v; });
    if (it == entries.end() || it->date != d) return nullptr;
    return &*it;
}

ReturnSeries daily_returns(const PriceSeries& prices) {
    if (prices.size() < 2) {
        throw DataError("series '" + prices.asset_id + "' too short for returns");
    }
    const auto n = static_cast<Eigen::Index>(prices.size());
    ReturnSeries out;
    out.asset_id = prices.asset_id;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.values = (prices.levels.tail(n - 1).array() / prices.levels.head(n - 1).array() - 1.0).matrix();
    return out;
}

JointReturns align(const ReturnSeries& a, const ReturnSeries& b) {
    std::vector<Date> dates;
    std::vector<double> va, vb;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a.dates[i] < b.dates[j]) {
            ++i;
        } else if (b.dates[j] < a.dates[i]) {
            ++j;
        } else {
            dates.push_back(a.dates[i]);
            va.push_back(a.values[static_cast<Eigen::Index>(i)]);
            vb.push_back(b.values[static_cast<Eigen::Index>(j)]);
            ++i;
            ++j;
        }
    }
    JointReturns out;
    out.dates = std::move(dates);
    out.a = Eigen::Map<Eigen::VectorXd>(va.data(), static_cast<Eigen::Index>(va.size()));
    out.b = Eigen::Map<Eigen::VectorXd>(vb.data(), static_cast<Eigen::Index>(vb.size()));
    return out;
}

CorrSeries rolling_correlation(const JointReturns& joint, std::size_t window) {
    if (window < 3) throw std::invalid_argument("correlation window must be at least 3");
    if (joint.size() < window) {
        throw DataError("insufficient overlap: " + std::to_string(joint.size()) +
                        " joint observations for window " + std::to_string(window));
    }
    CorrSeries out;
    out.window_len = window;
    out.calendar = joint.dates;
    const auto w = static_cast<Eigen::Index>(window);
    for (std::size_t end = window - 1; end < joint.size(); ++end) {
        const auto start = static_cast<Eigen::Index>(end + 1 - window);
        if (auto r = pearson(joint.a.segment(start, w), joint.b.segment(start, w))) {
            out.entries.push_back({joint.dates[end], *r, end});
        }
    }
    return out;
}

CorrSeries rolling_correlation(const ReturnSeries& a, const ReturnSeries& b, std::size_t window) {
    return rolling_correlation(align(a, b), window);
}

std::vector<std::size_t> weekly_anchor_indices(const std::vector<Date>& calendar) {
    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < calendar.size(); ++i) {
        const bool last_of_week =
            i + 1 == calendar.size() || week_end(calendar[i + 1]) != week_end(calendar[i]);
        if (last_of_week) anchors.push_back(i);
    }
    return anchors;
}

TargetSeries correlation_change_target(const ReturnSeries& a, const ReturnSeries& b,
                                       std::size_t horizon) {
    if (horizon < 3) throw std::invalid_argument("horizon must be at least 3");
    const JointReturns joint = align(a, b);
    TargetSeries out;
    out.horizon = horizon;
    const auto h = static_cast<Eigen::Index>(horizon);
    for (const std::size_t i : weekly_anchor_indices(joint.dates)) {
        if (i + 1 < horizon || i + horizon >= joint.size()) continue;
        const auto past_start = static_cast<Eigen::Index>(i + 1 - horizon);
        const auto future_start = static_cast<Eigen::Index>(i + 1);
        const auto past = pearson(joint.a.segment(past_start, h), joint.b.segment(past_start, h));
        const auto future =
            pearson(joint.a.segment(future_start, h), joint.b.segment(future_start, h));
        if (!past || !future) continue;
        out.entries.push_back({joint.dates[i], *future - *past, joint.dates[i + horizon]});
    }
    return out;
}

CorrSeries replicate_fig1(const PriceSeries& stock, const PriceSeries& bond,
                          std::size_t window_months) {
    // Joint month-end levels.
    std::vector<Date> months;
    std::vector<double> ls, lb;
    std::size_t i = 0, j = 0;
    while (i < stock.size() && j < bond.size()) {
        if (stock.dates[i] < bond.dates[j]) {
            ++i;
        } else if (bond.dates[j] < stock.dates[i]) {
            ++j;
        } else {
            const Date d = stock.dates[i];
            const double s = stock.levels[static_cast<Eigen::Index>(i)];
            const double b = bond.levels[static_cast<Eigen::Index>(j)];
            if (!months.empty() && month_end(months.back()) == month_end(d)) {
                months.back() = d;
                ls.back() = s;
                lb.back() = b;
            } else {
                months.push_back(d);
                ls.push_back(s);
                lb.push_back(b);
            }
            ++i;
            ++j;
        }
    }
    if (months.size() < window_months + 1) {
        throw DataError("insufficient data: " + std::to_string(months.size()) +
                        " joint month-ends, need " + std::to_string(window_months + 1));
    }
    const auto to_returns = [&](const std::vector<double>& levels, const std::string& id) {
        PriceSeries p;
        p.asset_id = id;
        p.dates = months;
        p.levels = Eigen::Map<const Eigen::VectorXd>(levels.data(), static_cast<Eigen::Index>(levels.size()));
        return daily_returns(p);
    };
    return rolling_correlation(to_returns(ls, stock.asset_id), to_returns(lb, bond.asset_id),
                               window_months);
}

void save_targets(const TargetSeries& targets, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"anchor_date", "delta_corr", "label_window_end"});
    for (const auto& e : targets.entries) {
        out.field(format_date(e.anchor)).field(e.delta_corr).field(format_date(e.label_window_end));
        out.end_row();
    }
}

TargetSeries load_targets(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty file");
    const CsvHeader header(fields);
    const auto anchor_col = header.require("anchor_date", path);
    const auto delta_col = header.require("delta_corr", path);
    const auto end_col = header.require("label_window_end", path);
    TargetSeries out;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto where = "'" + path.string() + "' line " + std::to_string(reader.line());
        if (fields.size() != header.size()) throw DataError(where + ": wrong field count");
        const auto anchor = parse_date(trim(fields[anchor_col]));
        const auto delta = parse_double(fields[delta_col]);
        const auto end = parse_date(trim(fields[end_col]));
        if (!anchor || !delta || !end) throw DataError(where + ": malformed row");
        if (!out.entries.empty() && *anchor <= out.entries.back().anchor) {
            throw DataError(where + ": anchors not increasing");
        }
        out.entries.push_back({*anchor, *delta, *end});
    }
    return out;
}

void save_corr(const CorrSeries& corr, const std::filesystem::path& path) {
    CsvWriter out(path);
    out.header({"date", "corr"});
    for (const auto& e : corr.entries) {
        out.field(format_date(e.date)).field(e.corr);
        out.end_row();
    }
}

}  // namespace corrtext
