#include "corrtext/features.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace corrtext {

namespace {

constexpr auto kWeek = std::chrono::days{7};

// Weekly score values on the grid [first, first + n weeks), NaN where absent.
Eigen::VectorXd on_grid(const TopicScoreSeries& series, Date first, std::size_t n) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), kMissing);
    for (const auto& e : series.entries) {
        if (e.week_end < first || !e.score) continue;
        const auto k = (e.week_end - first).count() / 7;
        if (static_cast<std::size_t>(k) < n && e.week_end == first + kWeek * k) {
            out[k] = *e.score;
        }
    }
    return out;
}

double population_std(const Eigen::VectorXd& v) {
    return std::sqrt((v.array() - v.mean()).square().mean());
}

template <typename Lookup>
std::optional<double> last_on_or_before(const std::vector<Date>& dates, Date d, Lookup value) {
    auto it = std::upper_bound(dates.begin(), dates.end(), d);
    if (it == dates.begin()) return std::nullopt;
    return value(static_cast<Eigen::Index>(std::distance(dates.begin(), it) - 1));
}

}  // namespace

MinutesSeries load_minutes(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty file");
    const CsvHeader header(fields);
    const auto date_col = header.require("date", path);
    const auto infl_col = header.require("infl_score", path);
    const auto eg_col = header.require("eg_score", path);
    std::vector<Date> dates;
    std::vector<double> infl, eg;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto where = "'" + path.string() + "' line " + std::to_string(reader.line());
        if (fields.size() != header.size()) throw DataError(where + ": wrong field count");
        const auto d = parse_date(trim(fields[date_col]));
        const auto i = parse_double(fields[infl_col]);
        const auto e = parse_double(fields[eg_col]);
        if (!d || !i || !e) throw DataError(where + ": malformed row");
        if (!dates.empty() && *d <= dates.back()) throw DataError(where + ": dates not increasing");
        dates.push_back(*d);
        infl.push_back(*i);
        eg.push_back(*e);
    }
    MinutesSeries out;
    out.dates = std::move(dates);
    out.infl = Eigen::Map<Eigen::VectorXd>(infl.data(), static_cast<Eigen::Index>(infl.size()));
    out.eg = Eigen::Map<Eigen::VectorXd>(eg.data(), static_cast<Eigen::Index>(eg.size()));
    return out;
}

std::vector<std::string> feature_names(const FeatureOptions& options) {
    std::vector<std::string> names = {"infl_score",      "eg_score",
                                      "infl_dev12",      "eg_dev12",
                                      "corr_infl_eg_12", "vol_ratio_infl_eg_12"};
    if (options.include_rates) {
        names.insert(names.end(), {"ff_rate", "ff_rate_diff_3m"});
    }
    if (options.include_minutes) {
        names.insert(names.end(), {"minutes_infl", "minutes_eg", "minutes_infl_diff_3m",
                                   "minutes_eg_diff_3m"});
    }
    return names;
}

FeatureVector FeatureTable::row(std::size_t i) const {
    FeatureVector v{weeks.at(i), {}};
    for (std::size_t c = 0; c < names.size(); ++c) {
        v.values[names[c]] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
    return v;
}

Eigen::VectorXd forward_fill(const Eigen::VectorXd& values, std::size_t max_gap) {
    Eigen::VectorXd out = values;
    Eigen::Index last = -1;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (!std::isnan(values[k])) {
            last = k;
        } else if (last >= 0 && static_cast<std::size_t>(k - last) <= max_gap) {
            out[k] = values[last];
        }
    }
    return out;
}

FeatureTable build_features(const TopicScoreSeries& inflation, const TopicScoreSeries& growth,
                            const RateSeries* rates, const MinutesSeries* minutes,
                            const FeatureOptions& options) {
    if (options.window_weeks < 2) throw std::invalid_argument("window_weeks must be at least 2");
    if (options.include_rates && rates == nullptr) {
        throw DataError("rate series required for rate features");
    }
    if (options.include_minutes && minutes == nullptr) {
        throw DataError("minutes series required for minutes features");
    }

    FeatureTable table;
    table.names = feature_names(options);
    if (inflation.entries.empty() && growth.entries.empty()) return table;

    Date first = Date::max();
    Date last = Date::min();
    for (const auto* s : {&inflation, &growth}) {
        if (s->entries.empty()) continue;
        first = std::min(first, s->entries.front().week_end);
        last = std::max(last, s->entries.back().week_end);
    }
    const auto n = static_cast<std::size_t>((last - first).count() / 7 + 1);
    for (std::size_t k = 0; k < n; ++k) table.weeks.push_back(first + kWeek * static_cast<int>(k));

    const Eigen::VectorXd si = forward_fill(on_grid(inflation, first, n), options.max_ffill_weeks);
    const Eigen::VectorXd se = forward_fill(on_grid(growth, first, n), options.max_ffill_weeks);

    const auto rows = static_cast<Eigen::Index>(n);
    const auto win = static_cast<Eigen::Index>(options.window_weeks);
    table.values = Eigen::MatrixXd::Constant(rows, static_cast<Eigen::Index>(table.names.size()), kMissing);

    for (Eigen::Index k = 0; k < rows; ++k) {
        auto row = table.values.row(k);
        row[0] = si[k];
        row[1] = se[k];
        if (k + 1 >= win) {
            const auto wi = si.segment(k + 1 - win, win);
            const auto we = se.segment(k + 1 - win, win);
            if (!wi.hasNaN()) row[2] = si[k] - wi.mean();
            if (!we.hasNaN()) row[3] = se[k] - we.mean();
        }
        if (k >= win) {
            const Eigen::VectorXd di = si.segment(k + 1 - win, win) - si.segment(k - win, win);
            const Eigen::VectorXd de = se.segment(k + 1 - win, win) - se.segment(k - win, win);
            if (!di.hasNaN() && !de.hasNaN()) {
                if (auto r = pearson(di, de)) row[4] = *r;
                row[5] = population_std(di) / (population_std(de) + options.vol_epsilon);
            }
        }

        const Date w = table.weeks[static_cast<std::size_t>(k)];
        const Date w_back = w - kWeek * static_cast<int>(options.diff_weeks);
        Eigen::Index col = 6;
        if (options.include_rates) {
            const auto now = rates->as_of(w);
            const auto then = rates->as_of(w_back);
            if (now) row[col] = *now;
            if (now && then) row[col + 1] = *now - *then;
            col += 2;
        }
        if (options.include_minutes) {
            const auto mi = [&](Eigen::Index j) { return minutes->infl[j]; };
            const auto me = [&](Eigen::Index j) { return minutes->eg[j]; };
            const auto i_now = last_on_or_before(minutes->dates, w, mi);
            const auto e_now = last_on_or_before(minutes->dates, w, me);
            const auto i_then = last_on_or_before(minutes->dates, w_back, mi);
            const auto e_then = last_on_or_before(minutes->dates, w_back, me);
            if (i_now) row[col] = *i_now;
            if (e_now) row[col + 1] = *e_now;
            if (i_now && i_then) row[col + 2] = *i_now - *i_then;
            if (e_now && e_then) row[col + 3] = *e_now - *e_then;
        }
    }
    return table;
}

bool FeatureMatrix::row_complete(std::size_t i) const {
    return !x.row(static_cast<Eigen::Index>(i)).hasNaN();
}

FeatureVector FeatureMatrix::row(std::size_t i) const {
    FeatureVector v{weeks.at(i), {}};
    for (std::size_t c = 0; c < names.size(); ++c) {
        v.values[names[c]] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
    return v;
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& indices) const {
    FeatureMatrix out;
    out.names = names;
    out.x.resize(static_cast<Eigen::Index>(indices.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(indices[r]);
        out.x.row(static_cast<Eigen::Index>(r)) = x.row(src);
        out.y[static_cast<Eigen::Index>(r)] = y[src];
        out.weeks.push_back(weeks[indices[r]]);
        out.label_window_end.push_back(label_window_end[indices[r]]);
    }
    return out;
}

FeatureMatrix FeatureMatrix::complete_rows() const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (row_complete(i)) keep.push_back(i);
    }
    return select_rows(keep);
}

FeatureMatrix FeatureMatrix::select_features(const std::vector<std::string>& keep) const {
    FeatureMatrix out;
    out.names = keep;
    out.weeks = weeks;
    out.y = y;
    out.label_window_end = label_window_end;
    out.x.resize(x.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const auto it = std::find(names.begin(), names.end(), keep[c]);
        if (it == names.end()) throw DataError("unknown feature '" + keep[c] + "'");
        out.x.col(static_cast<Eigen::Index>(c)) = x.col(std::distance(names.begin(), it));
    }
    return out;
}

FeatureMatrix assemble_dataset(const FeatureTable& features, const TargetSeries& targets) {
    std::map<Date, const TargetEntry*> by_week;
    for (const auto& t : targets.entries) by_week[week_end(t.anchor)] = &t;

    std::vector<std::size_t> feature_rows;
    std::vector<const TargetEntry*> matched;
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto it = by_week.find(features.weeks[i]);
        if (it == by_week.end()) continue;
        if (features.values.row(static_cast<Eigen::Index>(i)).array().isNaN().all()) continue;
        feature_rows.push_back(i);
        matched.push_back(it->second);
    }
    if (feature_rows.empty()) {
        const auto range = [](const std::vector<Date>& d) {
            return d.empty() ? std::string("(none)")
                             : format_date(d.front()) + ".." + format_date(d.back());
        };
        std::vector<Date> target_weeks;
        for (const auto& t : targets.entries) target_weeks.push_back(t.anchor);
        throw DataError("feature and target weeks do not overlap: features " +
                        range(features.weeks) + ", target anchors " + range(target_weeks));
    }

    FeatureMatrix m;
    m.names = features.names;
    m.x.resize(static_cast<Eigen::Index>(feature_rows.size()), features.values.cols());
    m.y.resize(static_cast<Eigen::Index>(feature_rows.size()));
    for (std::size_t r = 0; r < feature_rows.size(); ++r) {
        m.x.row(static_cast<Eigen::Index>(r)) = features.values.row(static_cast<Eigen::Index>(feature_rows[r]));
        m.y[static_cast<Eigen::Index>(r)] = matched[r]->delta_corr;
        m.weeks.push_back(features.weeks[feature_rows[r]]);
        m.label_window_end.push_back(matched[r]->label_window_end);
    }
    return m;
}

FeatureMatrix leakage_guard(const FeatureMatrix& m, Date cutoff) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (m.label_window_end[i] < cutoff) keep.push_back(i);
    }
    return m.select_rows(keep);
}

Eigen::VectorXd column_medians(const FeatureMatrix& m) {
    Eigen::VectorXd medians(static_cast<Eigen::Index>(m.cols()));
    std::vector<double> buf;
    for (Eigen::Index c = 0; c < medians.size(); ++c) {
        buf.clear();
        for (Eigen::Index r = 0; r < m.x.rows(); ++r) {
            if (!std::isnan(m.x(r, c))) buf.push_back(m.x(r, c));
        }
        if (buf.empty()) {
            medians[c] = kMissing;
            continue;
        }
        std::sort(buf.begin(), buf.end());
        const std::size_t mid = buf.size() / 2;
        medians[c] = buf.size() % 2 ? buf[mid] : 0.5 * (buf[mid - 1] + buf[mid]);
    }
    return medians;
}

Eigen::MatrixXd impute(const Eigen::MatrixXd& x, const Eigen::VectorXd& medians) {
    Eigen::MatrixXd out = x;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            if (std::isnan(out(r, c))) out(r, c) = medians[c];
        }
    }
    return out;
}

void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
    CsvWriter out(path);
    std::vector<std::string> header = {"week_end"};
    header.insert(header.end(), m.names.begin(), m.names.end());
    header.insert(header.end(), {"target", "label_window_end"});
    out.header(header);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out.field(format_date(m.weeks[i]));
        for (Eigen::Index c = 0; c < m.x.cols(); ++c) out.field(m.x(r, c));
        out.field(m.y[r]).field(format_date(m.label_window_end[i]));
        out.end_row();
    }
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "': empty file");
    if (fields.size() < 3 || trim(fields.front()) != "week_end" ||
        trim(fields[fields.size() - 2]) != "target" || trim(fields.back()) != "label_window_end") {
        throw DataError("'" + path.string() + "': not a feature matrix file");
    }
    FeatureMatrix m;
    for (std::size_t c = 1; c + 2 < fields.size(); ++c) m.names.push_back(trim(fields[c]));
    const std::size_t ncols = fields.size();

    std::vector<double> xs, ys;
    while (reader.next(fields)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        const auto where = "'" + path.string() + "' line " + std::to_string(reader.line());
        if (fields.size() != ncols) throw DataError(where + ": wrong field count");
        const auto week = parse_date(trim(fields.front()));
        const auto end = parse_date(trim(fields.back()));
        const auto target = parse_double(fields[ncols - 2]);
        if (!week || !end || !target) throw DataError(where + ": malformed row");
        for (std::size_t c = 1; c + 2 < ncols; ++c) {
            if (trim(fields[c]).empty()) {
                xs.push_back(kMissing);
            } else if (auto v = parse_double(fields[c])) {
                xs.push_back(*v);
            } else {
                throw DataError(where + ": malformed value in column '" + m.names[c - 1] + "'");
            }
        }
        ys.push_back(*target);
        m.weeks.push_back(*week);
        m.label_window_end.push_back(*end);
    }
    const auto rows = static_cast<Eigen::Index>(ys.size());
    const auto cols = static_cast<Eigen::Index>(m.names.size());
    m.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        xs.data(), rows, cols);
    m.y = Eigen::Map<Eigen::VectorXd>(ys.data(), rows);
    return m;
}

}  // namespace corrtext
