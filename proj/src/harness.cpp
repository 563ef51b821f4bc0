#include "corrtext/harness.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"
#include "corrtext/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace corrtext {

void WalkForwardSchedule::validate() const {
    if (eval_end < eval_start) throw ConfigError("eval_end precedes eval_start");
    if (eval_start < train_start) throw ConfigError("eval_start precedes train_start");
    if (retrain_dates.empty()) throw ConfigError("schedule has no retrain dates");
    for (std::size_t i = 1; i < retrain_dates.size(); ++i) {
        if (!(retrain_dates[i - 1] < retrain_dates[i])) {
            throw ConfigError("retrain dates must be strictly increasing");
        }
    }
    const Date lo = eval_start - std::chrono::days{366};
    if (retrain_dates.front() < lo || eval_end < retrain_dates.back()) {
        throw ConfigError("retrain dates must lie within one year before eval_start and eval_end");
    }
}

WalkForwardSchedule annual_schedule(Date train_start, Date eval_start, Date eval_end) {
    WalkForwardSchedule s{train_start, eval_start, eval_end, {}};
    for (int y = year_of(eval_start); y <= year_of(eval_end); ++y) {
        s.retrain_dates.push_back(std::chrono::sys_days{std::chrono::year{y} / 1 / 1});
    }
    s.validate();
    return s;
}

std::vector<PredictionRow> PredictionLog::for_model(const std::string& model_id) const {
    std::vector<PredictionRow> out;
    for (const auto& r : rows) {
        if (r.model_id == model_id) out.push_back(r);
    }
    return out;
}

void PredictionLog::sort() {
    std::stable_sort(rows.begin(), rows.end(), [](const PredictionRow& a, const PredictionRow& b) {
        if (a.week_end != b.week_end) return a.week_end < b.week_end;
        return a.model_id < b.model_id;
    });
}

WalkForwardResult walk_forward(const FeatureMatrix& m, const WalkForwardSchedule& sched,
                               const GBTParams& params) {
    sched.validate();
    WalkForwardResult result;
    const auto& dates = sched.retrain_dates;
    for (std::size_t k = 0; k < dates.size(); ++k) {
        const Date d = dates[k];
        const Date from = std::max(d, sched.eval_start);
        std::vector<std::size_t> eval_rows;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const Date w = m.weeks[i];
            if (w < from || sched.eval_end < w) continue;
            if (k + 1 < dates.size() && !(w < dates[k + 1])) continue;
            eval_rows.push_back(i);
        }
        if (eval_rows.empty()) continue;

        std::vector<std::size_t> train_rows;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (m.weeks[i] < sched.train_start) continue;
            if (!(m.label_window_end[i] < d)) continue;
            if (!m.row_complete(i) || !std::isfinite(m.y[static_cast<Eigen::Index>(i)])) continue;
            train_rows.push_back(i);
        }
        const FeatureMatrix train_set = m.select_rows(train_rows);
        RetrainRecord rec;
        rec.retrain_date = d;
        rec.train_weeks = train_set.weeks;
        rec.train_label_window_end = train_set.label_window_end;
        try {
            rec.model = train(train_set, params);
        } catch (const ModelFormatError&) {
            throw;
        } catch (const DataError& e) {
            throw DataError("retrain on " + format_date(d) + ": " + e.what());
        }

        const Eigen::VectorXd medians = column_medians(train_set);
        const FeatureMatrix eval_set = m.select_rows(eval_rows);
        const Eigen::MatrixXd x = impute(eval_set.x, medians);
        const Eigen::VectorXd pred = predict(rec.model, x);
        for (std::size_t j = 0; j < eval_rows.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            result.log.rows.push_back({eval_set.weeks[j], kProposedId, pred[jj], eval_set.y[jj]});
        }
        rec.predictions = eval_rows.size();
        result.retrains.push_back(std::move(rec));
    }
    result.log.sort();
    return result;
}

std::size_t count_leaks(const WalkForwardResult& result) {
    std::size_t leaks = 0;
    for (const auto& rec : result.retrains) {
        for (const Date end : rec.train_label_window_end) {
            if (!(end < rec.retrain_date)) ++leaks;
        }
    }
    return leaks;
}

std::vector<PredictionRow> bm1_predict(const TargetSeries& targets, const CorrSeries& corr) {
    std::unordered_map<std::size_t, double> by_index;
    for (const auto& e : corr.entries) by_index.emplace(e.index, e.corr);
    const std::size_t h = targets.horizon;
    std::vector<PredictionRow> out;
    for (const auto& t : targets.entries) {
        const CorrEntry* now = corr.find(t.anchor);
        if (now == nullptr || now->index < h) continue;
        const auto past = by_index.find(now->index - h);
        if (past == by_index.end()) continue;
        out.push_back({week_end(t.anchor), kBm1Id, now->corr - past->second, t.delta_corr});
    }
    return out;
}

std::vector<PredictionRow> bm2_predict(const TargetSeries& targets) {
    std::vector<PredictionRow> out;
    out.reserve(targets.entries.size());
    for (const auto& t : targets.entries) out.push_back({week_end(t.anchor), kBm2Id, 0.0, t.delta_corr});
    return out;
}

double rmse(const PredictionLog& log, const std::string& model_id) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.rows) {
        if (r.model_id != model_id) continue;
        const double e = r.prediction - r.actual;
        sum += e * e;
        ++n;
    }
    if (n == 0) throw DataError("no predictions for model '" + model_id + "'");
    return std::sqrt(sum / static_cast<double>(n));
}

PredictionLog restrict_to_common_weeks(const PredictionLog& log) {
    std::set<std::string> models;
    std::map<Date, std::set<std::string>> seen;
    for (const auto& r : log.rows) {
        models.insert(r.model_id);
        seen[r.week_end].insert(r.model_id);
    }
    PredictionLog out;
    for (const auto& r : log.rows) {
        if (seen[r.week_end].size() == models.size()) out.rows.push_back(r);
    }
    out.sort();
    return out;
}

void save_predictions(const PredictionLog& log, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"week_end", "model_id", "prediction", "actual"});
    for (const auto& r : log.rows) {
        w.field(format_date(r.week_end));
        w.field(r.model_id);
        w.field(r.prediction);
        w.field(r.actual);
        w.end_row();
    }
}

PredictionLog load_predictions(const std::filesystem::path& path) {
    CsvReader reader(path);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("'" + path.string() + "' is empty");
    const CsvHeader header(fields);
    const auto c_week = header.require("week_end", path);
    const auto c_model = header.require("model_id", path);
    const auto c_pred = header.require("prediction", path);
    const auto c_act = header.require("actual", path);
    PredictionLog log;
    while (reader.next(fields)) {
        if (fields.size() < header.size()) {
            throw DataError(path.string() + ":" + std::to_string(reader.line()) + ": too few fields");
        }
        const auto week = parse_date(fields[c_week]);
        const auto pred = parse_double(fields[c_pred]);
        const auto act = parse_double(fields[c_act]);
        if (!week || !pred || !act) {
            throw DataError(path.string() + ":" + std::to_string(reader.line()) + ": malformed row");
        }
        log.rows.push_back({*week, fields[c_model], *pred, *act});
    }
    return log;
}

void emit_report(const PredictionLog& log, const std::string& region, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    const double r_bm1 = rmse(log, kBm1Id);
    const double r_bm2 = rmse(log, kBm2Id);
    const double r_prop = rmse(log, kProposedId);
    {
        CsvWriter w(out_dir / "rmse_table.csv");
        w.header({"region", "bm1", "bm2", "proposed"});
        w.field(region);
        w.field(r_bm1);
        w.field(r_bm2);
        w.field(r_prop);
        w.end_row();
    }
    save_predictions(log, out_dir / "predictions.csv");

    std::map<std::string, svg::Series> series;
    svg::Series actual{"actual", {}, {}};
    std::set<Date> actual_weeks;
    for (const auto& r : log.rows) {
        auto& s = series[r.model_id];
        s.name = r.model_id;
        const double x = static_cast<double>(r.week_end.time_since_epoch().count());
        s.x.push_back(x);
        s.y.push_back(r.prediction);
        if (actual_weeks.insert(r.week_end).second) {
            actual.x.push_back(x);
            actual.y.push_back(r.actual);
        }
    }
    std::vector<svg::Series> lines{actual};
    for (auto& [id, s] : series) lines.push_back(std::move(s));
    svg::ChartOptions opts;
    opts.title = "Walk-forward predictions (" + region + ")";
    opts.x_label = "week";
    opts.y_label = "change in correlation";
    opts.x_is_date = true;
    svg::line_chart(lines, opts, out_dir / "predictions.svg");
}

}  // namespace corrtext
