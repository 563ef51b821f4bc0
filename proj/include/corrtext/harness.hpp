#pragma once

#include "corrtext/dates.hpp"
#include "corrtext/features.hpp"
#include "corrtext/gbt.hpp"
#include "corrtext/market.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace corrtext {

inline const std::string kProposedId = "proposed";
inline const std::string kBm1Id = "bm1";
inline const std::string kBm2Id = "bm2";

struct WalkForwardSchedule {
    Date train_start;
    Date eval_start;
    Date eval_end;
    std::vector<Date> retrain_dates;  // strictly increasing

    void validate() const;
};

// Retrains on January 1 of every calendar year from eval_start's year through
// eval_end's year.
WalkForwardSchedule annual_schedule(Date train_start, Date eval_start, Date eval_end);

struct PredictionRow {
    Date week_end;
    std::string model_id;
    double prediction = 0.0;
    double actual = 0.0;

    bool operator==(const PredictionRow&) const = default;
};

struct PredictionLog {
    std::vector<PredictionRow> rows;

    std::vector<PredictionRow> for_model(const std::string& model_id) const;
    // Orders rows by (week_end, model_id).
    void sort();
};

// What one retrain saw; kept so the leakage contract can be audited after the fact.
struct RetrainRecord {
    Date retrain_date;
    std::vector<Date> train_weeks;
    std::vector<Date> train_label_window_end;
    std::size_t predictions = 0;
    GBTModel model;
};

struct WalkForwardResult {
    PredictionLog log;  // model_id == kProposedId
    std::vector<RetrainRecord> retrains;
};

// For each retrain date d: trains on complete rows with week_end >= train_start
// whose label window closed before d, then predicts every evaluation week in
// [max(d, eval_start), next retrain) up to eval_end. Missing features of the
// evaluation rows are imputed with the training medians. Retrain dates with no
// evaluation weeks are skipped. Throws DataError naming the date when a needed
// training set is too small.
WalkForwardResult walk_forward(const FeatureMatrix& m, const WalkForwardSchedule& sched,
                               const GBTParams& params);

// Training rows (over all retrains) whose label window reaches their retrain date.
std::size_t count_leaks(const WalkForwardResult& result);

// Prediction at anchor t: corr over the horizon ending at t minus corr over the
// horizon ending `horizon` joint days earlier. Anchors lacking that history are skipped.
std::vector<PredictionRow> bm1_predict(const TargetSeries& targets, const CorrSeries& corr);
std::vector<PredictionRow> bm2_predict(const TargetSeries& targets);

// Throws DataError when the log has no rows for model_id.
double rmse(const PredictionLog& log, const std::string& model_id);

// Keeps only weeks predicted by every model in the log.
PredictionLog restrict_to_common_weeks(const PredictionLog& log);

// rmse_table.csv (region,bm1,bm2,proposed), predictions.csv and predictions.svg.
void emit_report(const PredictionLog& log, const std::string& region, const std::filesystem::path& out_dir);

void save_predictions(const PredictionLog& log, const std::filesystem::path& path);
PredictionLog load_predictions(const std::filesystem::path& path);

}  // namespace corrtext
