#pragma once

#include "corrtext/classifier.hpp"
#include "corrtext/config.hpp"
#include "corrtext/harness.hpp"
#include "corrtext/shap.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace corrtext {

// Intermediate files written under out_dir. Each stage reads only these and the
// configured inputs, so stages can be rerun independently.
struct Artifacts {
    std::filesystem::path dir;

    std::filesystem::path scores() const { return dir / "scores.csv"; }
    std::filesystem::path targets() const { return dir / "targets.csv"; }
    std::filesystem::path corr() const { return dir / "corr.csv"; }
    std::filesystem::path features() const { return dir / "features.csv"; }
    std::filesystem::path model() const { return dir / "model.json"; }
    std::filesystem::path predictions() const { return dir / "predictions.csv"; }
    std::filesystem::path rmse_table() const { return dir / "rmse_table.csv"; }
    std::filesystem::path shap_dir() const { return dir / "shap"; }
};

struct ScoreStats {
    std::size_t loaded = 0;
    std::size_t rejected = 0;
    std::size_t kept = 0;  // after dedup and topic filtering
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
    std::size_t classifier_calls = 0;  // headlines sent to the underlying classifier
};

struct EvaluateResult {
    double rmse_bm1 = 0.0;
    double rmse_bm2 = 0.0;
    double rmse_proposed = 0.0;
    std::size_t weeks = 0;
    WalkForwardResult walk_forward;
    PredictionLog log;
};

// Stub (lexicon) or remote classifier as configured.
std::unique_ptr<EntailmentClassifier> make_classifier(const RunConfig& cfg);

ScoreStats run_score(const RunConfig& cfg);
ScoreStats run_score(const RunConfig& cfg, EntailmentClassifier& classifier);
void run_targets(const RunConfig& cfg);
FeatureMatrix run_features(const RunConfig& cfg);
GBTModel run_train(const RunConfig& cfg);
// Runs any upstream stage whose output is missing first.
EvaluateResult run_evaluate(const RunConfig& cfg);
ShapReport run_shap(const RunConfig& cfg);
CorrSeries run_fig1(const RunConfig& cfg);
SynthCorpus run_synth(const RunConfig& cfg);

// Rows used to fit the stand-alone model: week_end >= train_start and label
// window closed before eval_start (all rows when eval_start is unset).
FeatureMatrix training_rows(const FeatureMatrix& m, const RunConfig& cfg);

}  // namespace corrtext
