#pragma once

#include "corrtext/features.hpp"
#include "corrtext/gbt.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace corrtext {

inline constexpr std::size_t kMaxBruteForceFeatures = 15;

// base + sum(phi) equals the model prediction for the explained row.
struct ShapVector {
    double base = 0.0;
    std::vector<std::string> names;
    Eigen::VectorXd phi;

    double contribution(const std::string& name) const;
    double total() const { return base + phi.sum(); }
};

struct ShapReport {
    std::vector<std::pair<std::string, double>> ranking;  // descending mean |phi|
    std::vector<std::string> names;                       // model column order
    Eigen::MatrixXd values;                               // rows explained, model column order
    Eigen::MatrixXd phi;

    std::vector<std::pair<double, double>> dependence(const std::string& feature) const;
};

// Cover-weighted mean output of the tree (the empty-coalition value).
double expected_value(const RegressionTree& tree);
// base_value + lr * sum of tree expected values.
double expected_value(const GBTModel& model);

// Path-dependent TreeSHAP. Missing entries follow default directions.
ShapVector tree_shap(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);
ShapVector tree_shap(const GBTModel& model, const FeatureVector& x);
// Unscaled contributions of a single tree (no learning rate).
Eigen::VectorXd tree_shap(const RegressionTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                          std::size_t n_features);

// Exhaustive Shapley values over all 2^M coalitions. Masked features are
// integrated out by the cover proportions recorded during training, so the
// background distribution is the one the trees were fitted on. Throws
// std::invalid_argument for more than kMaxBruteForceFeatures features.
ShapVector brute_force_shapley(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);

// Value of coalition `present` (bit i set = feature i observed).
double coalition_value(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                       unsigned long present);

// Throws DataError on an empty matrix.
ShapReport shap_report(const GBTModel& model, const FeatureMatrix& m);
ShapReport shap_report(const GBTModel& model, const Eigen::MatrixXd& x);

// Writes shap_ranking.csv and one shap_dependence_<feature>.csv per feature.
void save_shap_report(const ShapReport& report, const std::filesystem::path& dir);

}  // namespace corrtext
