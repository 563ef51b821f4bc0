#pragma once

#include "corrtext/errors.hpp"
#include "corrtext/features.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace corrtext {

inline constexpr std::size_t kUnboundedDepth = std::numeric_limits<std::size_t>::max();
inline constexpr int kModelSchemaVersion = 1;

struct GBTParams {
    std::size_t n_trees = 200;  // upper bound; boosting stops once a round cannot split
    std::size_t max_depth = 3;
    double learning_rate = 0.05;
    std::size_t min_samples_leaf = 5;
    double min_gain = 0.0;

    // Throws ConfigError naming every invalid field.
    void validate() const;
};

// Flat node record. Leaves have feature == -1. Rows with x < threshold go left;
// missing values follow default_left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    bool default_left = true;
    double value = 0.0;  // leaf output (before learning-rate scaling)
    double cover = 0.0;  // training rows that reached the node

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    template <typename Row>
    int leaf_index(const Row& x) const;
    template <typename Row>
    double predict(const Row& x) const {
        return nodes[static_cast<std::size_t>(leaf_index(x))].value;
    }
    std::size_t depth() const;
    bool operator==(const RegressionTree&) const = default;
};

struct GBTModel {
    double base_value = 0.0;
    double learning_rate = 1.0;
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;

    bool operator==(const GBTModel&) const = default;
};

class ModelFormatError : public DataError {
public:
    using DataError::DataError;
};

// Squared-error boosting with exact greedy splits. Only rows without missing
// features are used. Throws DataError when fewer than 2 * min_samples_leaf rows
// remain. A constant target yields a zero-tree model.
GBTModel train(const FeatureMatrix& m, const GBTParams& params);
GBTModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               std::vector<std::string> feature_names, const GBTParams& params);

double predict_row(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row);
Eigen::VectorXd predict(const GBTModel& model, const Eigen::MatrixXd& x);
// Looks features up by name; throws DataError on names the model does not know
// or model features absent from x.
double predict(const GBTModel& model, const FeatureVector& x);

// Model row in the model's column order built from a named vector.
Eigen::RowVectorXd model_row(const GBTModel& model, const FeatureVector& x);

// Mean squared error after 0, 1, ..., K trees.
Eigen::VectorXd staged_mse(const GBTModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Versioned JSON document; see docs/model_format.md.
void save_model(const GBTModel& model, const std::filesystem::path& path);
GBTModel load_model(const std::filesystem::path& path);
std::string model_to_json(const GBTModel& model);
GBTModel model_from_json(const std::string& text);

template <typename Row>
int RegressionTree::leaf_index(const Row& x) const {
    int i = 0;
    for (;;) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) return i;
        const double v = x[n.feature];
        if (std::isnan(v)) {
            i = n.default_left ? n.left : n.right;
        } else {
            i = v < n.threshold ? n.left : n.right;
        }
    }
}

}  // namespace corrtext
