#include "corrtext/gbt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace corrtext {

namespace {

using json = nlohmann::json;

// Relative floor below which a gain is treated as rounding noise.
constexpr double kGainTolerance = 1e-12;

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t n_left = 0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const std::vector<std::vector<std::size_t>>& sorted,
                const GBTParams& params)
        : x_(x), sorted_(sorted), params_(params), in_node_(static_cast<std::size_t>(x.rows()), 0) {}

    // Builds a tree on `residual`; leaf_of[i] receives the leaf index of row i.
    RegressionTree build(const Eigen::VectorXd& residual, std::vector<int>& leaf_of) {
        residual_ = &residual;
        tree_.nodes.clear();
        leaf_of_ = &leaf_of;
        std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
        std::iota(rows.begin(), rows.end(), 0);
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[static_cast<std::size_t>(id)].cover = static_cast<double>(rows.size());

        double sum = 0.0;
        for (auto r : rows) sum += (*residual_)[static_cast<Eigen::Index>(r)];

        SplitCandidate split;
        if (depth < params_.max_depth && rows.size() >= 2 * params_.min_samples_leaf) {
            split = best_split(rows, sum);
        }
        if (split.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(id)].value = sum / static_cast<double>(rows.size());
            for (auto r : rows) (*leaf_of_)[r] = id;
            return id;
        }

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            const double v = x_(static_cast<Eigen::Index>(r), split.feature);
            (v < split.threshold ? left : right).push_back(r);
        }
        const int l = grow(left, depth + 1);
        const int rgt = grow(right, depth + 1);
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = rgt;
        node.default_left = left.size() >= right.size();
        return id;
    }

    SplitCandidate best_split(const std::vector<std::size_t>& rows, double sum) {
        const double n = static_cast<double>(rows.size());
        double sum_sq = 0.0;
        for (auto r : rows) {
            const double v = (*residual_)[static_cast<Eigen::Index>(r)];
            sum_sq += v * v;
            in_node_[r] = 1;
        }
        const double parent = sum * sum / n;
        const double floor = std::max(params_.min_gain, kGainTolerance * sum_sq);

        SplitCandidate best;
        std::vector<std::size_t> ordered;
        ordered.reserve(rows.size());
        for (int f = 0; f < static_cast<int>(x_.cols()); ++f) {
            ordered.clear();
            for (auto r : sorted_[static_cast<std::size_t>(f)]) {
                if (in_node_[r]) ordered.push_back(r);
            }
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
                left_sum += (*residual_)[static_cast<Eigen::Index>(ordered[i])];
                const std::size_t n_left = i + 1;
                const std::size_t n_right = ordered.size() - n_left;
                if (n_left < params_.min_samples_leaf) continue;
                if (n_right < params_.min_samples_leaf) break;
                const double lo = x_(static_cast<Eigen::Index>(ordered[i]), f);
                const double hi = x_(static_cast<Eigen::Index>(ordered[i + 1]), f);
                if (!(lo < hi)) continue;
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                    right_sum * right_sum / static_cast<double>(n_right) - parent;
                if (gain > floor && gain > best.gain) {
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid > lo)) mid = hi;
                    best = {f, mid, gain, n_left};
                }
            }
        }
        for (auto r : rows) in_node_[r] = 0;
        return best;
    }

    const Eigen::MatrixXd& x_;
    const std::vector<std::vector<std::size_t>>& sorted_;
    const GBTParams& params_;
    std::vector<char> in_node_;
    const Eigen::VectorXd* residual_ = nullptr;
    std::vector<int>* leaf_of_ = nullptr;
    RegressionTree tree_;
};

json node_to_json(const RegressionTree& tree, int index) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
    if (n.is_leaf()) return {{"leaf", n.value}, {"cover", n.cover}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"default_left", n.default_left},
            {"cover", n.cover},
            {"left", node_to_json(tree, n.left)},
            {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const json& j, RegressionTree& tree, std::size_t n_features, std::size_t depth) {
    if (depth > 4096) throw ModelFormatError("tree too deep");
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode node;
    node.cover = j.at("cover").get<double>();
    if (j.contains("leaf")) {
        node.value = j.at("leaf").get<double>();
        if (!std::isfinite(node.value)) throw ModelFormatError("non-finite leaf value");
    } else {
        node.feature = j.at("feature").get<int>();
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features) {
            throw ModelFormatError("feature index out of range");
        }
        node.threshold = j.at("threshold").get<double>();
        if (!std::isfinite(node.threshold)) throw ModelFormatError("non-finite threshold");
        node.default_left = j.at("default_left").get<bool>();
        node.left = node_from_json(j.at("left"), tree, n_features, depth + 1);
        node.right = node_from_json(j.at("right"), tree, n_features, depth + 1);
    }
    tree.nodes[static_cast<std::size_t>(id)] = node;
    return id;
}

}  // namespace

void GBTParams::validate() const {
    std::vector<std::string> bad;
    if (n_trees == 0) bad.push_back("n_trees");
    if (max_depth == 0) bad.push_back("max_depth");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) bad.push_back("learning_rate");
    if (min_samples_leaf == 0) bad.push_back("min_samples_leaf");
    if (!(min_gain >= 0.0) || !std::isfinite(min_gain)) bad.push_back("min_gain");
    if (bad.empty()) return;
    std::string msg = "invalid GBT parameters:";
    for (const auto& b : bad) msg += " " + b;
    throw ConfigError(msg);
}

std::size_t RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack = {{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        best = std::max(best, d);
        if (!n.is_leaf()) {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return best;
}

GBTModel train(const Eigen::MatrixXd& x_in, const Eigen::VectorXd& y_in,
               std::vector<std::string> feature_names, const GBTParams& params) {
    params.validate();
    if (x_in.rows() != y_in.size()) throw DataError("feature/target row mismatch");
    if (static_cast<std::size_t>(x_in.cols()) != feature_names.size()) {
        throw DataError("feature name count does not match columns");
    }

    // Complete rows in a canonical order (lexicographic on features, then target),
    // so the fitted model does not depend on input row order.
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < x_in.rows(); ++r) {
        if (!x_in.row(r).hasNaN() && std::isfinite(y_in[r])) rows.push_back(r);
    }
    if (rows.size() < 2 * params.min_samples_leaf || rows.empty()) {
        throw DataError("too few complete rows to train: " + std::to_string(rows.size()) +
                        " (need " + std::to_string(std::max<std::size_t>(1, 2 * params.min_samples_leaf)) + ")");
    }
    std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < x_in.cols(); ++c) {
            if (x_in(a, c) != x_in(b, c)) return x_in(a, c) < x_in(b, c);
        }
        return y_in[a] < y_in[b];
    });
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(n, x_in.cols());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = x_in.row(rows[static_cast<std::size_t>(i)]);
        y[i] = y_in[rows[static_cast<std::size_t>(i)]];
    }

    GBTModel model;
    model.feature_names = std::move(feature_names);
    model.learning_rate = params.learning_rate;
    if ((y.array() == y[0]).all()) {
        model.base_value = y[0];
        return model;
    }
    model.base_value = y.sum() / static_cast<double>(n);

    std::vector<std::vector<std::size_t>> sorted(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        auto& order = sorted[static_cast<std::size_t>(c)];
        order.resize(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return x(static_cast<Eigen::Index>(a), c) < x(static_cast<Eigen::Index>(b), c);
        });
    }

    TreeBuilder builder(x, sorted, params);
    Eigen::VectorXd tree_sum = Eigen::VectorXd::Zero(n);
    std::vector<int> leaf_of(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k < params.n_trees; ++k) {
        const Eigen::VectorXd residual =
            y - (model.base_value + model.learning_rate * tree_sum.array()).matrix();
        RegressionTree tree = builder.build(residual, leaf_of);
        if (tree.nodes.size() == 1) break;
        for (Eigen::Index i = 0; i < n; ++i) {
            tree_sum[i] += tree.nodes[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])].value;
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

GBTModel train(const FeatureMatrix& m, const GBTParams& params) {
    return train(m.x, m.y, m.names, params);
}

double predict_row(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    if (static_cast<std::size_t>(row.size()) != model.feature_names.size()) {
        throw DataError("row has " + std::to_string(row.size()) + " features, model expects " +
                        std::to_string(model.feature_names.size()));
    }
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(row);
    return model.base_value + model.learning_rate * sum;
}

Eigen::VectorXd predict(const GBTModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = predict_row(model, x.row(r));
    return out;
}

Eigen::RowVectorXd model_row(const GBTModel& model, const FeatureVector& x) {
    for (const auto& [name, value] : x.values) {
        if (std::find(model.feature_names.begin(), model.feature_names.end(), name) ==
            model.feature_names.end()) {
            throw DataError("unknown feature name '" + name + "'");
        }
    }
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(model.feature_names.size()));
    for (std::size_t c = 0; c < model.feature_names.size(); ++c) {
        const auto it = x.values.find(model.feature_names[c]);
        if (it == x.values.end()) {
            throw DataError("feature '" + model.feature_names[c] + "' missing from input");
        }
        row[static_cast<Eigen::Index>(c)] = it->second;
    }
    return row;
}

double predict(const GBTModel& model, const FeatureVector& x) {
    return predict_row(model, model_row(model, x));
}

Eigen::VectorXd staged_mse(const GBTModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(model.trees.size() + 1));
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(x.rows());
    for (std::size_t k = 0; k <= model.trees.size(); ++k) {
        if (k > 0) {
            for (Eigen::Index r = 0; r < x.rows(); ++r) sums[r] += model.trees[k - 1].predict(x.row(r));
        }
        const Eigen::VectorXd pred = (model.base_value + model.learning_rate * sums.array()).matrix();
        out[static_cast<Eigen::Index>(k)] = (pred - y).squaredNorm() / static_cast<double>(y.size());
    }
    return out;
}

std::string model_to_json(const GBTModel& model) {
    json doc;
    doc["format"] = "corrtext-gbt";
    doc["schema_version"] = kModelSchemaVersion;
    doc["base_value"] = model.base_value;
    doc["learning_rate"] = model.learning_rate;
    doc["feature_names"] = model.feature_names;
    doc["trees"] = json::array();
    for (const auto& tree : model.trees) doc["trees"].push_back(node_to_json(tree, 0));
    return doc.dump(1);
}

GBTModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != "corrtext-gbt") {
            throw ModelFormatError("not a corrtext-gbt model document");
        }
        const int version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw ModelFormatError("unsupported model schema version " + std::to_string(version) +
                                   " (expected " + std::to_string(kModelSchemaVersion) + ")");
        }
        GBTModel model;
        model.base_value = doc.at("base_value").get<double>();
        model.learning_rate = doc.at("learning_rate").get<double>();
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        for (const auto& t : doc.at("trees")) {
            RegressionTree tree;
            node_from_json(t, tree, model.feature_names.size(), 0);
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const GBTModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model '" + path.string() + "'");
    out << model_to_json(model) << '\n';
    if (!out) throw IoError("cannot write model '" + path.string() + "'");
}

GBTModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace corrtext
