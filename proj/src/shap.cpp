#include "corrtext/shap.hpp"

#include "corrtext/csv.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace corrtext {

namespace {

struct PathElement {
    int feature = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double weight = 0.0;
};

void extend_path(std::vector<PathElement>& path, std::size_t depth, double zero_fraction,
                 double one_fraction, int feature) {
    path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
    const double d1 = static_cast<double>(depth + 1);
    for (std::size_t i = depth; i-- > 0;) {
        path[i + 1].weight += one_fraction * path[i].weight * static_cast<double>(i + 1) / d1;
        path[i].weight = zero_fraction * path[i].weight * static_cast<double>(depth - i) / d1;
    }
}

void unwind_path(std::vector<PathElement>& path, std::size_t depth, std::size_t index) {
    const double one = path[index].one_fraction;
    const double zero = path[index].zero_fraction;
    const double d1 = static_cast<double>(depth + 1);
    double next = path[depth].weight;
    for (std::size_t i = depth; i-- > 0;) {
        if (one != 0.0) {
            const double tmp = path[i].weight;
            path[i].weight = next * d1 / (static_cast<double>(i + 1) * one);
            next = tmp - path[i].weight * zero * static_cast<double>(depth - i) / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * static_cast<double>(depth - i));
        }
    }
    for (std::size_t i = index; i < depth; ++i) {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const std::vector<PathElement>& path, std::size_t depth, std::size_t index) {
    const double one = path[index].one_fraction;
    const double zero = path[index].zero_fraction;
    const double d1 = static_cast<double>(depth + 1);
    double next = path[depth].weight;
    double total = 0.0;
    for (std::size_t i = depth; i-- > 0;) {
        if (one != 0.0) {
            const double tmp = next * d1 / (static_cast<double>(i + 1) * one);
            total += tmp;
            next = path[i].weight - tmp * zero * static_cast<double>(depth - i) / d1;
        } else {
            total += path[i].weight / (zero * static_cast<double>(depth - i) / d1);
        }
    }
    return total;
}

class ShapRecursion {
public:
    ShapRecursion(const RegressionTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                  Eigen::VectorXd& phi)
        : tree_(tree), x_(x), phi_(phi) {}

    void run() { recurse(0, {}, 0, 1.0, 1.0, -1); }

private:
    void recurse(int node_index, std::vector<PathElement> path, std::size_t depth, double zero_fraction,
                 double one_fraction, int feature) {
        path.resize(depth + 1);
        extend_path(path, depth, zero_fraction, one_fraction, feature);
        const TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];

        if (node.is_leaf()) {
            for (std::size_t i = 1; i <= depth; ++i) {
                const double w = unwound_path_sum(path, depth, i);
                const PathElement& el = path[i];
                phi_[el.feature] += w * (el.one_fraction - el.zero_fraction) * node.value;
            }
            return;
        }

        const double v = x_[node.feature];
        const bool go_left = std::isnan(v) ? node.default_left : v < node.threshold;
        const int hot = go_left ? node.left : node.right;
        const int cold = go_left ? node.right : node.left;
        const double hot_zero = tree_.nodes[static_cast<std::size_t>(hot)].cover / node.cover;
        const double cold_zero = tree_.nodes[static_cast<std::size_t>(cold)].cover / node.cover;
        double incoming_zero = 1.0;
        double incoming_one = 1.0;

        std::size_t unique_depth = depth;
        for (std::size_t k = 1; k <= depth; ++k) {
            if (path[k].feature == node.feature) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind_path(path, unique_depth, k);
                --unique_depth;
                break;
            }
        }
        path.resize(unique_depth + 1);
        recurse(hot, path, unique_depth + 1, hot_zero * incoming_zero, incoming_one, node.feature);
        recurse(cold, std::move(path), unique_depth + 1, cold_zero * incoming_zero, 0.0, node.feature);
    }

    const RegressionTree& tree_;
    const Eigen::Ref<const Eigen::RowVectorXd>& x_;
    Eigen::VectorXd& phi_;
};

double subtree_expectation(const RegressionTree& tree, int index,
                           const Eigen::Ref<const Eigen::RowVectorXd>& x, unsigned long present) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
    if (n.is_leaf()) return n.value;
    if (present & (1UL << n.feature)) {
        const double v = x[n.feature];
        const bool left = std::isnan(v) ? n.default_left : v < n.threshold;
        return subtree_expectation(tree, left ? n.left : n.right, x, present);
    }
    const TreeNode& l = tree.nodes[static_cast<std::size_t>(n.left)];
    const TreeNode& r = tree.nodes[static_cast<std::size_t>(n.right)];
    return (l.cover * subtree_expectation(tree, n.left, x, present) +
            r.cover * subtree_expectation(tree, n.right, x, present)) /
           n.cover;
}

void check_width(const GBTModel& model, Eigen::Index cols) {
    if (static_cast<std::size_t>(cols) != model.feature_names.size()) {
        throw DataError("row has " + std::to_string(cols) + " features, model expects " +
                        std::to_string(model.feature_names.size()));
    }
}

}  // namespace

double ShapVector::contribution(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("unknown feature '" + name + "'");
    return phi[it - names.begin()];
}

std::vector<std::pair<double, double>> ShapReport::dependence(const std::string& feature) const {
    const auto it = std::find(names.begin(), names.end(), feature);
    if (it == names.end()) throw std::out_of_range("unknown feature '" + feature + "'");
    const auto c = it - names.begin();
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index r = 0; r < values.rows(); ++r) out.emplace_back(values(r, c), phi(r, c));
    return out;
}

double expected_value(const RegressionTree& tree) {
    if (tree.nodes.empty()) return 0.0;
    const Eigen::RowVectorXd none = Eigen::RowVectorXd::Zero(1);
    return subtree_expectation(tree, 0, none, 0UL);
}

double expected_value(const GBTModel& model) {
    double sum = 0.0;
    for (const auto& t : model.trees) sum += expected_value(t);
    return model.base_value + model.learning_rate * sum;
}

Eigen::VectorXd tree_shap(const RegressionTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                          std::size_t n_features) {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_features));
    if (tree.nodes.size() <= 1) return phi;
    ShapRecursion(tree, x, phi).run();
    return phi;
}

ShapVector tree_shap(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    check_width(model, x.size());
    ShapVector out;
    out.names = model.feature_names;
    out.base = expected_value(model);
    out.phi = Eigen::VectorXd::Zero(x.size());
    for (const auto& t : model.trees) out.phi += tree_shap(t, x, model.feature_names.size());
    out.phi *= model.learning_rate;
    return out;
}

ShapVector tree_shap(const GBTModel& model, const FeatureVector& x) {
    return tree_shap(model, model_row(model, x));
}

double coalition_value(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                       unsigned long present) {
    double sum = 0.0;
    for (const auto& t : model.trees) {
        if (!t.nodes.empty()) sum += subtree_expectation(t, 0, x, present);
    }
    return model.base_value + model.learning_rate * sum;
}

ShapVector brute_force_shapley(const GBTModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    check_width(model, x.size());
    const std::size_t m = model.feature_names.size();
    if (m > kMaxBruteForceFeatures) {
        throw std::invalid_argument("brute-force Shapley supports at most " +
                                    std::to_string(kMaxBruteForceFeatures) + " features, got " +
                                    std::to_string(m));
    }
    const unsigned long subsets = 1UL << m;
    std::vector<double> value(subsets);
    for (unsigned long s = 0; s < subsets; ++s) value[s] = coalition_value(model, x, s);

    std::vector<double> fact(m + 1, 1.0);
    for (std::size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);

    ShapVector out;
    out.names = model.feature_names;
    out.base = value[0];
    out.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const unsigned long bit = 1UL << i;
        double acc = 0.0;
        for (unsigned long s = 0; s < subsets; ++s) {
            if (s & bit) continue;
            const auto k = static_cast<std::size_t>(__builtin_popcountl(s));
            const double w = fact[k] * fact[m - k - 1] / fact[m];
            acc += w * (value[s | bit] - value[s]);
        }
        out.phi[static_cast<Eigen::Index>(i)] = acc;
    }
    return out;
}

ShapReport shap_report(const GBTModel& model, const Eigen::MatrixXd& x) {
    if (x.rows() == 0) throw DataError("cannot build a SHAP report from an empty matrix");
    check_width(model, x.cols());
    ShapReport report;
    report.names = model.feature_names;
    report.values = x;
    report.phi.resize(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        report.phi.row(r) = tree_shap(model, x.row(r)).phi.transpose();
    }
    const Eigen::RowVectorXd mean_abs = report.phi.cwiseAbs().colwise().mean();
    for (std::size_t c = 0; c < report.names.size(); ++c) {
        report.ranking.emplace_back(report.names[c], mean_abs[static_cast<Eigen::Index>(c)]);
    }
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return report;
}

ShapReport shap_report(const GBTModel& model, const FeatureMatrix& m) {
    if (m.names != model.feature_names) {
        return shap_report(model, m.select_features(model.feature_names).x);
    }
    return shap_report(model, m.x);
}

void save_shap_report(const ShapReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        CsvWriter w(dir / "shap_ranking.csv");
        w.header({"feature", "mean_abs_shap"});
        for (const auto& [name, v] : report.ranking) {
            w.field(name);
            w.field(v);
            w.end_row();
        }
    }
    for (const auto& name : report.names) {
        CsvWriter w(dir / ("shap_dependence_" + name + ".csv"));
        w.header({"value", "shap"});
        for (const auto& [value, phi] : report.dependence(name)) {
            w.field(value);
            w.field(phi);
            w.end_row();
        }
    }
}

}  // namespace corrtext
