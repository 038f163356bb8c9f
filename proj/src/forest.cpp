#include "wavezoom/forest.hpp"

#include <algorithm>
#include <numeric>

#include "wavezoom/errors.hpp"
#include "wavezoom/parallel.hpp"
#include "wavezoom/rng.hpp"

namespace wz {

double RegressionTree::predict(std::span<const double> x) const {
    if (nodes_.empty()) throw Error("empty regression tree");
    std::int32_t k = 0;
    while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
        const Node& n = nodes_[static_cast<std::size_t>(k)];
        k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(k)].value;
}

double Forest::predict(std::span<const double> x) const {
    if (trees_.empty()) throw Error("forest is not trained");
    if (x.size() != n_features_) throw ShapeError("forest input has the wrong dimension");
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(x);
    return s / static_cast<double>(trees_.size());
}

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& p, Rng& rng)
        : x_(x), y_(y), p_(p), rng_(rng) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        nodes_.clear();
        grow(rows, 0);
        return RegressionTree(std::move(nodes_));
    }

private:
    std::int32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        const std::size_t n = rows.size();
        double sum = 0.0;
        double lo = y_[static_cast<Eigen::Index>(rows[0])], hi = lo;
        for (auto r : rows) {
            const double v = y_[static_cast<Eigen::Index>(r)];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        RegressionTree::Node node;
        node.count = static_cast<std::uint32_t>(n);
        node.value = lo == hi ? lo : sum / static_cast<double>(n);
        const bool can_split = lo != hi && n >= 2 * p_.min_leaf && (p_.max_depth == 0 || depth < p_.max_depth);
        if (can_split) {
            Split best = best_split(rows, sum);
            if (best.feature >= 0) {
                std::vector<std::size_t> left, right;
                for (auto r : rows) {
                    (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
                }
                rows.clear();
                rows.shrink_to_fit();
                node.feature = best.feature;
                node.threshold = best.threshold;
                nodes_[static_cast<std::size_t>(id)] = node;
                const auto l = grow(left, depth + 1);
                const auto rr = grow(right, depth + 1);
                nodes_[static_cast<std::size_t>(id)].left = l;
                nodes_[static_cast<std::size_t>(id)].right = rr;
                return id;
            }
        }
        nodes_[static_cast<std::size_t>(id)] = node;
        return id;
    }

    struct Split {
        std::int32_t feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    // Maximizes the reduction of the sum of squared errors.
    Split best_split(const std::vector<std::size_t>& rows, double sum) {
        const std::size_t n = rows.size();
        const auto d = static_cast<std::size_t>(x_.cols());
        std::vector<std::size_t> features(d);
        std::iota(features.begin(), features.end(), std::size_t{0});
        std::size_t tried = d;
        if (p_.max_features > 0 && p_.max_features < d) {
            rng_.shuffle(features.begin(), features.end());
            tried = p_.max_features;
        }
        Split best;
        const double base = sum * sum / static_cast<double>(n);
        std::vector<std::pair<double, double>> col(n);
        for (std::size_t f = 0; f < tried; ++f) {
            const auto feat = static_cast<Eigen::Index>(features[f]);
            for (std::size_t k = 0; k < n; ++k) {
                const auto r = static_cast<Eigen::Index>(rows[k]);
                col[k] = {x_(r, feat), y_[r]};
            }
            std::sort(col.begin(), col.end());
            double left_sum = 0.0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                left_sum += col[k].second;
                const std::size_t nl = k + 1, nr = n - nl;
                if (nl < p_.min_leaf) continue;
                if (nr < p_.min_leaf) break;
                if (col[k].first == col[k + 1].first) continue;
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(nl) +
                                    right_sum * right_sum / static_cast<double>(nr) - base;
                if (gain > best.gain) {
                    const double a = col[k].first, b = col[k + 1].first;
                    double thr = a + 0.5 * (b - a);
                    if (thr >= b) thr = a;
                    best = {static_cast<std::int32_t>(feat), thr, gain};
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    const ForestParams& p_;
    Rng& rng_;
    std::vector<RegressionTree::Node> nodes_;
};

Forest fit_forest(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                  const ForestParams& params, std::size_t jobs) {
    const auto n = static_cast<std::size_t>(inputs.rows());
    if (n == 0) throw ConfigError("forest training set is empty");
    if (targets.size() != inputs.rows()) throw ShapeError("forest targets do not match the input rows");
    if (params.n_trees == 0 || params.min_leaf == 0) throw ConfigError("forest needs n_trees >= 1 and min_leaf >= 1");
    if (!(params.bootstrap_ratio > 0.0)) throw ConfigError("bootstrap_ratio must be positive");
    std::vector<RegressionTree> trees(params.n_trees);
    parallel_for(params.n_trees, jobs, [&](std::size_t t) {
        Rng rng(mix_seed(params.seed, t));
        std::vector<std::size_t> rows;
        if (params.bootstrap) {
            const auto m = std::max<std::size_t>(
                1, static_cast<std::size_t>(params.bootstrap_ratio * static_cast<double>(n) + 0.5));
            rows.resize(m);
            for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
        } else {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        TreeBuilder builder(inputs, targets, params, rng);
        trees[t] = builder.build(std::move(rows));
    });
    return Forest(static_cast<std::size_t>(inputs.cols()), std::move(trees));
}

}  // namespace wz
