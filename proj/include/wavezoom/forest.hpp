#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace wz {

struct ForestParams {
    std::size_t n_trees = 100;
    std::size_t min_leaf = 2;
    std::size_t max_depth = 0;  // 0: unlimited
    bool bootstrap = true;
    double bootstrap_ratio = 1.0;
    std::size_t max_features = 0;  // 0: every input dimension at every split
    std::uint64_t seed = 0;
};

/// CART regression tree; leaves predict the mean of their training targets.
class RegressionTree {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;     // x[feature] <= threshold goes left
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
        std::uint32_t count = 0;  // training rows reaching the node
    };

    RegressionTree() = default;
    explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    double predict(std::span<const double> x) const;
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    friend class TreeBuilder;
    std::vector<Node> nodes_;
};

/// Bootstrap-aggregated regression trees; prediction is the mean over trees.
class Forest {
public:
    Forest() = default;
    Forest(std::size_t n_features, std::vector<RegressionTree> trees)
        : n_features_(n_features), trees_(std::move(trees)) {}

    double predict(std::span<const double> x) const;
    std::size_t n_features() const { return n_features_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }

private:
    std::size_t n_features_ = 0;
    std::vector<RegressionTree> trees_;
};

/// `inputs` holds one training row per sample.
Forest fit_forest(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                  const ForestParams& params, std::size_t jobs = 1);

}  // namespace wz
