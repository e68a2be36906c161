#pragma once

#include "mstm/types.hpp"

namespace mstm {

enum class SplitCriterion { Gini, Sse };

struct TreeNode {
    int feature = -1; // -1 for leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Vector value; // leaf prediction (prob row, mean row or scalar)
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    int apply_row(const double* row) const;
    // Leaf node index per row.
    std::vector<int> apply(const Matrix& X) const;
    Matrix predict(const Matrix& X) const;
    int n_leaves() const;
};

struct TreeOptions {
    int max_depth = 3;
    int min_leaf = 1;
    SplitCriterion criterion = SplitCriterion::Sse;
    int feature_subsample = 0; // 0 = consider all features at each split
    std::uint64_t seed = 0;    // used only when feature_subsample > 0
    bool renormalize_leaves = false; // clamp leaf rows to >= 0 and normalize to sum 1
};

// Y is N x q: one-hot rows for Gini, arbitrary target rows (or a scalar
// column) for Sse. Weights are per-row and enter every split statistic, so
// doubling a weight equals duplicating the row for split selection.
DecisionTree train_tree(const Matrix& X, const Matrix& Y, const Vector& weights,
                        const TreeOptions& opt);

struct EnsembleModel {
    EnsembleKind kind = EnsembleKind::Boosted;
    Task task = Task::Regression;
    int n_classes = 0;
    double learning_rate = 0.1;
    double base_score = 0.0; // boosted regression init
    // Boosted classification: round-major, trees[r * K + k].
    std::vector<DecisionTree> trees;
};

EnsembleModel train_ensemble(const TreeEnsemble& spec, const Matrix& X,
                             const TargetSpec& targets, const FitConfig& cfg);

Matrix ensemble_predict(const EnsembleModel& model, const Matrix& X);

} // namespace mstm
