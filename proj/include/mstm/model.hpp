#pragma once

#include "mstm/mlp.hpp"
#include "mstm/tree.hpp"
#include "mstm/types.hpp"

#include "json.hpp"

namespace mstm {

struct LinearParams {
    Vector coef; // polynomial: ascending degree; linear: [bias, w_1..w_d]
};

struct TreeParams {
    DecisionTree tree;
};

struct EnsembleParams {
    EnsembleModel model;
};

struct MlpParams {
    MlpModel model;
};

struct TabulatedParams {
    Vector xs; // ascending
    Vector ys;
};

struct TrainedModel {
    ArchSpec spec;
    int n_classes = 0; // 0 for regression
    int input_dim = 0;
    std::variant<LinearParams, TreeParams, EnsembleParams, MlpParams, TabulatedParams> params;

    Task task() const { return n_classes > 0 ? Task::Classification : Task::Regression; }
    // M x n_classes probability rows, or M x 1 reals.
    Matrix predict(const Matrix& X) const;
};

TrainedModel fit(const ArchSpec& spec, const Matrix& X, const TargetSpec& targets,
                 const FitConfig& cfg);

// Nearest-x lookup model over a fixed grid; regression only.
TrainedModel make_tabulated(const Vector& xs, const Vector& ys);

// Leaf index per row; model must be a Cart.
std::vector<int> cart_leaf_assignment(const TrainedModel& model, const Matrix& X);

nlohmann::json spec_to_json(const ArchSpec& spec);
ArchSpec spec_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

} // namespace mstm
