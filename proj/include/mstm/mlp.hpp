#pragma once

#include "mstm/types.hpp"

namespace mstm {

struct MlpModel {
    std::vector<Matrix> weights; // layer l: in x out
    std::vector<Vector> biases;
    MlpOutput output = MlpOutput::Softmax;

    int out_dim() const { return biases.empty() ? 0 : static_cast<int>(biases.back().size()); }
    Matrix predict(const Matrix& X) const; // softmax rows or linear column
};

// Seeded fan-in-scaled uniform init.
MlpModel init_mlp(const Mlp& spec, int input_dim, int output_dim, std::uint64_t seed);

// Weighted mean loss over the batch (cross-entropy for softmax output,
// 0.5 * squared error for linear) plus analytic gradients.
double mlp_loss_grad(const MlpModel& m, const Matrix& X, const Matrix& Y,
                     const Vector& weights, std::vector<Matrix>& grad_w,
                     std::vector<Vector>& grad_b);

// Mini-batch SGD with a seeded shuffle per epoch.
MlpModel train_mlp(const Mlp& spec, const Matrix& X, const TargetSpec& targets,
                   const FitConfig& cfg);

} // namespace mstm
