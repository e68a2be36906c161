#pragma once

#include "mstm/types.hpp"

namespace mstm {

// Weighted least squares: argmin_b sum_i w_i (y_i - design_i . b)^2.
// Solves via column-pivoted QR on the sqrt-weighted system; rank-deficient
// designs fall back to ridge-regularized normal equations (1e-10 * I) when
// allow_ridge is set, otherwise throw.
Vector wls_solve(const Matrix& design, const Vector& y, const Vector& weights,
                 bool allow_ridge = true);

// Vandermonde design [1, x, x^2, ..., x^degree].
Matrix polynomial_design(const Vector& x, int degree);

struct IrlsStep {
    double objective_before = 0; // Tukey objective at the step's scale
    double objective_after = 0;  // same scale, after the WLS update
    double scale = 0;
};

struct IrlsResult {
    Vector coef;
    std::vector<IrlsStep> steps;
};

// Tukey bisquare M-estimation by iteratively reweighted least squares.
// Initialized from OLS; residual scale = MAD/0.6745, re-estimated every
// iteration. Each step is an MM descent step for the objective at that
// step's scale (objective_after <= objective_before).
IrlsResult irls_bisquare_fit(const Matrix& design, const Vector& y, double c,
                             double tol, int max_iter,
                             const Vector* base_weights = nullptr);

// Tukey bisquare robustness weight, in [0, 1].
double bisquare_weight(double residual, double c, double scale);
// Tukey bisquare rho (objective contribution of one residual).
double bisquare_rho(double residual, double c, double scale);

// Row-wise softmax(log(p)/T); zeros clamped to 1e-12 before the log.
Matrix temperature_soften(const Matrix& probs, double temperature);

// 1 - sum (c_i / n)^2 over class counts; at least one count must be > 0.
double gini_impurity(const Vector& counts);

} // namespace mstm
