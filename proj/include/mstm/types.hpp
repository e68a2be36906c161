#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mstm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Task { Classification, Regression };

// ---------------------------------------------------------------------------
// Architecture descriptors
// ---------------------------------------------------------------------------

struct Polynomial {
    int degree = 1; // univariate, coefficients stored in ascending degree
};

struct LinearLS {};

struct RobustLinear {
    double tuning_c = 4.685; // bisquare tuning constant (95% efficiency)
};

struct Cart {
    int max_depth = 3;
    int min_leaf = 1;
    Task task = Task::Classification;
};

enum class EnsembleKind { Boosted, Forest };

struct TreeEnsemble {
    EnsembleKind kind = EnsembleKind::Boosted;
    int n_trees = 100;
    int max_depth = 6;
    double learning_rate = 0.1; // boosted only
};

enum class MlpOutput { Softmax, Linear };

struct Mlp {
    std::vector<int> hidden_widths;
    MlpOutput output = MlpOutput::Softmax;
};

// Frozen 1-D prediction table. Lets a fixed set of (possibly noisy) teacher
// outputs on a grid act as a complex model inside the transfer machinery.
struct Tabulated {};

using ArchSpec = std::variant<Polynomial, LinearLS, RobustLinear, Cart, TreeEnsemble, Mlp, Tabulated>;

// Throws std::invalid_argument when a field is out of bounds.
void validate_spec(const ArchSpec& spec);

// Deterministic parameter-count proxy; strictly monotone in degree, depth,
// width and tree count within each family.
double complexity(const ArchSpec& spec);

// Task implied by the spec alone; nullopt when the spec fits either task
// (tree ensembles take their task from the targets).
std::optional<Task> spec_task(const ArchSpec& spec);

std::string spec_name(const ArchSpec& spec);

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

struct HardTargets {
    std::vector<int> labels;
    int n_classes = 0; // 0 -> inferred as max label + 1
};

struct SoftTargets {
    Matrix probs; // rows sum to 1 within 1e-9
};

struct RealTargets {
    Vector values;
};

using TargetSpec = std::variant<HardTargets, SoftTargets, RealTargets>;

void validate_targets(const TargetSpec& t);
Eigen::Index target_rows(const TargetSpec& t);
Task target_task(const TargetSpec& t);
int target_classes(const TargetSpec& t); // 0 for Real
// Hard labels or Real values as a scalar column (for regression trainers).
Vector target_reals(const TargetSpec& t);
TargetSpec subset_targets(const TargetSpec& t, const std::vector<int>& idx);

// ---------------------------------------------------------------------------
// Fit configuration
// ---------------------------------------------------------------------------

struct FitConfig {
    std::uint64_t seed = 0;
    std::optional<Vector> sample_weights; // nonnegative, at least one > 0
    // Mlp only
    int epochs = 200;
    double learning_rate = 0.05;
    int batch_size = 32;
    // RobustLinear only
    double irls_tol = 1e-8;
    int irls_max_iter = 100;
};

} // namespace mstm
