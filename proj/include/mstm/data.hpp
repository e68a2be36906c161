#pragma once

#include "mstm/types.hpp"

#include <map>
#include <string>

namespace mstm {

struct Dataset {
    Matrix X;
    TargetSpec targets;
    std::vector<std::string> feature_names;
    Task task = Task::Classification;
    std::vector<std::string> label_names; // classification: index -> original label
};

// UTF-8 CSV with a header row; non-label columns must be numeric.
// Classification labels are mapped to 0..K-1 in first-appearance order.
Dataset load_csv(const std::string& path, const std::string& label_column, Task task);

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
};

SplitIndices split_indices(int n, double test_fraction, int validation_size,
                           int repeat_index, std::uint64_t master_seed);

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx);

struct SyntheticSpec {
    double x_min = -14.0;
    double x_max = 14.0;
    double step = 0.01;
    // generator: y = 1e-5 * (x^5 + x^4 + x^3 + x^2 + x + 1)
    double coefficient = 1e-5;
    double noise_fraction = 0.2; // lowest-x fraction of the grid gets noise
    double noise_low = 0.0;
    double noise_high = 1.0;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    Vector x;     // ascending grid, inclusive endpoints (2801 by default)
    Vector clean; // ground-truth generator values
    Vector noisy; // clean + U[low,high] on the first floor(noise_fraction*N) points
};

SyntheticData synthetic_poly_dataset(const SyntheticSpec& spec);

// Seeded Gaussian-mixture classification task (several clusters per class).
Dataset gaussian_mixture_dataset(int n, int d, int n_classes, int clusters_per_class,
                                 std::uint64_t seed);

} // namespace mstm
