#pragma once

#include "mstm/model.hpp"

namespace mstm {

// Fraction of rows whose argmax equals the label; ties toward the lowest
// class index.
double accuracy(const Matrix& predictions, const std::vector<int>& labels);

double mse(const Vector& predictions, const Vector& targets);

// Mean of -log p[true class], probabilities clamped at 1e-12.
double cross_entropy(const Matrix& predictions, const std::vector<int>& labels);

// WGI = (1/n_t) sum_i n_i * GI_i over the leaves a test set lands in.
double weighted_gini_index(const TrainedModel& tree_model, const Matrix& X,
                           const std::vector<int>& labels);

struct ConfidenceSummary {
    double sac = 0; // simple average confidence, whole test set
    double cac = 0; // complex average confidence, whole test set
    double scc = 0; // simple corrected confidence (0 when n_corrected == 0)
    double ccc = 0; // complex corrected confidence
    int n_corrected = 0;
};

// Corrected set: rows misclassified by simple_before and classified
// correctly by simple_after. Confidences are true-class probabilities of
// simple_before and the complex model.
ConfidenceSummary confidence_analysis(const TrainedModel& simple_before,
                                      const TrainedModel& simple_after,
                                      const TrainedModel& complex_model,
                                      const Matrix& X, const std::vector<int>& labels);

struct MetricReport {
    std::string name;
    std::vector<double> per_split;
    double mean = 0;
    double stddev = 0; // sample (n-1) standard deviation, 0 when n == 1
};

MetricReport aggregate_splits(const std::string& name, const std::vector<double>& per_split);

} // namespace mstm
