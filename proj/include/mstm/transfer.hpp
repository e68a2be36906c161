#pragma once

#include "mstm/model.hpp"

namespace mstm {

struct Distill {
    double temperature = 4.0;
};

enum class WeightNormalize { None, MeanOne };

struct ConfidenceWeight {
    WeightNormalize normalize = WeightNormalize::MeanOne;
};

using TransferMethod = std::variant<Distill, ConfidenceWeight>;

std::string method_name(const TransferMethod& m);

struct PlanHop {
    ArchSpec spec;
    TransferMethod method;
};

// The ordered tuple of intermediate hops; empty hops = direct 1-hop transfer.
struct TransferPlan {
    std::vector<PlanHop> hops;
    TransferMethod final_method = Distill{};
};

// Classification teachers: temperature-softened probability rows.
// Regression teachers: predictions as Real targets (temperature ignored).
TargetSpec make_soft_targets(const TrainedModel& teacher, const Matrix& X,
                             double temperature);

// w_i = teacher probability of the true class of row i.
Vector confidence_weights(const TrainedModel& teacher, const Matrix& X,
                          const std::vector<int>& labels, WeightNormalize normalize);

// One teacher -> student transfer step.
TrainedModel hop_transfer(const TrainedModel& teacher, const ArchSpec& student_spec,
                          const Matrix& X, const TargetSpec& true_targets,
                          const TransferMethod& method, const FitConfig& cfg);

struct ChainResult {
    TrainedModel simple;
    std::vector<TrainedModel> intermediates;
};

// t(C, S, I): trains hop 0 against the complex model, hop i against hop i-1,
// and the simple model against the last intermediate. With an empty plan this
// is exactly a single hop_transfer call.
ChainResult chain_transfer(const TrainedModel& complex_model, const TransferPlan& plan,
                           const ArchSpec& simple_spec, const Matrix& X,
                           const TargetSpec& true_targets, const FitConfig& cfg);

} // namespace mstm
