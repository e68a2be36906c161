#pragma once

#include "mstm/anchors.hpp"
#include "mstm/transfer.hpp"

#include <functional>

namespace mstm {

enum class RewardKind { Accuracy, NegMse, NegCrossEntropy };

double reward_value(RewardKind kind, const Matrix& predictions, const TargetSpec& truth);

// ceil((k/m) * ln(1/delta)) clamped to [1, k].
int subset_size(int k, int m, double delta);

struct SearchConfig {
    int m = 3; // max hops
    std::optional<int> n;        // candidate subset size; mutually exclusive
    std::optional<double> delta; // with delta, which derives n via subset_size
    std::uint64_t seed = 0;
    RewardKind reward = RewardKind::Accuracy;
    TransferMethod hop_method = Distill{};
    TransferMethod final_method = Distill{};
    FitConfig base_fit;
};

struct CandidateEval {
    int anchor_index = 0; // 0 = phi (no model)
    std::optional<ArchSpec> perturbed_spec;
    double reward = 0;
};

struct HopTrace {
    std::vector<int> sampled; // always contains 0
    std::vector<CandidateEval> candidates;
    int chosen_index = 0;
    std::optional<ArchSpec> chosen_spec;
    double chosen_reward = 0;
    std::vector<int> remaining_after;
};

struct SearchTrace {
    std::vector<HopTrace> hops;
};

struct SearchResult {
    TrainedModel simple;
    TransferPlan plan;
    SearchTrace trace;
    double best_reward = 0;
};

// Algorithm: stochastic greedy selection of up to m intermediates. At each
// hop, n live anchor indices plus 0 are sampled; each candidate extends the
// fixed chain prefix and is scored by validation reward of the resulting
// simple model. Ties favor phi, then the lowest anchor index. Choosing an
// anchor prunes all indices <= it; choosing phi consumes the hop only.
SearchResult mstm_search(const TrainedModel& complex_model, const AnchorSet& anchors,
                         const ArchSpec& simple_spec, const Matrix& Xtrain,
                         const TargetSpec& ytrain, const Matrix& Xval,
                         const TargetSpec& yval, const SearchConfig& cfg,
                         const PerturbConfig& pcfg, int jobs = 1);

struct BruteForceEntry {
    std::vector<int> tuple; // anchor indices, 0 = phi
    double reward = 0;
};

struct BruteForceResult {
    std::vector<int> best_tuple;
    TransferPlan best_plan;
    double best_reward = 0;
    std::vector<BruteForceEntry> table;
};

// Exact maximizer over {A_0..A_k}^m with identity perturbation. Refuses to
// run when (k+1)^m exceeds max_evals.
BruteForceResult brute_force_search(const TrainedModel& complex_model,
                                    const AnchorSet& anchors, const ArchSpec& simple_spec,
                                    const Matrix& Xtrain, const TargetSpec& ytrain,
                                    const Matrix& Xval, const TargetSpec& yval, int m,
                                    RewardKind reward, const TransferMethod& hop_method,
                                    const TransferMethod& final_method, const FitConfig& cfg,
                                    long max_evals = 200000);

using SetFunction = std::function<double(const std::vector<int>&)>;

// gamma_{L,P} = sum_{i in P} (f(L u i) - f(L)) / (f(L u P) - f(L));
// nullopt when the denominator is zero. L and P must be disjoint.
std::optional<double> submodularity_ratio(const SetFunction& f, const std::vector<int>& L,
                                          const std::vector<int>& P);

} // namespace mstm
