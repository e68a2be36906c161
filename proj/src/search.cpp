#include "mstm/search.hpp"

#include "mstm/metrics.hpp"
#include "mstm/parallel.hpp"
#include "mstm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace mstm {

double reward_value(RewardKind kind, const Matrix& predictions, const TargetSpec& truth) {
    switch (kind) {
    case RewardKind::Accuracy:
        return accuracy(predictions, std::get<HardTargets>(truth).labels);
    case RewardKind::NegMse:
        return -mse(predictions.col(0), target_reals(truth));
    case RewardKind::NegCrossEntropy:
        return -cross_entropy(predictions, std::get<HardTargets>(truth).labels);
    }
    throw std::logic_error("unknown reward kind");
}

int subset_size(int k, int m, double delta) {
    if (delta <= 0 || delta >= 1) throw std::invalid_argument("delta must be in (0,1)");
    if (k < 1 || m < 1) throw std::invalid_argument("subset_size: k and m must be >= 1");
    const double v = (static_cast<double>(k) / m) * std::log(1.0 / delta);
    const int n = static_cast<int>(std::ceil(v - 1e-9));
    return std::clamp(n, 1, k);
}

namespace {

struct Candidate {
    int anchor_index = 0;
    std::optional<ArchSpec> spec;
    std::optional<TrainedModel> intermediate;
    TrainedModel simple;
    double reward = 0;
};

int resolve_subset(const SearchConfig& cfg, int k) {
    if (cfg.n && cfg.delta)
        throw std::invalid_argument("SearchConfig: n and delta are mutually exclusive");
    if (cfg.n) {
        if (*cfg.n < 1) throw std::invalid_argument("SearchConfig: n must be >= 1");
        return std::min(*cfg.n, k);
    }
    if (cfg.delta) return subset_size(k, cfg.m, *cfg.delta);
    return k; // default: consider every live anchor
}

} // namespace

SearchResult mstm_search(const TrainedModel& complex_model, const AnchorSet& anchors,
                         const ArchSpec& simple_spec, const Matrix& Xtrain,
                         const TargetSpec& ytrain, const Matrix& Xval,
                         const TargetSpec& yval, const SearchConfig& cfg,
                         const PerturbConfig& pcfg, int jobs) {
    if (Xval.rows() < 1) throw std::invalid_argument("mstm_search: empty validation set");
    const int k = static_cast<int>(anchors.specs.size());
    if (k < 1) throw std::invalid_argument("mstm_search: empty anchor set");
    if (cfg.m < 1) throw std::invalid_argument("mstm_search: m must be >= 1");
    const int n_sub = resolve_subset(cfg, k);

    SearchResult result;
    result.plan.final_method = cfg.final_method;
    std::vector<int> live(static_cast<std::size_t>(k));
    std::iota(live.begin(), live.end(), 1);

    const TrainedModel* prefix_teacher = &complex_model;
    std::optional<TrainedModel> owned_teacher;
    std::optional<Candidate> winner;

    for (int hop = 1; hop <= cfg.m; ++hop) {
        // Sample n live indices plus 0.
        std::vector<int> sampled = live;
        if (static_cast<int>(sampled.size()) > n_sub) {
            std::mt19937_64 rng(mix_seed(cfg.seed, 0x5a3b, static_cast<std::uint64_t>(hop)));
            for (int i = 0; i < n_sub; ++i) {
                const int j =
                    i + static_cast<int>(rng() % static_cast<std::uint64_t>(sampled.size() - i));
                std::swap(sampled[static_cast<std::size_t>(i)], sampled[static_cast<std::size_t>(j)]);
            }
            sampled.resize(static_cast<std::size_t>(n_sub));
            std::sort(sampled.begin(), sampled.end());
        }
        sampled.insert(sampled.begin(), 0);

        std::vector<Candidate> cands(sampled.size());
        const auto evaluate = [&](int ci) {
            Candidate& cand = cands[static_cast<std::size_t>(ci)];
            const int j = sampled[static_cast<std::size_t>(ci)];
            cand.anchor_index = j;
            const std::uint64_t cand_seed =
                mix_seed(cfg.seed, static_cast<std::uint64_t>(hop), static_cast<std::uint64_t>(j));
            const TrainedModel* teacher = prefix_teacher;
            if (j > 0) {
                cand.spec = perturb(anchors.specs[static_cast<std::size_t>(j - 1)], pcfg,
                                    mix_seed(cand_seed, 0xe0));
                FitConfig icfg = cfg.base_fit;
                icfg.seed = mix_seed(cand_seed, 0x1f);
                cand.intermediate =
                    hop_transfer(*teacher, *cand.spec, Xtrain, ytrain, cfg.hop_method, icfg);
                teacher = &*cand.intermediate;
            }
            FitConfig scfg = cfg.base_fit;
            scfg.seed = mix_seed(cand_seed, 0x5f);
            cand.simple =
                hop_transfer(*teacher, simple_spec, Xtrain, ytrain, cfg.final_method, scfg);
            cand.reward = reward_value(cfg.reward, cand.simple.predict(Xval), yval);
        };
        parallel_for(static_cast<int>(cands.size()), jobs, evaluate);

        // Argmax with ties toward phi, then the lowest anchor index.
        std::size_t best = 0;
        for (std::size_t ci = 1; ci < cands.size(); ++ci)
            if (cands[ci].reward > cands[best].reward) best = ci;

        HopTrace ht;
        ht.sampled = sampled;
        for (const auto& c : cands)
            ht.candidates.push_back({c.anchor_index, c.spec, c.reward});
        ht.chosen_index = cands[best].anchor_index;
        ht.chosen_spec = cands[best].spec;
        ht.chosen_reward = cands[best].reward;

        winner = std::move(cands[best]);
        if (winner->anchor_index > 0) {
            result.plan.hops.push_back({*winner->spec, cfg.hop_method});
            owned_teacher = std::move(winner->intermediate);
            prefix_teacher = &*owned_teacher;
            const int chosen = winner->anchor_index;
            live.erase(std::remove_if(live.begin(), live.end(),
                                      [&](int r) { return r <= chosen; }),
                       live.end());
        }
        ht.remaining_after = live;
        result.trace.hops.push_back(std::move(ht));
        if (live.empty()) break;
    }

    result.simple = std::move(winner->simple);
    result.best_reward = winner->reward;
    return result;
}

BruteForceResult brute_force_search(const TrainedModel& complex_model,
                                    const AnchorSet& anchors, const ArchSpec& simple_spec,
                                    const Matrix& Xtrain, const TargetSpec& ytrain,
                                    const Matrix& Xval, const TargetSpec& yval, int m,
                                    RewardKind reward, const TransferMethod& hop_method,
                                    const TransferMethod& final_method, const FitConfig& cfg,
                                    long max_evals) {
    const int k = static_cast<int>(anchors.specs.size());
    double total = 1;
    for (int i = 0; i < m; ++i) total *= k + 1;
    if (total > static_cast<double>(max_evals))
        throw std::invalid_argument("brute_force_search: (k+1)^m exceeds the evaluation budget");

    BruteForceResult out;
    out.best_reward = -std::numeric_limits<double>::infinity();
    out.best_plan.final_method = final_method;

    std::vector<int> tuple(static_cast<std::size_t>(m), 0);
    std::vector<const TrainedModel*> teachers; // chain prefix per depth
    std::vector<TrainedModel> owned;

    // Depth-first enumeration reusing the trained chain prefix.
    std::function<void(int, const TrainedModel*)> recurse = [&](int depth,
                                                                const TrainedModel* teacher) {
        if (depth == m) {
            FitConfig scfg = cfg;
            scfg.seed = mix_seed(cfg.seed, 0xbf5f);
            const TrainedModel simple =
                hop_transfer(*teacher, simple_spec, Xtrain, ytrain, final_method, scfg);
            const double r = reward_value(reward, simple.predict(Xval), yval);
            out.table.push_back({tuple, r});
            if (r > out.best_reward) {
                out.best_reward = r;
                out.best_tuple = tuple;
            }
            return;
        }
        for (int j = 0; j <= k; ++j) {
            tuple[static_cast<std::size_t>(depth)] = j;
            if (j == 0) {
                recurse(depth + 1, teacher);
                continue;
            }
            FitConfig icfg = cfg;
            icfg.seed = mix_seed(cfg.seed, 0xbf1f, static_cast<std::uint64_t>(depth),
                                 static_cast<std::uint64_t>(j));
            TrainedModel inter = hop_transfer(*teacher, anchors.specs[static_cast<std::size_t>(j - 1)],
                                              Xtrain, ytrain, hop_method, icfg);
            recurse(depth + 1, &inter);
        }
    };
    recurse(0, &complex_model);

    for (int j : out.best_tuple)
        if (j > 0)
            out.best_plan.hops.push_back({anchors.specs[static_cast<std::size_t>(j - 1)], hop_method});
    return out;
}

std::optional<double> submodularity_ratio(const SetFunction& f, const std::vector<int>& L,
                                          const std::vector<int>& P) {
    std::set<int> ls(L.begin(), L.end());
    for (int p : P)
        if (ls.count(p))
            throw std::invalid_argument("submodularity_ratio: L and P must be disjoint");

    const double f_l = f(L);
    double numer = 0;
    for (int i : P) {
        std::vector<int> li = L;
        li.push_back(i);
        numer += f(li) - f_l;
    }
    std::vector<int> lp = L;
    lp.insert(lp.end(), P.begin(), P.end());
    const double denom = f(lp) - f_l;
    if (denom == 0) return std::nullopt;
    return numer / denom;
}

} // namespace mstm
