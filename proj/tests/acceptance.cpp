// Acceptance suite: one criterion per function, one [PASS]/[FAIL] line each.
// Run with no arguments for all criteria, or pass a criterion number.

#include "mstm/experiment.hpp"
#include "mstm/linear.hpp"
#include "mstm/rng.hpp"

#include <map>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace mstm;

namespace {

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

Vector random_vector(int n, std::uint64_t seed) {
    auto rng = make_rng(seed ^ 0xabcdull);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

Matrix random_prob_rows(int rows, int cols, std::uint64_t seed) {
    auto rng = make_rng(seed ^ 0x77ull);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
        m.row(i) /= m.row(i).sum();
    }
    return m;
}

std::vector<int> random_labels(int n, int k, std::uint64_t seed) {
    auto rng = make_rng(seed ^ 0x1234ull);
    std::vector<int> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    return out;
}

struct SyntheticInstance {
    TrainedModel teacher;
    Matrix Xtrain, Xval;
    TargetSpec ytrain, yval;
    AnchorSet anchors;
};

SyntheticInstance make_instance(std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const SyntheticData data = synthetic_poly_dataset(spec);
    SyntheticInstance inst;
    inst.teacher = make_tabulated(data.x, data.noisy);
    const SplitIndices idx = split_indices(static_cast<int>(data.x.size()), 0.25, 400, 0, seed);
    const auto gather = [&](const std::vector<int>& rows, Matrix& X, TargetSpec& y) {
        X.resize(static_cast<Eigen::Index>(rows.size()), 1);
        Vector v(X.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            X(static_cast<Eigen::Index>(i), 0) = data.x[rows[i]];
            v[static_cast<Eigen::Index>(i)] = data.noisy[rows[i]];
        }
        y = RealTargets{v};
    };
    gather(idx.train, inst.Xtrain, inst.ytrain);
    gather(idx.validation, inst.Xval, inst.yval);
    for (int d = 4; d >= 1; --d) inst.anchors.specs.push_back(Polynomial{d});
    return inst;
}

// --------------------------------------------------------------------------

bool criterion_1() {
    double total = 0;
    bool halved = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SyntheticRunResult r = run_synthetic_preset(SyntheticPreset::NoisyBisquare, seed);
        total += r.mse_one_hop;
        if (r.mse_two_hop > 0.55 * r.mse_one_hop) {
            std::printf("  seed %llu: ratio %.4f\n", (unsigned long long)seed,
                        r.mse_two_hop / r.mse_one_hop);
            halved = false;
        }
    }
    const double mean = total / 10;
    if (mean < 1.6 || mean > 3.0) {
        std::printf("  mean one-hop mse %.4f outside [1.6, 3.0]\n", mean);
        return false;
    }
    return halved;
}

bool criterion_2() {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const SyntheticRunResult r = run_synthetic_preset(SyntheticPreset::CleanBisquare, seed);
        if (r.mse_two_hop > r.mse_one_hop) {
            std::printf("  seed %llu: %.6f > %.6f\n", (unsigned long long)seed, r.mse_two_hop,
                        r.mse_one_hop);
            return false;
        }
    }
    return true;
}

bool criterion_3() {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const SyntheticRunResult r =
            run_synthetic_preset(SyntheticPreset::NoisyLeastSquares, seed);
        const double diff = (r.coef_one_hop - r.coef_two_hop).cwiseAbs().maxCoeff();
        if (diff > 1e-8) {
            std::printf("  seed %llu: coefficient gap %.3e\n", (unsigned long long)seed, diff);
            return false;
        }
    }
    return true;
}

bool criterion_4() {
    const SyntheticInstance inst = make_instance(4);
    SearchConfig cfg;
    cfg.m = 2;
    cfg.seed = 4;
    cfg.reward = RewardKind::NegMse;
    cfg.hop_method = Distill{1.0};
    cfg.final_method = Distill{1.0};
    PerturbConfig pcfg;
    pcfg.identity = true;
    const SearchResult greedy =
        mstm_search(inst.teacher, inst.anchors, RobustLinear{}, inst.Xtrain, inst.ytrain,
                    inst.Xval, inst.yval, cfg, pcfg);
    const BruteForceResult bf = brute_force_search(
        inst.teacher, inst.anchors, RobustLinear{}, inst.Xtrain, inst.ytrain, inst.Xval,
        inst.yval, 2, RewardKind::NegMse, Distill{1.0}, Distill{1.0}, cfg.base_fit);
    const double gap = std::abs(greedy.best_reward - bf.best_reward);
    if (gap > 1e-9) {
        std::printf("  greedy %.12f vs brute force %.12f (gap %.3e)\n", greedy.best_reward,
                    bf.best_reward, gap);
        return false;
    }
    return true;
}

bool criterion_5() {
    bool ok = true;
    int strict = 0, cells = 0;
    for (std::uint64_t ds_seed = 1; ds_seed <= 3; ++ds_seed) {
        for (const std::string method : {"distill", "confidence_weight"}) {
            nlohmann::json m = method == "distill"
                                   ? nlohmann::json{{"type", "distill"}, {"temperature", 4.0}}
                                   : nlohmann::json{{"type", "confidence_weight"}};
            nlohmann::json j = {
                {"data",
                 {{"type", "gaussian_mixture"}, {"n", 2000}, {"d", 10}, {"classes", 2},
                  {"clusters", 4}, {"seed", ds_seed}}},
                {"complex",
                 {{"family", "tree_ensemble"}, {"kind", "boosted"}, {"n_trees", 100},
                  {"max_depth", 6}}},
                {"simple", {{"family", "cart"}, {"max_depth", 3}}},
                {"anchors", {{"k", 10}}},
                {"baselines", {"one_hop", "mstm"}},
                {"search", {{"m", 3}, {"hop_method", m}, {"final_method", m}}},
                {"seed", 100 + ds_seed},
            };
            const ReportBundle bundle = run_experiment(config_from_json(j), 4);
            double one_hop = 0, mstm_acc = 0;
            int n1 = 0, n2 = 0;
            for (const auto& row : bundle.rows) {
                if (row.metric != "accuracy") continue;
                if (row.method == "one_hop") {
                    one_hop += row.value;
                    ++n1;
                } else if (row.method == "mstm") {
                    mstm_acc += row.value;
                    ++n2;
                }
            }
            one_hop /= n1;
            mstm_acc /= n2;
            ++cells;
            if (mstm_acc > one_hop) ++strict;
            std::printf("  dataset %llu %s: one-hop %.4f, mstm %.4f\n",
                        (unsigned long long)ds_seed, method.c_str(), one_hop, mstm_acc);
            if (mstm_acc < one_hop - 0.005) ok = false;
        }
    }
    if (2 * strict < cells) {
        std::printf("  mstm strictly better on only %d of %d cells\n", strict, cells);
        ok = false;
    }
    return ok;
}

bool criterion_6() {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SyntheticInstance inst = make_instance(seed);
        SearchConfig cfg;
        cfg.m = 3;
        cfg.n = 2;
        cfg.seed = seed;
        cfg.reward = RewardKind::NegMse;
        cfg.hop_method = Distill{1.0};
        cfg.final_method = Distill{1.0};
        PerturbConfig pcfg;
        const SearchResult res =
            mstm_search(inst.teacher, inst.anchors, RobustLinear{}, inst.Xtrain, inst.ytrain,
                        inst.Xval, inst.yval, cfg, pcfg);
        int prev = 0;
        for (const auto& hop : res.trace.hops) {
            if (hop.sampled.empty() || hop.sampled.front() != 0) {
                std::printf("  seed %llu: hop without index 0\n", (unsigned long long)seed);
                return false;
            }
            double phi_reward = 0;
            for (const auto& c : hop.candidates)
                if (c.anchor_index == 0) phi_reward = c.reward;
            if (hop.chosen_reward < phi_reward) {
                std::printf("  seed %llu: phi dominance violated\n", (unsigned long long)seed);
                return false;
            }
            if (hop.chosen_index > 0) {
                if (hop.chosen_index <= prev) {
                    std::printf("  seed %llu: chosen indices not increasing\n",
                                (unsigned long long)seed);
                    return false;
                }
                prev = hop.chosen_index;
            }
        }
    }
    return true;
}

bool criterion_7() {
    // Additive functions on a 5-element ground set.
    const std::vector<double> v = {1.0, 2.5, -0.5, 4.0, 0.25};
    const SetFunction additive = [&](const std::vector<int>& s) {
        double t = 0;
        for (int i : s) t += v[static_cast<std::size_t>(i)];
        return t;
    };
    for (int ml = 0; ml < 32; ++ml)
        for (int mp = 1; mp < 32; ++mp) {
            if (ml & mp) continue;
            std::vector<int> L, P;
            for (int i = 0; i < 5; ++i) {
                if (ml & (1 << i)) L.push_back(i);
                if (mp & (1 << i)) P.push_back(i);
            }
            const auto gamma = submodularity_ratio(additive, L, P);
            if (gamma && std::abs(*gamma - 1.0) > 1e-12) {
                std::printf("  additive gamma %.15f != 1\n", *gamma);
                return false;
            }
        }

    // Seeded coverage function vs exhaustive evaluation.
    auto rng = make_rng(7);
    std::vector<std::set<int>> sets(5);
    for (auto& s : sets)
        for (int e = 0; e < 12; ++e)
            if (rng() % 2) s.insert(e);
    const SetFunction cover = [&](const std::vector<int>& s) {
        std::set<int> u;
        for (int i : s) u.insert(sets[static_cast<std::size_t>(i)].begin(),
                                 sets[static_cast<std::size_t>(i)].end());
        return static_cast<double>(u.size());
    };
    for (int ml = 0; ml < 32; ++ml)
        for (int mp = 1; mp < 32; ++mp) {
            if (ml & mp) continue;
            std::vector<int> L, P;
            for (int i = 0; i < 5; ++i) {
                if (ml & (1 << i)) L.push_back(i);
                if (mp & (1 << i)) P.push_back(i);
            }
            double numer = 0;
            for (int i : P) {
                std::vector<int> li = L;
                li.push_back(i);
                numer += cover(li) - cover(L);
            }
            std::vector<int> lp = L;
            lp.insert(lp.end(), P.begin(), P.end());
            const double denom = cover(lp) - cover(L);
            const auto gamma = submodularity_ratio(cover, L, P);
            if (denom == 0) {
                if (gamma) return false;
            } else if (!gamma || std::abs(*gamma - numer / denom) > 1e-12) {
                std::printf("  coverage gamma mismatch\n");
                return false;
            }
        }
    return true;
}

bool criterion_8() {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Matrix p = random_prob_rows(25, 4, seed);
        const auto labels = random_labels(25, 4, seed);
        int correct = 0;
        double ce = 0;
        for (int i = 0; i < 25; ++i) {
            int best = 0;
            for (int j = 1; j < 4; ++j)
                if (p(i, j) > p(i, best)) best = j;
            if (best == labels[static_cast<std::size_t>(i)]) ++correct;
            ce -= std::log(p(i, labels[static_cast<std::size_t>(i)]));
        }
        if (std::abs(accuracy(p, labels) - correct / 25.0) > 1e-10) return false;
        if (std::abs(cross_entropy(p, labels) - ce / 25.0) > 1e-10) return false;

        const Vector a = random_vector(25, seed * 3);
        const Vector b = random_vector(25, seed * 3 + 1);
        double sq = 0;
        for (int i = 0; i < 25; ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
        if (std::abs(mse(a, b) - sq / 25.0) > 1e-10) return false;

        std::vector<double> vals;
        for (int i = 0; i < 8; ++i) vals.push_back(a[i]);
        double mean = 0;
        for (double x : vals) mean += x;
        mean /= 8;
        double var = 0;
        for (double x : vals) var += (x - mean) * (x - mean);
        const MetricReport r = aggregate_splits("x", vals);
        if (std::abs(r.mean - mean) > 1e-10) return false;
        if (std::abs(r.stddev - std::sqrt(var / 7)) > 1e-10) return false;
    }

    // Weighted Gini vs a per-leaf tally oracle.
    FitConfig cfg;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Matrix X = random_matrix(120, 3, seed + 900);
        const auto labels = random_labels(120, 3, seed + 901);
        const TrainedModel tree = fit(Cart{4, 5}, X, HardTargets{labels, 3}, cfg);
        const auto leaves = cart_leaf_assignment(tree, X);
        std::map<int, std::vector<double>> tally;
        for (int i = 0; i < 120; ++i) {
            auto& t = tally[leaves[static_cast<std::size_t>(i)]];
            t.resize(3, 0.0);
            t[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 1;
        }
        double expected = 0;
        for (const auto& [leaf, counts] : tally) {
            double n = 0, sq = 0;
            for (double c : counts) n += c;
            for (double c : counts) sq += (c / n) * (c / n);
            expected += n * (1.0 - sq);
        }
        if (std::abs(weighted_gini_index(tree, X, labels) - expected / 120.0) > 1e-10)
            return false;
    }
    return true;
}

bool criterion_9() {
    // IRLS per-step descent.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Vector x = random_vector(80, seed * 5 + 2);
        Vector y = 1.2 * x.array() - 0.3 + 0.1 * random_vector(80, seed * 5 + 3).array();
        for (int i = 0; i < 8; ++i) y[i] += 8.0;
        const IrlsResult r = irls_bisquare_fit(polynomial_design(x, 1), y, 4.685, 1e-10, 50);
        for (const auto& step : r.steps)
            if (step.objective_after > step.objective_before + 1e-9) {
                std::printf("  irls ascent at seed %llu\n", (unsigned long long)seed);
                return false;
            }
    }

    // Mlp gradient vs central finite differences.
    for (const auto output : {MlpOutput::Softmax, MlpOutput::Linear}) {
        const int out_dim = output == MlpOutput::Softmax ? 3 : 1;
        MlpModel m = init_mlp(Mlp{{5, 4}, output}, 3, out_dim, 99);
        const Matrix X = random_matrix(10, 3, 41);
        const Matrix Y = output == MlpOutput::Softmax ? random_prob_rows(10, 3, 42)
                                                      : random_matrix(10, 1, 42);
        const Vector w = Vector::Ones(10);
        std::vector<Matrix> gw;
        std::vector<Vector> gb;
        mlp_loss_grad(m, X, Y, w, gw, gb);
        std::vector<Matrix> dw;
        std::vector<Vector> db;
        const double h = 1e-6;
        for (std::size_t l = 0; l < m.weights.size(); ++l)
            for (int idx = 0; idx < static_cast<int>(m.weights[l].size()); idx += 3) {
                MlpModel mp = m, mm = m;
                mp.weights[l].data()[idx] += h;
                mm.weights[l].data()[idx] -= h;
                const double fd = (mlp_loss_grad(mp, X, Y, w, dw, db) -
                                   mlp_loss_grad(mm, X, Y, w, dw, db)) /
                                  (2 * h);
                if (std::abs(fd - gw[l].data()[idx]) > 1e-4 * std::max(1.0, std::abs(fd))) {
                    std::printf("  mlp gradient mismatch\n");
                    return false;
                }
            }
    }

    // Weight-1 fits equal unweighted fits in every family.
    const Matrix X = random_matrix(60, 2, 70);
    const auto labels = random_labels(60, 2, 71);
    const Vector yreg = random_vector(60, 72);
    Matrix X1 = random_matrix(60, 1, 73);
    FitConfig plain;
    plain.epochs = 15;
    FitConfig weighted = plain;
    weighted.sample_weights = Vector::Ones(60);

    const std::vector<std::pair<ArchSpec, bool>> cases = {
        {Polynomial{3}, false},     {LinearLS{}, false},
        {RobustLinear{}, false},    {Cart{3, 1}, true},
        {TreeEnsemble{EnsembleKind::Boosted, 6, 3, 0.1}, true},
        {TreeEnsemble{EnsembleKind::Forest, 6, 3, 0.1}, true},
        {Mlp{{5}}, true},
    };
    for (const auto& [spec, classify] : cases) {
        const Matrix& feats = std::holds_alternative<Polynomial>(spec) ? X1 : X;
        const TargetSpec targets =
            classify ? TargetSpec{HardTargets{labels, 2}} : TargetSpec{RealTargets{yreg}};
        const TrainedModel a = fit(spec, feats, targets, plain);
        const TrainedModel b = fit(spec, feats, targets, weighted);
        if ((a.predict(feats) - b.predict(feats)).cwiseAbs().maxCoeff() > 1e-12) {
            std::printf("  weight-1 mismatch for %s\n", spec_name(spec).c_str());
            return false;
        }
    }
    return true;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool criterion_10() {
    nlohmann::json j = {
        {"data",
         {{"type", "gaussian_mixture"}, {"n", 600}, {"d", 5}, {"classes", 2}, {"clusters", 3}}},
        {"complex",
         {{"family", "tree_ensemble"}, {"kind", "boosted"}, {"n_trees", 20}, {"max_depth", 4}}},
        {"simple", {{"family", "cart"}, {"max_depth", 3}}},
        {"anchors", {{"k", 5}}},
        {"baselines", {"direct", "one_hop", "mstm", "mstm_np"}},
        {"search", {{"m", 2}}},
        {"split", {{"repeats", 3}, {"validation_size", 80}}},
        {"seed", 11},
    };
    const ExperimentConfig cfg = config_from_json(j);
    const auto dir = std::filesystem::temp_directory_path() / "mstm_acceptance_10";
    std::filesystem::remove_all(dir);
    emit_report(run_experiment(cfg, 1), (dir / "serial").string());
    emit_report(run_experiment(cfg, 4), (dir / "parallel").string());
    emit_report(run_experiment(cfg, 1), (dir / "rerun").string());
    const std::string a = slurp(dir / "serial" / "results.csv");
    const std::string b = slurp(dir / "parallel" / "results.csv");
    const std::string c = slurp(dir / "rerun" / "results.csv");
    if (a.empty() || a != b || a != c) {
        std::printf("  results.csv differs across runs (%zu/%zu/%zu bytes)\n", a.size(),
                    b.size(), c.size());
        return false;
    }
    return true;
}

struct Criterion {
    int number;
    const char* label;
    std::function<bool()> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "synthetic noisy regime: mean 1-hop mse in range, 2-hop at most 0.55x", criterion_1},
        {2, "synthetic clean regime: 2-hop never worse", criterion_2},
        {3, "least-squares chain collapse within 1e-8", criterion_3},
        {4, "greedy search matches brute force within 1e-9", criterion_4},
        {5, "tabular dominance of mstm over 1-hop", criterion_5},
        {6, "search trace invariants over 50 seeds", criterion_6},
        {7, "submodularity ratio diagnostics", criterion_7},
        {8, "metric oracles within 1e-10", criterion_8},
        {9, "numerical invariants: irls, mlp gradients, unit weights", criterion_9},
        {10, "byte-identical reruns under jobs 1 and 4", criterion_10},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.number != only) continue;
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            std::printf("  exception: %s\n", e.what());
        }
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", c.number, c.label);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
