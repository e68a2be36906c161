#include "mstm/anchors.hpp"

#include "mstm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mstm {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

void check_decreasing(const std::vector<ArchSpec>& specs, double complex_score) {
    double prev = complex_score;
    for (const auto& s : specs) {
        const double c = complexity(s);
        if (c >= prev)
            throw std::logic_error("anchor set is not strictly decreasing in complexity");
        prev = c;
    }
}

} // namespace

AnchorSet derive_anchors(const ArchSpec& complex_spec, int k) {
    validate_spec(complex_spec);
    if (k < 1) throw std::invalid_argument("derive_anchors: k must be >= 1");
    AnchorSet out;

    if (const auto* poly = std::get_if<Polynomial>(&complex_spec)) {
        if (k > poly->degree - 1)
            throw std::invalid_argument("polynomial family admits only degree-1 anchors down to 1");
        for (int d = poly->degree - 1; d >= poly->degree - k; --d)
            out.specs.push_back(Polynomial{d});
    } else if (const auto* mlp = std::get_if<Mlp>(&complex_spec)) {
        const int depth = static_cast<int>(mlp->hidden_widths.size());
        if (k > depth - 2)
            throw std::invalid_argument("mlp of depth " + std::to_string(depth) +
                                        " admits at most " + std::to_string(depth - 2) +
                                        " anchors");
        for (int d = depth - 1; d >= depth - k; --d) {
            Mlp a = *mlp;
            a.hidden_widths.resize(static_cast<std::size_t>(d));
            out.specs.push_back(std::move(a));
        }
    } else if (const auto* ens = std::get_if<TreeEnsemble>(&complex_spec)) {
        const int hi = std::min(60, ens->n_trees - 1);
        const int lo = 3;
        if (hi < lo || k > hi - lo + 1)
            throw std::invalid_argument("tree ensemble admits too few anchor sizes for k");
        const int depth = std::min(6, ens->max_depth);
        // Geometric grid of tree counts from hi down to lo, forced distinct.
        std::vector<int> counts(static_cast<std::size_t>(k), hi);
        if (k > 1) {
            const double ratio = std::pow(static_cast<double>(lo) / hi,
                                          1.0 / static_cast<double>(k - 1));
            double v = hi;
            for (int i = 0; i < k; ++i) {
                counts[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(v));
                v *= ratio;
            }
            // Force a strictly decreasing sequence inside [lo, hi].
            counts.back() = std::max(counts.back(), lo);
            for (int i = k - 2; i >= 0; --i)
                counts[static_cast<std::size_t>(i)] =
                    std::min(hi, std::max(counts[static_cast<std::size_t>(i)],
                                          counts[static_cast<std::size_t>(i + 1)] + 1));
            for (int i = 1; i < k; ++i)
                counts[static_cast<std::size_t>(i)] =
                    std::min(counts[static_cast<std::size_t>(i)],
                             counts[static_cast<std::size_t>(i - 1)] - 1);
        }
        for (int i = 0; i < k; ++i) {
            TreeEnsemble a;
            a.kind = i % 2 == 0 ? EnsembleKind::Boosted : EnsembleKind::Forest;
            a.n_trees = counts[static_cast<std::size_t>(i)];
            a.max_depth = depth;
            a.learning_rate = ens->learning_rate;
            out.specs.push_back(a);
        }
    } else if (const auto* cart = std::get_if<Cart>(&complex_spec)) {
        if (k > cart->max_depth - 1)
            throw std::invalid_argument("cart admits at most max_depth-1 anchors");
        for (int d = cart->max_depth - 1; d >= cart->max_depth - k; --d) {
            Cart a = *cart;
            a.max_depth = d;
            out.specs.push_back(a);
        }
    } else {
        throw std::invalid_argument("no anchor recipe for family " + spec_name(complex_spec));
    }

    check_decreasing(out.specs, complexity(complex_spec));
    return out;
}

ArchSpec perturb(const ArchSpec& anchor, const PerturbConfig& cfg, std::uint64_t seed) {
    validate_spec(anchor);
    if (cfg.identity) return anchor;
    std::mt19937_64 rng(splitmix64(seed));

    if (const auto* mlp = std::get_if<Mlp>(&anchor)) {
        Mlp m = *mlp;
        static constexpr double kFactors[] = {0.5, 0.75, 1.25, 1.5};
        const int steps = uniform_int(rng, 1, std::max(1, cfg.max_steps));
        for (int s = 0; s < steps; ++s) {
            const auto layer = static_cast<std::size_t>(
                uniform_int(rng, 0, static_cast<int>(m.hidden_widths.size()) - 1));
            const bool remove = rng() % 2 == 0;
            if (remove && m.hidden_widths.size() >= 2) {
                m.hidden_widths.erase(m.hidden_widths.begin() + static_cast<long>(layer));
            } else {
                const double f = kFactors[rng() % 4];
                m.hidden_widths[layer] =
                    std::max(1, static_cast<int>(std::lround(m.hidden_widths[layer] * f)));
            }
        }
        return m;
    }
    if (const auto* ens = std::get_if<TreeEnsemble>(&anchor)) {
        TreeEnsemble t = *ens;
        t.max_depth = std::max(1, t.max_depth + uniform_int(rng, -cfg.depth_jitter,
                                                            cfg.depth_jitter));
        return t;
    }
    if (const auto* cart = std::get_if<Cart>(&anchor)) {
        Cart c = *cart;
        c.max_depth = std::max(1, c.max_depth + uniform_int(rng, -cfg.depth_jitter,
                                                            cfg.depth_jitter));
        return c;
    }
    if (const auto* poly = std::get_if<Polynomial>(&anchor)) {
        Polynomial p = *poly;
        p.degree = std::max(1, p.degree + uniform_int(rng, -cfg.degree_jitter,
                                                      cfg.degree_jitter));
        return p;
    }
    return anchor; // linear families have no architecture knobs
}

} // namespace mstm
