#pragma once

#include "mstm/types.hpp"

namespace mstm {

// Ordered anchor architectures A_1..A_k, strictly decreasing complexity,
// every one strictly simpler than the complex spec. Index 0 (no model) is
// never stored.
struct AnchorSet {
    std::vector<ArchSpec> specs;
};

struct PerturbConfig {
    int max_steps = 3;                  // L, Mlp perturbation steps
    int depth_jitter = 2;               // trees
    double width_jitter_fraction = 0.25; // reserved; Mlp widths use a fixed factor set
    int degree_jitter = 1;              // polynomials
    bool identity = false;              // disables perturbation entirely
};

AnchorSet derive_anchors(const ArchSpec& complex_spec, int k);

// Randomized architecture jitter; pure function of (anchor, cfg, seed).
ArchSpec perturb(const ArchSpec& anchor, const PerturbConfig& cfg, std::uint64_t seed);

} // namespace mstm
