#include "mstm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mstm {

namespace {

struct SpecValidator {
    void operator()(const Polynomial& p) const {
        if (p.degree < 1) throw std::invalid_argument("Polynomial degree must be >= 1");
    }
    void operator()(const LinearLS&) const {}
    void operator()(const RobustLinear& r) const {
        if (r.tuning_c <= 0) throw std::invalid_argument("RobustLinear tuning_c must be > 0");
    }
    void operator()(const Cart& c) const {
        if (c.max_depth < 1) throw std::invalid_argument("Cart max_depth must be >= 1");
        if (c.min_leaf < 1) throw std::invalid_argument("Cart min_leaf must be >= 1");
    }
    void operator()(const TreeEnsemble& t) const {
        if (t.n_trees < 1) throw std::invalid_argument("TreeEnsemble n_trees must be >= 1");
        if (t.max_depth < 1) throw std::invalid_argument("TreeEnsemble max_depth must be >= 1");
        if (t.kind == EnsembleKind::Boosted &&
            (t.learning_rate <= 0 || t.learning_rate > 1))
            throw std::invalid_argument("TreeEnsemble learning_rate must be in (0,1]");
    }
    void operator()(const Mlp& m) const {
        if (m.hidden_widths.empty())
            throw std::invalid_argument("Mlp needs at least one hidden layer");
        for (int w : m.hidden_widths)
            if (w < 1) throw std::invalid_argument("Mlp hidden widths must be >= 1");
    }
    void operator()(const Tabulated&) const {}
};

} // namespace

void validate_spec(const ArchSpec& spec) { std::visit(SpecValidator{}, spec); }

double complexity(const ArchSpec& spec) {
    struct V {
        double operator()(const Polynomial& p) const { return p.degree + 1.0; }
        double operator()(const LinearLS&) const { return 2.0; }
        double operator()(const RobustLinear&) const { return 2.0; }
        double operator()(const Cart& c) const { return std::pow(2.0, c.max_depth); }
        double operator()(const TreeEnsemble& t) const {
            return t.n_trees * std::pow(2.0, t.max_depth);
        }
        double operator()(const Mlp& m) const {
            // weight count with unit nominal input/output widths
            double total = 0;
            int prev = 1;
            for (int w : m.hidden_widths) {
                total += static_cast<double>(prev + 1) * w;
                prev = w;
            }
            total += prev + 1;
            return total;
        }
        double operator()(const Tabulated&) const { return 1e18; }
    };
    return std::visit(V{}, spec);
}

std::optional<Task> spec_task(const ArchSpec& spec) {
    struct V {
        std::optional<Task> operator()(const Polynomial&) const { return Task::Regression; }
        std::optional<Task> operator()(const LinearLS&) const { return Task::Regression; }
        std::optional<Task> operator()(const RobustLinear&) const { return Task::Regression; }
        std::optional<Task> operator()(const Cart& c) const { return c.task; }
        std::optional<Task> operator()(const TreeEnsemble&) const { return std::nullopt; }
        std::optional<Task> operator()(const Mlp& m) const {
            return m.output == MlpOutput::Softmax ? Task::Classification : Task::Regression;
        }
        std::optional<Task> operator()(const Tabulated&) const { return Task::Regression; }
    };
    return std::visit(V{}, spec);
}

std::string spec_name(const ArchSpec& spec) {
    struct V {
        std::string operator()(const Polynomial& p) const {
            return "polynomial(" + std::to_string(p.degree) + ")";
        }
        std::string operator()(const LinearLS&) const { return "linear_ls"; }
        std::string operator()(const RobustLinear&) const { return "robust_linear"; }
        std::string operator()(const Cart& c) const {
            return "cart(d" + std::to_string(c.max_depth) + ")";
        }
        std::string operator()(const TreeEnsemble& t) const {
            return std::string(t.kind == EnsembleKind::Boosted ? "boosted" : "forest") + "(" +
                   std::to_string(t.n_trees) + ",d" + std::to_string(t.max_depth) + ")";
        }
        std::string operator()(const Mlp& m) const {
            return "mlp(depth " + std::to_string(m.hidden_widths.size()) + ")";
        }
        std::string operator()(const Tabulated&) const { return "tabulated"; }
    };
    return std::visit(V{}, spec);
}

void validate_targets(const TargetSpec& t) {
    if (const auto* h = std::get_if<HardTargets>(&t)) {
        const int k = target_classes(t);
        for (int l : h->labels)
            if (l < 0 || l >= k)
                throw std::invalid_argument("hard label out of range [0, n_classes)");
    } else if (const auto* s = std::get_if<SoftTargets>(&t)) {
        for (Eigen::Index i = 0; i < s->probs.rows(); ++i) {
            const double sum = s->probs.row(i).sum();
            if (std::abs(sum - 1.0) > 1e-6)
                throw std::invalid_argument("soft target row does not sum to 1");
        }
    } else {
        const auto& r = std::get<RealTargets>(t);
        if (!r.values.allFinite())
            throw std::invalid_argument("real targets must be finite");
    }
}

Eigen::Index target_rows(const TargetSpec& t) {
    struct V {
        Eigen::Index operator()(const HardTargets& h) const {
            return static_cast<Eigen::Index>(h.labels.size());
        }
        Eigen::Index operator()(const SoftTargets& s) const { return s.probs.rows(); }
        Eigen::Index operator()(const RealTargets& r) const { return r.values.size(); }
    };
    return std::visit(V{}, t);
}

Task target_task(const TargetSpec& t) {
    return std::holds_alternative<RealTargets>(t) ? Task::Regression : Task::Classification;
}

int target_classes(const TargetSpec& t) {
    struct V {
        int operator()(const HardTargets& h) const {
            if (h.n_classes > 0) return h.n_classes;
            int mx = -1;
            for (int l : h.labels) mx = std::max(mx, l);
            return mx + 1;
        }
        int operator()(const SoftTargets& s) const { return static_cast<int>(s.probs.cols()); }
        int operator()(const RealTargets&) const { return 0; }
    };
    return std::visit(V{}, t);
}

Vector target_reals(const TargetSpec& t) {
    if (const auto* r = std::get_if<RealTargets>(&t)) return r->values;
    if (const auto* h = std::get_if<HardTargets>(&t)) {
        Vector v(static_cast<Eigen::Index>(h->labels.size()));
        for (std::size_t i = 0; i < h->labels.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = h->labels[i];
        return v;
    }
    throw std::invalid_argument("soft targets cannot be used as real-valued targets");
}

TargetSpec subset_targets(const TargetSpec& t, const std::vector<int>& idx) {
    struct V {
        const std::vector<int>& idx;
        TargetSpec operator()(const HardTargets& h) const {
            HardTargets out;
            out.n_classes = h.n_classes > 0 ? h.n_classes : target_classes(TargetSpec{h});
            out.labels.reserve(idx.size());
            for (int i : idx) out.labels.push_back(h.labels.at(static_cast<std::size_t>(i)));
            return out;
        }
        TargetSpec operator()(const SoftTargets& s) const {
            SoftTargets out;
            out.probs.resize(static_cast<Eigen::Index>(idx.size()), s.probs.cols());
            for (std::size_t r = 0; r < idx.size(); ++r)
                out.probs.row(static_cast<Eigen::Index>(r)) = s.probs.row(idx[r]);
            return out;
        }
        TargetSpec operator()(const RealTargets& rt) const {
            RealTargets out;
            out.values.resize(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t r = 0; r < idx.size(); ++r)
                out.values[static_cast<Eigen::Index>(r)] = rt.values[idx[r]];
            return out;
        }
    };
    return std::visit(V{idx}, t);
}

} // namespace mstm
