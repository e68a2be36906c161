#include "mstm/model.hpp"

#include "mstm/linear.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace mstm {

namespace {

void check_weights(const FitConfig& cfg, Eigen::Index n) {
    if (!cfg.sample_weights) return;
    const Vector& w = *cfg.sample_weights;
    if (w.size() != n) throw std::invalid_argument("sample_weights length must equal N");
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (w[i] < 0) throw std::invalid_argument("sample_weights must be nonnegative");
        total += w[i];
    }
    if (total <= 0) throw std::invalid_argument("sample_weights must not be all zero");
}

Vector effective_weights(const FitConfig& cfg, Eigen::Index n) {
    return cfg.sample_weights ? *cfg.sample_weights : Vector::Ones(n);
}

Vector regression_targets(const ArchSpec& spec, const TargetSpec& targets) {
    if (std::holds_alternative<SoftTargets>(targets))
        throw std::invalid_argument("soft targets given to regression spec " + spec_name(spec));
    return target_reals(targets);
}

} // namespace

TrainedModel fit(const ArchSpec& spec, const Matrix& X, const TargetSpec& targets,
                 const FitConfig& cfg) {
    validate_spec(spec);
    validate_targets(targets);
    const Eigen::Index n = X.rows();
    if (n < 1) throw std::invalid_argument("fit: empty dataset");
    if (target_rows(targets) != n)
        throw std::invalid_argument("fit: targets and features disagree on N");
    check_weights(cfg, n);
    const Vector w = effective_weights(cfg, n);

    TrainedModel m;
    m.spec = spec;
    m.input_dim = static_cast<int>(X.cols());

    if (const auto* poly = std::get_if<Polynomial>(&spec)) {
        if (X.cols() != 1)
            throw std::invalid_argument("Polynomial expects 1-D features");
        const Vector y = regression_targets(spec, targets);
        m.params = LinearParams{wls_solve(polynomial_design(X.col(0), poly->degree), y, w)};
        return m;
    }
    if (std::holds_alternative<LinearLS>(spec)) {
        const Vector y = regression_targets(spec, targets);
        Matrix design(n, X.cols() + 1);
        design.col(0).setOnes();
        design.rightCols(X.cols()) = X;
        m.params = LinearParams{wls_solve(design, y, w)};
        return m;
    }
    if (const auto* rob = std::get_if<RobustLinear>(&spec)) {
        const Vector y = regression_targets(spec, targets);
        Matrix design(n, X.cols() + 1);
        design.col(0).setOnes();
        design.rightCols(X.cols()) = X;
        auto res = irls_bisquare_fit(design, y, rob->tuning_c, cfg.irls_tol,
                                     cfg.irls_max_iter, &w);
        m.params = LinearParams{std::move(res.coef)};
        return m;
    }
    if (const auto* cart = std::get_if<Cart>(&spec)) {
        TreeOptions topt;
        topt.max_depth = cart->max_depth;
        topt.min_leaf = cart->min_leaf;
        if (cart->task == Task::Classification) {
            if (std::holds_alternative<RealTargets>(targets))
                throw std::invalid_argument("real targets given to classification Cart");
            const int k = target_classes(targets);
            Matrix y;
            if (const auto* h = std::get_if<HardTargets>(&targets)) {
                y = Matrix::Zero(n, k);
                for (Eigen::Index i = 0; i < n; ++i)
                    y(i, h->labels[static_cast<std::size_t>(i)]) = 1.0;
                topt.criterion = SplitCriterion::Gini;
            } else {
                y = std::get<SoftTargets>(targets).probs;
                topt.criterion = SplitCriterion::Sse;
                topt.renormalize_leaves = true;
            }
            m.n_classes = k;
            m.params = TreeParams{train_tree(X, y, w, topt)};
        } else {
            const Vector y = regression_targets(spec, targets);
            topt.criterion = SplitCriterion::Sse;
            m.params = TreeParams{train_tree(X, y, w, topt)};
        }
        return m;
    }
    if (const auto* ens = std::get_if<TreeEnsemble>(&spec)) {
        EnsembleModel em = train_ensemble(*ens, X, targets, cfg);
        m.n_classes = em.task == Task::Classification ? em.n_classes : 0;
        m.params = EnsembleParams{std::move(em)};
        return m;
    }
    if (const auto* mlp = std::get_if<Mlp>(&spec)) {
        if (mlp->output == MlpOutput::Softmax) {
            if (std::holds_alternative<RealTargets>(targets))
                throw std::invalid_argument("real targets given to softmax Mlp");
            m.n_classes = target_classes(targets);
        } else if (std::holds_alternative<SoftTargets>(targets)) {
            throw std::invalid_argument("soft targets given to regression spec " +
                                        spec_name(spec));
        }
        m.params = MlpParams{train_mlp(*mlp, X, targets, cfg)};
        return m;
    }
    throw std::invalid_argument("Tabulated models are constructed, not fit");
}

TrainedModel make_tabulated(const Vector& xs, const Vector& ys) {
    if (xs.size() != ys.size() || xs.size() < 1)
        throw std::invalid_argument("make_tabulated: xs/ys size mismatch");
    std::vector<int> order(static_cast<std::size_t>(xs.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return xs[a] < xs[b]; });
    TabulatedParams p;
    p.xs.resize(xs.size());
    p.ys.resize(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        p.xs[static_cast<Eigen::Index>(i)] = xs[order[i]];
        p.ys[static_cast<Eigen::Index>(i)] = ys[order[i]];
    }
    TrainedModel m;
    m.spec = Tabulated{};
    m.input_dim = 1;
    m.params = std::move(p);
    return m;
}

Matrix TrainedModel::predict(const Matrix& X) const {
    if (X.cols() != input_dim)
        throw std::invalid_argument("predict: feature dimension mismatch");
    if (const auto* lin = std::get_if<LinearParams>(&params)) {
        if (std::holds_alternative<Polynomial>(spec)) {
            const int degree = std::get<Polynomial>(spec).degree;
            return polynomial_design(X.col(0), degree) * lin->coef;
        }
        Matrix design(X.rows(), X.cols() + 1);
        design.col(0).setOnes();
        design.rightCols(X.cols()) = X;
        return design * lin->coef;
    }
    if (const auto* tp = std::get_if<TreeParams>(&params)) {
        Matrix out = tp->tree.predict(X);
        if (n_classes > 0)
            for (Eigen::Index i = 0; i < out.rows(); ++i) {
                const double s = out.row(i).sum();
                if (s > 0) out.row(i) /= s;
            }
        return out;
    }
    if (const auto* ep = std::get_if<EnsembleParams>(&params))
        return ensemble_predict(ep->model, X);
    if (const auto* mp = std::get_if<MlpParams>(&params)) return mp->model.predict(X);
    const auto& tab = std::get<TabulatedParams>(params);
    Matrix out(X.rows(), 1);
    const double* beg = tab.xs.data();
    const double* end = beg + tab.xs.size();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double x = X(i, 0);
        const double* it = std::lower_bound(beg, end, x);
        Eigen::Index j = it - beg;
        if (j >= tab.xs.size()) j = tab.xs.size() - 1;
        if (j > 0 && std::abs(tab.xs[j - 1] - x) <= std::abs(tab.xs[j] - x)) --j;
        out(i, 0) = tab.ys[j];
    }
    return out;
}

std::vector<int> cart_leaf_assignment(const TrainedModel& model, const Matrix& X) {
    const auto* tp = std::get_if<TreeParams>(&model.params);
    if (!tp) throw std::invalid_argument("leaf assignment requires a Cart model");
    return tp->tree.apply(X);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json vec_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vector vec_from_json(const json& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i];
    return v;
}

json mat_to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(std::move(row));
    }
    return a;
}

Matrix mat_from_json(const json& a) {
    const auto rows = static_cast<Eigen::Index>(a.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(a[0].size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

json tree_to_json(const DecisionTree& t) {
    json nodes = json::array();
    for (const auto& nd : t.nodes)
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"value", vec_to_json(nd.value)}});
    return nodes;
}

DecisionTree tree_from_json(const json& nodes) {
    DecisionTree t;
    for (const auto& jn : nodes) {
        TreeNode nd;
        nd.feature = jn.at("feature");
        nd.threshold = jn.at("threshold");
        nd.left = jn.at("left");
        nd.right = jn.at("right");
        nd.value = vec_from_json(jn.at("value"));
        t.nodes.push_back(std::move(nd));
    }
    return t;
}

} // namespace

json spec_to_json(const ArchSpec& spec) {
    struct V {
        json operator()(const Polynomial& p) const {
            return {{"family", "polynomial"}, {"degree", p.degree}};
        }
        json operator()(const LinearLS&) const { return {{"family", "linear_ls"}}; }
        json operator()(const RobustLinear& r) const {
            return {{"family", "robust_linear"}, {"tuning_c", r.tuning_c}};
        }
        json operator()(const Cart& c) const {
            return {{"family", "cart"},
                    {"max_depth", c.max_depth},
                    {"min_leaf", c.min_leaf},
                    {"task", c.task == Task::Classification ? "classification" : "regression"}};
        }
        json operator()(const TreeEnsemble& t) const {
            json j = {{"family", "tree_ensemble"},
                      {"kind", t.kind == EnsembleKind::Boosted ? "boosted" : "forest"},
                      {"n_trees", t.n_trees},
                      {"max_depth", t.max_depth}};
            if (t.kind == EnsembleKind::Boosted) j["learning_rate"] = t.learning_rate;
            return j;
        }
        json operator()(const Mlp& m) const {
            return {{"family", "mlp"},
                    {"hidden_widths", m.hidden_widths},
                    {"output", m.output == MlpOutput::Softmax ? "softmax" : "linear"}};
        }
        json operator()(const Tabulated&) const { return {{"family", "tabulated"}}; }
    };
    return std::visit(V{}, spec);
}

ArchSpec spec_from_json(const json& j) {
    const std::string family = j.at("family");
    auto check_keys = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : j.items()) {
            if (key == "family") continue;
            bool ok = false;
            for (const char* a : allowed)
                if (key == a) ok = true;
            if (!ok)
                throw std::invalid_argument("unknown key '" + key + "' in spec '" + family + "'");
        }
    };
    ArchSpec spec;
    if (family == "polynomial") {
        check_keys({"degree"});
        spec = Polynomial{j.at("degree")};
    } else if (family == "linear_ls") {
        check_keys({});
        spec = LinearLS{};
    } else if (family == "robust_linear") {
        check_keys({"tuning_c"});
        RobustLinear r;
        r.tuning_c = j.value("tuning_c", 4.685);
        spec = r;
    } else if (family == "cart") {
        check_keys({"max_depth", "min_leaf", "task"});
        Cart c;
        c.max_depth = j.at("max_depth");
        c.min_leaf = j.value("min_leaf", 1);
        const std::string task = j.value("task", "classification");
        if (task != "classification" && task != "regression")
            throw std::invalid_argument("cart task must be classification|regression");
        c.task = task == "classification" ? Task::Classification : Task::Regression;
        spec = c;
    } else if (family == "tree_ensemble") {
        check_keys({"kind", "n_trees", "max_depth", "learning_rate"});
        TreeEnsemble t;
        const std::string kind = j.at("kind");
        if (kind != "boosted" && kind != "forest")
            throw std::invalid_argument("tree_ensemble kind must be boosted|forest");
        t.kind = kind == "boosted" ? EnsembleKind::Boosted : EnsembleKind::Forest;
        t.n_trees = j.at("n_trees");
        t.max_depth = j.at("max_depth");
        if (t.kind == EnsembleKind::Forest && j.contains("learning_rate"))
            throw std::invalid_argument("learning_rate is only valid for boosted ensembles");
        t.learning_rate = j.value("learning_rate", 0.1);
        spec = t;
    } else if (family == "mlp") {
        check_keys({"hidden_widths", "output"});
        Mlp m;
        m.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
        const std::string out = j.value("output", "softmax");
        if (out != "softmax" && out != "linear")
            throw std::invalid_argument("mlp output must be softmax|linear");
        m.output = out == "softmax" ? MlpOutput::Softmax : MlpOutput::Linear;
        spec = m;
    } else if (family == "tabulated") {
        check_keys({});
        spec = Tabulated{};
    } else {
        throw std::invalid_argument("unknown model family '" + family + "'");
    }
    validate_spec(spec);
    return spec;
}

json model_to_json(const TrainedModel& model) {
    json j;
    j["spec"] = spec_to_json(model.spec);
    j["n_classes"] = model.n_classes;
    j["input_dim"] = model.input_dim;
    if (const auto* lin = std::get_if<LinearParams>(&model.params)) {
        j["kind"] = "linear";
        j["coef"] = vec_to_json(lin->coef);
    } else if (const auto* tp = std::get_if<TreeParams>(&model.params)) {
        j["kind"] = "tree";
        j["nodes"] = tree_to_json(tp->tree);
    } else if (const auto* ep = std::get_if<EnsembleParams>(&model.params)) {
        j["kind"] = "ensemble";
        j["task"] = ep->model.task == Task::Classification ? "classification" : "regression";
        j["ensemble_classes"] = ep->model.n_classes;
        j["learning_rate"] = ep->model.learning_rate;
        j["base_score"] = ep->model.base_score;
        json trees = json::array();
        for (const auto& t : ep->model.trees) trees.push_back(tree_to_json(t));
        j["trees"] = std::move(trees);
    } else if (const auto* mp = std::get_if<MlpParams>(&model.params)) {
        j["kind"] = "mlp";
        json ws = json::array(), bs = json::array();
        for (const auto& w : mp->model.weights) ws.push_back(mat_to_json(w));
        for (const auto& b : mp->model.biases) bs.push_back(vec_to_json(b));
        j["weights"] = std::move(ws);
        j["biases"] = std::move(bs);
    } else {
        const auto& tab = std::get<TabulatedParams>(model.params);
        j["kind"] = "tabulated";
        j["xs"] = vec_to_json(tab.xs);
        j["ys"] = vec_to_json(tab.ys);
    }
    return j;
}

TrainedModel model_from_json(const json& j) {
    TrainedModel m;
    m.spec = spec_from_json(j.at("spec"));
    m.n_classes = j.at("n_classes");
    m.input_dim = j.at("input_dim");
    const std::string kind = j.at("kind");
    if (kind == "linear") {
        m.params = LinearParams{vec_from_json(j.at("coef"))};
    } else if (kind == "tree") {
        m.params = TreeParams{tree_from_json(j.at("nodes"))};
    } else if (kind == "ensemble") {
        EnsembleModel em;
        em.kind = std::get<TreeEnsemble>(m.spec).kind;
        em.task = j.at("task") == "classification" ? Task::Classification : Task::Regression;
        em.n_classes = j.at("ensemble_classes");
        em.learning_rate = j.at("learning_rate");
        em.base_score = j.at("base_score");
        for (const auto& t : j.at("trees")) em.trees.push_back(tree_from_json(t));
        m.params = EnsembleParams{std::move(em)};
    } else if (kind == "mlp") {
        MlpModel mm;
        mm.output = std::get<Mlp>(m.spec).output;
        for (const auto& w : j.at("weights")) mm.weights.push_back(mat_from_json(w));
        for (const auto& b : j.at("biases")) mm.biases.push_back(vec_from_json(b));
        m.params = MlpParams{std::move(mm)};
    } else if (kind == "tabulated") {
        m.params = TabulatedParams{vec_from_json(j.at("xs")), vec_from_json(j.at("ys"))};
    } else {
        throw std::invalid_argument("unknown model kind '" + kind + "'");
    }
    return m;
}

} // namespace mstm
