#include "mstm/tree.hpp"

#include "mstm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mstm {

int DecisionTree::apply_row(const double* row) const {
    int cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(cur)];
        cur = row[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return cur;
}

std::vector<int> DecisionTree::apply(const Matrix& X) const {
    std::vector<int> out(static_cast<std::size_t>(X.rows()));
    Eigen::RowVectorXd row;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        row = X.row(i);
        out[static_cast<std::size_t>(i)] = apply_row(row.data());
    }
    return out;
}

Matrix DecisionTree::predict(const Matrix& X) const {
    const Eigen::Index q = nodes[0].value.size() > 0
                               ? nodes[0].value.size()
                               : nodes.back().value.size();
    Matrix out(X.rows(), q);
    Eigen::RowVectorXd row;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        row = X.row(i);
        out.row(i) = nodes[static_cast<std::size_t>(apply_row(row.data()))].value.transpose();
    }
    return out;
}

int DecisionTree::n_leaves() const {
    int n = 0;
    for (const auto& nd : nodes)
        if (nd.feature < 0) ++n;
    return n;
}

namespace {

struct TreeBuilder {
    const Matrix& X;
    const Matrix& Y;
    const Vector& w;
    const TreeOptions& opt;
    std::vector<TreeNode> nodes;
    std::mt19937_64 rng;

    TreeBuilder(const Matrix& x, const Matrix& y, const Vector& wt, const TreeOptions& o)
        : X(x), Y(y), w(wt), opt(o), rng(splitmix64(o.seed)) {}

    Vector leaf_value(const std::vector<int>& idx) const {
        Vector sum = Vector::Zero(Y.cols());
        double total = 0;
        for (int i : idx) {
            sum += w[i] * Y.row(i).transpose();
            total += w[i];
        }
        if (total <= 0) { // zero-weight region: fall back to unweighted mean
            sum.setZero();
            for (int i : idx) sum += Y.row(i).transpose();
            total = static_cast<double>(idx.size());
        }
        Vector v = sum / total;
        if (opt.renormalize_leaves) {
            v = v.cwiseMax(0.0);
            const double s = v.sum();
            if (s > 0)
                v /= s;
            else
                v.setConstant(1.0 / static_cast<double>(v.size()));
        }
        return v;
    }

    // Group impurity contribution from weighted accumulators.
    // Gini: W * gini = W - |counts|^2 / W. Sse: sum(sq) - |sum|^2 / W.
    static double group_score(SplitCriterion crit, const Vector& sum, const Vector& sq,
                              double total) {
        if (total <= 0) return 0.0;
        if (crit == SplitCriterion::Gini) return total - sum.squaredNorm() / total;
        return sq.sum() - sum.squaredNorm() / total;
    }

    std::vector<int> candidate_features() {
        const int d = static_cast<int>(X.cols());
        std::vector<int> feats(static_cast<std::size_t>(d));
        std::iota(feats.begin(), feats.end(), 0);
        if (opt.feature_subsample > 0 && opt.feature_subsample < d) {
            for (int i = 0; i < opt.feature_subsample; ++i) {
                const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(d - i));
                std::swap(feats[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(j)]);
            }
            feats.resize(static_cast<std::size_t>(opt.feature_subsample));
            std::sort(feats.begin(), feats.end());
        }
        return feats;
    }

    int build(std::vector<int>& idx, int depth) {
        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(node_id)].value = leaf_value(idx);

        const int n = static_cast<int>(idx.size());
        if (depth >= opt.max_depth || n < 2 * opt.min_leaf) return node_id;

        Vector tot_sum = Vector::Zero(Y.cols());
        Vector tot_sq = Vector::Zero(Y.cols());
        double tot_w = 0;
        for (int i : idx) {
            tot_sum += w[i] * Y.row(i).transpose();
            tot_sq += w[i] * Y.row(i).transpose().cwiseAbs2();
            tot_w += w[i];
        }
        const double parent = group_score(opt.criterion, tot_sum, tot_sq, tot_w);
        if (parent <= 1e-12) return node_id; // pure node

        int best_feature = -1;
        double best_threshold = 0;
        double best_score = parent - 1e-12;

        const auto feats = candidate_features();
        std::vector<int> order;
        for (int f : feats) {
            order = idx;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (X(a, f) != X(b, f)) return X(a, f) < X(b, f);
                return a < b;
            });
            Vector lsum = Vector::Zero(Y.cols());
            Vector lsq = Vector::Zero(Y.cols());
            double lw = 0;
            for (int pos = 0; pos + 1 < n; ++pos) {
                const int i = order[static_cast<std::size_t>(pos)];
                lsum += w[i] * Y.row(i).transpose();
                lsq += w[i] * Y.row(i).transpose().cwiseAbs2();
                lw += w[i];
                const double xl = X(i, f);
                const double xr = X(order[static_cast<std::size_t>(pos + 1)], f);
                if (xl == xr) continue;
                if (pos + 1 < opt.min_leaf || n - pos - 1 < opt.min_leaf) continue;
                const double score =
                    group_score(opt.criterion, lsum, lsq, lw) +
                    group_score(opt.criterion, tot_sum - lsum, tot_sq - lsq, tot_w - lw);
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (xl + xr);
                }
            }
        }
        if (best_feature < 0) return node_id;

        std::vector<int> left, right;
        left.reserve(idx.size());
        right.reserve(idx.size());
        for (int i : idx)
            (X(i, best_feature) < best_threshold ? left : right).push_back(i);
        if (left.empty() || right.empty()) return node_id;

        nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        const int l = build(left, depth + 1);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        const int r = build(right, depth + 1);
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

} // namespace

DecisionTree train_tree(const Matrix& X, const Matrix& Y, const Vector& weights,
                        const TreeOptions& opt) {
    if (X.rows() != Y.rows() || X.rows() != weights.size())
        throw std::invalid_argument("train_tree: dimension mismatch");
    if (X.rows() < 1) throw std::invalid_argument("train_tree: empty dataset");
    TreeBuilder b(X, Y, weights, opt);
    std::vector<int> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    b.build(idx, 0);
    DecisionTree t;
    t.nodes = std::move(b.nodes);
    return t;
}

namespace {

Matrix one_hot(const std::vector<int>& labels, int k) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return y;
}

Matrix softmax_rows(const Matrix& f) {
    Matrix p(f.rows(), f.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double mx = f.row(i).maxCoeff();
        p.row(i) = (f.row(i).array() - mx).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

// Replace leaf means by damped Newton steps for multinomial deviance.
void newton_leaf_update(DecisionTree& tree, const Matrix& X, const Vector& residual,
                        const Vector& prob, const Vector& w, int n_classes) {
    const auto leaves = tree.apply(X);
    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto l = static_cast<std::size_t>(leaves[static_cast<std::size_t>(i)]);
        num[l] += w[i] * residual[i];
        den[l] += w[i] * prob[i] * (1.0 - prob[i]);
    }
    const double scale = n_classes > 1 ? (n_classes - 1.0) / n_classes : 1.0;
    for (std::size_t l = 0; l < tree.nodes.size(); ++l) {
        if (tree.nodes[l].feature >= 0) continue;
        tree.nodes[l].value[0] = scale * num[l] / std::max(den[l], 1e-12);
    }
}

std::vector<int> bootstrap_indices(const Vector& w, std::mt19937_64& rng) {
    const Eigen::Index n = w.size();
    Vector cum(n);
    double acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += w[i];
        cum[i] = acc;
    }
    std::vector<int> out(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const double u = (static_cast<double>(rng() >> 11) * 0x1.0p-53) * acc;
        const double* beg = cum.data();
        out[static_cast<std::size_t>(j)] =
            static_cast<int>(std::upper_bound(beg, beg + n, u) - beg);
        if (out[static_cast<std::size_t>(j)] >= n) out[static_cast<std::size_t>(j)] = static_cast<int>(n - 1);
    }
    return out;
}

} // namespace

EnsembleModel train_ensemble(const TreeEnsemble& spec, const Matrix& X,
                             const TargetSpec& targets, const FitConfig& cfg) {
    validate_spec(ArchSpec{spec});
    const Eigen::Index n = X.rows();
    Vector w = cfg.sample_weights ? *cfg.sample_weights : Vector::Ones(n);

    EnsembleModel model;
    model.kind = spec.kind;
    model.learning_rate = spec.learning_rate;
    model.task = target_task(targets);
    model.n_classes = target_classes(targets);

    TreeOptions topt;
    topt.max_depth = spec.max_depth;
    topt.min_leaf = 1;

    if (spec.kind == EnsembleKind::Boosted) {
        if (model.task == Task::Classification) {
            const int k = model.n_classes;
            Matrix yt = std::holds_alternative<HardTargets>(targets)
                            ? one_hot(std::get<HardTargets>(targets).labels, k)
                            : std::get<SoftTargets>(targets).probs;
            Matrix f = Matrix::Zero(n, k);
            topt.criterion = SplitCriterion::Sse;
            for (int round = 0; round < spec.n_trees; ++round) {
                const Matrix p = softmax_rows(f);
                for (int c = 0; c < k; ++c) {
                    const Vector residual = yt.col(c) - p.col(c);
                    DecisionTree tree = train_tree(X, residual, w, topt);
                    newton_leaf_update(tree, X, residual, p.col(c), w, k);
                    f.col(c) += spec.learning_rate * tree.predict(X).col(0);
                    model.trees.push_back(std::move(tree));
                }
            }
        } else {
            const Vector y = target_reals(targets);
            model.base_score = w.dot(y) / w.sum();
            Vector f = Vector::Constant(n, model.base_score);
            topt.criterion = SplitCriterion::Sse;
            for (int round = 0; round < spec.n_trees; ++round) {
                const Vector residual = y - f;
                DecisionTree tree = train_tree(X, residual, w, topt);
                f += spec.learning_rate * tree.predict(X).col(0);
                model.trees.push_back(std::move(tree));
            }
        }
        return model;
    }

    // Random forest: weighted bootstrap per tree, sqrt(d) features per split.
    topt.feature_subsample =
        std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(X.cols())))));
    Matrix yt;
    if (model.task == Task::Classification) {
        if (std::holds_alternative<HardTargets>(targets)) {
            yt = one_hot(std::get<HardTargets>(targets).labels, model.n_classes);
            topt.criterion = SplitCriterion::Gini;
        } else {
            yt = std::get<SoftTargets>(targets).probs;
            topt.criterion = SplitCriterion::Sse;
            topt.renormalize_leaves = true;
        }
    } else {
        yt = target_reals(targets);
        topt.criterion = SplitCriterion::Sse;
    }
    for (int t = 0; t < spec.n_trees; ++t) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0xf04e57, static_cast<std::uint64_t>(t)));
        const auto idx = bootstrap_indices(w, rng);
        Matrix xs(n, X.cols());
        Matrix ys(n, yt.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            xs.row(i) = X.row(idx[static_cast<std::size_t>(i)]);
            ys.row(i) = yt.row(idx[static_cast<std::size_t>(i)]);
        }
        topt.seed = mix_seed(cfg.seed, 0x7ee5, static_cast<std::uint64_t>(t));
        model.trees.push_back(train_tree(xs, ys, Vector::Ones(n), topt));
    }
    return model;
}

Matrix ensemble_predict(const EnsembleModel& model, const Matrix& X) {
    if (model.kind == EnsembleKind::Boosted) {
        if (model.task == Task::Classification) {
            const int k = model.n_classes;
            Matrix f = Matrix::Zero(X.rows(), k);
            for (std::size_t t = 0; t < model.trees.size(); ++t)
                f.col(static_cast<int>(t) % k) +=
                    model.learning_rate * model.trees[t].predict(X).col(0);
            return softmax_rows(f);
        }
        Vector f = Vector::Constant(X.rows(), model.base_score);
        for (const auto& tree : model.trees)
            f += model.learning_rate * tree.predict(X).col(0);
        return f;
    }
    Matrix sum;
    for (const auto& tree : model.trees) {
        Matrix p = tree.predict(X);
        if (sum.size() == 0)
            sum = p;
        else
            sum += p;
    }
    sum /= static_cast<double>(model.trees.size());
    if (model.task == Task::Classification)
        for (Eigen::Index i = 0; i < sum.rows(); ++i) sum.row(i) /= sum.row(i).sum();
    return sum;
}

} // namespace mstm
