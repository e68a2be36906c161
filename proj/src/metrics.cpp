#include "mstm/metrics.hpp"

#include "mstm/linear.hpp"

#include <cmath>
#include <map>

namespace mstm {

namespace {

int argmax_row(const Matrix& m, Eigen::Index i) {
    int best = 0;
    for (Eigen::Index j = 1; j < m.cols(); ++j)
        if (m(i, j) > m(i, best)) best = static_cast<int>(j);
    return best;
}

} // namespace

double accuracy(const Matrix& predictions, const std::vector<int>& labels) {
    if (predictions.rows() == 0) throw std::invalid_argument("accuracy: empty input");
    if (predictions.rows() != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("accuracy: shape mismatch");
    int correct = 0;
    for (Eigen::Index i = 0; i < predictions.rows(); ++i)
        if (argmax_row(predictions, i) == labels[static_cast<std::size_t>(i)]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predictions.rows());
}

double mse(const Vector& predictions, const Vector& targets) {
    if (predictions.size() == 0) throw std::invalid_argument("mse: empty input");
    if (predictions.size() != targets.size())
        throw std::invalid_argument("mse: length mismatch");
    return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

double cross_entropy(const Matrix& predictions, const std::vector<int>& labels) {
    if (predictions.rows() == 0) throw std::invalid_argument("cross_entropy: empty input");
    if (predictions.rows() != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("cross_entropy: shape mismatch");
    double total = 0;
    for (Eigen::Index i = 0; i < predictions.rows(); ++i)
        total -= std::log(std::max(predictions(i, labels[static_cast<std::size_t>(i)]), 1e-12));
    return total / static_cast<double>(predictions.rows());
}

double weighted_gini_index(const TrainedModel& tree_model, const Matrix& X,
                           const std::vector<int>& labels) {
    if (tree_model.task() != Task::Classification)
        throw std::invalid_argument("weighted_gini_index: classification trees only");
    if (X.rows() == 0) throw std::invalid_argument("weighted_gini_index: empty test set");
    const auto leaves = cart_leaf_assignment(tree_model, X);
    const int k = tree_model.n_classes;

    std::map<int, Vector> counts;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        auto [it, inserted] = counts.try_emplace(leaves[static_cast<std::size_t>(i)],
                                                 Vector::Zero(k));
        it->second[labels[static_cast<std::size_t>(i)]] += 1.0;
    }
    double total = 0;
    for (const auto& [leaf, c] : counts)
        total += c.sum() * gini_impurity(c);
    return total / static_cast<double>(X.rows());
}

ConfidenceSummary confidence_analysis(const TrainedModel& simple_before,
                                      const TrainedModel& simple_after,
                                      const TrainedModel& complex_model,
                                      const Matrix& X, const std::vector<int>& labels) {
    if (simple_before.task() != Task::Classification ||
        simple_after.task() != Task::Classification ||
        complex_model.task() != Task::Classification)
        throw std::invalid_argument("confidence_analysis: classification models only");

    const Matrix pb = simple_before.predict(X);
    const Matrix pa = simple_after.predict(X);
    const Matrix pc = complex_model.predict(X);

    ConfidenceSummary s;
    double scc_sum = 0, ccc_sum = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        s.sac += pb(i, y);
        s.cac += pc(i, y);
        const bool before_wrong = argmax_row(pb, i) != y;
        const bool after_right = argmax_row(pa, i) == y;
        if (before_wrong && after_right) {
            ++s.n_corrected;
            scc_sum += pb(i, y);
            ccc_sum += pc(i, y);
        }
    }
    const auto n = static_cast<double>(X.rows());
    s.sac /= n;
    s.cac /= n;
    if (s.n_corrected > 0) {
        s.scc = scc_sum / s.n_corrected;
        s.ccc = ccc_sum / s.n_corrected;
    }
    return s;
}

MetricReport aggregate_splits(const std::string& name, const std::vector<double>& per_split) {
    if (per_split.empty()) throw std::invalid_argument("aggregate_splits: empty list");
    MetricReport r;
    r.name = name;
    r.per_split = per_split;
    double sum = 0;
    for (double v : per_split) sum += v;
    r.mean = sum / static_cast<double>(per_split.size());
    if (per_split.size() > 1) {
        double sq = 0;
        for (double v : per_split) sq += (v - r.mean) * (v - r.mean);
        r.stddev = std::sqrt(sq / static_cast<double>(per_split.size() - 1));
    }
    return r;
}

} // namespace mstm
