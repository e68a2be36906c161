#include "mstm/transfer.hpp"

#include "mstm/linear.hpp"
#include "mstm/rng.hpp"

namespace mstm {

std::string method_name(const TransferMethod& m) {
    if (std::holds_alternative<Distill>(m)) return "distill";
    return "confidence_weight";
}

TargetSpec make_soft_targets(const TrainedModel& teacher, const Matrix& X,
                             double temperature) {
    const Matrix pred = teacher.predict(X);
    if (teacher.task() == Task::Regression) return RealTargets{pred.col(0)};
    return SoftTargets{temperature_soften(pred, temperature)};
}

Vector confidence_weights(const TrainedModel& teacher, const Matrix& X,
                          const std::vector<int>& labels, WeightNormalize normalize) {
    if (teacher.task() != Task::Classification)
        throw std::invalid_argument("confidence weighting needs a classification teacher");
    if (static_cast<Eigen::Index>(labels.size()) != X.rows())
        throw std::invalid_argument("confidence_weights: labels/features size mismatch");
    const Matrix pred = teacher.predict(X);
    Vector w(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int label = labels[static_cast<std::size_t>(i)];
        if (label < 0 || label >= teacher.n_classes)
            throw std::invalid_argument("confidence_weights: label out of range");
        w[i] = pred(i, label);
    }
    if (normalize == WeightNormalize::MeanOne) {
        const double mean = w.mean();
        if (mean > 0) w /= mean;
    }
    return w;
}

TrainedModel hop_transfer(const TrainedModel& teacher, const ArchSpec& student_spec,
                          const Matrix& X, const TargetSpec& true_targets,
                          const TransferMethod& method, const FitConfig& cfg) {
    if (const auto* kd = std::get_if<Distill>(&method)) {
        const TargetSpec soft = make_soft_targets(teacher, X, kd->temperature);
        return fit(student_spec, X, soft, cfg);
    }
    const auto& cw = std::get<ConfidenceWeight>(method);
    const auto* hard = std::get_if<HardTargets>(&true_targets);
    if (!hard)
        throw std::invalid_argument("confidence weighting needs hard true labels");
    Vector w = confidence_weights(teacher, X, hard->labels, cw.normalize);
    FitConfig weighted = cfg;
    if (cfg.sample_weights) w = w.cwiseProduct(*cfg.sample_weights);
    weighted.sample_weights = std::move(w);
    return fit(student_spec, X, true_targets, weighted);
}

ChainResult chain_transfer(const TrainedModel& complex_model, const TransferPlan& plan,
                           const ArchSpec& simple_spec, const Matrix& X,
                           const TargetSpec& true_targets, const FitConfig& cfg) {
    if (X.rows() < 1) throw std::invalid_argument("chain_transfer: empty dataset");
    ChainResult out;
    const TrainedModel* teacher = &complex_model;
    for (std::size_t i = 0; i < plan.hops.size(); ++i) {
        FitConfig hop_cfg = cfg;
        hop_cfg.seed = mix_seed(cfg.seed, 0xc4a1, i + 1);
        out.intermediates.push_back(hop_transfer(*teacher, plan.hops[i].spec, X,
                                                 true_targets, plan.hops[i].method, hop_cfg));
        teacher = &out.intermediates.back();
    }
    // Final stage uses cfg.seed itself so an empty plan reproduces a plain
    // hop_transfer call exactly.
    out.simple = hop_transfer(*teacher, simple_spec, X, true_targets, plan.final_method, cfg);
    return out;
}

} // namespace mstm
