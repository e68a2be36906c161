#include "doctest.h"

#include "helpers.hpp"
#include "mstm/data.hpp"
#include "mstm/metrics.hpp"
#include "mstm/transfer.hpp"

#include <cmath>

using namespace mstm;
using testutil::random_labels;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

// A confident, correct classifier on the blob data.
TrainedModel blob_teacher(const Matrix& X, const std::vector<int>& labels) {
    FitConfig cfg;
    return fit(Cart{2, 1}, X, HardTargets{labels, 2}, cfg);
}

} // namespace

TEST_CASE("make_soft_targets") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(80, 21, X, labels);
    const TrainedModel teacher = blob_teacher(X, labels);

    SUBCASE("T = 1 reproduces the teacher rows up to the clamp") {
        const auto soft = std::get<SoftTargets>(make_soft_targets(teacher, X, 1.0));
        const Matrix p = teacher.predict(X);
        CHECK((soft.probs - p).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("known rows at T = 2 match the closed form") {
        Vector xs(2), ys(2);
        xs << 0, 1;
        ys << 3, 4;
        const TrainedModel reg = make_tabulated(xs, ys);
        const auto real = std::get<RealTargets>(make_soft_targets(reg, Matrix::Zero(1, 1), 2.0));
        CHECK(real.values[0] == doctest::Approx(3.0)); // regression: pass-through
    }
}

TEST_CASE("confidence_weights") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(60, 33, X, labels);
    const TrainedModel teacher = blob_teacher(X, labels);

    SUBCASE("confident correct teacher gives unit weights") {
        const Vector w = confidence_weights(teacher, X, labels, WeightNormalize::None);
        for (int i = 0; i < w.size(); ++i) CHECK(w[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("weights equal the teacher probability of the true class") {
        const auto rand_labels = random_labels(60, 2, 34);
        const Matrix p = teacher.predict(X);
        const Vector w = confidence_weights(teacher, X, rand_labels, WeightNormalize::None);
        for (int i = 0; i < 60; ++i)
            CHECK(w[i] == doctest::Approx(p(i, rand_labels[static_cast<std::size_t>(i)])));
        const Vector wn = confidence_weights(teacher, X, rand_labels, WeightNormalize::MeanOne);
        CHECK(wn.mean() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("regression teacher is rejected") {
        Vector xs(2), ys(2);
        xs << 0, 1;
        ys << 0, 1;
        CHECK_THROWS_AS(
            confidence_weights(make_tabulated(xs, ys), X, labels, WeightNormalize::None),
            std::invalid_argument);
    }
}

TEST_CASE("hop_transfer with unit confidence equals the plain fit") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(100, 44, X, labels);
    const TrainedModel teacher = blob_teacher(X, labels);
    FitConfig cfg;
    cfg.seed = 5;
    const TrainedModel via_hop = hop_transfer(teacher, Cart{3, 1}, X, HardTargets{labels, 2},
                                              ConfidenceWeight{WeightNormalize::MeanOne}, cfg);
    const TrainedModel plain = fit(Cart{3, 1}, X, HardTargets{labels, 2}, cfg);
    CHECK((via_hop.predict(X) - plain.predict(X)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("confidence hop equals a fit with manually gathered weights") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(100, 45, X, labels);
    FitConfig cfg;
    const TrainedModel teacher = fit(Mlp{{6}}, X, HardTargets{labels, 2}, cfg);

    const TrainedModel via_hop = hop_transfer(teacher, Cart{3, 1}, X, HardTargets{labels, 2},
                                              ConfidenceWeight{WeightNormalize::MeanOne}, cfg);
    FitConfig wcfg = cfg;
    wcfg.sample_weights = confidence_weights(teacher, X, labels, WeightNormalize::MeanOne);
    const TrainedModel oracle = fit(Cart{3, 1}, X, HardTargets{labels, 2}, wcfg);
    CHECK((via_hop.predict(X) - oracle.predict(X)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("near-self-distillation keeps the reward") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(300, 46, X, labels);
    Matrix Xh;
    std::vector<int> lh;
    testutil::two_blob_dataset(200, 47, Xh, lh);
    FitConfig cfg;
    const TrainedModel teacher = fit(Cart{3, 1}, X, HardTargets{labels, 2}, cfg);
    const TrainedModel student =
        hop_transfer(teacher, Cart{3, 1}, X, HardTargets{labels, 2}, Distill{4.0}, cfg);
    CHECK(accuracy(student.predict(Xh), lh) >= accuracy(teacher.predict(Xh), lh) - 0.01);
}

TEST_CASE("chain_transfer with an empty plan is exactly one hop") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(120, 48, X, labels);
    FitConfig cfg;
    cfg.seed = 77;
    const TrainedModel teacher = blob_teacher(X, labels);
    TransferPlan plan;
    plan.final_method = Distill{4.0};
    const ChainResult chain =
        chain_transfer(teacher, plan, Mlp{{5}}, X, HardTargets{labels, 2}, cfg);
    const TrainedModel direct =
        hop_transfer(teacher, Mlp{{5}}, X, HardTargets{labels, 2}, Distill{4.0}, cfg);
    CHECK(chain.intermediates.empty());
    CHECK((chain.simple.predict(X) - direct.predict(X)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chain_transfer is Markovian: one intermediate per hop") {
    Matrix X;
    std::vector<int> labels;
    testutil::two_blob_dataset(120, 49, X, labels);
    FitConfig cfg;
    const TrainedModel teacher = blob_teacher(X, labels);
    TransferPlan plan;
    plan.hops.push_back({Cart{4, 1}, Distill{4.0}});
    plan.hops.push_back({Cart{2, 1}, Distill{4.0}});
    const ChainResult chain =
        chain_transfer(teacher, plan, Cart{1, 1}, X, HardTargets{labels, 2}, cfg);
    CHECK(chain.intermediates.size() == 2);
    CHECK(std::get<Cart>(chain.intermediates[0].spec).max_depth == 4);
    CHECK(std::get<Cart>(chain.intermediates[1].spec).max_depth == 2);
}

TEST_CASE("least-squares chains collapse (nested projection identity)") {
    SyntheticSpec spec;
    spec.seed = 9;
    const SyntheticData data = synthetic_poly_dataset(spec);
    const TrainedModel teacher = make_tabulated(data.x, data.noisy);
    Matrix X = data.x;
    FitConfig cfg;
    const TrainedModel one =
        hop_transfer(teacher, LinearLS{}, X, RealTargets{data.noisy}, Distill{1.0}, cfg);
    TransferPlan plan;
    plan.hops.push_back({Polynomial{3}, Distill{1.0}});
    plan.final_method = Distill{1.0};
    const ChainResult two =
        chain_transfer(teacher, plan, LinearLS{}, X, RealTargets{data.noisy}, cfg);
    const Vector c1 = std::get<LinearParams>(one.params).coef;
    const Vector c2 = std::get<LinearParams>(two.simple.params).coef;
    CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("method_name") {
    CHECK(method_name(Distill{}) == "distill");
    CHECK(method_name(ConfidenceWeight{}) == "confidence_weight");
}
