#include "mstm/mlp.hpp"

#include "mstm/rng.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace mstm {

namespace {

Matrix softmax_rows(const Matrix& f) {
    Matrix p(f.rows(), f.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double mx = f.row(i).maxCoeff();
        p.row(i) = (f.row(i).array() - mx).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Matrix forward(const MlpModel& m, const Matrix& X, std::vector<Matrix>* activations) {
    Matrix a = X;
    if (activations) activations->push_back(a);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        Matrix z = (a * m.weights[l]).rowwise() + m.biases[l].transpose();
        if (l + 1 < m.weights.size()) z = z.cwiseMax(0.0); // relu hidden
        a = std::move(z);
        if (activations && l + 1 < m.weights.size()) activations->push_back(a);
    }
    return a; // raw output layer (logits or linear)
}

} // namespace

Matrix MlpModel::predict(const Matrix& X) const {
    Matrix out = forward(*this, X, nullptr);
    return output == MlpOutput::Softmax ? softmax_rows(out) : out;
}

MlpModel init_mlp(const Mlp& spec, int input_dim, int output_dim, std::uint64_t seed) {
    validate_spec(ArchSpec{spec});
    MlpModel m;
    m.output = spec.output;
    std::vector<int> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), spec.hidden_widths.begin(), spec.hidden_widths.end());
    dims.push_back(output_dim);

    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
        Matrix w(dims[l], dims[l + 1]);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * unit(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(Vector::Zero(dims[l + 1]));
    }
    return m;
}

double mlp_loss_grad(const MlpModel& m, const Matrix& X, const Matrix& Y,
                     const Vector& weights, std::vector<Matrix>& grad_w,
                     std::vector<Vector>& grad_b) {
    const Eigen::Index n = X.rows();
    const double wsum = weights.sum();
    std::vector<Matrix> acts;
    Matrix out = forward(m, X, &acts);

    double loss = 0;
    Matrix delta; // dL/d(raw output), already weight-scaled
    if (m.output == MlpOutput::Softmax) {
        const Matrix p = softmax_rows(out);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < Y.cols(); ++j)
                if (Y(i, j) > 0)
                    loss -= weights[i] * Y(i, j) * std::log(std::max(p(i, j), 1e-300));
        delta = p - Y;
    } else {
        const Matrix diff = out - Y;
        for (Eigen::Index i = 0; i < n; ++i)
            loss += 0.5 * weights[i] * diff.row(i).squaredNorm();
        delta = diff;
    }
    loss /= wsum;
    for (Eigen::Index i = 0; i < n; ++i) delta.row(i) *= weights[i] / wsum;

    grad_w.assign(m.weights.size(), Matrix());
    grad_b.assign(m.weights.size(), Vector());
    for (int l = static_cast<int>(m.weights.size()) - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        grad_w[lu] = acts[lu].transpose() * delta;
        grad_b[lu] = delta.colwise().sum().transpose();
        if (l > 0) {
            Matrix back = delta * m.weights[lu].transpose();
            // relu mask from the stored activation
            delta = back.cwiseProduct(
                (acts[lu].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

MlpModel train_mlp(const Mlp& spec, const Matrix& X, const TargetSpec& targets,
                   const FitConfig& cfg) {
    const Eigen::Index n = X.rows();
    const Task task = spec.output == MlpOutput::Softmax ? Task::Classification : Task::Regression;

    Matrix y;
    int out_dim = 1;
    if (task == Task::Classification) {
        const int k = target_classes(targets);
        if (k < 1) throw std::invalid_argument("mlp: softmax output needs class targets");
        out_dim = k;
        if (const auto* h = std::get_if<HardTargets>(&targets)) {
            y = Matrix::Zero(n, k);
            for (Eigen::Index i = 0; i < n; ++i)
                y(i, h->labels[static_cast<std::size_t>(i)]) = 1.0;
        } else {
            y = std::get<SoftTargets>(targets).probs;
        }
    } else {
        y = target_reals(targets);
    }

    Vector w = cfg.sample_weights ? *cfg.sample_weights : Vector::Ones(n);
    MlpModel m = init_mlp(spec, static_cast<int>(X.cols()), out_dim, mix_seed(cfg.seed, 0x11));

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<Matrix> gw;
    std::vector<Vector> gb;
    const int batch = std::max(1, cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0x5481, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index sz = std::min<Eigen::Index>(batch, n - start);
            Matrix xb(sz, X.cols());
            Matrix yb(sz, y.cols());
            Vector wb(sz);
            for (Eigen::Index i = 0; i < sz; ++i) {
                const int src = order[static_cast<std::size_t>(start + i)];
                xb.row(i) = X.row(src);
                yb.row(i) = y.row(src);
                wb[i] = w[src];
            }
            if (wb.sum() <= 0) continue;
            mlp_loss_grad(m, xb, yb, wb, gw, gb);
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                m.weights[l] -= cfg.learning_rate * gw[l];
                m.biases[l] -= cfg.learning_rate * gb[l];
            }
        }
    }
    return m;
}

} // namespace mstm
