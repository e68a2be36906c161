#include "mstm/linear.hpp"

#include <algorithm>
#include <cmath>

namespace mstm {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid) - 1, v.end());
    return 0.5 * (v[mid - 1] + hi);
}

// MAD about the median, scaled for consistency at the normal.
double mad_scale(const Vector& residuals) {
    std::vector<double> r(residuals.data(), residuals.data() + residuals.size());
    const double med = median_of(r);
    for (double& x : r) x = std::abs(x - med);
    return median_of(r) / 0.6745;
}

} // namespace

Vector wls_solve(const Matrix& design, const Vector& y, const Vector& weights,
                 bool allow_ridge) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (y.size() != n || weights.size() != n)
        throw std::invalid_argument("wls_solve: dimension mismatch");
    if (!design.allFinite() || !y.allFinite() || !weights.allFinite())
        throw std::invalid_argument("wls_solve: non-finite inputs");
    double wsum = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (weights[i] < 0) throw std::invalid_argument("wls_solve: negative weight");
        wsum += weights[i];
    }
    if (wsum <= 0) throw std::invalid_argument("wls_solve: all weights are zero");

    const Vector sw = weights.cwiseSqrt();
    Matrix wd = sw.asDiagonal() * design;
    Vector wy = sw.cwiseProduct(y);

    Eigen::ColPivHouseholderQR<Matrix> qr(wd);
    qr.setThreshold(1e-12);
    if (qr.rank() == p) return qr.solve(wy);

    if (!allow_ridge)
        throw std::invalid_argument("wls_solve: rank-deficient design and ridge disabled");
    Matrix normal = wd.transpose() * wd;
    normal.diagonal().array() += 1e-10;
    return normal.ldlt().solve(wd.transpose() * wy);
}

Matrix polynomial_design(const Vector& x, int degree) {
    if (degree < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    Matrix d(x.size(), degree + 1);
    d.col(0).setOnes();
    for (int p = 1; p <= degree; ++p) d.col(p) = d.col(p - 1).cwiseProduct(x);
    return d;
}

double bisquare_weight(double residual, double c, double scale) {
    const double u = residual / (c * scale);
    if (std::abs(u) >= 1.0) return 0.0;
    const double t = 1.0 - u * u;
    return t * t;
}

double bisquare_rho(double residual, double c, double scale) {
    const double u = residual / (c * scale);
    const double cap = c * c / 6.0;
    if (std::abs(u) >= 1.0) return cap;
    const double t = 1.0 - u * u;
    return cap * (1.0 - t * t * t);
}

IrlsResult irls_bisquare_fit(const Matrix& design, const Vector& y, double c,
                             double tol, int max_iter, const Vector* base_weights) {
    if (c <= 0) throw std::invalid_argument("bisquare tuning constant must be > 0");
    const Eigen::Index n = design.rows();
    Vector base = base_weights ? *base_weights : Vector::Ones(n);

    IrlsResult out;
    out.coef = wls_solve(design, y, base);
    for (int it = 0; it < max_iter; ++it) {
        Vector resid = y - design * out.coef;
        double scale = mad_scale(resid);
        if (scale <= 0) break; // exact fit, weights undefined

        Vector w(n);
        const auto reweight = [&] {
            for (Eigen::Index i = 0; i < n; ++i)
                w[i] = base[i] * bisquare_weight(resid[i], c, scale);
        };
        reweight();
        if (w.sum() <= 0) {
            // Centered MAD can reject every point when the start is badly
            // offset; fall back to the scale about zero for this step.
            std::vector<double> ar(resid.data(), resid.data() + n);
            for (double& x : ar) x = std::abs(x);
            scale = median_of(ar) / 0.6745;
            if (scale <= 0) break;
            reweight();
            if (w.sum() <= 0) break;
        }

        IrlsStep step;
        step.scale = scale;
        for (Eigen::Index i = 0; i < n; ++i)
            step.objective_before += base[i] * bisquare_rho(resid[i], c, scale);

        const Vector next = wls_solve(design, y, w);
        Vector resid_next = y - design * next;
        for (Eigen::Index i = 0; i < n; ++i)
            step.objective_after += base[i] * bisquare_rho(resid_next[i], c, scale);
        out.steps.push_back(step);

        const double change = (next - out.coef).cwiseAbs().maxCoeff();
        out.coef = next;
        if (change < tol) break;
    }
    return out;
}

Matrix temperature_soften(const Matrix& probs, double temperature) {
    if (temperature <= 0) throw std::invalid_argument("temperature must be > 0");
    Matrix out(probs.rows(), probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Vector logits(probs.cols());
        for (Eigen::Index j = 0; j < probs.cols(); ++j)
            logits[j] = std::log(std::max(probs(i, j), 1e-12)) / temperature;
        const double mx = logits.maxCoeff();
        double sum = 0;
        for (Eigen::Index j = 0; j < probs.cols(); ++j) {
            logits[j] = std::exp(logits[j] - mx);
            sum += logits[j];
        }
        out.row(i) = logits.transpose() / sum;
    }
    return out;
}

double gini_impurity(const Vector& counts) {
    double total = 0;
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw std::invalid_argument("gini: negative count");
        total += counts[i];
    }
    if (total <= 0) throw std::invalid_argument("gini: all counts are zero");
    double sq = 0;
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
        const double f = counts[i] / total;
        sq += f * f;
    }
    return 1.0 - sq;
}

} // namespace mstm
