#include "fasta/prox.hpp"

#include "fasta/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace fasta {

namespace {

void require_finite(const Eigen::Ref<const Matrix> &x, const char *what) {
    if (!x.allFinite())
        throw InputError(std::string(what) + ": input has non-finite entries");
}

void require_binary(const Vector &b, const char *what) {
    for (Eigen::Index i = 0; i < b.size(); ++i)
        if (b[i] != 0.0 && b[i] != 1.0)
            throw InputError(std::string(what) + ": label " + std::to_string(i) + " is " + std::to_string(b[i]) +
                             ", expected 0 or 1");
}

// log(exp(z) + 1) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

Vector shrink(const Vector &x, double threshold) {
    if (!(threshold >= 0))
        throw InputError("shrink: threshold must be >= 0, got " + std::to_string(threshold));
    return x.unaryExpr([threshold](double v) {
        const double m = std::max(std::abs(v) - threshold, 0.0);
        return v > 0 ? m : (v < 0 ? -m : 0.0);
    });
}

Vector project_l1_ball(const Vector &x, double radius) {
    if (!(radius > 0))
        throw InputError("project_l1_ball: radius must be > 0, got " + std::to_string(radius));
    if (x.lpNorm<1>() <= radius)
        return x;
    std::vector<double> mags(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        mags[static_cast<std::size_t>(i)] = std::abs(x[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>{});
    // Largest j with mags[j] > (sum_{i<=j} mags[i] - radius) / (j + 1).
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < mags.size(); ++j) {
        cumsum += mags[j];
        const double candidate = (cumsum - radius) / static_cast<double>(j + 1);
        if (mags[j] > candidate)
            theta = candidate;
        else
            break;
    }
    return shrink(x, std::max(theta, 0.0));
}

Vector prox_linf(const Vector &x, double weight) {
    if (!(weight >= 0))
        throw InputError("prox_linf: weight must be >= 0, got " + std::to_string(weight));
    if (weight == 0)
        return x;
    return x - project_l1_ball(x, weight);
}

Matrix shrink_nuclear(const Matrix &x, double threshold) {
    if (!(threshold >= 0))
        throw InputError("shrink_nuclear: threshold must be >= 0");
    require_finite(x, "shrink_nuclear");
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sigma = (svd.singularValues().array() - threshold).max(0.0).matrix();
    return svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose();
}

Matrix prox_psd_nuclear(const Matrix &x, double threshold) {
    if (!(threshold >= 0))
        throw InputError("prox_psd_nuclear: threshold must be >= 0");
    if (x.rows() != x.cols())
        throw InputError("prox_psd_nuclear: matrix must be square");
    require_finite(x, "prox_psd_nuclear");
    const Matrix sym = 0.5 * (x + x.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector lambda = (eig.eigenvalues().array() - threshold).max(0.0).matrix();
    Matrix out = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

double logit_value(const Vector &z, const Vector &b) {
    if (z.size() != b.size())
        throw InputError("logit_value: z and b lengths differ");
    require_binary(b, "logit_value");
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        total += softplus(z[i]) - b[i] * z[i];
    return total;
}

Vector logit_gradient(const Vector &z, const Vector &b) {
    if (z.size() != b.size())
        throw InputError("logit_gradient: z and b lengths differ");
    require_binary(b, "logit_gradient");
    Vector g(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
        g[i] = sigmoid(z[i]) - b[i];
    return g;
}

Vector project_box_magnitude(const Vector &p, std::size_t components, double bound) {
    if (!(bound >= 0))
        throw InputError("project_box_magnitude: bound must be >= 0");
    const auto d = static_cast<Eigen::Index>(components);
    if (d == 0 || p.size() % d != 0)
        throw InputError("project_box_magnitude: field length " + std::to_string(p.size()) +
                         " is not a multiple of " + std::to_string(components));
    Vector q = p;
    for (Eigen::Index i = 0; i < p.size(); i += d) {
        auto px = q.segment(i, d);
        const double norm = px.norm();
        if (norm > bound)
            px *= bound / norm;
    }
    return q;
}

ProxFn zero_prox() {
    return {[](const Vector &x, double) { return x; }, [](const Vector &) { return 0.0; }};
}

ProxFn l1_prox(double mu) {
    if (!(mu >= 0))
        throw InputError("l1_prox: mu must be >= 0");
    return {[mu](const Vector &x, double t) { return t == 0 ? x : shrink(x, mu * t); },
            [mu](const Vector &x) { return mu * x.lpNorm<1>(); }};
}

ProxFn l1_ball_prox(double radius) {
    if (!(radius > 0))
        throw InputError("l1_ball_prox: radius must be > 0");
    return {[radius](const Vector &x, double) { return project_l1_ball(x, radius); },
            [radius](const Vector &x) {
                // Projections land within rounding of the sphere; allow that slack.
                return x.lpNorm<1>() <= radius * (1 + 1e-12) ? 0.0 : kInf;
            }};
}

ProxFn linf_prox(double mu) {
    if (!(mu >= 0))
        throw InputError("linf_prox: mu must be >= 0");
    return {[mu](const Vector &x, double t) { return prox_linf(x, mu * t); },
            [mu](const Vector &x) { return x.size() ? mu * x.lpNorm<Eigen::Infinity>() : 0.0; }};
}

ProxFn nuclear_prox(std::size_t rows, std::size_t cols, double mu) {
    if (!(mu >= 0))
        throw InputError("nuclear_prox: mu must be >= 0");
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    return {[=](const Vector &x, double t) -> Vector {
                if (t == 0)
                    return x;
                return flatten(shrink_nuclear(as_matrix(x, r, c), mu * t));
            },
            [=](const Vector &x) {
                Eigen::BDCSVD<Matrix> svd(Matrix(as_matrix(x, r, c)));
                return mu * svd.singularValues().sum();
            }};
}

ProxFn psd_nuclear_prox(std::size_t n, double mu) {
    if (!(mu >= 0))
        throw InputError("psd_nuclear_prox: mu must be >= 0");
    const auto k = static_cast<Eigen::Index>(n);
    return {[=](const Vector &x, double t) -> Vector {
                if (t == 0)
                    return x;
                return flatten(prox_psd_nuclear(as_matrix(x, k, k), mu * t));
            },
            [=](const Vector &x) {
                const Matrix m = as_matrix(x, k, k);
                const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
                if (asym > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()))
                    return kInf;
                Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
                const auto &lambda = eig.eigenvalues();
                const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
                if (lambda.minCoeff() < -1e-9 * scale)
                    return kInf;
                // PSD: nuclear norm is the trace.
                return mu * lambda.cwiseMax(0.0).sum();
            }};
}

ProxFn magnitude_ball_prox(std::size_t components, double bound) {
    if (!(bound >= 0))
        throw InputError("magnitude_ball_prox: bound must be >= 0");
    const auto d = static_cast<Eigen::Index>(components);
    return {[=](const Vector &p, double) { return project_box_magnitude(p, components, bound); },
            [=](const Vector &p) {
                for (Eigen::Index i = 0; i < p.size(); i += d)
                    if (p.segment(i, d).norm() > bound * (1 + 1e-12) + 1e-300)
                        return kInf;
                return 0.0;
            }};
}

SmoothFn quadratic_loss(Vector b, double scale) {
    auto target = std::make_shared<const Vector>(std::move(b));
    return {[target, scale](const Vector &z) {
                if (z.size() != target->size())
                    throw InputError("quadratic loss: argument length mismatch");
                return 0.5 * scale * (z - *target).squaredNorm();
            },
            [target, scale](const Vector &z) -> Vector {
                if (z.size() != target->size())
                    throw InputError("quadratic loss: argument length mismatch");
                return scale * (z - *target);
            }};
}

SmoothFn logit_loss(Vector b) {
    require_binary(b, "logit_loss");
    auto labels = std::make_shared<const Vector>(std::move(b));
    return {[labels](const Vector &z) { return logit_value(z, *labels); },
            [labels](const Vector &z) { return logit_gradient(z, *labels); }};
}

} // namespace fasta
