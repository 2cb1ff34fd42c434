#include "fasta/problems.hpp"

#include "fasta/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace fasta {

namespace {

void require_positive(double v, const char *name) {
    if (!(v > 0) || !std::isfinite(v))
        throw InputError(std::string(name) + " must be positive and finite");
}

void check_data(const LinearOperator &a, const Vector &b, const Vector &x0) {
    if (static_cast<std::size_t>(b.size()) != a.out_shape().size())
        throw InputError("b has " + std::to_string(b.size()) + " elements, operator output shape is " +
                         a.out_shape().str());
    if (static_cast<std::size_t>(x0.size()) != a.in_shape().size())
        throw InputError("x0 has " + std::to_string(x0.size()) + " elements, operator input shape is " +
                         a.in_shape().str());
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
    if (z >= 0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

Problem sparse_least_squares(LinearOperator a, Vector b, double mu, Vector x0) {
    require_positive(mu, "mu");
    check_data(a, b, x0);
    return {std::move(a), quadratic_loss(std::move(b)), l1_prox(mu), std::move(x0)};
}

Problem lasso(LinearOperator a, Vector b, double lambda, Vector x0) {
    require_positive(lambda, "lambda");
    check_data(a, b, x0);
    return {std::move(a), quadratic_loss(std::move(b)), l1_ball_prox(lambda), std::move(x0)};
}

Problem sparse_logistic(LinearOperator a, Vector b, double mu, Vector x0) {
    require_positive(mu, "mu");
    check_data(a, b, x0);
    return {std::move(a), logit_loss(std::move(b)), l1_prox(mu), std::move(x0)};
}

Problem democratic(LinearOperator a, Vector b, double mu, Vector x0) {
    require_positive(mu, "mu");
    check_data(a, b, x0);
    return {std::move(a), quadratic_loss(std::move(b)), linf_prox(mu), std::move(x0)};
}

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols,
                                 std::vector<std::pair<std::size_t, std::size_t>> indices)
    : rows_(rows), cols_(cols), indices_(std::move(indices)), observed_(rows * cols, 0) {
    if (rows == 0 || cols == 0)
        throw InputError("observation mask needs positive extents");
    for (auto [r, c] : indices_) {
        if (r >= rows || c >= cols)
            throw InputError("mask index (" + std::to_string(r) + ", " + std::to_string(c) + ") out of bounds for " +
                             std::to_string(rows) + "x" + std::to_string(cols));
        auto &slot = observed_[r * cols + c];
        if (slot)
            throw InputError("mask index (" + std::to_string(r) + ", " + std::to_string(c) + ") repeated");
        slot = 1;
    }
}

ObservationMask ObservationMask::full(std::size_t rows, std::size_t cols) {
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    idx.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            idx.emplace_back(r, c);
    return {rows, cols, std::move(idx)};
}

ObservationMask ObservationMask::from_indicator(const Matrix &indicator) {
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (Eigen::Index r = 0; r < indicator.rows(); ++r)
        for (Eigen::Index c = 0; c < indicator.cols(); ++c)
            if (indicator(r, c) != 0)
                idx.emplace_back(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    return {static_cast<std::size_t>(indicator.rows()), static_cast<std::size_t>(indicator.cols()), std::move(idx)};
}

bool ObservationMask::contains(std::size_t r, std::size_t c) const {
    return r < rows_ && c < cols_ && observed_[r * cols_ + c];
}

Vector ObservationMask::weights() const {
    Vector w(static_cast<Eigen::Index>(observed_.size()));
    for (std::size_t i = 0; i < observed_.size(); ++i)
        w[static_cast<Eigen::Index>(i)] = observed_[i] ? 1.0 : 0.0;
    return w;
}

Problem logistic_matrix_completion(const Matrix &y, const ObservationMask &mask, double mu, std::optional<Matrix> x0) {
    require_positive(mu, "mu");
    const auto rows = static_cast<std::size_t>(y.rows());
    const auto cols = static_cast<std::size_t>(y.cols());
    if (mask.rows() != rows || mask.cols() != cols)
        throw InputError("mask extents do not match Y");
    auto weights = std::make_shared<const Vector>(mask.weights());
    Vector labels = flatten(y);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if ((*weights)[i] == 0) {
            labels[i] = 0.0;
        } else if (labels[i] != 0.0 && labels[i] != 1.0) {
            throw InputError("Y must be 0 or 1 on observed entries");
        }
    }
    auto target = std::make_shared<const Vector>(std::move(labels));
    SmoothFn smooth{[weights, target](const Vector &z) {
                        double total = 0.0;
                        for (Eigen::Index i = 0; i < z.size(); ++i)
                            if ((*weights)[i] != 0)
                                total += softplus(z[i]) - (*target)[i] * z[i];
                        return total;
                    },
                    [weights, target](const Vector &z) {
                        Vector g = Vector::Zero(z.size());
                        for (Eigen::Index i = 0; i < z.size(); ++i)
                            if ((*weights)[i] != 0)
                                g[i] = sigmoid(z[i]) - (*target)[i];
                        return g;
                    }};
    Vector start = Vector::Zero(y.size());
    if (x0) {
        if (x0->rows() != y.rows() || x0->cols() != y.cols())
            throw InputError("X0 extents do not match Y");
        start = flatten(*x0);
    }
    return {identity_operator(Shape{rows, cols}), std::move(smooth), nuclear_prox(rows, cols, mu), std::move(start)};
}

LinearOperator rank_one_measurement_operator(const Matrix &vectors) {
    if (vectors.rows() == 0 || vectors.cols() == 0)
        throw InputError("rank-one measurements need m >= 1 vectors of length n >= 1");
    auto a = std::make_shared<const Matrix>(vectors);
    const auto m = static_cast<std::size_t>(vectors.rows());
    const auto n = static_cast<std::size_t>(vectors.cols());
    return {Shape{n, n}, Shape{m},
            [a](const Vector &x) -> Vector {
                const auto k = a->cols();
                return ((*a) * as_matrix(x, k, k)).cwiseProduct(*a).rowwise().sum();
            },
            [a](const Vector &y) -> Vector { return flatten(a->transpose() * y.asDiagonal() * (*a)); }};
}

Problem phaselift(const RankOneMeasurements &meas, double mu, const Matrix &x0) {
    require_positive(mu, "mu");
    if (meas.vectors.rows() != meas.b.size())
        throw InputError("phaselift: " + std::to_string(meas.vectors.rows()) + " measurement vectors but " +
                         std::to_string(meas.b.size()) + " measurements");
    const auto n = meas.vectors.cols();
    if (x0.rows() != n || x0.cols() != n)
        throw InputError("phaselift: X0 must be " + std::to_string(n) + "x" + std::to_string(n));
    const double asym = (x0 - x0.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        throw InputError("phaselift: X0 is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    // |z - b|^2 carries no 1/2, so the quadratic loss is scaled by 2.
    return {rank_one_measurement_operator(meas.vectors), quadratic_loss(meas.b, 2.0),
            psd_nuclear_prox(static_cast<std::size_t>(n), mu), flatten(0.5 * (x0 + x0.transpose()))};
}

double total_variation_norm(const Vector &x, const Shape &shape) {
    const Vector g = gradient_operator(shape).apply(x);
    const auto d = static_cast<Eigen::Index>(shape.rank());
    double total = 0.0;
    for (Eigen::Index i = 0; i < g.size(); i += d)
        total += g.segment(i, d).norm();
    return total;
}

Vector TotalVariationProblem::recover(const Vector &p) const { return noisy - dual.op.apply(p); }

double TotalVariationProblem::primal_objective(const Vector &x) const {
    return mu * total_variation_norm(x, image_shape) + 0.5 * (x - noisy).squaredNorm();
}

double TotalVariationProblem::dual_objective(const Vector &p) const {
    return 0.5 * noisy.squaredNorm() - 0.5 * (dual.op.apply(p) - noisy).squaredNorm();
}

double TotalVariationProblem::duality_gap(const Vector &p) const {
    return primal_objective(recover(p)) - dual_objective(p);
}

TotalVariationProblem total_variation(Vector noisy, const Shape &shape, double mu) {
    require_positive(mu, "mu");
    if (static_cast<std::size_t>(noisy.size()) != shape.size())
        throw InputError("image has " + std::to_string(noisy.size()) + " elements, shape " + shape.str() +
                         " expects " + std::to_string(shape.size()));
    auto div = divergence_operator(shape);
    Vector p0 = Vector::Zero(static_cast<Eigen::Index>(div.in_shape().size()));
    Problem dual{div, quadratic_loss(noisy), magnitude_ball_prox(shape.rank(), mu), std::move(p0)};
    return {std::move(dual), shape, std::move(noisy), mu};
}

} // namespace fasta
