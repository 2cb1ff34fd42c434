#pragma once

#include "fasta/engine.hpp"
#include "fasta/shape.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace fasta {

/// min mu |x|_1 + 1/2 |A x - b|^2
Problem sparse_least_squares(LinearOperator a, Vector b, double mu, Vector x0);

/// min 1/2 |A x - b|^2  s.t.  |x|_1 <= lambda
Problem lasso(LinearOperator a, Vector b, double lambda, Vector x0);

/// min mu |x|_1 + logit(A x, b), b binary.
Problem sparse_logistic(LinearOperator a, Vector b, double mu, Vector x0);

/// min mu |x|_inf + 1/2 |A x - b|^2
Problem democratic(LinearOperator a, Vector b, double mu, Vector x0);

/// Observed (row, col) positions of a rows x cols matrix.
class ObservationMask {
  public:
    ObservationMask(std::size_t rows, std::size_t cols, std::vector<std::pair<std::size_t, std::size_t>> indices);

    static ObservationMask full(std::size_t rows, std::size_t cols);
    /// Nonzero entries of `indicator` are observed.
    static ObservationMask from_indicator(const Matrix &indicator);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const std::vector<std::pair<std::size_t, std::size_t>> &indices() const noexcept { return indices_; }
    bool contains(std::size_t r, std::size_t c) const;

    /// 0/1 weights, row-major.
    Vector weights() const;

  private:
    std::size_t rows_, cols_;
    std::vector<std::pair<std::size_t, std::size_t>> indices_;
    std::vector<char> observed_;
};

/// min mu |X|_* + sum over observed (i,j) of logit(X_ij, Y_ij).
/// Points are X flattened row-major. X0 defaults to zero.
Problem logistic_matrix_completion(const Matrix &y, const ObservationMask &mask, double mu,
                                   std::optional<Matrix> x0 = std::nullopt);

/// Measurements b_i = a_i^T X a_i; row i of `vectors` is a_i.
struct RankOneMeasurements {
    Matrix vectors;
    Vector b;
};

/// X -> (a_i^T X a_i)_i on row-major n x n X, adjoint y -> sum_i y_i a_i a_i^T.
LinearOperator rank_one_measurement_operator(const Matrix &vectors);

/// min mu |X|_* + |A(X) - b|^2  s.t.  X PSD.
Problem phaselift(const RankOneMeasurements &meas, double mu, const Matrix &x0);

/// TV denoising min mu TV(x) + 1/2 |x - noisy|^2 (isotropic TV), posed as
/// the dual min 1/2 |div p - noisy|^2 over per-pixel |p_i| <= mu.
struct TotalVariationProblem {
    Problem dual;
    Shape image_shape;
    Vector noisy;
    double mu = 0.0;

    /// Primal image noisy - div p.
    Vector recover(const Vector &p) const;
    double primal_objective(const Vector &x) const;
    double dual_objective(const Vector &p) const;
    /// primal_objective(recover(p)) - dual_objective(p), >= 0 for feasible p.
    double duality_gap(const Vector &p) const;
};

/// `noisy` is the image flattened row-major with extents `shape`.
TotalVariationProblem total_variation(Vector noisy, const Shape &shape, double mu);

/// Isotropic total variation sum_i |(grad x)_i|.
double total_variation_norm(const Vector &x, const Shape &shape);

} // namespace fasta
