#pragma once

#include "fasta/types.hpp"

#include <cstddef>
#include <functional>

namespace fasta {

/// Proximal map of a convex g: evaluate(x, t) = argmin_p g(p) + |p - x|^2 / (2t).
/// `value` evaluates g itself and may be empty when objective recording is not needed.
struct ProxFn {
    std::function<Vector(const Vector &, double)> evaluate;
    std::function<double(const Vector &)> value;
};

/// A differentiable loss with its gradient.
struct SmoothFn {
    std::function<double(const Vector &)> value;
    std::function<Vector(const Vector &)> gradient;
};

// ---- closed-form operators ------------------------------------------------

/// Soft thresholding sign(x) * max(|x| - threshold, 0).
Vector shrink(const Vector &x, double threshold);

/// Euclidean projection onto { p : |p|_1 <= radius }.
Vector project_l1_ball(const Vector &x, double radius);

/// prox of weight * |.|_inf, via x - project_l1_ball(x, weight).
Vector prox_linf(const Vector &x, double weight);

/// Singular value soft thresholding.
Matrix shrink_nuclear(const Matrix &x, double threshold);

/// Joint prox of threshold * |.|_* and the PSD cone: eigenvalues of the
/// symmetric part are shifted down by `threshold` and clipped at zero.
Matrix prox_psd_nuclear(const Matrix &x, double threshold);

/// sum_i log(exp(z_i) + 1) - b_i z_i, with b_i in {0, 1}.
double logit_value(const Vector &z, const Vector &b);

/// sigmoid(z) - b.
Vector logit_gradient(const Vector &z, const Vector &b);

/// Scales each pixel's `components`-vector of `p` (stored contiguously) onto
/// the Euclidean ball of radius `bound`.
Vector project_box_magnitude(const Vector &p, std::size_t components, double bound);

// ---- ProxFn / SmoothFn factories ------------------------------------------

/// g = 0.
ProxFn zero_prox();
/// g = mu |x|_1.
ProxFn l1_prox(double mu);
/// g = indicator of |x|_1 <= radius.
ProxFn l1_ball_prox(double radius);
/// g = mu |x|_inf.
ProxFn linf_prox(double mu);
/// g = mu |X|_* for X stored row-major with the given extents.
ProxFn nuclear_prox(std::size_t rows, std::size_t cols, double mu);
/// g = mu |X|_* + indicator(X PSD) for n x n row-major X.
ProxFn psd_nuclear_prox(std::size_t n, double mu);
/// g = indicator of per-pixel magnitude <= bound.
ProxFn magnitude_ball_prox(std::size_t components, double bound);

/// f(z) = scale/2 * |z - b|^2. scale = 1 is the usual least-squares loss.
SmoothFn quadratic_loss(Vector b, double scale = 1.0);
/// f(z) = logit(z, b).
SmoothFn logit_loss(Vector b);

} // namespace fasta
