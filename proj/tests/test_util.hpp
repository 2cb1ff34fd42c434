#pragma once

// Shared generators and solver-independent oracles for the test suites.

#include "fasta/engine.hpp"
#include "fasta/matrix_io.hpp"
#include "fasta/prox.hpp"
#include "fasta/trace_io.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <bit>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace fasta::testing {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

    Vector vector(Eigen::Index n) {
        Vector v(n);
        for (auto &x : v)
            x = normal();
        return v;
    }
    Matrix matrix(Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                m(i, j) = normal();
        return m;
    }
    /// Uniform point in the ball of given radius around `center`.
    Vector in_ball(const Vector &center, double radius) {
        Vector d = vector(center.size());
        const double n = d.norm();
        const double r = radius * std::pow(uniform(0, 1), 1.0 / static_cast<double>(center.size()));
        return center + (n > 0 ? d * (r / n) : d);
    }
    std::mt19937_64 &engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_;
};

inline double prox_objective(const ProxFn &g, const Vector &p, const Vector &x, double t) {
    return g.value(p) + (p - x).squaredNorm() / (2 * t);
}

/// Number of random points q in the ball of radius `radius` around p that
/// beat p on the prox objective by more than `tol`.
inline int prox_violations(const ProxFn &g, const Vector &x, double t, int trials, Rng &rng, double tol = 1e-10,
                           double radius = -1) {
    const Vector p = g.evaluate(x, t);
    const double best = prox_objective(g, p, x, t);
    if (radius <= 0)
        radius = std::max(2 * (x - p).norm(), 1e-3);
    int bad = 0;
    for (int k = 0; k < trials; ++k) {
        const Vector q = rng.in_ball(p, radius);
        if (prox_objective(g, q, x, t) < best - tol * std::max(1.0, std::abs(best)))
            ++bad;
    }
    return bad;
}

/// Largest relative discrepancy between `grad` and central differences of `f`.
inline double finite_difference_error(const std::function<double(const Vector &)> &f, const Vector &grad,
                                      const Vector &x, double h = 1e-5) {
    Vector fd(x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        fd[i] = (f(xp) - f(xm)) / (2 * h);
        xp[i] = xm[i] = x[i];
    }
    return (fd - grad).norm() / std::max(grad.norm(), 1e-12);
}

/// argmin over p of phi(p) for a 1-d convex phi: coarse scan of [lo, hi]
/// followed by successive refinement around the best grid point.
inline double scalar_argmin(const std::function<double(double)> &phi, double lo, double hi) {
    double best = lo;
    double step = (hi - lo) / 2000;
    for (int level = 0; level < 5; ++level) {
        double best_val = phi(best);
        const int points = static_cast<int>(std::round((hi - lo) / step));
        for (int i = 0; i <= points; ++i) {
            const double p = lo + i * step;
            const double v = phi(p);
            if (v < best_val) {
                best_val = v;
                best = p;
            }
        }
        lo = best - step;
        hi = best + step;
        step /= 100;
    }
    return best;
}

/// Projection onto the l1 ball by bisection on the soft-threshold level t
/// solving |shrink(x, t)|_1 = radius.
inline Vector l1_ball_bisection(const Vector &x, double radius) {
    if (x.lpNorm<1>() <= radius)
        return x;
    double lo = 0, hi = x.cwiseAbs().maxCoeff();
    auto mass = [&](double t) { return (x.cwiseAbs().array() - t).max(0.0).sum(); };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mass(mid) > radius ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    return x.unaryExpr([t](double v) { return std::copysign(std::max(std::abs(v) - t, 0.0), v); });
}

/// Finite doubles of every magnitude plus signed zeros, subnormals and inf.
inline double random_double(Rng &rng) {
    switch (rng.integer(0, 9)) {
    case 0:
        return 0.0;
    case 1:
        return -0.0;
    case 2:
        return std::numeric_limits<double>::denorm_min() * rng.integer(1, 1000);
    case 3:
        return std::numeric_limits<double>::infinity();
    default: {
        std::uint64_t bits;
        do
            bits = rng.engine()();
        while (!std::isfinite(std::bit_cast<double>(bits)));
        return std::bit_cast<double>(bits);
    }
    }
}

inline std::vector<double> random_series(Rng &rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto &x : v)
        x = random_double(rng);
    return v;
}

inline RunRecord random_record(Rng &rng) {
    RunRecord r;
    r.seed = rng.engine()();
    r.termination = static_cast<Termination>(rng.integer(0, 3));
    auto &o = r.options;
    o.verbose = rng.integer(0, 2);
    o.tol = random_double(rng);
    o.max_iters = rng.integer(1, 100000);
    o.record_objective = rng.integer(0, 1);
    o.record_iterates = rng.integer(0, 1);
    o.adaptive = rng.integer(0, 1);
    o.accelerate = rng.integer(0, 1);
    o.restart = rng.integer(0, 1);
    o.backtrack = rng.integer(0, 1);
    if (rng.integer(0, 1))
        o.tau = random_double(rng);
    if (rng.integer(0, 1))
        o.lipschitz = random_double(rng);
    o.stop_rule = static_cast<StopRule>(rng.integer(0, 2));
    o.string_header = rng.integer(0, 1) ? "run \"" + std::to_string(rng.integer(0, 99)) + "\"\t\\" : "";
    o.seed = rng.engine()();
    o.monitor_supplied = rng.integer(0, 1);
    o.stop_now_supplied = rng.integer(0, 1);

    const auto n = static_cast<std::size_t>(rng.integer(0, 12));
    auto &t = r.trace;
    t.iteration_count = static_cast<long>(n);
    t.residuals = random_series(rng, n);
    t.normalized_residuals = random_series(rng, n);
    t.stepsizes = random_series(rng, n);
    t.func_values = random_series(rng, n);
    if (o.record_objective)
        t.objective = random_series(rng, n);
    if (o.record_iterates) {
        const int dim = rng.integer(1, 4);
        for (std::size_t k = 0; k < n; ++k) {
            Vector x(dim);
            for (auto &v : x)
                v = random_double(rng);
            t.iterates.push_back(x);
        }
    }
    t.solve_time = rng.uniform(0, 10);
    t.backtracks = rng.integer(0, 1000);
    t.lipschitz_estimate = random_double(rng);
    t.initial_stepsize = random_double(rng);

    r.problem.builder = rng.integer(0, 1) ? "sparse_least_squares" : "total_variation";
    r.problem.parameters["mu"] = random_double(rng);
    if (rng.integer(0, 1))
        r.problem.parameters["lambda"] = random_double(rng);
    r.problem.settings["shape"] = "16x16";
    r.problem.data["A"] = fasta::sha256_hex(std::to_string(rng.integer(0, 1 << 30)));
    return r;
}

} // namespace fasta::testing
