#pragma once

#include "fasta/linear_operator.hpp"
#include "fasta/prox.hpp"
#include "fasta/types.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fasta {

/// min_x f(A x) + g(x). `smooth` acts on the codomain of `op`, `prox` and
/// `x0` on its domain.
struct Problem {
    LinearOperator op;
    SmoothFn smooth;
    ProxFn prox;
    Vector x0;
};

enum class StopRule { ratio_residual, normalized_residual, hybrid_residual };

/// "ratioResidual" | "normalizedResidual" | "hybridResidual". Throws ConfigError otherwise.
StopRule parse_stop_rule(std::string_view name);
std::string_view to_string(StopRule rule);

struct Options;

/// Custom stopping predicate: (x_k, k, residual, normalized residual,
/// max residual so far, options). Replaces the built-in rules when set.
using StopPredicate =
    std::function<bool(const Vector &, long, double, double, double, const Options &)>;

struct Options {
    int verbose = 0;
    double tol = 1e-3;
    long max_iters = 1000;
    bool record_objective = false;
    bool record_iterates = false;
    bool adaptive = true;
    bool accelerate = false;
    /// Only consulted when `accelerate` is set.
    bool restart = true;
    bool backtrack = true;
    /// Evaluated on every iterate; results land in Trace::func_values.
    std::function<double(const Vector &)> monitor;
    std::optional<double> tau;
    std::optional<double> lipschitz;
    StopRule stop_rule = StopRule::hybrid_residual;
    StopPredicate stop_now;
    std::string string_header;
    /// Seeds the random probe used to estimate the Lipschitz constant.
    std::uint64_t seed = 0;
    /// Console output goes here; std::cout when null.
    std::ostream *log = nullptr;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const Options &options);

struct Trace {
    double solve_time = 0.0;
    std::vector<double> residuals;
    std::vector<double> stepsizes;
    std::vector<double> normalized_residuals;
    std::vector<double> objective;
    std::vector<double> func_values;
    long backtracks = 0;
    double lipschitz_estimate = 0.0;
    double initial_stepsize = 0.0;
    long iteration_count = 0;
    std::vector<Vector> iterates;
};

enum class Termination { tolerance_reached, max_iters, custom_stop, stagnation };

std::string_view to_string(Termination t);
/// Inverse of to_string; throws ParseError on unknown names.
Termination parse_termination(std::string_view name);

struct SolveResult {
    Vector solution;
    Trace trace;
    Termination termination = Termination::max_iters;
};

// ---- building blocks ------------------------------------------------------

inline constexpr int kBacktrackWindow = 10;
inline constexpr int kMaxHalvings = 20;
inline constexpr double kResidualEps = 1e-8;

struct InitialStep {
    double tau = 0.0;
    double lipschitz = 0.0;
};

/// Probes the gradient of f(A x) at x0 and x0 + delta (|delta| = 1, seeded)
/// for a Lipschitz estimate L, floored at 1e-6, and returns tau = 0.2 / L.
/// A supplied `lipschitz` replaces the estimate; a supplied `tau` wins over both.
InitialStep estimate_initial_stepsize(const Problem &problem, std::uint64_t seed,
                                      std::optional<double> tau = std::nullopt,
                                      std::optional<double> lipschitz = std::nullopt);

/// A^T grad f(A x).
Vector smooth_gradient(const Problem &problem, const Vector &x);

struct FbsStep {
    Vector x_next;
    Vector gradient_at_x;
};

/// One forward-backward step: prox(x - tau * G(x), tau), G = A^T grad f(A .).
FbsStep fbs_step(const Vector &x, double tau, const Problem &problem);

struct BacktrackStep {
    Vector x_next;
    Vector ax_next;
    double f_next = 0.0;
    double tau_used = 0.0;
    int n_backtracks = 0;
    /// False when the decrease condition still failed after kMaxHalvings halvings.
    bool accepted = false;
};

/// Forward-backward step with stepsize halving until
/// f(A x+) <= f_reference + <G(x), x+ - x> + |x+ - x|^2 / (2 tau).
BacktrackStep backtrack_step(const Vector &x, const Vector &gradient_at_x, double tau, const Problem &problem,
                             double f_reference);
BacktrackStep backtrack_step(const Vector &x, double tau, const Problem &problem, double f_reference);

/// Spectral (Barzilai-Borwein) stepsize from dx = x_k - x_{k-1} and
/// dg = G(x_k) - G(x_{k-1}); falls back to `tau_prev` when the curvature
/// estimate is unusable.
double adaptive_stepsize(const Vector &dx, const Vector &dg, double tau_prev);

struct AccelerateStep {
    Vector y_next;
    double theta_next = 1.0;
};

/// FISTA extrapolation.
AccelerateStep accelerate_step(const Vector &x_next, const Vector &x_prev, double theta);

struct Residual {
    double residual = 0.0;
    double normalized = 0.0;
};

/// Norm of the subgradient (x - x+)/tau + G(x+) - G(x) of the objective at x+,
/// plus its scale-free version.
Residual compute_residual(const Vector &x, const Vector &x_next, double tau, const Vector &gradient_at_x,
                          const Vector &gradient_at_x_next, double eps_n = kResidualEps);

bool should_stop(StopRule rule, double residual, double normalized, double max_residual, double tol,
                 double eps_r = kResidualEps);

SolveResult solve(const Problem &problem, const Options &options = {});

} // namespace fasta
