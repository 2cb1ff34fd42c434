#include "fasta/engine.hpp"

#include "fasta/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <iostream>
#include <random>

namespace fasta {

StopRule parse_stop_rule(std::string_view name) {
    if (name == "ratioResidual")
        return StopRule::ratio_residual;
    if (name == "normalizedResidual")
        return StopRule::normalized_residual;
    if (name == "hybridResidual")
        return StopRule::hybrid_residual;
    throw ConfigError("unknown stop rule '" + std::string(name) +
                      "' (expected ratioResidual, normalizedResidual or hybridResidual)");
}

std::string_view to_string(StopRule rule) {
    switch (rule) {
    case StopRule::ratio_residual:
        return "ratioResidual";
    case StopRule::normalized_residual:
        return "normalizedResidual";
    case StopRule::hybrid_residual:
        return "hybridResidual";
    }
    return "hybridResidual";
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::tolerance_reached:
        return "tolerance_reached";
    case Termination::max_iters:
        return "max_iters";
    case Termination::custom_stop:
        return "custom_stop";
    case Termination::stagnation:
        return "stagnation";
    }
    return "max_iters";
}

Termination parse_termination(std::string_view name) {
    for (auto t : {Termination::tolerance_reached, Termination::max_iters, Termination::custom_stop,
                   Termination::stagnation})
        if (to_string(t) == name)
            return t;
    throw ParseError("unknown termination reason '" + std::string(name) + "'");
}

void validate(const Options &options) {
    if (options.verbose < 0 || options.verbose > 2)
        throw ConfigError("verbose must be 0, 1 or 2");
    if (!(options.tol > 0) || !std::isfinite(options.tol))
        throw ConfigError("tol must be positive and finite");
    if (options.max_iters < 1)
        throw ConfigError("max_iters must be >= 1");
    if (options.tau && !(*options.tau > 0 && std::isfinite(*options.tau)))
        throw ConfigError("tau must be positive and finite when supplied");
    if (options.lipschitz && !(*options.lipschitz > 0 && std::isfinite(*options.lipschitz)))
        throw ConfigError("lipschitz must be positive and finite when supplied");
    if (options.adaptive && options.accelerate)
        throw ConfigError("adaptive and accelerate are mutually exclusive; disable one of them");
}

namespace {

void require_finite(const Vector &v, const char *what, long iteration) {
    if (!v.allFinite())
        throw DivergenceError(std::string(what) + " became non-finite at iteration " + std::to_string(iteration),
                              iteration);
}

void validate_problem(const Problem &problem, const Options &options) {
    if (!problem.smooth.value || !problem.smooth.gradient)
        throw ConfigError("problem is missing the smooth value or gradient");
    if (!problem.prox.evaluate)
        throw ConfigError("problem is missing the proximal operator");
    if (options.record_objective && !problem.prox.value)
        throw ConfigError("record_objective needs a value function for g");
    if (static_cast<std::size_t>(problem.x0.size()) != problem.op.in_shape().size())
        throw InputError("x0 has " + std::to_string(problem.x0.size()) + " elements, operator expects shape " +
                         problem.op.in_shape().str());
}

struct Evaluated {
    Vector ax;
    double f = 0.0;
};

Evaluated evaluate_smooth(const Problem &problem, const Vector &x) {
    Evaluated e;
    e.ax = problem.op.apply(x);
    e.f = problem.smooth.value(e.ax);
    return e;
}

} // namespace

Vector smooth_gradient(const Problem &problem, const Vector &x) {
    return problem.op.adjoint_apply(problem.smooth.gradient(problem.op.apply(x)));
}

InitialStep estimate_initial_stepsize(const Problem &problem, std::uint64_t seed, std::optional<double> tau,
                                      std::optional<double> lipschitz) {
    InitialStep out;
    if (lipschitz) {
        out.lipschitz = *lipschitz;
    } else {
        const Vector &x1 = problem.x0;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        Vector delta(x1.size());
        for (auto &v : delta)
            v = normal(rng);
        const double n = delta.norm();
        if (n > 0)
            delta /= n;
        else if (delta.size() > 0)
            delta[0] = 1.0;
        const Vector x2 = x1 + delta;
        const Vector g1 = smooth_gradient(problem, x1);
        const Vector g2 = smooth_gradient(problem, x2);
        if (!g1.allFinite() || !g2.allFinite())
            throw DivergenceError("non-finite gradient while estimating the initial stepsize", 0);
        out.lipschitz = std::max((g1 - g2).norm() / (x1 - x2).norm(), 1e-6);
    }
    out.tau = tau ? *tau : 0.2 / out.lipschitz;
    return out;
}

FbsStep fbs_step(const Vector &x, double tau, const Problem &problem) {
    FbsStep step;
    step.gradient_at_x = smooth_gradient(problem, x);
    step.x_next = problem.prox.evaluate(x - tau * step.gradient_at_x, tau);
    return step;
}

BacktrackStep backtrack_step(const Vector &x, const Vector &gradient_at_x, double tau, const Problem &problem,
                             double f_reference) {
    BacktrackStep step;
    // Rounding slack so that an exact fixed point is never rejected.
    const double slack = 1e-12 * std::max(1.0, std::abs(f_reference));
    for (int halvings = 0;; ++halvings) {
        step.x_next = problem.prox.evaluate(x - tau * gradient_at_x, tau);
        auto e = evaluate_smooth(problem, step.x_next);
        step.ax_next = std::move(e.ax);
        step.f_next = e.f;
        step.tau_used = tau;
        step.n_backtracks = halvings;
        const Vector dx = step.x_next - x;
        const double bound = f_reference + gradient_at_x.dot(dx) + dx.squaredNorm() / (2 * tau);
        if (step.f_next <= bound + slack) {
            step.accepted = true;
            return step;
        }
        if (halvings == kMaxHalvings) {
            step.accepted = false;
            return step;
        }
        tau *= 0.5;
    }
}

BacktrackStep backtrack_step(const Vector &x, double tau, const Problem &problem, double f_reference) {
    return backtrack_step(x, smooth_gradient(problem, x), tau, problem, f_reference);
}

double adaptive_stepsize(const Vector &dx, const Vector &dg, double tau_prev) {
    const double dxdg = dx.dot(dg);
    if (!(dxdg > 0))
        return tau_prev;
    const double tau_s = dx.squaredNorm() / dxdg;
    const double tau_m = dxdg / dg.squaredNorm();
    const double tau = tau_m / tau_s > 0.5 ? tau_m : tau_s - 0.5 * tau_m;
    if (!(tau > 0) || !std::isfinite(tau))
        return tau_prev;
    return tau;
}

AccelerateStep accelerate_step(const Vector &x_next, const Vector &x_prev, double theta) {
    AccelerateStep out;
    out.theta_next = (1.0 + std::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
    const double momentum = (theta - 1.0) / out.theta_next;
    if (momentum == 0.0)
        out.y_next = x_next;
    else
        out.y_next = x_next + momentum * (x_next - x_prev);
    return out;
}

Residual compute_residual(const Vector &x, const Vector &x_next, double tau, const Vector &gradient_at_x,
                          const Vector &gradient_at_x_next, double eps_n) {
    // (x - x+)/tau - G(x) is a subgradient of g at x+.
    const Vector g_sub = (x - x_next) / tau - gradient_at_x;
    Residual r;
    r.residual = (g_sub + gradient_at_x_next).norm();
    r.normalized = r.residual / (std::max(gradient_at_x.norm(), g_sub.norm()) + eps_n);
    return r;
}

bool should_stop(StopRule rule, double residual, double normalized, double max_residual, double tol,
                 double eps_r) {
    const bool ratio = residual / (max_residual + eps_r) < tol;
    const bool norm = normalized < tol;
    switch (rule) {
    case StopRule::ratio_residual:
        return ratio;
    case StopRule::normalized_residual:
        return norm;
    case StopRule::hybrid_residual:
        return ratio || norm;
    }
    throw ConfigError("unknown stop rule");
}

namespace {

void log_line(const Options &options, const char *fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    std::ostream &out = options.log ? *options.log : std::cout;
    out << options.string_header << buf << '\n';
}

} // namespace

SolveResult solve(const Problem &problem, const Options &options) {
    validate(options);
    validate_problem(problem, options);
    const auto start = std::chrono::steady_clock::now();

    SolveResult result;
    Trace &trace = result.trace;
    const auto init = estimate_initial_stepsize(problem, options.seed, options.tau, options.lipschitz);
    trace.initial_stepsize = init.tau;
    trace.lipschitz_estimate = init.lipschitz;
    double tau = init.tau;

    Vector x = problem.x0;
    auto ex = evaluate_smooth(problem, x);
    Vector gx = problem.op.adjoint_apply(problem.smooth.gradient(ex.ax));
    if (!std::isfinite(ex.f) || !gx.allFinite())
        throw DivergenceError("non-finite objective or gradient at x0", 0);

    std::deque<double> window{ex.f};
    double prev_objective = options.record_objective ? ex.f + problem.prox.value(x) : 0.0;

    // Extrapolated point and its gradient (accelerated mode only).
    Vector y = x;
    Vector gy = gx;
    double fy = ex.f;
    double theta = 1.0;

    double max_residual = 0.0;
    result.termination = Termination::max_iters;

    for (long k = 1; k <= options.max_iters; ++k) {
        const Vector &s = options.accelerate ? y : x;
        const Vector &gs = options.accelerate ? gy : gx;
        const double fs = options.accelerate ? fy : window.back();

        BacktrackStep step;
        if (options.backtrack) {
            // The extrapolated point may sit above every recent iterate.
            const double f_ref = std::max(fs, *std::max_element(window.begin(), window.end()));
            step = backtrack_step(s, gs, tau, problem, f_ref);
            trace.backtracks += step.n_backtracks;
            if (!step.accepted) {
                result.termination = Termination::stagnation;
                break;
            }
        } else {
            step.x_next = problem.prox.evaluate(s - tau * gs, tau);
            auto e = evaluate_smooth(problem, step.x_next);
            step.ax_next = std::move(e.ax);
            step.f_next = e.f;
            step.tau_used = tau;
            step.accepted = true;
        }
        require_finite(step.x_next, "iterate", k);
        if (!std::isfinite(step.f_next))
            throw DivergenceError("objective became non-finite at iteration " + std::to_string(k), k);

        const double tau_used = step.tau_used;
        Vector x_next = std::move(step.x_next);
        Vector g_next = problem.op.adjoint_apply(problem.smooth.gradient(step.ax_next));
        require_finite(g_next, "gradient", k);

        const auto res = compute_residual(s, x_next, tau_used, gs, g_next);
        trace.residuals.push_back(res.residual);
        trace.normalized_residuals.push_back(res.normalized);
        trace.stepsizes.push_back(tau_used);
        double objective = 0.0;
        if (options.record_objective) {
            objective = step.f_next + problem.prox.value(x_next);
            trace.objective.push_back(objective);
        }
        trace.func_values.push_back(options.monitor ? options.monitor(x_next) : 0.0);
        if (options.record_iterates)
            trace.iterates.push_back(x_next);
        trace.iteration_count = k;
        max_residual = std::max(max_residual, res.residual);

        window.push_back(step.f_next);
        if (window.size() > static_cast<std::size_t>(kBacktrackWindow))
            window.pop_front();

        tau = tau_used;
        if (options.adaptive)
            tau = adaptive_stepsize(x_next - x, g_next - gx, tau_used);

        if (options.accelerate) {
            bool restart = false;
            if (options.restart) {
                restart = (s - x_next).dot(x_next - x) > 0;
                if (options.record_objective && objective > prev_objective)
                    restart = true;
            }
            if (restart)
                theta = 1.0;
            auto acc = accelerate_step(x_next, x, theta);
            theta = acc.theta_next;
            if (acc.y_next == x_next) {
                gy = g_next;
                fy = step.f_next;
            } else {
                auto ey = evaluate_smooth(problem, acc.y_next);
                fy = ey.f;
                gy = problem.op.adjoint_apply(problem.smooth.gradient(ey.ax));
                require_finite(gy, "extrapolated gradient", k);
            }
            y = std::move(acc.y_next);
        }
        prev_objective = objective;
        x = std::move(x_next);
        gx = std::move(g_next);

        if (options.verbose >= 2)
            log_line(options, "iter %6ld  residual %.6e  normalized %.6e  tau %.6e", k, res.residual,
                     res.normalized, tau_used);

        if (options.stop_now) {
            if (options.stop_now(x, k, res.residual, res.normalized, max_residual, options)) {
                result.termination = Termination::custom_stop;
                break;
            }
        } else if (should_stop(options.stop_rule, res.residual, res.normalized, max_residual, options.tol)) {
            result.termination = Termination::tolerance_reached;
            break;
        }
    }

    result.solution = std::move(x);
    trace.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.verbose >= 1) {
        const double last = trace.residuals.empty() ? 0.0 : trace.residuals.back();
        log_line(options, "%.*s after %ld iterations  residual %.6e  backtracks %ld  time %.3fs",
                 static_cast<int>(to_string(result.termination).size()), to_string(result.termination).data(),
                 trace.iteration_count, last, trace.backtracks, trace.solve_time);
    }
    return result;
}

} // namespace fasta
