#include "fasta/errors.hpp"
#include "fasta/problems.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <string>

using namespace fasta;
using fasta::testing::Rng;

namespace {

Options tight(double tol = 1e-8, long iters = 20000) {
    Options o;
    o.tol = tol;
    o.max_iters = iters;
    return o;
}

double objective(const Problem &p, const Vector &x) { return p.smooth.value(p.op.apply(x)) + p.prox.value(x); }

double min_eigenvalue(const Vector &x, Eigen::Index n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(as_matrix(x, n, n)), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

void check_builder_invariants(const Problem &p, Rng &rng, const std::string &name) {
    CAPTURE(name);
    CHECK(adjoint_consistency(p.op, 100, 17) <= 1e-10);
    const auto m = static_cast<Eigen::Index>(p.op.out_shape().size());
    const auto n = static_cast<Eigen::Index>(p.op.in_shape().size());
    for (int k = 0; k < 20; ++k) {
        const Vector z = rng.vector(m);
        CHECK(testing::finite_difference_error(p.smooth.value, p.smooth.gradient(z), z) <= 1e-5);
    }
    for (double t : {0.1, 1.0, 10.0})
        CHECK(testing::prox_violations(p.prox, 2.0 * rng.vector(n), t, 500, rng) == 0);
}

} // namespace

TEST_CASE("sparse least squares") {
    const Vector b{{2.0, -0.5, 0.0}};
    const auto p = sparse_least_squares(identity_operator(Shape{3}), b, 1.0, Vector::Zero(3));
    CHECK((solve(p, tight()).solution - Vector{{1.0, 0.0, 0.0}}).cwiseAbs().maxCoeff() <= 1e-6);

    Rng rng(1);
    const Matrix a = rng.matrix(10, 6);
    const Vector rhs = rng.vector(10);
    const double mu0 = (a.transpose() * rhs).cwiseAbs().maxCoeff();
    const auto zero = solve(sparse_least_squares(dense_operator(a), rhs, 1.01 * mu0, Vector::Zero(6)), tight());
    CHECK(zero.solution.isZero(0));
    const auto nonzero = solve(sparse_least_squares(dense_operator(a), rhs, 0.9 * mu0, Vector::Zero(6)), tight());
    CHECK_FALSE(nonzero.solution.isZero(1e-8));

    const auto trivial = solve(sparse_least_squares(dense_operator(a), Vector::Zero(10), 1.0, Vector::Zero(6)));
    CHECK(trivial.trace.iteration_count == 1);
    CHECK(trivial.termination == Termination::tolerance_reached);
    CHECK(trivial.solution.isZero(0));

    CHECK_THROWS_AS(sparse_least_squares(dense_operator(a), rhs, 0.0, Vector::Zero(6)), InputError);
    CHECK_THROWS_AS(sparse_least_squares(dense_operator(a), Vector::Zero(9), 1.0, Vector::Zero(6)), InputError);
    CHECK_THROWS_AS(sparse_least_squares(dense_operator(a), rhs, 1.0, Vector::Zero(5)), InputError);
    check_builder_invariants(sparse_least_squares(dense_operator(a), rhs, 0.3, Vector::Zero(6)), rng, "sls");
}

TEST_CASE("lasso") {
    const auto p = lasso(identity_operator(Shape{2}), Vector{{3.0, 0.0}}, 1.0, Vector::Zero(2));
    CHECK((solve(p, tight()).solution - Vector{{1.0, 0.0}}).cwiseAbs().maxCoeff() <= 1e-6);

    Rng rng(2);
    const Matrix a = rng.matrix(5, 3);
    const Vector b = rng.vector(5);
    const Vector x_ls = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    const auto loose = solve(lasso(dense_operator(a), b, 1.5 * x_ls.lpNorm<1>(), Vector::Zero(3)), tight(1e-10));
    CHECK((loose.solution - x_ls).cwiseAbs().maxCoeff() <= 1e-5);

    const Matrix wide = rng.matrix(15, 30);
    const Vector rhs = rng.vector(15);
    Options o = tight(1e-7);
    o.record_iterates = true;
    for (bool accel : {false, true}) {
        o.accelerate = accel;
        o.adaptive = !accel;
        const auto r = solve(lasso(dense_operator(wide), rhs, 2.0, Vector::Zero(30)), o);
        for (const auto &x : r.trace.iterates)
            CHECK(x.lpNorm<1>() <= 2.0 + 1e-9);
        CHECK(r.solution.lpNorm<1>() == doctest::Approx(2.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(lasso(dense_operator(a), b, -1.0, Vector::Zero(3)), InputError);
    check_builder_invariants(lasso(dense_operator(a), b, 0.7, Vector::Zero(3)), rng, "lasso");
}

TEST_CASE("sparse logistic regression") {
    Rng rng(3);
    const Matrix a = rng.matrix(10, 5);
    Vector b(10);
    for (int i = 0; i < 10; ++i)
        b[i] = rng.integer(0, 1);
    const double mu0 = (a.transpose() * (0.5 - b.array()).matrix()).cwiseAbs().maxCoeff();
    const auto r = solve(sparse_logistic(dense_operator(a), b, 1.01 * mu0, Vector::Zero(5)), tight());
    CHECK(r.solution.isZero(0));

    const auto flat = solve(sparse_logistic(dense_operator(Matrix::Zero(10, 5)), b, 0.1, Vector::Zero(5)), tight());
    CHECK(flat.solution.isZero(0));

    const Matrix a2 = rng.matrix(30, 10);
    Vector b2(30);
    for (int i = 0; i < 30; ++i)
        b2[i] = rng.integer(0, 1);
    const double mu = 0.1 * (a2.transpose() * (0.5 - b2.array()).matrix()).cwiseAbs().maxCoeff();
    const auto prob = sparse_logistic(dense_operator(a2), b2, mu, Vector::Zero(10));
    Options ref_opts = tight(1e-12, 100000);
    ref_opts.adaptive = false;
    const auto reference = solve(prob, ref_opts);
    for (const char *m : {"plain", "adaptive", "accelerated"}) {
        CAPTURE(std::string(m));
        Options o = tight(1e-7);
        o.adaptive = std::string(m) == "adaptive";
        o.accelerate = std::string(m) == "accelerated";
        const auto run = solve(prob, o);
        CHECK(std::abs(objective(prob, run.solution) - objective(prob, reference.solution)) <= 1e-8);
    }
    CHECK_THROWS_AS(sparse_logistic(dense_operator(a), Vector::Constant(10, 0.5), 1.0, Vector::Zero(5)), InputError);
    check_builder_invariants(sparse_logistic(dense_operator(a), b, 0.2, Vector::Zero(5)), rng, "logistic");
}

TEST_CASE("observation mask") {
    auto full = ObservationMask::full(2, 3);
    CHECK(full.indices().size() == 6);
    CHECK(full.contains(1, 2));
    CHECK_THROWS_AS(ObservationMask(2, 2, {{2, 0}}), InputError);
    CHECK_THROWS_AS(ObservationMask(2, 2, {{0, 1}, {0, 1}}), InputError);
    Matrix ind(2, 2);
    ind << 1, 0, 0, 1;
    auto m = ObservationMask::from_indicator(ind);
    CHECK(m.weights() == Vector{{1.0, 0.0, 0.0, 1.0}});
}

TEST_CASE("logistic matrix completion") {
    Rng rng(4);
    SUBCASE("large mu gives zero") {
        const Matrix y = Matrix::Ones(5, 5);
        const auto p = logistic_matrix_completion(y, ObservationMask::full(5, 5), 10.0);
        const auto r = solve(p, tight());
        CHECK(r.solution.isZero(1e-12));
        const double at_zero = objective(p, Vector::Zero(25));
        for (int k = 0; k < 200; ++k) {
            const Vector u = rng.vector(5), v = rng.vector(5);
            const Matrix pert = rng.uniform(0.01, 1.0) * u * v.transpose();
            CHECK(objective(p, flatten(pert)) >= at_zero);
        }
    }
    SUBCASE("empty mask gives zero") {
        const Matrix y = Matrix::Ones(4, 3);
        const auto p = logistic_matrix_completion(y, ObservationMask(4, 3, {}), 0.5, Matrix(rng.matrix(4, 3)));
        CHECK(p.smooth.value(rng.vector(12)) == 0.0);
        CHECK(solve(p, tight()).solution.isZero(1e-9));
    }
    SUBCASE("rank-one sign pattern is recovered on held-out entries") {
        const Vector u = rng.vector(6), v = rng.vector(6);
        const Matrix y = ((u * v.transpose()).array() > 0).cast<double>().matrix();
        std::vector<std::pair<std::size_t, std::size_t>> seen;
        std::vector<std::pair<std::size_t, std::size_t>> held_out;
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                (rng.uniform(0, 1) < 0.8 ? seen : held_out).emplace_back(i, j);
        REQUIRE(!held_out.empty());
        const auto p = logistic_matrix_completion(y, ObservationMask(6, 6, seen), 0.5);
        const auto r = solve(p, tight(1e-8));
        const Matrix x = as_matrix(r.solution, 6, 6);
        int agree = 0;
        for (auto [i, j] : held_out)
            agree += ((x(i, j) > 0) == (y(i, j) == 1.0));
        CHECK(static_cast<double>(agree) / held_out.size() >= 0.9);
    }
    SUBCASE("contract") {
        const Matrix y = Matrix::Ones(3, 3);
        CHECK_THROWS_AS(logistic_matrix_completion(y, ObservationMask::full(3, 4), 1.0), InputError);
        Matrix bad = y;
        bad(0, 0) = 0.5;
        CHECK_THROWS_AS(logistic_matrix_completion(bad, ObservationMask::full(3, 3), 1.0), InputError);
        // Unobserved entries may hold anything.
        CHECK_NOTHROW(logistic_matrix_completion(bad, ObservationMask(3, 3, {{1, 1}}), 1.0));
        Matrix yy = ((rng.matrix(3, 4).array() > 0).cast<double>()).matrix();
        check_builder_invariants(logistic_matrix_completion(yy, ObservationMask::full(3, 4), 0.3), rng, "matcomp");
    }
}

TEST_CASE("phaselift") {
    Rng rng(5);
    const Matrix vecs6 = rng.matrix(20, 6);
    const auto op = rank_one_measurement_operator(vecs6);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const Matrix s = rng.matrix(6, 6);
        const Vector x = flatten(0.5 * (s + s.transpose()));
        const Vector y = rng.vector(20);
        const double lhs = op.apply(x).dot(y), rhs = x.dot(op.adjoint_apply(y));
        worst = std::max(worst, std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs)));
    }
    CHECK(worst <= 1e-10);
    // a^T X a for X = I is |a|^2.
    CHECK(op.apply(flatten(Matrix::Identity(6, 6)))[3] == doctest::Approx(vecs6.row(3).squaredNorm()));

    const int n = 8, m = 40;
    const Matrix vecs = rng.matrix(m, n);
    const Vector x_true = rng.vector(n);
    const Vector b = (vecs * x_true).array().square().matrix();
    const auto p = phaselift({vecs, b}, 0.01, Matrix::Zero(n, n));
    Options o = tight(1e-8);
    o.record_iterates = true;
    const auto r = solve(p, o);
    for (const auto &it : r.trace.iterates)
        CHECK(min_eigenvalue(it, n) >= -1e-9);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix(as_matrix(r.solution, n, n)));
    const Vector lead = eig.eigenvectors().col(n - 1);
    CHECK(std::abs(lead.dot(x_true)) / x_true.norm() >= 0.99);

    Matrix asym = Matrix::Zero(n, n);
    asym(0, 1) = 1e-6;
    CHECK_THROWS_AS(phaselift({vecs, b}, 0.1, asym), InputError);
    CHECK_THROWS_AS(phaselift({vecs, Vector::Zero(3)}, 0.1, Matrix::Zero(n, n)), InputError);
    check_builder_invariants(phaselift({vecs6, rng.vector(20)}, 0.2, Matrix::Zero(6, 6)), rng, "phaselift");
}

TEST_CASE("democratic representation") {
    const auto p = democratic(identity_operator(Shape{2}), Vector{{3.0, 0.0}}, 1.0, Vector::Zero(2));
    CHECK((solve(p, tight()).solution - Vector{{2.0, 0.0}}).cwiseAbs().maxCoeff() <= 1e-6);

    Rng rng(6);
    const Matrix a = rng.matrix(5, 8);
    const Vector b = rng.vector(5);
    const Vector x_mn = a.transpose() * (a * a.transpose()).ldlt().solve(b);
    const auto tiny = democratic(dense_operator(a), b, 1e-6, Vector::Zero(8));
    const auto r = solve(tiny, tight(1e-10, 50000));
    CHECK(objective(tiny, r.solution) <= objective(tiny, x_mn) + 1e-4);
    CHECK(0.5 * (a * r.solution - b).squaredNorm() <= 1e-4);

    CHECK(solve(democratic(dense_operator(a), Vector::Zero(5), 1.0, Vector::Zero(8)), tight()).solution.isZero(0));

    const Matrix frame = rng.matrix(4, 8);
    const Vector sig = rng.vector(4);
    const Vector ls = frame.transpose() * (frame * frame.transpose()).ldlt().solve(sig);
    const auto dem = solve(democratic(dense_operator(frame), sig, 0.01, Vector::Zero(8)), tight(1e-10, 50000));
    auto range = [](const Vector &x) { return x.lpNorm<Eigen::Infinity>() / (x.norm() / std::sqrt(8.0)); };
    CHECK(range(dem.solution) < range(ls));
    check_builder_invariants(democratic(dense_operator(a), b, 0.4, Vector::Zero(8)), rng, "democratic");
}

TEST_CASE("total variation denoising") {
    Rng rng(7);
    SUBCASE("vanishing mu leaves the image unchanged") {
        const Vector noisy = rng.vector(30);
        const auto tv = total_variation(noisy, Shape{5, 6}, 1e-8);
        const auto r = solve(tv.dual, tight());
        CHECK((tv.recover(r.solution) - noisy).cwiseAbs().maxCoeff() <= 1e-6);
    }
    SUBCASE("constant image") {
        const Vector flat = Vector::Constant(20, 3.25);
        const auto tv = total_variation(flat, Shape{4, 5}, 0.7);
        const auto r = solve(tv.dual, tight());
        CHECK(tv.recover(r.solution) == flat);
    }
    SUBCASE("1-d step against an exhaustive two-piece search") {
        const Vector f{{0.0, 0.0, 4.0, 4.0}};
        const auto tv = total_variation(f, Shape{4}, 1.0);
        const auto r = solve(tv.dual, tight(1e-10));
        const Vector x = tv.recover(r.solution);
        // x = [u, u, v, v]; scan (u, v) on a 1e-3 grid and refine.
        auto phi = [&](double u, double v) { return std::abs(v - u) + u * u + (v - 4) * (v - 4); };
        double bu = 0, bv = 0, best = INFINITY;
        for (int i = -1000; i <= 5000; i += 10)
            for (int j = -1000; j <= 5000; j += 10) {
                const double val = phi(i * 1e-3, j * 1e-3);
                if (val < best) {
                    best = val;
                    bu = i * 1e-3;
                    bv = j * 1e-3;
                }
            }
        const double cu = bu, cv = bv;
        for (int i = -20; i <= 20; ++i)
            for (int j = -20; j <= 20; ++j) {
                const double u = cu + i * 1e-3, v = cv + j * 1e-3;
                const double val = phi(u, v);
                if (val < best) {
                    best = val;
                    bu = u;
                    bv = v;
                }
            }
        const Vector oracle{{bu, bu, bv, bv}};
        CHECK((x - oracle).cwiseAbs().maxCoeff() <= 1e-3);
    }
    SUBCASE("duality gap and dual feasibility") {
        const Shape shape{16, 16};
        Vector noisy(256);
        for (std::size_t i = 0; i < 256; ++i) {
            const std::size_t r = i / 16, c = i % 16;
            noisy[static_cast<Eigen::Index>(i)] = (r >= 4 && r < 12 && c >= 4 && c < 12 ? 1.0 : 0.0) + 0.1 * rng.normal();
        }
        const auto tv = total_variation(noisy, shape, 0.1);
        Options o = tight(1e-8, 20000);
        o.record_iterates = true;
        const auto r = solve(tv.dual, o);
        CHECK(tv.duality_gap(r.solution) >= -1e-12);
        CHECK(tv.duality_gap(r.solution) <= 1e-4);
        for (const auto &p : r.trace.iterates)
            for (Eigen::Index i = 0; i < p.size(); i += 2)
                CHECK(p.segment(i, 2).norm() <= 0.1 + 1e-12);
        CHECK(tv.primal_objective(tv.recover(r.solution)) < tv.primal_objective(noisy));
    }
    SUBCASE("3-d volumes") {
        const Vector vol = rng.vector(4 * 3 * 5);
        const auto tv = total_variation(vol, Shape{4, 3, 5}, 0.3);
        CHECK(tv.dual.x0.size() == 4 * 3 * 5 * 3);
        const auto r = solve(tv.dual, tight(1e-8));
        CHECK(tv.duality_gap(r.solution) <= 1e-4);
    }
    CHECK_THROWS_AS(total_variation(Vector::Zero(4), Shape{4}, 0.0), InputError);
    CHECK_THROWS_AS(total_variation(Vector::Zero(5), Shape{2, 2}, 1.0), InputError);
    check_builder_invariants(total_variation(rng.vector(12), Shape{3, 4}, 0.5).dual, rng, "tv");
}

TEST_CASE("builders solve deterministically") {
    Rng rng(8);
    const Matrix a = rng.matrix(12, 20);
    const Vector b = rng.vector(12);
    const auto p = sparse_least_squares(dense_operator(a), b, 0.5, Vector::Zero(20));
    const auto tv = total_variation(rng.vector(36), Shape{6, 6}, 0.2);
    for (const Problem *prob : {&p, &tv.dual}) {
        const auto r1 = solve(*prob, tight()), r2 = solve(*prob, tight());
        CHECK(r1.trace.residuals == r2.trace.residuals);
        CHECK(r1.trace.stepsizes == r2.trace.stepsizes);
        CHECK(r1.solution == r2.solution);
    }
}
