#include "fasta/errors.hpp"
#include "fasta/linear_operator.hpp"
#include "fasta/matrix_io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstring>

using namespace fasta;
using fasta::testing::Rng;

TEST_CASE("shape bookkeeping") {
    Shape s{2, 3, 4};
    CHECK(s.size() == 24);
    CHECK(s.stride(0) == 12);
    CHECK(s.stride(2) == 1);
    CHECK(s.append(3) == Shape{2, 3, 4, 3});
    CHECK(s.str() == "[2x3x4]");
    CHECK(parse_shape("20x50") == Shape{20, 50});
    CHECK(parse_shape("64") == Shape{64});
    CHECK_THROWS_AS(Shape({2, 0}), InputError);
    CHECK_THROWS_AS(parse_shape("20x"), InputError);
    CHECK_THROWS_AS(parse_shape("ax3"), InputError);
}

TEST_CASE("apply and adjoint_apply on small hand cases") {
    auto id = identity_operator(Shape{3});
    Vector x(3);
    x << 1, 2, 3;
    CHECK(id.apply(x) == x);
    CHECK(id.adjoint_apply(x) == x);

    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    auto op = dense_operator(m);
    CHECK(op.apply(Vector::Ones(2)) == Vector{{3.0, 7.0}});
    CHECK(op.adjoint_apply(Vector{{1.0, 0.0}}) == Vector{{1.0, 2.0}});
}

TEST_CASE("dense operator matches explicit loops") {
    Rng rng(11);
    const Matrix m = rng.matrix(5, 10);
    const Vector x = rng.vector(10);
    auto op = dense_operator(m);
    Vector loop = Vector::Zero(5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 10; ++j)
            loop[i] += m(i, j) * x[j];
    CHECK((op.apply(x) - loop).norm() <= 1e-12 * loop.norm());

    const Matrix m2 = rng.matrix(4, 6);
    const Vector y = rng.vector(4);
    Vector tloop = Vector::Zero(6);
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 4; ++i)
            tloop[j] += m2(i, j) * y[i];
    CHECK((dense_operator(m2).adjoint_apply(y) - tloop).norm() <= 1e-12 * tloop.norm());
}

TEST_CASE("shape mismatch names both shapes") {
    auto op = dense_operator(Matrix::Ones(2, 3));
    try {
        op.apply(Vector::Ones(2));
        FAIL("expected InputError");
    } catch (const InputError &e) {
        CHECK(std::string(e.what()).find("[3]") != std::string::npos);
        CHECK(std::string(e.what()).find("got 2") != std::string::npos);
    }
    CHECK_THROWS_AS(op.adjoint_apply(Vector::Ones(3)), InputError);
}

TEST_CASE("adjoint consistency") {
    Rng rng(3);
    const Matrix m = rng.matrix(7, 5);
    CHECK(adjoint_consistency(dense_operator(m), 100, 1) <= 1e-10);
    CHECK(adjoint_consistency(identity_operator(Shape{4}), 100, 1) <= 1e-15);

    const Matrix other = rng.matrix(7, 5);
    LinearOperator wrong(Shape{5}, Shape{7}, [m](const Vector &x) -> Vector { return m * x; },
                         [other](const Vector &y) -> Vector { return other.transpose() * y; });
    CHECK(adjoint_consistency(wrong, 100, 1) > 1e-2);
    CHECK_THROWS_AS(adjoint_consistency(wrong, 0, 1), InputError);
}

TEST_CASE("gradient operator") {
    auto grad = gradient_operator(Shape{3});
    CHECK(grad.apply(Vector{{1.0, 2.0, 4.0}}) == Vector{{1.0, 2.0, 0.0}});
    CHECK(grad.out_shape() == Shape{3, 1});

    for (const Shape &s : {Shape{5}, Shape{3, 4}, Shape{2, 3, 4}}) {
        CAPTURE(s.str());
        auto g = gradient_operator(s);
        CHECK(g.out_shape() == s.append(s.rank()));
        CHECK(g.apply(Vector::Constant(static_cast<Eigen::Index>(s.size()), 2.5)).isZero(0));
        CHECK(adjoint_consistency(g, 100, 5) <= 1e-10);
        CHECK(adjoint_consistency(divergence_operator(s), 100, 5) <= 1e-10);
    }

    // 2-d layout: pixel (r, c) at r*cols + c, component j at pixel*2 + j.
    Vector img(6);
    img << 1, 2, 4, 8, 16, 32; // 2x3
    const Vector d = gradient_operator(Shape{2, 3}).apply(img);
    CHECK(d[0] == 7);  // (0,0) down: 8-1
    CHECK(d[1] == 1);  // (0,0) right: 2-1
    CHECK(d[5] == 0);  // (0,2) right: boundary
    CHECK(d[6] == 0);  // (1,0) down: boundary
    CHECK(d[7] == 8);  // (1,0) right: 16-8

    Rng rng(8);
    const Vector x = rng.vector(12), p = rng.vector(24);
    auto g = gradient_operator(Shape{3, 4});
    CHECK(std::abs(g.apply(x).dot(p) - x.dot(g.adjoint_apply(p))) <= 1e-12 * std::abs(g.apply(x).dot(p)) + 1e-14);
    CHECK((divergence_operator(Shape{3, 4}).apply(p) + g.adjoint_apply(p)).isZero(0));
}

TEST_CASE("operators are pure") {
    Rng rng(2);
    const Vector x = rng.vector(20);
    const Vector x_copy = x;
    auto g = gradient_operator(Shape{4, 5});
    const Vector a = g.apply(x), b = g.apply(x);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
    CHECK(x == x_copy);
}

TEST_CASE("matrix files") {
    SUBCASE("csv") {
        Matrix m = parse_matrix("1,2,3\n4,5,6\n");
        CHECK(m.rows() == 2);
        CHECK(m(1, 2) == 6);
        CHECK_THROWS_AS(parse_matrix("1,2\n3\n", "x.csv"), ParseError);
        CHECK_THROWS_AS(parse_matrix("1,abc\n"), ParseError);
        CHECK_THROWS_AS(parse_matrix(""), ParseError);
    }
    SUBCASE("matrix market coordinate") {
        Matrix m = parse_matrix("%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 1.5\n2 3 -2\n");
        CHECK(m(0, 0) == 1.5);
        CHECK(m(1, 2) == -2);
        CHECK(m(0, 1) == 0);
        Matrix s = parse_matrix("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 7\n");
        CHECK(s(0, 1) == 7);
        CHECK(s(1, 0) == 7);
        CHECK_THROWS_AS(parse_matrix("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 7\n"), ParseError);
    }
    SUBCASE("matrix market array") {
        Matrix m = parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
        CHECK(m(1, 0) == 2);
        CHECK(m(0, 1) == 3);
    }
    SUBCASE("round trip") {
        Rng rng(4);
        const Matrix m = rng.matrix(3, 4);
        CHECK(parse_matrix(format_csv(m)) == m);
        CHECK(parse_matrix(format_matrix_market(m)) == m);
        CHECK(parse_vector("1\n2\n3\n") == Vector{{1.0, 2.0, 3.0}});
        CHECK(parse_vector("1,2,3\n") == Vector{{1.0, 2.0, 3.0}});
        CHECK_THROWS_AS(parse_vector("1,2\n3,4\n"), ParseError);
    }
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
