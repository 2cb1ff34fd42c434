#include "fasta/linear_operator.hpp"

#include "fasta/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace fasta {

namespace {

void check_size(const Vector &v, const Shape &expected, const char *what) {
    if (static_cast<std::size_t>(v.size()) != expected.size())
        throw InputError(std::string(what) + ": expected shape " + expected.str() + " (" +
                         std::to_string(expected.size()) + " elements), got " +
                         std::to_string(v.size()) + " elements");
}

} // namespace

LinearOperator::LinearOperator(Shape in_shape, Shape out_shape, Map forward, Map adjoint)
    : in_shape_(std::move(in_shape)), out_shape_(std::move(out_shape)),
      forward_(std::make_shared<const Map>(std::move(forward))),
      adjoint_(std::make_shared<const Map>(std::move(adjoint))) {
    if (in_shape_.rank() == 0 || out_shape_.rank() == 0)
        throw InputError("linear operator shapes must have rank >= 1");
    if (!*forward_ || !*adjoint_)
        throw InputError("linear operator needs both forward and adjoint maps");
}

Vector LinearOperator::apply(const Vector &x) const {
    check_size(x, in_shape_, "apply");
    Vector y = (*forward_)(x);
    check_size(y, out_shape_, "apply (operator output)");
    return y;
}

Vector LinearOperator::adjoint_apply(const Vector &y) const {
    check_size(y, out_shape_, "adjoint_apply");
    Vector x = (*adjoint_)(y);
    check_size(x, in_shape_, "adjoint_apply (operator output)");
    return x;
}

LinearOperator identity_operator(const Shape &shape) {
    auto id = [](const Vector &v) { return v; };
    return {shape, shape, id, id};
}

LinearOperator dense_operator(Matrix m) {
    if (m.rows() == 0 || m.cols() == 0)
        throw InputError("dense operator needs a non-empty matrix");
    auto shared = std::make_shared<const Matrix>(std::move(m));
    const auto rows = static_cast<std::size_t>(shared->rows());
    const auto cols = static_cast<std::size_t>(shared->cols());
    return {Shape{cols}, Shape{rows}, [shared](const Vector &x) -> Vector { return *shared * x; },
            [shared](const Vector &y) -> Vector { return shared->transpose() * y; }};
}

namespace {

struct GridGeometry {
    std::vector<std::size_t> extent;
    std::vector<std::size_t> stride;
    std::size_t pixels;

    explicit GridGeometry(const Shape &shape) : pixels(shape.size()) {
        for (std::size_t j = 0; j < shape.rank(); ++j) {
            extent.push_back(shape[j]);
            stride.push_back(shape.stride(j));
        }
    }

    std::size_t coord(std::size_t i, std::size_t axis) const { return (i / stride[axis]) % extent[axis]; }
};

Vector forward_differences(const GridGeometry &g, const Vector &x) {
    const std::size_t d = g.extent.size();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(g.pixels * d));
    for (std::size_t i = 0; i < g.pixels; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (g.coord(i, j) + 1 < g.extent[j])
                out[i * d + j] = x[i + g.stride[j]] - x[i];
    return out;
}

// Adjoint of forward_differences, i.e. the negative divergence.
Vector forward_differences_adjoint(const GridGeometry &g, const Vector &p) {
    const std::size_t d = g.extent.size();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(g.pixels));
    for (std::size_t i = 0; i < g.pixels; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t c = g.coord(i, j);
            if (c + 1 < g.extent[j])
                acc -= p[i * d + j];
            if (c > 0)
                acc += p[(i - g.stride[j]) * d + j];
        }
        out[i] = acc;
    }
    return out;
}

} // namespace

LinearOperator gradient_operator(const Shape &shape) {
    auto geom = std::make_shared<const GridGeometry>(shape);
    return {shape, shape.append(shape.rank()),
            [geom](const Vector &x) { return forward_differences(*geom, x); },
            [geom](const Vector &p) { return forward_differences_adjoint(*geom, p); }};
}

LinearOperator divergence_operator(const Shape &shape) {
    auto geom = std::make_shared<const GridGeometry>(shape);
    return {shape.append(shape.rank()), shape,
            [geom](const Vector &p) -> Vector { return -forward_differences_adjoint(*geom, p); },
            [geom](const Vector &x) -> Vector { return -forward_differences(*geom, x); }};
}

double adjoint_consistency(const LinearOperator &op, int trials, std::uint64_t seed) {
    if (trials < 1)
        throw InputError("adjoint_consistency needs trials >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const auto n = static_cast<Eigen::Index>(op.in_shape().size());
    const auto m = static_cast<Eigen::Index>(op.out_shape().size());
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Vector x(n), y(m);
        for (auto &v : x)
            v = normal(rng);
        for (auto &v : y)
            v = normal(rng);
        const double lhs = op.apply(x).dot(y);
        const double rhs = x.dot(op.adjoint_apply(y));
        const double denom = std::abs(lhs) + std::abs(rhs) + std::numeric_limits<double>::epsilon();
        worst = std::max(worst, std::abs(lhs - rhs) / denom);
    }
    return worst;
}

} // namespace fasta
