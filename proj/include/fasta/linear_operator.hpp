#pragma once

#include "fasta/shape.hpp"
#include "fasta/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>

namespace fasta {

/// Matrix-free linear map A with its adjoint. Points are flat row-major
/// arrays whose length equals the element count of the declared shape.
/// Immutable once constructed; copies share the underlying callables.
class LinearOperator {
  public:
    using Map = std::function<Vector(const Vector &)>;

    LinearOperator(Shape in_shape, Shape out_shape, Map forward, Map adjoint);

    const Shape &in_shape() const noexcept { return in_shape_; }
    const Shape &out_shape() const noexcept { return out_shape_; }

    /// A x. Throws InputError when x does not match in_shape.
    Vector apply(const Vector &x) const;
    /// A^T y. Throws InputError when y does not match out_shape.
    Vector adjoint_apply(const Vector &y) const;

  private:
    Shape in_shape_;
    Shape out_shape_;
    std::shared_ptr<const Map> forward_;
    std::shared_ptr<const Map> adjoint_;
};

LinearOperator identity_operator(const Shape &shape);

/// x -> M x with adjoint y -> M^T y.
LinearOperator dense_operator(Matrix m);

/// Forward differences with a zero trailing boundary along every axis.
/// Maps `shape` to `shape x rank`; component j of pixel i is stored at i*rank + j.
LinearOperator gradient_operator(const Shape &shape);

/// Discrete divergence, the negative adjoint of gradient_operator.
/// Maps `shape x rank` to `shape`.
LinearOperator divergence_operator(const Shape &shape);

/// Dot-product test. Returns the largest relative mismatch
/// |<Ax,y> - <x,A^T y>| / (|<Ax,y>| + |<x,A^T y>| + eps) over `trials`
/// standard-normal draws.
double adjoint_consistency(const LinearOperator &op, int trials, std::uint64_t seed);

} // namespace fasta
