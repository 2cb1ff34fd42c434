#pragma once

#include "fasta/shape.hpp"
#include "fasta/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fasta {

/// A synthetic test instance: named dense arrays in a fixed order.
struct Instance {
    std::string kind;
    Shape dims;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, Matrix>> arrays;

    const Matrix &at(std::string_view name) const;
    bool has(std::string_view name) const;
};

/// Seeded instance generator. `kind` is one of
///   sls, lasso, democratic, generic  dims MxN: A ~ N(0,1), x_true with
///       ceil(N/10) entries of +-1, b = A x_true (lasso noiseless, the others
///       with Gaussian noise of std 0.01 |A x_true| / sqrt(M))
///   logistic                         dims MxN: b = [A x_true + noise > 0]
///   matcomp                          dims RxC: Y = [u v^T > 0], mask keeps ~80%
///   phaselift                        dims NxM: M vectors a_i ~ N(0, I_N),
///       b_i = (a_i^T x_true)^2
///   tv                               any rank: ones on the central box,
///       zeros elsewhere, plus N(0, 0.1^2) noise
/// Output is a pure function of (kind, dims, seed).
Instance generate(std::string_view kind, const Shape &dims, std::uint64_t seed);

/// Convention for the noise-free TV test image (before noise).
Vector piecewise_constant_image(const Shape &shape);

} // namespace fasta
