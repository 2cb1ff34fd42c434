#include "fasta/generate.hpp"

#include "fasta/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fasta {

const Matrix &Instance::at(std::string_view name) const {
    for (const auto &[n, m] : arrays)
        if (n == name)
            return m;
    throw InputError("instance has no array '" + std::string(name) + "'");
}

bool Instance::has(std::string_view name) const {
    return std::any_of(arrays.begin(), arrays.end(), [&](const auto &p) { return p.first == name; });
}

namespace {

class Sampler {
  public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    Matrix normal(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        // Row-major fill so the draw order matches the file layout.
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                m(i, j) = normal_(rng_);
        return m;
    }

    Vector sparse_signs(Eigen::Index n, Eigen::Index k) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::shuffle(idx.begin(), idx.end(), rng_);
        Vector x = Vector::Zero(n);
        std::bernoulli_distribution coin(0.5);
        for (Eigen::Index i = 0; i < k; ++i)
            x[idx[static_cast<std::size_t>(i)]] = coin(rng_) ? 1.0 : -1.0;
        return x;
    }

    bool bernoulli(double p) { return std::bernoulli_distribution(p)(rng_); }

  private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

Eigen::Index extent(const Shape &s, std::size_t axis) { return static_cast<Eigen::Index>(s[axis]); }

void require_rank(const Shape &dims, std::size_t rank, std::string_view kind) {
    if (dims.rank() != rank)
        throw InputError(std::string(kind) + " needs " + std::to_string(rank) + " dimensions, got " + dims.str());
}

Instance regression(std::string_view kind, const Shape &dims, std::uint64_t seed, bool noisy, bool binary) {
    require_rank(dims, 2, kind);
    const Eigen::Index m = extent(dims, 0), n = extent(dims, 1);
    Sampler s(seed);
    Matrix a = s.normal(m, n);
    const Eigen::Index k = (n + 9) / 10;
    Vector x = s.sparse_signs(n, k);
    Vector b = a * x;
    if (noisy || binary) {
        const double sigma = 0.01 * b.norm() / std::sqrt(static_cast<double>(m));
        b += sigma * s.normal(m, 1).col(0);
    }
    if (binary)
        b = (b.array() > 0).cast<double>().matrix();
    Instance inst{std::string(kind), dims, seed, {}};
    inst.arrays.emplace_back("A", std::move(a));
    inst.arrays.emplace_back("b", std::move(b));
    inst.arrays.emplace_back("x_true", std::move(x));
    return inst;
}

} // namespace

Vector piecewise_constant_image(const Shape &shape) {
    Vector img = Vector::Zero(static_cast<Eigen::Index>(shape.size()));
    for (std::size_t i = 0; i < shape.size(); ++i) {
        bool inside = true;
        for (std::size_t j = 0; j < shape.rank(); ++j) {
            const std::size_t c = (i / shape.stride(j)) % shape[j];
            const std::size_t lo = shape[j] / 4, hi = shape[j] - shape[j] / 4;
            inside = inside && c >= lo && c < hi;
        }
        img[static_cast<Eigen::Index>(i)] = inside ? 1.0 : 0.0;
    }
    return img;
}

Instance generate(std::string_view kind, const Shape &dims, std::uint64_t seed) {
    if (kind == "sls" || kind == "democratic" || kind == "generic")
        return regression(kind, dims, seed, true, false);
    if (kind == "lasso")
        return regression(kind, dims, seed, false, false);
    if (kind == "logistic")
        return regression(kind, dims, seed, true, true);

    Sampler s(seed);
    Instance inst{std::string(kind), dims, seed, {}};
    if (kind == "matcomp") {
        require_rank(dims, 2, kind);
        const Eigen::Index r = extent(dims, 0), c = extent(dims, 1);
        const Vector u = s.normal(r, 1).col(0);
        const Vector v = s.normal(c, 1).col(0);
        Matrix y = ((u * v.transpose()).array() > 0).cast<double>().matrix();
        Matrix mask(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j)
                mask(i, j) = s.bernoulli(0.8) ? 1.0 : 0.0;
        inst.arrays.emplace_back("Y", std::move(y));
        inst.arrays.emplace_back("mask", std::move(mask));
        return inst;
    }
    if (kind == "phaselift") {
        require_rank(dims, 2, kind);
        const Eigen::Index n = extent(dims, 0), m = extent(dims, 1);
        Matrix a = s.normal(m, n);
        const Vector x = s.normal(n, 1).col(0);
        const Vector b = (a * x).array().square().matrix();
        inst.arrays.emplace_back("A", std::move(a));
        inst.arrays.emplace_back("b", b);
        inst.arrays.emplace_back("x_true", x);
        return inst;
    }
    if (kind == "tv") {
        const Vector clean = piecewise_constant_image(dims);
        const Vector noisy = clean + 0.1 * s.normal(clean.size(), 1).col(0);
        auto as_array = [&](const Vector &v) -> Matrix {
            if (dims.rank() == 2)
                return as_matrix(v, extent(dims, 0), extent(dims, 1));
            return v;
        };
        inst.arrays.emplace_back("image", as_array(noisy));
        inst.arrays.emplace_back("clean", as_array(clean));
        return inst;
    }
    throw InputError("unknown instance kind '" + std::string(kind) + "'");
}

} // namespace fasta
