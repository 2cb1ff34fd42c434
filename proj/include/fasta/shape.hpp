#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace fasta {

/// Extents of a dense row-major array. Rank >= 1, every extent >= 1.
class Shape {
  public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> dims);
    explicit Shape(std::vector<std::size_t> dims);

    static Shape vector(std::size_t n) { return Shape{n}; }
    static Shape matrix(std::size_t rows, std::size_t cols) { return Shape{rows, cols}; }

    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
    const std::vector<std::size_t> &dims() const noexcept { return dims_; }

    /// Product of extents.
    std::size_t size() const noexcept;

    /// Row-major stride of `axis`.
    std::size_t stride(std::size_t axis) const;

    /// This shape with an extra trailing axis of extent `n`.
    Shape append(std::size_t n) const;

    /// "[2x3]"
    std::string str() const;

    friend bool operator==(const Shape &, const Shape &) = default;

  private:
    std::vector<std::size_t> dims_;
};

/// Parses "20x50" / "16x16" / "64" into extents.
Shape parse_shape(const std::string &text);

} // namespace fasta
