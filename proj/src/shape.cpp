#include "fasta/shape.hpp"

#include "fasta/errors.hpp"

#include <charconv>
#include <functional>
#include <numeric>

namespace fasta {

namespace {

void validate(const std::vector<std::size_t> &dims) {
    if (dims.empty())
        throw InputError("shape must have rank >= 1");
    for (auto d : dims)
        if (d == 0)
            throw InputError("shape extents must be >= 1");
}

} // namespace

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(dims_); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(dims_); }

std::size_t Shape::size() const noexcept {
    if (dims_.empty())
        return 0;
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
}

std::size_t Shape::stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t j = dims_.size(); j-- > axis + 1;)
        s *= dims_[j];
    return s;
}

Shape Shape::append(std::size_t n) const {
    auto dims = dims_;
    dims.push_back(n);
    return Shape(std::move(dims));
}

std::string Shape::str() const {
    std::string out = "[";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i)
            out += 'x';
        out += std::to_string(dims_[i]);
    }
    return out + "]";
}

Shape parse_shape(const std::string &text) {
    std::vector<std::size_t> dims;
    const char *p = text.data();
    const char *end = p + text.size();
    while (p < end) {
        std::size_t d = 0;
        auto [next, ec] = std::from_chars(p, end, d);
        if (ec != std::errc{} || next == p)
            throw InputError("invalid dimensions '" + text + "' (expected e.g. 20x50)");
        dims.push_back(d);
        p = next;
        if (p < end) {
            if (*p != 'x' && *p != 'X')
                throw InputError("invalid dimensions '" + text + "' (expected e.g. 20x50)");
            ++p;
            if (p == end)
                throw InputError("invalid dimensions '" + text + "' (trailing separator)");
        }
    }
    return Shape(std::move(dims));
}

} // namespace fasta
