#pragma once

#include "ssmap/model.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ssmap {

/// Low-discrepancy points in [0,1)^dim using the first `dim` primes as bases.
class HaltonSequence {
public:
    explicit HaltonSequence(std::size_t dim, std::uint64_t skip = 1);

    Vector next();
    /// Point mapped affinely onto [lower, upper].
    Vector next_in(const Vector& lower, const Vector& upper);

private:
    std::vector<std::uint32_t> bases_;
    std::uint64_t index_;
};

/// Tensor grid with `per_axis` points on each axis of [lower, upper], endpoints included.
/// Degenerate axes (lower == upper) collapse to a single point.
template <typename F>
void for_each_grid_point(const Vector& lower, const Vector& upper, std::size_t per_axis, F&& visit)
{
    const auto dim = static_cast<std::size_t>(lower.size());
    std::vector<std::size_t> counts(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        counts[d] = (upper[d] > lower[d] && per_axis > 1) ? per_axis : 1;
    }
    std::vector<std::size_t> idx(dim, 0);
    Vector p(static_cast<Eigen::Index>(dim));
    while (true) {
        for (std::size_t d = 0; d < dim; ++d) {
            p[d] = counts[d] == 1
                       ? 0.5 * (lower[d] + upper[d])
                       : lower[d] + (upper[d] - lower[d]) * static_cast<double>(idx[d]) /
                                        static_cast<double>(counts[d] - 1);
        }
        visit(static_cast<const Vector&>(p));
        std::size_t d = dim;
        while (d > 0) {
            --d;
            if (++idx[d] < counts[d]) {
                break;
            }
            idx[d] = 0;
            if (d == 0) {
                return;
            }
        }
        if (dim == 0) {
            return;
        }
    }
}

/// pow(per_axis, dim) with saturation at UINT64_MAX.
std::uint64_t grid_size(std::size_t per_axis, std::size_t dim);

} // namespace ssmap
