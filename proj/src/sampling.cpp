#include "ssmap/sampling.hpp"

#include <limits>

namespace ssmap {

namespace {

std::vector<std::uint32_t> first_primes(std::size_t count)
{
    std::vector<std::uint32_t> primes;
    for (std::uint32_t candidate = 2; primes.size() < count; ++candidate) {
        bool prime = true;
        for (auto p : primes) {
            if (p * p > candidate) {
                break;
            }
            if (candidate % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) {
            primes.push_back(candidate);
        }
    }
    return primes;
}

double radical_inverse(std::uint64_t i, std::uint32_t base)
{
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

} // namespace

HaltonSequence::HaltonSequence(std::size_t dim, std::uint64_t skip) : bases_(first_primes(dim)), index_(skip) {}

Vector HaltonSequence::next()
{
    Vector p(static_cast<Eigen::Index>(bases_.size()));
    for (std::size_t d = 0; d < bases_.size(); ++d) {
        p[static_cast<Eigen::Index>(d)] = radical_inverse(index_, bases_[d]);
    }
    ++index_;
    return p;
}

Vector HaltonSequence::next_in(const Vector& lower, const Vector& upper)
{
    Vector u = next();
    return lower + (upper - lower).cwiseProduct(u);
}

std::uint64_t grid_size(std::size_t per_axis, std::size_t dim)
{
    std::uint64_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) {
        if (per_axis != 0 && total > std::numeric_limits<std::uint64_t>::max() / per_axis) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        total *= per_axis;
    }
    return total;
}

} // namespace ssmap
