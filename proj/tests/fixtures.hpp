#pragma once

// Shared test models, built directly through the library types (not the
// parser), plus test-only oracles that never call into the code they check.

#include "ssmap/model.hpp"
#include "ssmap/parser.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using ssmap::HillExpression;
using ssmap::HillProduct;
using ssmap::HillSystem;
using ssmap::HillTerm;
using ssmap::Orientation;
using ssmap::Vector;

inline std::string model_path(const std::string& file)
{
    return std::string(SSMAP_MODELS_DIR) + "/" + file;
}

inline HillTerm act(std::size_t var, double k, std::size_t slot)
{
    return HillTerm{var, Orientation::activating, k, slot};
}

inline HillTerm rep(std::size_t var, double k, std::size_t slot)
{
    return HillTerm{var, Orientation::repressing, k, slot};
}

/// The two-variable toy system with six exponent slots n1..n6.
inline HillSystem toy_system(double n = 2.0)
{
    HillExpression f1{{HillProduct{0.8, {act(0, 0.3, 0)}}, HillProduct{0.6, {act(1, 0.7, 1), rep(0, 0.3, 2)}}}};
    HillExpression f2{{HillProduct{0.9, {act(1, 0.4, 3)}}, HillProduct{0.5, {act(0, 0.6, 4), rep(1, 0.4, 5)}}}};
    return HillSystem({f1, f2}, {1.0, 1.0}, {"n1", "n2", "n3", "n4", "n5", "n6"}, std::vector<double>(6, n));
}

inline ssmap::ThresholdScheme toy_scheme()
{
    return ssmap::ThresholdScheme({{0.3, 0.6}, {0.4, 0.7}});
}

/// Toy truth table, rows in lexicographic input order.
inline const std::vector<std::vector<int>>& toy_table_rows()
{
    static const std::vector<std::vector<int>> rows{
        {0, 0, 0, 0}, {0, 1, 0, 2}, {0, 2, 1, 2}, {1, 0, 2, 0}, {1, 1, 2, 2},
        {1, 2, 2, 2}, {2, 0, 2, 1}, {2, 1, 2, 2}, {2, 2, 2, 2},
    };
    return rows;
}

inline ssmap::MultistateNetwork toy_network()
{
    ssmap::StateSpace space({2, 2});
    std::vector<std::uint32_t> images(9);
    for (const auto& r : toy_table_rows()) {
        images[space.index_of({r[0], r[1]})] = static_cast<std::uint32_t>(space.index_of({r[2], r[3]}));
    }
    return ssmap::MultistateNetwork(space, images);
}

/// Nine-variable Boolean-threshold system (thresholds 0.5), slots n1..n13.
inline HillSystem pfvs9_system(double n = 10.0)
{
    auto one = [](std::vector<HillTerm> f) { return HillExpression{{HillProduct{1.0, std::move(f)}}}; };
    std::vector<HillExpression> e{
        one({rep(3, 0.5, 0)}),
        one({rep(0, 0.5, 1), act(2, 0.5, 2)}),
        one({rep(5, 0.5, 3)}),
        one({rep(4, 0.5, 4)}),
        one({rep(1, 0.5, 5), act(6, 0.5, 6), act(7, 0.5, 7)}),
        one({act(4, 0.5, 8)}),
        one({rep(3, 0.5, 9), act(4, 0.5, 10)}),
        one({act(6, 0.5, 11), rep(8, 0.5, 11)}),
        one({rep(5, 0.5, 12)}),
    };
    std::vector<std::string> names;
    for (int s = 1; s <= 13; ++s) {
        names.push_back("n" + std::to_string(s));
    }
    return HillSystem(e, std::vector<double>(9, 1.0), names, std::vector<double>(13, n));
}

inline ssmap::ThresholdScheme boolean_scheme(std::size_t n)
{
    return ssmap::ThresholdScheme(std::vector<std::vector<double>>(n, {0.5}));
}

// ---------------------------------------------------------------------------
// Oracles

/// Toy system written out longhand from the formulas.
inline Vector toy_direct(const Vector& x, double n)
{
    auto a = [n](double v, double k) { return std::pow(v, n) / (std::pow(k, n) + std::pow(v, n)); };
    auto r = [n](double v, double k) { return std::pow(k, n) / (std::pow(k, n) + std::pow(v, n)); };
    Vector out(2);
    out[0] = 0.8 * a(x[0], 0.3) + 0.6 * a(x[1], 0.7) * r(x[0], 0.3);
    out[1] = 0.9 * a(x[1], 0.4) + 0.5 * a(x[0], 0.6) * r(x[1], 0.4);
    return out;
}

inline ssmap::Matrix central_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                                 double h = 1e-6)
{
    const auto n = x.size();
    ssmap::Matrix j(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Vector xp = x;
        Vector xm = x;
        xp[c] += h;
        xm[c] -= h;
        j.col(c) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return j;
}

/// Roots of the characteristic polynomial of a 1x1, 2x2 or 3x3 matrix.
inline std::vector<std::complex<double>> characteristic_roots(const ssmap::Matrix& a)
{
    using C = std::complex<double>;
    const auto n = a.rows();
    if (n == 1) {
        return {C(a(0, 0), 0.0)};
    }
    if (n == 2) {
        const double tr = a.trace();
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const C disc = std::sqrt(C(tr * tr - 4.0 * det, 0.0));
        return {(tr + disc) / 2.0, (tr - disc) / 2.0};
    }
    // lambda^3 + b lambda^2 + c lambda + d = 0, Cardano with complex arithmetic.
    const double b = -a.trace();
    const double c = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) +
                     a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    const double d = -a.determinant();
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const C disc = std::sqrt(C(q * q / 4.0 + p * p * p / 27.0, 0.0));
    C u = std::pow(C(-q / 2.0, 0.0) + disc, 1.0 / 3.0);
    if (std::abs(u) < 1e-14) {
        u = std::pow(C(-q / 2.0, 0.0) - disc, 1.0 / 3.0);
    }
    const C omega(-0.5, std::sqrt(3.0) / 2.0);
    std::vector<C> roots;
    for (int k = 0; k < 3; ++k) {
        const C uk = u * std::pow(omega, k);
        const C t = std::abs(uk) < 1e-14 ? C(0.0, 0.0) : uk - p / (3.0 * uk);
        roots.push_back(t - b / 3.0);
    }
    return roots;
}

/// Every root of f(x) = x found by plain Newton from a dense grid of starts
/// over [lo, hi]; roots closer than `merge` are merged.
inline std::vector<Vector> dense_newton_roots(const HillSystem& sys, const Vector& lo, const Vector& hi,
                                              int per_axis, double merge = 1e-7)
{
    std::vector<Vector> roots;
    const auto n = lo.size();
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Vector x(n);
        for (Eigen::Index d = 0; d < n; ++d) {
            x[d] = lo[d] + (hi[d] - lo[d]) * (idx[static_cast<std::size_t>(d)] + 0.5) / per_axis;
        }
        bool ok = true;
        for (int it = 0; it < 100; ++it) {
            const Vector g = sys.evaluate(x) - x;
            if (g.cwiseAbs().maxCoeff() < 1e-13) {
                break;
            }
            const auto jac = central_difference_jacobian([&](const Vector& p) { return Vector(sys.evaluate(p) - p); },
                                                         x, 1e-7);
            Vector step = jac.fullPivLu().solve(-g);
            x = (x + step).cwiseMax(0.0).cwiseMin(1.0);
            if (!x.allFinite()) {
                ok = false;
                break;
            }
        }
        if (ok && (sys.evaluate(x) - x).cwiseAbs().maxCoeff() < 1e-10) {
            bool fresh = true;
            for (const auto& r : roots) {
                fresh = fresh && (r - x).cwiseAbs().maxCoeff() > merge;
            }
            if (fresh) {
                roots.push_back(x);
            }
        }
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == per_axis) {
            idx[d++] = 0;
        }
        if (d == idx.size()) {
            break;
        }
    }
    return roots;
}

} // namespace fixtures
