#include "doctest.h"
#include "fixtures.hpp"

#include "ssmap/correspondence.hpp"

#include <algorithm>
#include <random>

using namespace ssmap;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) {
        x[i++] = d;
    }
    return x;
}

Vector random_in(std::mt19937_64& rng, const CompactBox& box)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector x(box.lower.size());
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        x[d] = box.lower[d] + (box.upper[d] - box.lower[d]) * u(rng);
    }
    return x;
}

} // namespace

TEST_CASE("limit points of the toy system")
{
    const auto sys = fixtures::toy_system();
    const auto scheme = fixtures::toy_scheme();
    CHECK((limit_point(sys, scheme, {2, 0}).value - vec({0.8, 0.5})).norm() < 1e-12);
    CHECK((limit_point(sys, scheme, {0, 0}).value - vec({0.0, 0.0})).norm() < 1e-12);
    const auto l02 = limit_point(sys, scheme, {0, 2});
    CHECK((l02.value - vec({0.6, 0.9})).norm() < 1e-12);
    CHECK(l02.on_threshold == std::vector<std::size_t>{0});

    ThresholdScheme other({{0.25}, {0.5}});
    CHECK_THROWS_AS(limit_point(sys, other, {0, 0}), UndeclaredThreshold);

    SUBCASE("f approaches L_x deep inside every box for huge exponents")
    {
        const auto steep = fixtures::toy_system(1e4);
        const Cover cover = build_cover(scheme, {0.05});
        std::mt19937_64 rng(1);
        for (const auto& box : cover.boxes) {
            const Vector L = limit_point(steep, scheme, box.state).value;
            for (int k = 0; k < 200; ++k) {
                CHECK((steep.evaluate(random_in(rng, box)) - L).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }
}

TEST_CASE("induced network")
{
    const auto induced = induced_network(fixtures::toy_system(), fixtures::toy_scheme());
    CHECK(induced.network == fixtures::toy_network());
    REQUIRE(induced.degeneracies.size() == 1);
    CHECK(induced.degeneracies[0].state == DiscreteState{0, 2});
    CHECK(induced.degeneracies[0].vars == std::vector<std::size_t>{0});

    const auto nine = induced_network(fixtures::pfvs9_system(), fixtures::boolean_scheme(9));
    CHECK(nine.degeneracies.empty());
    std::size_t fixed = 0;
    for (std::uint64_t s = 0; s < nine.network.space().state_count(); ++s) {
        fixed += nine.network.image(s) == s;
    }
    CHECK(fixed <= 2);

    // f(x) = x through a single activating term: every region is its own image.
    HillSystem self({HillExpression{{HillProduct{1.0, {fixtures::act(0, 0.5, 0)}}}}}, {1.0}, {"n"}, {4.0});
    const auto id = induced_network(self, ThresholdScheme(std::vector<std::vector<double>>{{0.5}}));
    CHECK(id.network.image(0) == 0);
    CHECK(id.network.image(1) == 1);
}

TEST_CASE("region invariance")
{
    const auto sys = fixtures::toy_system(50.0);
    const auto scheme = fixtures::toy_scheme();
    const Cover cover = build_cover(scheme, {0.05});
    CHECK(check_invariance(sys, scheme, cover, {0, 0}).status == RegionStatus::invariant);
    CHECK(check_invariance(sys, scheme, cover, {2, 2}).status == RegionStatus::invariant);
    const auto v10 = check_invariance(sys, scheme, cover, {1, 0});
    CHECK(v10.status == RegionStatus::excluded);
    CHECK(v10.target == DiscreteState{2, 0});
    CHECK(check_invariance(sys, scheme, cover, {0, 2}).status == RegionStatus::degenerate);

    SUBCASE("image bounds enclose every sampled value")
    {
        std::mt19937_64 rng(3);
        auto enclose = [&](const HillSystem& s, const ThresholdScheme& sc, int per_box) {
            const Cover c = build_cover(sc, {0.1});
            for (const auto& box : c.boxes) {
                const auto v = check_invariance(s, sc, c, box.state);
                for (int k = 0; k < per_box; ++k) {
                    const Vector fx = s.evaluate(random_in(rng, box));
                    CHECK(((fx.array() >= v.image_lower.array() - 1e-12) &&
                           (fx.array() <= v.image_upper.array() + 1e-12))
                              .all());
                }
            }
        };
        enclose(fixtures::pfvs9_system(4.0), fixtures::boolean_scheme(9), 20);
        enclose(fixtures::toy_system(3.0), scheme, 1100);
    }
}

TEST_CASE("contraction certificate")
{
    const auto scheme = fixtures::toy_scheme();
    CHECK(contraction_bound({1.0, 1.0}) == doctest::Approx(0.5));
    CHECK(contraction_bound({1.0, 2.0, 2.0}) == doctest::Approx(1.0 / (std::sqrt(3.0) * 3.0)));

    const auto loose = check_contraction(fixtures::toy_system(1.0), build_cover(scheme, {0.05}));
    CHECK(loose.bound == doctest::Approx(0.5));
    CHECK_FALSE(loose.passes);
    CHECK(loose.sampled);

    const auto tight = check_contraction(fixtures::toy_system(50.0), build_cover(scheme, {0.1}));
    CHECK(tight.passes);
    CHECK(tight.grid_per_axis == 17);

    HillSystem flat({HillExpression{{HillProduct{0.3, {}}}}, HillExpression{}}, {1.0, 1.0}, {}, {});
    const auto zero = check_contraction(flat, build_cover(ThresholdScheme({{0.5}, {0.5}}), {0.1}));
    CHECK(zero.sampled_sup_norm == 0.0);
    CHECK(zero.passes);

    SUBCASE("sampled supremum matches a finer independent scan")
    {
        const auto sys = fixtures::toy_system(5.0);
        const Cover cover = build_cover(scheme, {0.05});
        const auto cert = check_contraction(sys, cover);
        std::mt19937_64 rng(8);
        double seen = 0.0;
        for (const auto& box : cover.boxes) {
            for (int k = 0; k < 2000; ++k) {
                const Vector x = random_in(rng, box);
                seen = std::max(seen, fixtures::central_difference_jacobian(
                                          [&](const Vector& p) { return fixtures::toy_direct(p, 5.0); }, x)
                                          .norm());
            }
        }
        CHECK(cert.sampled_sup_norm >= 0.98 * seen);
    }
}

TEST_CASE("stability")
{
    const auto at_origin = stability(fixtures::toy_system(2.0), Vector::Zero(2));
    CHECK(at_origin.verdict == Stability::asymptotically_stable);
    CHECK(at_origin.gershgorin_certified);
    for (const auto& ev : at_origin.eigenvalues) {
        CHECK(ev.real() == doctest::Approx(-1.0));
        CHECK(ev.imag() == 0.0);
    }

    HillSystem switch1({HillExpression{{HillProduct{1.0, {fixtures::act(0, 0.5, 0)}}}}}, {1.0}, {"n"}, {4.0});
    const auto mid = stability(switch1, vec({0.5}));
    CHECK(mid.verdict == Stability::unstable);
    CHECK(mid.eigenvalues[0].real() == doctest::Approx(1.0));
    CHECK_FALSE(mid.gershgorin_certified);

    SUBCASE("eigenvalues agree with the characteristic polynomial; certificates are sound")
    {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto sys2 = fixtures::toy_system(3.0);
        const auto sys3 = HillSystem(
            {HillExpression{{HillProduct{0.7, {fixtures::act(1, 0.5, 0)}}, HillProduct{0.2, {fixtures::rep(2, 0.4, 0)}}}},
             HillExpression{{HillProduct{0.9, {fixtures::rep(0, 0.6, 0), fixtures::act(2, 0.3, 0)}}}},
             HillExpression{{HillProduct{0.5, {fixtures::act(0, 0.5, 0)}}}}},
            {1.0, 0.5, 2.0}, {"n"}, {3.0});
        for (const auto* sys : {&sys2, &sys3}) {
            const auto n = static_cast<Eigen::Index>(sys->n_vars());
            for (int k = 0; k < 200; ++k) {
                Vector x(n);
                for (Eigen::Index d = 0; d < n; ++d) {
                    x[d] = u(rng);
                }
                const auto r = stability(*sys, x);
                Matrix D = Matrix::Zero(n, n);
                for (Eigen::Index d = 0; d < n; ++d) {
                    D(d, d) = sys->decay()[static_cast<std::size_t>(d)];
                }
                const Matrix fd = fixtures::central_difference_jacobian(
                    [&](const Vector& p) { return sys->evaluate(p); }, x.cwiseMax(1e-5).cwiseMin(1.0 - 1e-5));
                auto roots = fixtures::characteristic_roots(D * (fd - Matrix::Identity(n, n)));
                REQUIRE(roots.size() == r.eigenvalues.size());
                for (const auto& root : roots) {
                    double nearest = 1e300;
                    for (const auto& ev : r.eigenvalues) {
                        nearest = std::min(nearest, std::abs(ev - root));
                    }
                    CHECK(nearest < 1e-3 * (1.0 + std::abs(root)));
                }
                if (r.gershgorin_certified) {
                    for (const auto& ev : r.eigenvalues) {
                        CHECK(ev.real() < 0.0);
                    }
                }
            }
        }
    }
}

TEST_CASE("steady states of the toy system at n = 2")
{
    const auto sys = fixtures::toy_system(2.0);
    const auto scheme = fixtures::toy_scheme();
    const Cover cover = build_cover(scheme, {0.05});

    const auto all = fixtures::dense_newton_roots(sys, Vector::Zero(2), Vector::Ones(2), 25);
    REQUIRE(all.size() == 3);

    const auto high = find_steady_state(sys, cover.box({2, 2}));
    REQUIRE(high);
    CHECK(high->residual < 1e-10);
    const auto oracle = std::find_if(all.begin(), all.end(), [](const Vector& r) { return r[0] > 0.6; });
    REQUIRE(oracle != all.end());
    CHECK((high->point - *oracle).norm() < 1e-8);
    CHECK(high->stability.verdict == Stability::asymptotically_stable);

    const auto low = find_steady_state(sys, cover.box({0, 0}), {}, Vector::Zero(2));
    REQUIRE(low);
    CHECK(low->point.norm() < 1e-10);
    CHECK_FALSE(find_steady_state(sys, cover.box({1, 0})));

    const auto both = multistart_steady_states(sys, cover.box({0, 0}), 32, {}, Vector::Zero(2));
    CHECK(both.size() == 2);
}

TEST_CASE("solver respects the box")
{
    const auto sys = fixtures::toy_system(2.0);
    const Cover cover = build_cover(fixtures::toy_scheme(), {0.05});
    std::mt19937_64 rng(77);
    for (const auto& box : cover.boxes) {
        for (int k = 0; k < 8; ++k) {
            const auto r = solve_in_box(sys, box, random_in(rng, box), {});
            CHECK(box.contains(r.point));
            if (r.found) {
                CHECK((sys.evaluate(r.point) - r.point).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }
}

TEST_CASE("correspondence report")
{
    const auto scheme = fixtures::toy_scheme();
    SUBCASE("n = 2 matches the fixed points but is not certified")
    {
        const auto rep = correspondence_report(fixtures::toy_system(2.0), scheme);
        CHECK(rep.verdict == Verdict::partial);
        CHECK(rep.fixed_points == std::vector<DiscreteState>{{0, 0}, {2, 2}});
        CHECK(rep.steady_states.size() == 2);
        CHECK(rep.cover.excluded_measure == doctest::Approx(0.36));
        CHECK_FALSE(rep.reasons.empty());
    }
    SUBCASE("audit finds the saddle next to the origin")
    {
        CorrespondenceConfig cfg;
        cfg.audit = true;
        const auto rep = correspondence_report(fixtures::toy_system(2.0), scheme, cfg);
        CHECK(rep.verdict == Verdict::failed);
        CHECK(rep.steady_states.size() == 3);
        const auto unstable = std::count_if(rep.steady_states.begin(), rep.steady_states.end(), [](const auto& s) {
            return s.stability.verdict == Stability::unstable;
        });
        CHECK(unstable == 1);
    }
    SUBCASE("steep exponents give a certified one-to-one correspondence")
    {
        CorrespondenceConfig cfg;
        cfg.margins = {0.1};
        const auto rep = correspondence_report(fixtures::toy_system(50.0), scheme, cfg);
        CHECK(rep.verdict == Verdict::one_to_one);
        CHECK(rep.contraction.passes);
        REQUIRE(rep.steady_states.size() == 2);
        for (const auto& s : rep.steady_states) {
            CHECK(s.matched_discrete_fixed_point == s.box);
            CHECK(s.stability.gershgorin_certified);
            CHECK(s.distance_to_limit < 1e-3);
        }
        CHECK(rep.regions.size() == 9);
    }
    SUBCASE("reports are reproducible")
    {
        CorrespondenceConfig cfg;
        cfg.audit = true;
        cfg.audit_starts = 8;
        const auto a = correspondence_report(fixtures::toy_system(3.0), scheme, cfg);
        cfg.threads = 3;
        const auto b = correspondence_report(fixtures::toy_system(3.0), scheme, cfg);
        REQUIRE(a.steady_states.size() == b.steady_states.size());
        for (std::size_t i = 0; i < a.steady_states.size(); ++i) {
            CHECK(a.steady_states[i].point == b.steady_states[i].point);
        }
        CHECK(a.contraction.sampled_sup_norm == b.contraction.sampled_sup_norm);
    }
}

TEST_CASE("steady state approaches its limit as exponents grow")
{
    const Cover cover = build_cover(fixtures::toy_scheme(), {0.05});
    const Vector L = vec({0.8, 0.9});
    double previous = 1e300;
    for (double n : {2.0, 5.0, 10.0, 20.0, 50.0}) {
        const auto s = find_steady_state(fixtures::toy_system(n), cover.box({2, 2}));
        REQUIRE(s);
        const double d = (s->point - L).norm();
        CHECK(d < previous);
        previous = d;
    }
    CHECK(previous < 1e-3);
}
