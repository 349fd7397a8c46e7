#include "doctest.h"
#include "fixtures.hpp"

#include "ssmap/simulation.hpp"

#include <random>
#include <set>

using namespace ssmap;

namespace {

Vector vec2(double a, double b)
{
    Vector x(2);
    x << a, b;
    return x;
}

double error_at(double dt, const Vector& reference)
{
    IntegrationOptions opt;
    opt.dt = dt;
    opt.t_end = 2.0;
    return (integrate_ode(fixtures::toy_system(2.0), vec2(0.5, 0.5), opt).terminal() - reference).norm();
}

} // namespace

TEST_CASE("ODE trajectories")
{
    const auto sys = fixtures::toy_system(2.0);
    SUBCASE("the origin is an equilibrium")
    {
        const auto t = integrate_ode(sys, Vector::Zero(2), {0.01, 5.0, 100});
        for (const auto& p : t.points) {
            CHECK(p.isZero(0.0));
        }
        CHECK(t.times.back() == doctest::Approx(5.0));
        CHECK(t.points.size() == 6);
    }
    SUBCASE("upper basin")
    {
        const auto t = integrate_ode(sys, vec2(0.9, 0.9), {0.01, 200.0, 1000});
        CHECK((t.terminal() - vec2(0.732437619338, 0.773142492457)).norm() < 1e-4);
        CHECK(t.terminal_residual < 1e-8);
        CHECK(t.max_clamped == 0.0);
    }
    SUBCASE("lower basin")
    {
        const auto t = integrate_ode(sys, vec2(0.05, 0.05), {0.01, 200.0, 1000});
        CHECK(t.terminal().norm() < 1e-6);
    }
    SUBCASE("fourth-order convergence")
    {
        IntegrationOptions fine;
        fine.dt = 0.1 / 64;
        fine.t_end = 2.0;
        const Vector ref = integrate_ode(sys, vec2(0.5, 0.5), fine).terminal();
        const double ratio = error_at(0.1, ref) / error_at(0.05, ref);
        CHECK(ratio > 8.0);
        CHECK(ratio < 32.0);
    }
    SUBCASE("leaving the cube")
    {
        // f = 2 pushes x past 1 faster than the clamp tolerance allows.
        HillSystem hot({HillExpression{{HillProduct{2.0, {}}}}}, {50.0}, {}, {});
        CHECK_THROWS_AS(integrate_ode(hot, Vector::Zero(1), {0.01, 1.0, 1}), DivergedOutsideCube);
        CHECK_THROWS_AS(integrate_ode(sys, vec2(1.5, 0.5)), ModelError);
    }
}

TEST_CASE("discrete orbits")
{
    const auto mn = fixtures::toy_network();
    auto o = iterate_discrete(mn, {1, 1});
    CHECK(o.states == std::vector<DiscreteState>{{1, 1}, {2, 2}});
    REQUIRE(o.reached_fixed_point());
    CHECK(std::get<FixedPointOutcome>(o.outcome).state == DiscreteState{2, 2});

    o = iterate_discrete(mn, {0, 1});
    CHECK(o.states == std::vector<DiscreteState>{{0, 1}, {0, 2}, {1, 2}, {2, 2}});

    const auto negation = MultistateNetwork::from_function(StateSpace({1, 1}), [](const DiscreteState& x) {
        return DiscreteState{1 - x.coords[0], 1 - x.coords[1]};
    });
    o = iterate_discrete(negation, {0, 1});
    const auto cycle = std::get<CycleOutcome>(o.outcome);
    CHECK(cycle.period == 2);
    CHECK(cycle.phase == 0);

    CHECK(std::holds_alternative<TruncatedOutcome>(iterate_discrete(mn, {0, 1}, 2).outcome));

    SUBCASE("orbits end within the state count")
    {
        std::mt19937_64 rng(4);
        const StateSpace space({2, 1, 2});
        std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(space.state_count() - 1));
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::uint32_t> images(space.state_count());
            for (auto& v : images) {
                v = pick(rng);
            }
            const MultistateNetwork net(space, images);
            const auto orbit = iterate_discrete(net, space.state_at(pick(rng)));
            CHECK(orbit.states.size() <= space.state_count());
            CHECK_FALSE(std::holds_alternative<TruncatedOutcome>(orbit.outcome));
            std::set<std::uint64_t> seen;
            for (const auto& s : orbit.states) {
                CHECK(seen.insert(space.index_of(s)).second);
            }
            if (const auto* c = std::get_if<CycleOutcome>(&orbit.outcome)) {
                CHECK(c->phase + c->period == orbit.states.size());
                // One more step lands back on the cycle entry.
                CHECK(net.apply(orbit.states.back()) == orbit.states[c->phase]);
            }
        }
    }
}
