#include "ssmap/simulation.hpp"

#include <cmath>
#include <unordered_map>

namespace ssmap {

namespace {

Vector rhs(const HillSystem& sys, const Vector& decay, const Vector& x)
{
    // Stage points may leave the cube by O(dt); Hill terms need non-negative input.
    const Vector clipped = x.cwiseMax(0.0).cwiseMin(1.0);
    return decay.cwiseProduct(sys.evaluate(clipped) - x);
}

} // namespace

Trajectory integrate_ode(const HillSystem& sys, const Vector& x0, const IntegrationOptions& options)
{
    const auto n = static_cast<Eigen::Index>(sys.n_vars());
    if (x0.size() != n) {
        throw ModelError("initial condition has the wrong dimension");
    }
    if (!((x0.array() >= 0.0).all() && (x0.array() <= 1.0).all())) {
        throw ModelError("initial condition must lie in [0,1]^N");
    }
    if (!(options.dt > 0.0) || !(options.t_end >= 0.0)) {
        throw ModelError("dt must be positive and t_end non-negative");
    }
    const double dt = options.dt;
    const std::size_t every = options.record_every == 0 ? 1 : options.record_every;
    const Vector decay = Eigen::Map<const Vector>(sys.decay().data(), n);

    const auto steps = static_cast<std::uint64_t>(std::llround(std::ceil(options.t_end / dt - 1e-9)));
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.points.push_back(x0);
    Vector x = x0;
    for (std::uint64_t k = 1; k <= steps; ++k) {
        const Vector k1 = rhs(sys, decay, x);
        const Vector k2 = rhs(sys, decay, x + 0.5 * dt * k1);
        const Vector k3 = rhs(sys, decay, x + 0.5 * dt * k2);
        const Vector k4 = rhs(sys, decay, x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) {
            throw NumericError("non-finite state during integration");
        }
        const Vector clamped = x.cwiseMax(0.0).cwiseMin(1.0);
        const double overshoot = (x - clamped).cwiseAbs().maxCoeff();
        if (overshoot > 0.0) {
            if (overshoot >= 10.0 * dt) {
                throw DivergedOutsideCube("trajectory left [0,1]^N by " + std::to_string(overshoot) + " at t=" +
                                          std::to_string(static_cast<double>(k) * dt));
            }
            traj.max_clamped = std::max(traj.max_clamped, overshoot);
            x = clamped;
        }
        if (k % every == 0 || k == steps) {
            traj.times.push_back(static_cast<double>(k) * dt);
            traj.points.push_back(x);
        }
    }
    traj.terminal_residual = (sys.evaluate(x) - x).norm();
    return traj;
}

DiscreteOrbit iterate_discrete(const MultistateNetwork& mn, const DiscreteState& x0, std::uint64_t max_steps)
{
    const auto& space = mn.space();
    std::uint64_t s = space.index_of(x0);
    if (max_steps == 0) {
        max_steps = mn.state_count();
    }
    DiscreteOrbit orbit;
    std::unordered_map<std::uint64_t, std::size_t> first_seen;
    first_seen.emplace(s, 0);
    orbit.states.push_back(x0);
    for (std::uint64_t step = 0; step < max_steps; ++step) {
        const std::uint64_t next = mn.image(s);
        auto [it, inserted] = first_seen.emplace(next, orbit.states.size());
        if (!inserted) {
            const std::size_t period = orbit.states.size() - it->second;
            if (period == 1) {
                orbit.outcome = FixedPointOutcome{space.state_at(next)};
            }
            else {
                orbit.outcome = CycleOutcome{period, it->second};
            }
            return orbit;
        }
        orbit.states.push_back(space.state_at(next));
        s = next;
    }
    orbit.outcome = TruncatedOutcome{};
    return orbit;
}

} // namespace ssmap
