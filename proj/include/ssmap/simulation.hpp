#pragma once

#include "ssmap/model.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace ssmap {

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> points;
    /// ||f(p_end) - p_end||, Euclidean.
    double terminal_residual = 0.0;
    /// Largest excursion outside the cube that was clamped away.
    double max_clamped = 0.0;

    const Vector& terminal() const { return points.back(); }
};

struct IntegrationOptions {
    double dt = 0.01;
    double t_end = 100.0;
    /// Keep every k-th step (the final point is always kept).
    std::size_t record_every = 1;
};

/// Fixed-step classic RK4 for x' = D (f(x) - x). Overshoots of the cube
/// smaller than 10*dt are clamped; larger ones raise DivergedOutsideCube.
Trajectory integrate_ode(const HillSystem& sys, const Vector& x0, const IntegrationOptions& options = {});

struct FixedPointOutcome {
    DiscreteState state;
};

struct CycleOutcome {
    std::size_t period = 0;
    /// Steps taken before the orbit enters the cycle.
    std::size_t phase = 0;
};

/// The step budget ran out before any state repeated.
struct TruncatedOutcome {};

struct DiscreteOrbit {
    std::vector<DiscreteState> states;
    std::variant<FixedPointOutcome, CycleOutcome, TruncatedOutcome> outcome;

    bool reached_fixed_point() const { return std::holds_alternative<FixedPointOutcome>(outcome); }
};

/// Iterates f until the first revisit. max_steps = 0 means "state count".
DiscreteOrbit iterate_discrete(const MultistateNetwork& mn, const DiscreteState& x0, std::uint64_t max_steps = 0);

} // namespace ssmap
