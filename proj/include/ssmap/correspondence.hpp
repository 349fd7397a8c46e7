#pragma once

// Links the steady states of x' = D (f(x) - x) to the fixed points of the
// discrete network obtained by sending every region to the region of its
// plateau value (the limit of f as all Hill exponents grow).
//
// All certificates here are numerical: corner bounds are exact only for
// coordinate-wise monotone expressions, everything else is sampled.

#include "ssmap/model.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ssmap {

struct LimitPoint {
    DiscreteState state;
    Vector value;
    /// Coordinates whose value coincides with a declared threshold.
    std::vector<std::size_t> on_threshold;
};

/// Plateau value of f on the region of `state`: every Hill factor becomes 0 or 1.
LimitPoint limit_point(const HillSystem& sys, const ThresholdScheme& scheme, const DiscreteState& state);

struct Degeneracy {
    DiscreteState state;
    std::vector<std::size_t> vars;
};

struct InducedNetwork {
    MultistateNetwork network;
    std::vector<LimitPoint> limits; // indexed by state index
    std::vector<Degeneracy> degeneracies;
};

/// f(x) = region of L_x. A limit coordinate sitting on a threshold is sent to
/// the lower adjacent level and reported as a degeneracy.
InducedNetwork induced_network(const HillSystem& sys, const ThresholdScheme& scheme);

enum class RegionStatus { invariant, excluded, degenerate };

std::string to_string(RegionStatus s);

struct RegionVerdict {
    DiscreteState state;
    DiscreteState target; // f(x) in the induced network
    RegionStatus status = RegionStatus::degenerate;
    /// Bounds of f over the box: exact for monotone components, otherwise
    /// sampled extrema widened by a Lipschitz slack.
    Vector image_lower;
    Vector image_upper;
    bool exact_bounds = true;
    bool maps_into_target = false;
    bool disjoint_from_self = false;
    std::size_t evaluations = 0;
    std::string reason;
};

struct InvarianceOptions {
    std::size_t grid_per_axis = 17;
    std::uint64_t max_grid_points = 1'000'000;
};

RegionVerdict check_invariance(const HillSystem& sys, const ThresholdScheme& scheme, const Cover& cover,
                               const DiscreteState& state, const InvarianceOptions& options = {});
/// Same, with the limit point and target already known.
RegionVerdict check_invariance(const HillSystem& sys, const Cover& cover, const LimitPoint& limit,
                               const DiscreteState& target, const InvarianceOptions& options = {});

struct ContractionCertificate {
    double sampled_sup_norm = 0.0;
    /// min D_ii / (sqrt(N) ||D||_F)
    double bound = 0.0;
    bool passes = false;
    std::size_t samples = 0;
    /// Points per axis when a tensor grid was used, 0 for quasi-random sampling.
    std::size_t grid_per_axis = 0;
    Vector argmax;
    /// Always true: the supremum is estimated from samples, not proven.
    bool sampled = true;
};

struct ContractionOptions {
    std::size_t grid_per_axis = 17;
    std::uint64_t max_samples = 1'000'000;
    std::size_t threads = 0;
};

/// Largest Frobenius norm of f' seen on the cover, against min D_ii / (sqrt(N) ||D||_F).
ContractionCertificate check_contraction(const HillSystem& sys, const Cover& cover,
                                         const ContractionOptions& options = {});

double contraction_bound(const std::vector<double>& decay);

struct SolverConfig {
    double tol = 1e-10;
    std::size_t max_iter = 10'000;
    std::size_t newton_max_iter = 100;
    /// Fixed-point iteration hands over to Newton when the residual fails to
    /// halve within this many steps.
    std::size_t stagnation_window = 50;
    double tau_lambda = 1e-9;
};

enum class Stability { asymptotically_stable, unstable, marginal };

std::string to_string(Stability s);

struct StabilityResult {
    std::vector<std::complex<double>> eigenvalues;
    bool eigen_converged = true;
    Stability verdict = Stability::marginal;
    /// sqrt(N) ||D f'(x)||_F < min D_ii, which forces every eigenvalue into the left half-plane.
    bool gershgorin_certified = false;
};

/// Eigen-analysis of J = D (f'(x) - I).
StabilityResult stability(const HillSystem& sys, const Vector& point, double tau_lambda = 1e-9);

struct SolveResult {
    bool found = false;
    Vector point;
    double residual = 0.0; // infinity norm of f(p) - p
    std::size_t iterations = 0;
    bool used_newton = false;
    bool singular_newton_step = false;
};

/// Projected fixed-point iteration from `start`, then damped Newton restricted to the box on stagnation.
SolveResult solve_in_box(const HillSystem& sys, const CompactBox& box, const Vector& start, const SolverConfig& cfg);

struct SteadyStateRecord {
    Vector point;
    double residual = 0.0;
    DiscreteState box; // state whose CompactBox was searched
    std::optional<DiscreteState> region;
    bool near_threshold = false;
    StabilityResult stability;
    std::optional<DiscreteState> matched_discrete_fixed_point;
    double distance_to_limit = 0.0;
};

/// Single solve from `start` (default: box centre). Empty when no root lies in the box.
std::optional<SteadyStateRecord> find_steady_state(const HillSystem& sys, const CompactBox& box,
                                                   const SolverConfig& cfg = {},
                                                   const std::optional<Vector>& start = std::nullopt);

/// Distinct roots (separated by more than 10*tol) from `starts` solves: the
/// preferred start if given, the centre, then quasi-random points of the box.
std::vector<Vector> multistart_steady_states(const HillSystem& sys, const CompactBox& box, std::size_t starts,
                                             const SolverConfig& cfg = {},
                                             const std::optional<Vector>& preferred = std::nullopt,
                                             std::uint64_t seed = 0);

enum class Verdict { one_to_one, partial, failed };

std::string to_string(Verdict v);

struct CorrespondenceConfig {
    std::vector<double> margins{0.05};
    SolverConfig solver;
    /// Search every box, not just fixed-point boxes and boxes without an exclusion proof.
    bool audit = false;
    /// Solves per searched box in audit mode (1 otherwise).
    std::size_t audit_starts = 32;
    InvarianceOptions invariance;
    ContractionOptions contraction;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

struct RegionSearch {
    DiscreteState state;
    bool searched = false;
    std::size_t roots = 0;
};

struct CorrespondenceReport {
    InducedNetwork induced;
    std::vector<DiscreteState> fixed_points;
    Cover cover;
    std::vector<RegionVerdict> regions;
    std::vector<RegionSearch> searches;
    std::vector<SteadyStateRecord> steady_states;
    ContractionCertificate contraction;
    RangeReport range;
    Verdict verdict = Verdict::failed;
    std::vector<std::string> reasons;
};

CorrespondenceReport correspondence_report(const HillSystem& sys, const ThresholdScheme& scheme,
                                           const CorrespondenceConfig& cfg = {});

} // namespace ssmap
