#pragma once

// Finite dynamics: fixed points, phase portraits, signed wiring diagrams,
// feedback cycles and positive feedback vertex sets.

#include "ssmap/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ssmap {

inline constexpr std::uint64_t kMaxPortraitStates = std::uint64_t{1} << 20;
inline constexpr std::size_t kMaxCycleVertices = 24;

/// `both` marks an input the target is neither increasing nor decreasing in.
enum class EdgeSign { positive, negative, both };

std::string to_string(EdgeSign s);

struct SignedEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeSign sign = EdgeSign::positive;

    bool operator==(const SignedEdge&) const = default;
};

/// Wiring diagram: at most one signed edge per ordered vertex pair.
class SignedDigraph {
public:
    SignedDigraph() = default;
    explicit SignedDigraph(std::size_t n_vertices);

    std::size_t n_vertices() const noexcept { return n_; }
    std::size_t n_edges() const noexcept;

    void set_edge(std::size_t from, std::size_t to, EdgeSign sign);
    void remove_edge(std::size_t from, std::size_t to);
    std::optional<EdgeSign> edge(std::size_t from, std::size_t to) const;
    /// Edges sorted by (from, to).
    std::vector<SignedEdge> edges() const;
    std::vector<std::size_t> successors(std::size_t v) const;

    bool operator==(const SignedDigraph&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::optional<EdgeSign>> matrix_; // row = from
};

struct Attractor {
    /// States in orbit order; a fixed point has exactly one.
    std::vector<std::uint32_t> states;
    bool is_fixed_point() const { return states.size() == 1; }
};

struct PhasePortrait {
    StateSpace space;
    std::vector<std::uint32_t> successor;
    std::vector<Attractor> attractors;
    /// Attractor index reached from each state.
    std::vector<std::uint32_t> basin;

    std::vector<std::uint32_t> fixed_points() const;
};

/// States with f(x) = x, by exhaustive enumeration, in index order.
std::vector<DiscreteState> fixed_points(const MultistateNetwork& mn);

PhasePortrait phase_portrait(const MultistateNetwork& mn);

SignedDigraph wiring_diagram_discrete(const MultistateNetwork& mn);
SignedDigraph wiring_diagram_continuous(const HillSystem& sys);

struct SignedCycle {
    /// Rotated so the smallest vertex comes first.
    std::vector<std::size_t> vertices;
    /// signs[i] labels the edge vertices[i] -> vertices[i+1 mod len].
    std::vector<EdgeSign> signs;
    bool positive = false;
    bool negative = false;
};

/// Every elementary cycle with its sign. A cycle through a `both` edge is
/// reported as positive and negative at once.
std::vector<SignedCycle> signed_cycles(const SignedDigraph& g);
std::vector<SignedCycle> positive_cycles(const SignedDigraph& g);

struct PfvsResult {
    std::vector<std::size_t> vertices;
    std::vector<SignedCycle> positive_cycles;
    /// hit_by[c] is the smallest vertex of P on positive_cycles[c].
    std::vector<std::size_t> hit_by;
    std::uint64_t bound = 1;
};

/// Minimum positive feedback vertex set; ties go to the lexicographically smallest set.
PfvsResult min_pfvs(const SignedDigraph& g, const StateSpace& space);

/// True when `vertices` meets every positive cycle of g.
bool is_pfvs(const SignedDigraph& g, const std::vector<std::size_t>& vertices);

} // namespace ssmap
