#pragma once

// Continuous (Hill-type ODE) and discrete (multistate network) model types,
// together with the threshold geometry that links them.

#include "ssmap/errors.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ssmap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance for deciding that a coordinate sits exactly on a threshold.
inline constexpr double kBoundaryTol = 1e-12;

/// Largest number of discrete states a StateSpace may describe.
inline constexpr std::uint64_t kMaxStateCount = std::uint64_t{1} << 32;

struct DiscreteState {
    std::vector<int> coords;

    DiscreteState() = default;
    explicit DiscreteState(std::vector<int> c) : coords(std::move(c)) {}
    DiscreteState(std::initializer_list<int> c) : coords(c) {}

    std::size_t size() const noexcept { return coords.size(); }
    int operator[](std::size_t i) const { return coords[i]; }
    int& operator[](std::size_t i) { return coords[i]; }

    /// Compact label, e.g. "02" or "(10,3)" when some level exceeds 9.
    std::string label() const;

    auto operator<=>(const DiscreteState&) const = default;
    bool operator==(const DiscreteState&) const = default;
};

/// Product of level sets {0..m_1} x ... x {0..m_N}; states are indexed in
/// lexicographic order with the first variable most significant.
class StateSpace {
public:
    StateSpace() = default;
    explicit StateSpace(std::vector<int> max_levels);

    std::size_t n_vars() const noexcept { return levels_.size(); }
    const std::vector<int>& levels() const noexcept { return levels_; }
    int max_level(std::size_t var) const { return levels_.at(var); }
    std::uint64_t state_count() const noexcept { return count_; }

    bool contains(const DiscreteState& s) const;
    std::uint64_t index_of(const DiscreteState& s) const;
    DiscreteState state_at(std::uint64_t index) const;
    std::uint64_t stride(std::size_t var) const { return strides_.at(var); }

    bool operator==(const StateSpace& other) const { return levels_ == other.levels_; }

private:
    std::vector<int> levels_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t count_ = 0;
};

/// Total update map f on a StateSpace, stored as image indices.
class MultistateNetwork {
public:
    MultistateNetwork() = default;
    MultistateNetwork(StateSpace space, std::vector<std::uint32_t> images);

    template <typename F>
    static MultistateNetwork from_function(const StateSpace& space, F&& f)
    {
        std::vector<std::uint32_t> images(space.state_count());
        for (std::uint64_t i = 0; i < space.state_count(); ++i) {
            images[i] = static_cast<std::uint32_t>(space.index_of(f(space.state_at(i))));
        }
        return MultistateNetwork(space, std::move(images));
    }

    const StateSpace& space() const noexcept { return space_; }
    std::size_t n_vars() const noexcept { return space_.n_vars(); }
    std::uint64_t state_count() const noexcept { return space_.state_count(); }
    std::uint32_t image(std::uint64_t index) const { return images_.at(index); }
    const std::vector<std::uint32_t>& images() const noexcept { return images_; }
    DiscreteState apply(const DiscreteState& s) const;

    bool operator==(const MultistateNetwork&) const = default;

private:
    StateSpace space_;
    std::vector<std::uint32_t> images_;
};

enum class Orientation { activating, repressing };

/// act: x^n/(k^n+x^n); rep: k^n/(k^n+x^n).
struct HillTerm {
    std::size_t var = 0;
    Orientation orientation = Orientation::activating;
    double threshold = 0.5;
    std::size_t exponent_slot = 0;

    bool operator==(const HillTerm&) const = default;
};

/// coefficient * product of factors. An empty factor list is a constant.
struct HillProduct {
    double coefficient = 1.0;
    std::vector<HillTerm> factors;

    bool operator==(const HillProduct&) const = default;
};

/// How an expression depends on one variable.
enum class Dependence { none, increasing, decreasing, mixed };

struct HillExpression {
    std::vector<HillProduct> terms;

    Dependence dependence_on(std::size_t var) const;
    /// True when no variable occurs with both orientations.
    bool is_monotone() const;

    bool operator==(const HillExpression&) const = default;
};

/// x' = D (f(x) - x) with every f_i a sum of products of Hill terms.
class HillSystem {
public:
    HillSystem() = default;
    HillSystem(std::vector<HillExpression> expressions, std::vector<double> decay,
               std::vector<std::string> slot_names, std::vector<double> exponents);

    std::size_t n_vars() const noexcept { return expressions_.size(); }
    const std::vector<HillExpression>& expressions() const noexcept { return expressions_; }
    const HillExpression& expression(std::size_t i) const { return expressions_.at(i); }
    const std::vector<double>& decay() const noexcept { return decay_; }
    const std::vector<std::string>& slot_names() const noexcept { return slot_names_; }
    const std::vector<double>& exponents() const noexcept { return exponents_; }
    std::optional<std::size_t> slot_index(const std::string& name) const;

    HillSystem with_uniform_exponent(double n) const;
    HillSystem with_exponent(std::size_t slot, double n) const;
    HillSystem with_decay(std::vector<double> decay) const;

    /// f(x). No range checks; x is expected inside the unit cube.
    Vector evaluate(const Vector& x) const;
    double evaluate_component(std::size_t i, const Vector& x) const;
    /// Analytic f'(x), entry (i,j) = d f_i / d x_j.
    Matrix jacobian(const Vector& x) const;

    bool operator==(const HillSystem&) const = default;

private:
    void validate() const;

    std::vector<HillExpression> expressions_;
    std::vector<double> decay_;
    std::vector<std::string> slot_names_;
    std::vector<double> exponents_;
};

double hill_value(const HillTerm& term, double x, double n);
double hill_derivative(const HillTerm& term, double x, double n);

struct Evaluation {
    Vector value;
    /// Set when some component exceeds 1.
    bool range_violation = false;
};

/// Checked f(x): rejects points outside the cube and non-finite results.
Evaluation eval_system(const HillSystem& sys, const Vector& point);
Matrix jacobian(const HillSystem& sys, const Vector& point);

struct RangeReport {
    double supremum = 0.0;
    Vector argmax;
    bool violation = false;
    std::size_t samples = 0;
};

/// Samples f over quasi-random points of the cube and reports the largest component seen.
RangeReport range_supremum(const HillSystem& sys, std::size_t samples = 4096);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool lo_closed = true;
    bool hi_closed = true;

    bool contains(double v) const;
    double width() const { return hi - lo; }
};

class ThresholdScheme {
public:
    ThresholdScheme() = default;
    explicit ThresholdScheme(std::vector<std::vector<double>> thresholds);

    std::size_t n_vars() const noexcept { return thresholds_.size(); }
    const std::vector<double>& thresholds(std::size_t var) const { return thresholds_.at(var); }
    const std::vector<std::vector<double>>& all() const noexcept { return thresholds_; }
    StateSpace space() const;

    /// Interval of `level` for variable `var`: [0,k1[, ]k1,k2[, ..., ]km,1].
    Interval interval(std::size_t var, int level) const;
    /// Index t (1-based) with |k_t - value| <= tol, if any.
    std::optional<std::size_t> threshold_index(std::size_t var, double value, double tol = kBoundaryTol) const;

    bool operator==(const ThresholdScheme&) const = default;

private:
    std::vector<std::vector<double>> thresholds_;
};

struct RegionBox {
    DiscreteState state;
    std::vector<Interval> sides;

    bool contains(const Vector& point) const;
};

RegionBox region_box(const ThresholdScheme& scheme, const DiscreteState& state);

struct Boundary {
    std::vector<std::size_t> vars;
};

using RegionResult = std::variant<DiscreteState, Boundary>;

RegionResult region_of(const Vector& point, const ThresholdScheme& scheme, double tol = kBoundaryTol);

/// Closed box inside a region, inset by a margin on every threshold side.
struct CompactBox {
    DiscreteState state;
    Vector lower;
    Vector upper;

    Vector center() const { return 0.5 * (lower + upper); }
    double volume() const;
    bool contains(const Vector& point, double tol = 0.0) const;
    Vector project(const Vector& point) const;
    /// Distance (infinity norm) by which a point lies outside the box.
    double excess(const Vector& point) const;
    Vector corner(std::uint64_t mask) const;
};

struct Cover {
    StateSpace space;
    std::vector<CompactBox> boxes; // indexed by state index
    std::vector<double> margins;
    double excluded_measure = 0.0;

    const CompactBox& box(const DiscreteState& s) const { return boxes.at(space.index_of(s)); }
    /// Index of the box containing the point, if any.
    std::optional<std::size_t> locate(const Vector& point, double tol = 0.0) const;
};

enum class CoverMode { strict, lenient };

/// One CompactBox per state. Strict mode rejects zero margins.
Cover build_cover(const ThresholdScheme& scheme, const std::vector<double>& margins,
                  CoverMode mode = CoverMode::strict);

std::string to_string(Orientation o);
std::string to_string(Dependence d);

} // namespace ssmap
