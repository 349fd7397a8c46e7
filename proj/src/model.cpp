#include "ssmap/model.hpp"

#include "ssmap/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ssmap {

std::string DiscreteState::label() const
{
    bool compact = std::all_of(coords.begin(), coords.end(), [](int c) { return c >= 0 && c <= 9; });
    std::ostringstream os;
    if (compact) {
        for (int c : coords) {
            os << c;
        }
        return os.str();
    }
    os << '(';
    for (std::size_t i = 0; i < coords.size(); ++i) {
        os << (i ? "," : "") << coords[i];
    }
    os << ')';
    return os.str();
}

// ---------------------------------------------------------------------------
// StateSpace / MultistateNetwork

StateSpace::StateSpace(std::vector<int> max_levels) : levels_(std::move(max_levels))
{
    if (levels_.empty()) {
        throw ModelError("state space needs at least one variable");
    }
    strides_.assign(levels_.size(), 1);
    std::uint64_t count = 1;
    for (std::size_t k = levels_.size(); k-- > 0;) {
        if (levels_[k] < 1) {
            throw ModelError("variable " + std::to_string(k + 1) + " must have at least 2 levels");
        }
        strides_[k] = count;
        const auto width = static_cast<std::uint64_t>(levels_[k]) + 1;
        if (count > kMaxStateCount / width) {
            throw ModelError("state space exceeds 2^32 states");
        }
        count *= width;
    }
    count_ = count;
}

bool StateSpace::contains(const DiscreteState& s) const
{
    if (s.size() != levels_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (s[i] < 0 || s[i] > levels_[i]) {
            return false;
        }
    }
    return true;
}

std::uint64_t StateSpace::index_of(const DiscreteState& s) const
{
    if (!contains(s)) {
        throw ModelError("state " + s.label() + " is outside the state space");
    }
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        idx += strides_[i] * static_cast<std::uint64_t>(s[i]);
    }
    return idx;
}

DiscreteState StateSpace::state_at(std::uint64_t index) const
{
    if (index >= count_) {
        throw ModelError("state index out of range");
    }
    DiscreteState s;
    s.coords.resize(levels_.size());
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        s[i] = static_cast<int>(index / strides_[i]);
        index %= strides_[i];
    }
    return s;
}

MultistateNetwork::MultistateNetwork(StateSpace space, std::vector<std::uint32_t> images)
    : space_(std::move(space)), images_(std::move(images))
{
    if (images_.size() != space_.state_count()) {
        throw ModelError("network table is not total: " + std::to_string(images_.size()) + " of " +
                         std::to_string(space_.state_count()) + " states defined");
    }
    for (auto img : images_) {
        if (img >= space_.state_count()) {
            throw ModelError("network table maps outside the state space");
        }
    }
}

DiscreteState MultistateNetwork::apply(const DiscreteState& s) const
{
    return space_.state_at(images_[space_.index_of(s)]);
}

// ---------------------------------------------------------------------------
// Hill terms

double hill_value(const HillTerm& term, double x, double n)
{
    // 1/(1+r^n) with r the ratio that is < 1 in the "on" half keeps large n stable.
    const double k = term.threshold;
    if (term.orientation == Orientation::activating) {
        if (x <= 0.0) {
            return 0.0;
        }
        return 1.0 / (1.0 + std::pow(k / x, n));
    }
    if (x <= 0.0) {
        return 1.0;
    }
    return 1.0 / (1.0 + std::pow(x / k, n));
}

double hill_derivative(const HillTerm& term, double x, double n)
{
    double d = 0.0;
    if (x <= 0.0) {
        d = (n == 1.0) ? 1.0 / term.threshold : 0.0;
    }
    else {
        // n k^n x^(n-1) / (k^n + x^n)^2 = (n/x) a (1-a)
        HillTerm act = term;
        act.orientation = Orientation::activating;
        const double a = hill_value(act, x, n);
        d = n / x * a * (1.0 - a);
    }
    return term.orientation == Orientation::activating ? d : -d;
}

Dependence HillExpression::dependence_on(std::size_t var) const
{
    bool inc = false;
    bool dec = false;
    for (const auto& t : terms) {
        for (const auto& f : t.factors) {
            if (f.var == var) {
                (f.orientation == Orientation::activating ? inc : dec) = true;
            }
        }
    }
    if (inc && dec) {
        return Dependence::mixed;
    }
    if (inc) {
        return Dependence::increasing;
    }
    if (dec) {
        return Dependence::decreasing;
    }
    return Dependence::none;
}

bool HillExpression::is_monotone() const
{
    std::size_t max_var = 0;
    for (const auto& t : terms) {
        for (const auto& f : t.factors) {
            max_var = std::max(max_var, f.var + 1);
        }
    }
    for (std::size_t v = 0; v < max_var; ++v) {
        if (dependence_on(v) == Dependence::mixed) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// HillSystem

HillSystem::HillSystem(std::vector<HillExpression> expressions, std::vector<double> decay,
                       std::vector<std::string> slot_names, std::vector<double> exponents)
    : expressions_(std::move(expressions)), decay_(std::move(decay)), slot_names_(std::move(slot_names)),
      exponents_(std::move(exponents))
{
    validate();
}

void HillSystem::validate() const
{
    const std::size_t n = expressions_.size();
    if (n == 0) {
        throw ModelError("a Hill system needs at least one equation");
    }
    if (decay_.size() != n) {
        throw ModelError("decay vector length does not match the number of equations");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(decay_[i] > 0.0) || !std::isfinite(decay_[i])) {
            throw ModelError("decay rate of variable " + std::to_string(i + 1) + " must be positive");
        }
    }
    if (slot_names_.size() != exponents_.size()) {
        throw ModelError("exponent names and values differ in length");
    }
    for (std::size_t s = 0; s < exponents_.size(); ++s) {
        if (!(exponents_[s] >= 1.0) || !std::isfinite(exponents_[s])) {
            throw ModelError("exponent '" + slot_names_[s] + "' must be a finite real >= 1");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& term : expressions_[i].terms) {
            if (!(term.coefficient > 0.0) || !std::isfinite(term.coefficient)) {
                throw ModelError("equation " + std::to_string(i + 1) + " has a non-positive coefficient");
            }
            for (const auto& f : term.factors) {
                if (f.var >= n) {
                    throw ModelError("equation " + std::to_string(i + 1) + " references an unknown variable");
                }
                if (!(f.threshold > 0.0 && f.threshold < 1.0)) {
                    throw ModelError("equation " + std::to_string(i + 1) + " has a threshold outside (0,1)");
                }
                if (f.exponent_slot >= exponents_.size()) {
                    throw ModelError("equation " + std::to_string(i + 1) + " references an unassigned exponent");
                }
            }
        }
    }
}

std::optional<std::size_t> HillSystem::slot_index(const std::string& name) const
{
    auto it = std::find(slot_names_.begin(), slot_names_.end(), name);
    if (it == slot_names_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - slot_names_.begin());
}

HillSystem HillSystem::with_uniform_exponent(double n) const
{
    HillSystem copy = *this;
    std::fill(copy.exponents_.begin(), copy.exponents_.end(), n);
    copy.validate();
    return copy;
}

HillSystem HillSystem::with_exponent(std::size_t slot, double n) const
{
    HillSystem copy = *this;
    copy.exponents_.at(slot) = n;
    copy.validate();
    return copy;
}

HillSystem HillSystem::with_decay(std::vector<double> decay) const
{
    HillSystem copy = *this;
    copy.decay_ = std::move(decay);
    copy.validate();
    return copy;
}

double HillSystem::evaluate_component(std::size_t i, const Vector& x) const
{
    double sum = 0.0;
    for (const auto& term : expressions_[i].terms) {
        double prod = term.coefficient;
        for (const auto& f : term.factors) {
            prod *= hill_value(f, x[static_cast<Eigen::Index>(f.var)], exponents_[f.exponent_slot]);
        }
        sum += prod;
    }
    return sum;
}

Vector HillSystem::evaluate(const Vector& x) const
{
    Vector out(static_cast<Eigen::Index>(n_vars()));
    for (std::size_t i = 0; i < n_vars(); ++i) {
        out[static_cast<Eigen::Index>(i)] = evaluate_component(i, x);
    }
    return out;
}

Matrix HillSystem::jacobian(const Vector& x) const
{
    const auto n = static_cast<Eigen::Index>(n_vars());
    Matrix jac = Matrix::Zero(n, n);
    std::vector<double> values;
    for (std::size_t i = 0; i < n_vars(); ++i) {
        for (const auto& term : expressions_[i].terms) {
            const auto& fs = term.factors;
            values.resize(fs.size());
            for (std::size_t a = 0; a < fs.size(); ++a) {
                values[a] = hill_value(fs[a], x[static_cast<Eigen::Index>(fs[a].var)], exponents_[fs[a].exponent_slot]);
            }
            for (std::size_t a = 0; a < fs.size(); ++a) {
                double d = term.coefficient *
                           hill_derivative(fs[a], x[static_cast<Eigen::Index>(fs[a].var)], exponents_[fs[a].exponent_slot]);
                for (std::size_t b = 0; b < fs.size(); ++b) {
                    if (b != a) {
                        d *= values[b];
                    }
                }
                jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(fs[a].var)) += d;
            }
        }
    }
    return jac;
}

namespace {

void require_in_cube(const HillSystem& sys, const Vector& point)
{
    if (static_cast<std::size_t>(point.size()) != sys.n_vars()) {
        throw ModelError("point dimension does not match the system");
    }
    for (Eigen::Index i = 0; i < point.size(); ++i) {
        if (!(point[i] >= 0.0 && point[i] <= 1.0)) {
            throw ModelError("point coordinate " + std::to_string(i + 1) + " lies outside [0,1]");
        }
    }
}

} // namespace

Evaluation eval_system(const HillSystem& sys, const Vector& point)
{
    require_in_cube(sys, point);
    Evaluation ev{sys.evaluate(point), false};
    if (!ev.value.allFinite()) {
        throw NumericError("non-finite value while evaluating the Hill system");
    }
    ev.range_violation = (ev.value.array() > 1.0).any();
    return ev;
}

Matrix jacobian(const HillSystem& sys, const Vector& point)
{
    require_in_cube(sys, point);
    Matrix j = sys.jacobian(point);
    if (!j.allFinite()) {
        throw NumericError("non-finite Jacobian entry");
    }
    return j;
}

RangeReport range_supremum(const HillSystem& sys, std::size_t samples)
{
    RangeReport rep;
    HaltonSequence seq(sys.n_vars());
    rep.argmax = Vector::Zero(static_cast<Eigen::Index>(sys.n_vars()));
    rep.supremum = -1.0;
    auto consider = [&](const Vector& p) {
        Vector v = sys.evaluate(p);
        Eigen::Index at = 0;
        double m = v.maxCoeff(&at);
        if (m > rep.supremum) {
            rep.supremum = m;
            rep.argmax = p;
        }
        ++rep.samples;
    };
    // The all-ones corner usually maximises activating sums; include it explicitly.
    consider(Vector::Ones(static_cast<Eigen::Index>(sys.n_vars())));
    for (std::size_t s = 1; s < samples; ++s) {
        consider(seq.next());
    }
    rep.violation = rep.supremum > 1.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Thresholds, regions and covers

bool Interval::contains(double v) const
{
    const bool above = lo_closed ? v >= lo : v > lo;
    const bool below = hi_closed ? v <= hi : v < hi;
    return above && below;
}

ThresholdScheme::ThresholdScheme(std::vector<std::vector<double>> thresholds) : thresholds_(std::move(thresholds))
{
    if (thresholds_.empty()) {
        throw ModelError("threshold scheme needs at least one variable");
    }
    for (std::size_t v = 0; v < thresholds_.size(); ++v) {
        const auto& k = thresholds_[v];
        if (k.empty()) {
            throw ModelError("variable " + std::to_string(v + 1) + " has no thresholds");
        }
        for (std::size_t t = 0; t < k.size(); ++t) {
            if (!(k[t] > 0.0 && k[t] < 1.0)) {
                throw ModelError("threshold of variable " + std::to_string(v + 1) + " outside (0,1)");
            }
            if (t > 0 && !(k[t] > k[t - 1])) {
                throw ModelError("thresholds of variable " + std::to_string(v + 1) + " are not strictly increasing");
            }
        }
    }
}

StateSpace ThresholdScheme::space() const
{
    std::vector<int> levels;
    levels.reserve(thresholds_.size());
    for (const auto& k : thresholds_) {
        levels.push_back(static_cast<int>(k.size()));
    }
    return StateSpace(std::move(levels));
}

Interval ThresholdScheme::interval(std::size_t var, int level) const
{
    const auto& k = thresholds_.at(var);
    const int m = static_cast<int>(k.size());
    if (level < 0 || level > m) {
        throw ModelError("level out of range for variable " + std::to_string(var + 1));
    }
    Interval iv;
    iv.lo = level == 0 ? 0.0 : k[static_cast<std::size_t>(level - 1)];
    iv.hi = level == m ? 1.0 : k[static_cast<std::size_t>(level)];
    iv.lo_closed = level == 0;
    iv.hi_closed = level == m;
    return iv;
}

std::optional<std::size_t> ThresholdScheme::threshold_index(std::size_t var, double value, double tol) const
{
    const auto& k = thresholds_.at(var);
    for (std::size_t t = 0; t < k.size(); ++t) {
        if (std::abs(k[t] - value) <= tol) {
            return t + 1;
        }
    }
    return std::nullopt;
}

bool RegionBox::contains(const Vector& point) const
{
    for (std::size_t i = 0; i < sides.size(); ++i) {
        if (!sides[i].contains(point[static_cast<Eigen::Index>(i)])) {
            return false;
        }
    }
    return true;
}

RegionBox region_box(const ThresholdScheme& scheme, const DiscreteState& state)
{
    if (!scheme.space().contains(state)) {
        throw ModelError("state " + state.label() + " does not belong to the threshold scheme");
    }
    RegionBox box{state, {}};
    for (std::size_t i = 0; i < state.size(); ++i) {
        box.sides.push_back(scheme.interval(i, state[i]));
    }
    return box;
}

RegionResult region_of(const Vector& point, const ThresholdScheme& scheme, double tol)
{
    if (static_cast<std::size_t>(point.size()) != scheme.n_vars()) {
        throw ModelError("point dimension does not match the threshold scheme");
    }
    Boundary boundary;
    DiscreteState state;
    state.coords.resize(scheme.n_vars());
    for (std::size_t i = 0; i < scheme.n_vars(); ++i) {
        const double v = point[static_cast<Eigen::Index>(i)];
        if (scheme.threshold_index(i, v, tol)) {
            boundary.vars.push_back(i);
            continue;
        }
        const auto& k = scheme.thresholds(i);
        state[i] = static_cast<int>(std::upper_bound(k.begin(), k.end(), v) - k.begin());
    }
    if (!boundary.vars.empty()) {
        return boundary;
    }
    return state;
}

double CompactBox::volume() const
{
    return (upper - lower).prod();
}

bool CompactBox::contains(const Vector& point, double tol) const
{
    return ((point - lower).array() >= -tol).all() && ((upper - point).array() >= -tol).all();
}

Vector CompactBox::project(const Vector& point) const
{
    return point.cwiseMax(lower).cwiseMin(upper);
}

double CompactBox::excess(const Vector& point) const
{
    return (point - project(point)).cwiseAbs().maxCoeff();
}

Vector CompactBox::corner(std::uint64_t mask) const
{
    Vector c = lower;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (mask & (std::uint64_t{1} << i)) {
            c[i] = upper[i];
        }
    }
    return c;
}

std::optional<std::size_t> Cover::locate(const Vector& point, double tol) const
{
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        if (boxes[b].contains(point, tol)) {
            return b;
        }
    }
    return std::nullopt;
}

Cover build_cover(const ThresholdScheme& scheme, const std::vector<double>& margins, CoverMode mode)
{
    const std::size_t n = scheme.n_vars();
    std::vector<double> delta = margins;
    if (delta.size() == 1 && n > 1) {
        delta.assign(n, margins[0]);
    }
    if (delta.size() != n) {
        throw ModelError("expected " + std::to_string(n) + " margins, got " + std::to_string(margins.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(delta[i] >= 0.0) || !std::isfinite(delta[i])) {
            throw ModelError("margin of variable " + std::to_string(i + 1) + " must be non-negative");
        }
        if (mode == CoverMode::strict && delta[i] == 0.0) {
            throw MarginTooLarge(i, "zero margin for variable " + std::to_string(i + 1) +
                                        " makes boxes touch thresholds (strict mode)");
        }
        const auto m = static_cast<int>(scheme.thresholds(i).size());
        for (int level = 0; level <= m; ++level) {
            const Interval iv = scheme.interval(i, level);
            if (!(2.0 * delta[i] < iv.width())) {
                throw MarginTooLarge(i, "margin " + std::to_string(delta[i]) + " too large for variable " +
                                            std::to_string(i + 1) + ": interval of width " +
                                            std::to_string(iv.width()) + " cannot be inset");
            }
        }
    }

    Cover cover;
    cover.space = scheme.space();
    cover.margins = delta;
    cover.boxes.reserve(cover.space.state_count());
    for (std::uint64_t s = 0; s < cover.space.state_count(); ++s) {
        CompactBox box;
        box.state = cover.space.state_at(s);
        box.lower.resize(static_cast<Eigen::Index>(n));
        box.upper.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const Interval iv = scheme.interval(i, box.state[i]);
            const auto ei = static_cast<Eigen::Index>(i);
            box.lower[ei] = iv.lo_closed ? iv.lo : iv.lo + delta[i];
            box.upper[ei] = iv.hi_closed ? iv.hi : iv.hi - delta[i];
        }
        cover.boxes.push_back(std::move(box));
    }

    double kept = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        kept *= 1.0 - 2.0 * delta[i] * static_cast<double>(scheme.thresholds(i).size());
    }
    cover.excluded_measure = 1.0 - kept;
    return cover;
}

std::string to_string(Orientation o)
{
    return o == Orientation::activating ? "act" : "rep";
}

std::string to_string(Dependence d)
{
    switch (d) {
    case Dependence::none:
        return "none";
    case Dependence::increasing:
        return "+";
    case Dependence::decreasing:
        return "-";
    case Dependence::mixed:
        return "+-";
    }
    return "?";
}

} // namespace ssmap
