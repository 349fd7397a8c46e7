#include "ssmap/correspondence.hpp"

#include "ssmap/discrete.hpp"
#include "ssmap/parallel.hpp"
#include "ssmap/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ssmap {

std::string to_string(RegionStatus s)
{
    switch (s) {
    case RegionStatus::invariant:
        return "invariant";
    case RegionStatus::excluded:
        return "excluded";
    case RegionStatus::degenerate:
        return "degenerate";
    }
    return "?";
}

std::string to_string(Stability s)
{
    switch (s) {
    case Stability::asymptotically_stable:
        return "asymptotically_stable";
    case Stability::unstable:
        return "unstable";
    case Stability::marginal:
        return "marginal";
    }
    return "?";
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::one_to_one:
        return "one_to_one";
    case Verdict::partial:
        return "partial";
    case Verdict::failed:
        return "failed";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Limits and the induced network

LimitPoint limit_point(const HillSystem& sys, const ThresholdScheme& scheme, const DiscreteState& state)
{
    if (scheme.n_vars() != sys.n_vars()) {
        throw ModelError("threshold scheme and Hill system differ in dimension");
    }
    if (!scheme.space().contains(state)) {
        throw ModelError("state " + state.label() + " is outside the threshold scheme");
    }
    LimitPoint lp;
    lp.state = state;
    lp.value = Vector::Zero(static_cast<Eigen::Index>(sys.n_vars()));
    for (std::size_t i = 0; i < sys.n_vars(); ++i) {
        double sum = 0.0;
        for (const auto& term : sys.expression(i).terms) {
            double prod = term.coefficient;
            for (const auto& f : term.factors) {
                const auto t = scheme.threshold_index(f.var, f.threshold);
                if (!t) {
                    throw UndeclaredThreshold(i, f.var, f.threshold,
                                              "equation " + std::to_string(i + 1) + " uses threshold " +
                                                  std::to_string(f.threshold) + " on variable " +
                                                  std::to_string(f.var + 1) + ", which is not a declared threshold");
                }
                const bool above = state[f.var] >= static_cast<int>(*t);
                const bool on = (f.orientation == Orientation::activating) == above;
                if (!on) {
                    prod = 0.0;
                    break;
                }
            }
            sum += prod;
        }
        lp.value[static_cast<Eigen::Index>(i)] = sum;
        if (scheme.threshold_index(i, sum)) {
            lp.on_threshold.push_back(i);
        }
    }
    return lp;
}

namespace {

int classify_lower(const ThresholdScheme& scheme, std::size_t var, double value, bool& on_threshold)
{
    if (auto t = scheme.threshold_index(var, value)) {
        on_threshold = true;
        return static_cast<int>(*t) - 1;
    }
    on_threshold = false;
    const auto& k = scheme.thresholds(var);
    return static_cast<int>(std::upper_bound(k.begin(), k.end(), value) - k.begin());
}

} // namespace

InducedNetwork induced_network(const HillSystem& sys, const ThresholdScheme& scheme)
{
    const StateSpace space = scheme.space();
    InducedNetwork out;
    out.limits.reserve(space.state_count());
    std::vector<std::uint32_t> images(space.state_count());
    for (std::uint64_t s = 0; s < space.state_count(); ++s) {
        LimitPoint lp = limit_point(sys, scheme, space.state_at(s));
        DiscreteState target;
        Degeneracy deg{lp.state, {}};
        for (std::size_t i = 0; i < sys.n_vars(); ++i) {
            bool on = false;
            target.coords.push_back(classify_lower(scheme, i, lp.value[static_cast<Eigen::Index>(i)], on));
            if (on) {
                deg.vars.push_back(i);
            }
        }
        if (!deg.vars.empty()) {
            out.degeneracies.push_back(std::move(deg));
        }
        images[s] = static_cast<std::uint32_t>(space.index_of(target));
        out.limits.push_back(std::move(lp));
    }
    out.network = MultistateNetwork(space, std::move(images));
    return out;
}

// ---------------------------------------------------------------------------
// Invariance

namespace {

std::size_t fitting_grid(std::size_t per_axis, std::size_t dim, std::uint64_t budget)
{
    while (per_axis > 2 && grid_size(per_axis, dim) > budget) {
        --per_axis;
    }
    return per_axis;
}

} // namespace

RegionVerdict check_invariance(const HillSystem& sys, const Cover& cover, const LimitPoint& limit,
                               const DiscreteState& target, const InvarianceOptions& options)
{
    const std::size_t n = sys.n_vars();
    const auto en = static_cast<Eigen::Index>(n);
    const CompactBox& box = cover.box(limit.state);
    const CompactBox& goal = cover.box(target);

    RegionVerdict v;
    v.state = limit.state;
    v.target = target;
    v.image_lower = Vector::Zero(en);
    v.image_upper = Vector::Zero(en);

    std::vector<std::size_t> sampled_components;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& expr = sys.expression(i);
        if (!expr.is_monotone()) {
            sampled_components.push_back(i);
            continue;
        }
        Vector lo_corner = box.lower;
        Vector hi_corner = box.lower;
        for (std::size_t j = 0; j < n; ++j) {
            const auto ej = static_cast<Eigen::Index>(j);
            const auto dep = expr.dependence_on(j);
            if (dep == Dependence::increasing) {
                hi_corner[ej] = box.upper[ej];
            }
            else if (dep == Dependence::decreasing) {
                lo_corner[ej] = box.upper[ej];
            }
        }
        v.image_lower[static_cast<Eigen::Index>(i)] = sys.evaluate_component(i, lo_corner);
        v.image_upper[static_cast<Eigen::Index>(i)] = sys.evaluate_component(i, hi_corner);
        v.evaluations += 2;
    }

    if (!sampled_components.empty()) {
        v.exact_bounds = false;
        const std::size_t per_axis = fitting_grid(options.grid_per_axis, n, options.max_grid_points);
        std::vector<double> lo(n, std::numeric_limits<double>::infinity());
        std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
        std::vector<double> lipschitz(n, 0.0);
        for_each_grid_point(box.lower, box.upper, per_axis, [&](const Vector& p) {
            const Matrix jac = sys.jacobian(p);
            for (auto i : sampled_components) {
                const double val = sys.evaluate_component(i, p);
                lo[i] = std::min(lo[i], val);
                hi[i] = std::max(hi[i], val);
                lipschitz[i] = std::max(lipschitz[i], jac.row(static_cast<Eigen::Index>(i)).norm());
            }
            ++v.evaluations;
        });
        double diameter = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto ej = static_cast<Eigen::Index>(j);
            const double width = box.upper[ej] - box.lower[ej];
            const double h = per_axis > 1 ? width / static_cast<double>(per_axis - 1) : width;
            diameter += h * h;
        }
        diameter = std::sqrt(diameter);
        for (auto i : sampled_components) {
            // 0 <= f_i <= sum of its coefficients everywhere on the cube.
            double ceiling = 0.0;
            for (const auto& term : sys.expression(i).terms) {
                ceiling += term.coefficient;
            }
            const double slack = 2.0 * lipschitz[i] * diameter;
            v.image_lower[static_cast<Eigen::Index>(i)] = std::max(0.0, lo[i] - slack);
            v.image_upper[static_cast<Eigen::Index>(i)] = std::min(ceiling, hi[i] + slack);
        }
    }

    v.maps_into_target = ((v.image_lower - goal.lower).array() >= 0.0).all() &&
                         ((goal.upper - v.image_upper).array() >= 0.0).all();
    for (Eigen::Index i = 0; i < en; ++i) {
        if (v.image_upper[i] < box.lower[i] || v.image_lower[i] > box.upper[i]) {
            v.disjoint_from_self = true;
            break;
        }
    }

    const bool fixed = target == limit.state;
    if (!limit.on_threshold.empty()) {
        v.status = RegionStatus::degenerate;
        v.reason = "limit point lies on a threshold";
    }
    else if (fixed) {
        v.status = v.maps_into_target ? RegionStatus::invariant : RegionStatus::degenerate;
        if (!v.maps_into_target) {
            v.reason = v.exact_bounds ? "image of the box is not contained in the box"
                                      : "sampled image bounds reach outside the box";
        }
    }
    else {
        v.status = v.disjoint_from_self ? RegionStatus::excluded : RegionStatus::degenerate;
        if (!v.disjoint_from_self) {
            v.reason = v.exact_bounds ? "image of the box meets the box"
                                      : "sampled image bounds meet the box";
        }
    }
    return v;
}

RegionVerdict check_invariance(const HillSystem& sys, const ThresholdScheme& scheme, const Cover& cover,
                               const DiscreteState& state, const InvarianceOptions& options)
{
    const LimitPoint lp = limit_point(sys, scheme, state);
    DiscreteState target;
    for (std::size_t i = 0; i < sys.n_vars(); ++i) {
        bool on = false;
        target.coords.push_back(classify_lower(scheme, i, lp.value[static_cast<Eigen::Index>(i)], on));
    }
    return check_invariance(sys, cover, lp, target, options);
}

// ---------------------------------------------------------------------------
// Contraction

double contraction_bound(const std::vector<double>& decay)
{
    const Eigen::Map<const Vector> d(decay.data(), static_cast<Eigen::Index>(decay.size()));
    return d.minCoeff() / (std::sqrt(static_cast<double>(decay.size())) * d.norm());
}

ContractionCertificate check_contraction(const HillSystem& sys, const Cover& cover, const ContractionOptions& options)
{
    const std::size_t n = sys.n_vars();
    ContractionCertificate cert;
    cert.bound = contraction_bound(sys.decay());
    cert.argmax = Vector::Zero(static_cast<Eigen::Index>(n));
    if (cover.boxes.empty()) {
        cert.passes = true;
        return cert;
    }
    const std::uint64_t per_box_budget = std::max<std::uint64_t>(1, options.max_samples / cover.boxes.size());
    const bool use_grid = grid_size(options.grid_per_axis, n) <= per_box_budget;
    cert.grid_per_axis = use_grid ? options.grid_per_axis : 0;

    struct BoxSup {
        double sup = 0.0;
        Vector at;
        std::size_t samples = 0;
    };
    std::vector<BoxSup> sups(cover.boxes.size());
    parallel_for(cover.boxes.size(), options.threads, [&](std::size_t b) {
        const CompactBox& box = cover.boxes[b];
        BoxSup& out = sups[b];
        out.at = box.lower;
        auto visit = [&](const Vector& p) {
            const double norm = sys.jacobian(p).norm();
            if (norm > out.sup || !std::isfinite(norm)) {
                out.sup = std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity();
                out.at = p;
            }
            ++out.samples;
        };
        if (use_grid) {
            for_each_grid_point(box.lower, box.upper, options.grid_per_axis, visit);
            return;
        }
        std::uint64_t budget = per_box_budget;
        // Slopes peak on the faces nearest the thresholds, so corners go first.
        if (n < 63 && (std::uint64_t{1} << n) <= budget / 2) {
            for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
                visit(box.corner(c));
            }
            budget -= std::uint64_t{1} << n;
        }
        HaltonSequence seq(n, 1 + b);
        for (std::uint64_t k = 0; k < budget; ++k) {
            visit(seq.next_in(box.lower, box.upper));
        }
    });
    for (const auto& s : sups) {
        cert.samples += s.samples;
        if (s.sup > cert.sampled_sup_norm) {
            cert.sampled_sup_norm = s.sup;
            cert.argmax = s.at;
        }
    }
    cert.passes = cert.sampled_sup_norm < cert.bound;
    return cert;
}

// ---------------------------------------------------------------------------
// Stability

StabilityResult stability(const HillSystem& sys, const Vector& point, double tau_lambda)
{
    const auto n = static_cast<Eigen::Index>(sys.n_vars());
    const Vector d = Eigen::Map<const Vector>(sys.decay().data(), n);
    const Matrix fprime = sys.jacobian(point);
    const Matrix b = d.asDiagonal() * fprime;
    const Matrix j = b - Matrix(d.asDiagonal());

    StabilityResult r;
    r.gershgorin_certified = std::sqrt(static_cast<double>(n)) * b.norm() < d.minCoeff();

    Eigen::EigenSolver<Matrix> solver(j, false);
    if (solver.info() != Eigen::Success || !j.allFinite()) {
        r.eigen_converged = false;
        r.verdict = r.gershgorin_certified ? Stability::asymptotically_stable : Stability::marginal;
        return r;
    }
    const auto ev = solver.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        r.eigenvalues.push_back(ev[k]);
    }
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](const auto& a, const auto& c) {
        return a.real() != c.real() ? a.real() < c.real() : a.imag() < c.imag();
    });
    double max_real = -std::numeric_limits<double>::infinity();
    for (const auto& l : r.eigenvalues) {
        max_real = std::max(max_real, l.real());
    }
    if (max_real < -tau_lambda) {
        r.verdict = Stability::asymptotically_stable;
    }
    else if (max_real > tau_lambda) {
        r.verdict = Stability::unstable;
    }
    else {
        r.verdict = Stability::marginal;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Root search

namespace {

double residual_inf(const HillSystem& sys, const Vector& p)
{
    return (sys.evaluate(p) - p).cwiseAbs().maxCoeff();
}

} // namespace

SolveResult solve_in_box(const HillSystem& sys, const CompactBox& box, const Vector& start, const SolverConfig& cfg)
{
    SolveResult res;
    Vector p = box.project(start);
    double r = residual_inf(sys, p);
    double checkpoint = r;

    // Projected fixed-point iteration.
    for (std::size_t it = 0; it < cfg.max_iter && r >= cfg.tol; ++it) {
        p = box.project(sys.evaluate(p));
        r = residual_inf(sys, p);
        ++res.iterations;
        if (!std::isfinite(r)) {
            break;
        }
        if (res.iterations % cfg.stagnation_window == 0) {
            if (r > 0.5 * checkpoint) {
                break;
            }
            checkpoint = r;
        }
    }

    // Damped Newton on g(p) = f(p) - p, iterates kept inside the box.
    if (!(r < cfg.tol) && std::isfinite(r)) {
        res.used_newton = true;
        const auto n = static_cast<Eigen::Index>(sys.n_vars());
        const Matrix eye = Matrix::Identity(n, n);
        for (std::size_t k = 0; k < cfg.newton_max_iter && r >= cfg.tol; ++k) {
            const Vector g = sys.evaluate(p) - p;
            const Matrix jg = sys.jacobian(p) - eye;
            Eigen::FullPivLU<Matrix> lu(jg);
            if (!jg.allFinite() || !lu.isInvertible()) {
                res.singular_newton_step = true;
                break;
            }
            const Vector step = lu.solve(-g);
            if (!step.allFinite()) {
                res.singular_newton_step = true;
                break;
            }
            const double g_norm = g.norm();
            double alpha = 1.0;
            bool accepted = false;
            while (alpha >= 1e-10) {
                const Vector q = box.project(p + alpha * step);
                const Vector gq = sys.evaluate(q) - q;
                if (gq.norm() < g_norm) {
                    p = q;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            ++res.iterations;
            r = residual_inf(sys, p);
            if (!accepted) {
                break;
            }
        }
    }

    res.point = p;
    res.residual = r;
    res.found = r < cfg.tol && box.excess(p) <= kBoundaryTol;
    return res;
}

std::optional<SteadyStateRecord> find_steady_state(const HillSystem& sys, const CompactBox& box,
                                                   const SolverConfig& cfg, const std::optional<Vector>& start)
{
    const SolveResult res = solve_in_box(sys, box, start.value_or(box.center()), cfg);
    if (!res.found) {
        return std::nullopt;
    }
    SteadyStateRecord rec;
    rec.point = res.point;
    rec.residual = res.residual;
    rec.box = box.state;
    rec.stability = stability(sys, res.point, cfg.tau_lambda);
    return rec;
}

std::vector<Vector> multistart_steady_states(const HillSystem& sys, const CompactBox& box, std::size_t starts,
                                             const SolverConfig& cfg, const std::optional<Vector>& preferred,
                                             std::uint64_t seed)
{
    std::vector<Vector> roots;
    HaltonSequence seq(sys.n_vars(), 1 + seed);
    auto record = [&](const Vector& p) {
        for (const auto& q : roots) {
            if ((q - p).cwiseAbs().maxCoeff() <= 10.0 * cfg.tol) {
                return;
            }
        }
        roots.push_back(p);
    };
    for (std::size_t k = 0; k < starts; ++k) {
        Vector start;
        if (k == 0 && preferred) {
            start = *preferred;
        }
        else if (k == (preferred ? 1u : 0u)) {
            start = box.center();
        }
        else {
            start = seq.next_in(box.lower, box.upper);
        }
        const SolveResult res = solve_in_box(sys, box, start, cfg);
        if (res.found) {
            record(res.point);
        }
    }
    return roots;
}

// ---------------------------------------------------------------------------
// Full report

CorrespondenceReport correspondence_report(const HillSystem& sys, const ThresholdScheme& scheme,
                                           const CorrespondenceConfig& cfg)
{
    CorrespondenceReport rep;
    rep.induced = induced_network(sys, scheme);
    rep.fixed_points = fixed_points(rep.induced.network);
    rep.cover = build_cover(scheme, cfg.margins);
    rep.range = range_supremum(sys);

    const StateSpace& space = rep.cover.space;
    const auto count = static_cast<std::size_t>(space.state_count());
    const auto& net = rep.induced.network;

    rep.regions.resize(count);
    parallel_for(count, cfg.threads, [&](std::size_t s) {
        rep.regions[s] = check_invariance(sys, rep.cover, rep.induced.limits[s], space.state_at(net.image(s)),
                                          cfg.invariance);
    });

    ContractionOptions copt = cfg.contraction;
    if (copt.threads == 0) {
        copt.threads = cfg.threads;
    }
    rep.contraction = check_contraction(sys, rep.cover, copt);

    // Which boxes to search: fixed points always, boxes without an exclusion proof, everything in audit mode.
    std::vector<std::vector<Vector>> roots(count);
    rep.searches.resize(count);
    parallel_for(count, cfg.threads, [&](std::size_t s) {
        const bool fixed = net.image(s) == s;
        RegionSearch& search = rep.searches[s];
        search.state = space.state_at(s);
        search.searched = fixed || cfg.audit || rep.regions[s].status != RegionStatus::excluded;
        if (!search.searched) {
            return;
        }
        const CompactBox& box = rep.cover.boxes[s];
        const Vector preferred = box.project(rep.induced.limits[s].value);
        const std::size_t starts = cfg.audit ? std::max<std::size_t>(cfg.audit_starts, 1) : 1;
        roots[s] = multistart_steady_states(sys, box, starts, cfg.solver, preferred, cfg.seed + s);
        search.roots = roots[s].size();
    });

    for (std::size_t s = 0; s < count; ++s) {
        const bool fixed = net.image(s) == s;
        for (const auto& p : roots[s]) {
            SteadyStateRecord rec;
            rec.point = p;
            rec.residual = residual_inf(sys, p);
            rec.box = space.state_at(s);
            auto region = region_of(p, scheme);
            if (auto* st = std::get_if<DiscreteState>(&region)) {
                rec.region = *st;
            }
            else {
                rec.near_threshold = true;
            }
            rec.stability = stability(sys, p, cfg.solver.tau_lambda);
            if (fixed) {
                rec.matched_discrete_fixed_point = rec.box;
            }
            rec.distance_to_limit = (p - rep.induced.limits[s].value).norm();
            rep.steady_states.push_back(std::move(rec));
        }
    }

    bool states_match = true;
    for (std::size_t s = 0; s < count; ++s) {
        const bool fixed = net.image(s) == s;
        const auto& search = rep.searches[s];
        const std::string label = search.state.label();
        if (fixed && search.roots != 1) {
            states_match = false;
            rep.reasons.push_back("box " + label + " (discrete fixed point) holds " + std::to_string(search.roots) +
                                  " steady states, expected 1");
        }
        else if (!fixed && search.roots != 0) {
            states_match = false;
            rep.reasons.push_back("box " + label + " (not a discrete fixed point) holds " +
                                  std::to_string(search.roots) + " steady states");
        }
    }
    if (!rep.contraction.passes) {
        rep.reasons.push_back("sampled sup ||f'||_F = " + std::to_string(rep.contraction.sampled_sup_norm) +
                              " is not below the contraction bound " + std::to_string(rep.contraction.bound));
    }
    if (states_match) {
        rep.verdict = rep.contraction.passes ? Verdict::one_to_one : Verdict::partial;
    }
    else {
        rep.verdict = Verdict::failed;
    }
    return rep;
}

} // namespace ssmap
