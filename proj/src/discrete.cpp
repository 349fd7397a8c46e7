#include "ssmap/discrete.hpp"

#include <algorithm>
#include <functional>

namespace ssmap {

std::string to_string(EdgeSign s)
{
    switch (s) {
    case EdgeSign::positive:
        return "+";
    case EdgeSign::negative:
        return "-";
    case EdgeSign::both:
        return "+-";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SignedDigraph

SignedDigraph::SignedDigraph(std::size_t n_vertices) : n_(n_vertices), matrix_(n_vertices * n_vertices) {}

std::size_t SignedDigraph::n_edges() const noexcept
{
    return static_cast<std::size_t>(std::count_if(matrix_.begin(), matrix_.end(), [](const auto& e) { return e.has_value(); }));
}

void SignedDigraph::set_edge(std::size_t from, std::size_t to, EdgeSign sign)
{
    if (from >= n_ || to >= n_) {
        throw ModelError("edge endpoint out of range");
    }
    matrix_[from * n_ + to] = sign;
}

void SignedDigraph::remove_edge(std::size_t from, std::size_t to)
{
    if (from >= n_ || to >= n_) {
        throw ModelError("edge endpoint out of range");
    }
    matrix_[from * n_ + to].reset();
}

std::optional<EdgeSign> SignedDigraph::edge(std::size_t from, std::size_t to) const
{
    if (from >= n_ || to >= n_) {
        return std::nullopt;
    }
    return matrix_[from * n_ + to];
}

std::vector<SignedEdge> SignedDigraph::edges() const
{
    std::vector<SignedEdge> out;
    for (std::size_t f = 0; f < n_; ++f) {
        for (std::size_t t = 0; t < n_; ++t) {
            if (const auto& e = matrix_[f * n_ + t]) {
                out.push_back({f, t, *e});
            }
        }
    }
    return out;
}

std::vector<std::size_t> SignedDigraph::successors(std::size_t v) const
{
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < n_; ++t) {
        if (matrix_[v * n_ + t]) {
            out.push_back(t);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fixed points and phase portraits

std::vector<DiscreteState> fixed_points(const MultistateNetwork& mn)
{
    std::vector<DiscreteState> out;
    for (std::uint64_t s = 0; s < mn.state_count(); ++s) {
        if (mn.image(s) == s) {
            out.push_back(mn.space().state_at(s));
        }
    }
    return out;
}

std::vector<std::uint32_t> PhasePortrait::fixed_points() const
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t s = 0; s < successor.size(); ++s) {
        if (successor[s] == s) {
            out.push_back(s);
        }
    }
    return out;
}

PhasePortrait phase_portrait(const MultistateNetwork& mn)
{
    if (mn.state_count() > kMaxPortraitStates) {
        throw TooLarge("phase portrait limited to 2^20 states, network has " + std::to_string(mn.state_count()));
    }
    PhasePortrait pp;
    pp.space = mn.space();
    pp.successor = mn.images();
    const auto count = static_cast<std::uint32_t>(mn.state_count());
    constexpr std::uint32_t kUnvisited = 0xFFFFFFFFu;
    constexpr std::uint32_t kOnPath = 0xFFFFFFFEu;
    pp.basin.assign(count, kUnvisited);

    std::vector<std::uint32_t> path;
    for (std::uint32_t start = 0; start < count; ++start) {
        if (pp.basin[start] != kUnvisited) {
            continue;
        }
        path.clear();
        std::uint32_t s = start;
        while (pp.basin[s] == kUnvisited) {
            pp.basin[s] = kOnPath;
            path.push_back(s);
            s = pp.successor[s];
        }
        std::uint32_t attractor = 0;
        if (pp.basin[s] == kOnPath) {
            // New cycle: it starts where s first appears on the path.
            auto at = std::find(path.begin(), path.end(), s);
            Attractor a;
            a.states.assign(at, path.end());
            attractor = static_cast<std::uint32_t>(pp.attractors.size());
            pp.attractors.push_back(std::move(a));
        }
        else {
            attractor = pp.basin[s];
        }
        for (auto p : path) {
            pp.basin[p] = attractor;
        }
    }
    return pp;
}

// ---------------------------------------------------------------------------
// Wiring diagrams

namespace {

EdgeSign sign_from(bool increases, bool decreases)
{
    if (increases && decreases) {
        return EdgeSign::both;
    }
    return increases ? EdgeSign::positive : EdgeSign::negative;
}

} // namespace

SignedDigraph wiring_diagram_discrete(const MultistateNetwork& mn)
{
    const auto& space = mn.space();
    const std::size_t n = space.n_vars();
    std::vector<char> inc(n * n, 0);
    std::vector<char> dec(n * n, 0);
    auto coord = [&](std::uint64_t state, std::size_t i) {
        return static_cast<int>((state / space.stride(i)) % (static_cast<std::uint64_t>(space.max_level(i)) + 1));
    };
    for (std::uint64_t s = 0; s < mn.state_count(); ++s) {
        const std::uint32_t img = mn.image(s);
        for (std::size_t j = 0; j < n; ++j) {
            if (coord(s, j) == space.max_level(j)) {
                continue;
            }
            const std::uint32_t img_up = mn.image(s + space.stride(j));
            if (img_up == img) {
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const int a = coord(img, i);
                const int b = coord(img_up, i);
                if (b > a) {
                    inc[j * n + i] = 1;
                }
                else if (b < a) {
                    dec[j * n + i] = 1;
                }
            }
        }
    }
    SignedDigraph g(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (inc[j * n + i] || dec[j * n + i]) {
                g.set_edge(j, i, sign_from(inc[j * n + i], dec[j * n + i]));
            }
        }
    }
    return g;
}

SignedDigraph wiring_diagram_continuous(const HillSystem& sys)
{
    const std::size_t n = sys.n_vars();
    SignedDigraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            switch (sys.expression(i).dependence_on(j)) {
            case Dependence::none:
                break;
            case Dependence::increasing:
                g.set_edge(j, i, EdgeSign::positive);
                break;
            case Dependence::decreasing:
                g.set_edge(j, i, EdgeSign::negative);
                break;
            case Dependence::mixed:
                g.set_edge(j, i, EdgeSign::both);
                break;
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Cycles (Johnson's elementary circuit search)

std::vector<SignedCycle> signed_cycles(const SignedDigraph& g)
{
    const std::size_t n = g.n_vertices();
    if (n > kMaxCycleVertices) {
        throw TooLarge("cycle enumeration limited to 24 vertices, graph has " + std::to_string(n));
    }
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t v = 0; v < n; ++v) {
        adj[v] = g.successors(v);
    }

    std::vector<SignedCycle> out;
    std::vector<char> blocked(n, 0);
    std::vector<std::vector<std::size_t>> blocked_by(n);
    std::vector<std::size_t> stack;

    std::function<void(std::size_t)> unblock = [&](std::size_t u) {
        blocked[u] = 0;
        auto pending = std::move(blocked_by[u]);
        blocked_by[u].clear();
        for (auto w : pending) {
            if (blocked[w]) {
                unblock(w);
            }
        }
    };

    auto emit = [&]() {
        SignedCycle c;
        c.vertices = stack;
        bool any_both = false;
        std::size_t negatives = 0;
        for (std::size_t k = 0; k < stack.size(); ++k) {
            const auto sign = *g.edge(stack[k], stack[(k + 1) % stack.size()]);
            c.signs.push_back(sign);
            any_both = any_both || sign == EdgeSign::both;
            negatives += sign == EdgeSign::negative ? 1 : 0;
        }
        c.positive = any_both || negatives % 2 == 0;
        c.negative = any_both || negatives % 2 == 1;
        out.push_back(std::move(c));
    };

    for (std::size_t s = 0; s < n; ++s) {
        std::fill(blocked.begin(), blocked.end(), 0);
        for (auto& b : blocked_by) {
            b.clear();
        }
        std::function<bool(std::size_t)> circuit = [&](std::size_t v) -> bool {
            bool found = false;
            stack.push_back(v);
            blocked[v] = 1;
            for (auto w : adj[v]) {
                if (w < s) {
                    continue;
                }
                if (w == s) {
                    emit();
                    found = true;
                }
                else if (!blocked[w] && circuit(w)) {
                    found = true;
                }
            }
            if (found) {
                unblock(v);
            }
            else {
                for (auto w : adj[v]) {
                    if (w >= s && std::find(blocked_by[w].begin(), blocked_by[w].end(), v) == blocked_by[w].end()) {
                        blocked_by[w].push_back(v);
                    }
                }
            }
            stack.pop_back();
            return found;
        };
        circuit(s);
    }
    return out;
}

std::vector<SignedCycle> positive_cycles(const SignedDigraph& g)
{
    auto all = signed_cycles(g);
    std::erase_if(all, [](const SignedCycle& c) { return !c.positive; });
    return all;
}

namespace {

std::uint32_t mask_of(const std::vector<std::size_t>& vertices)
{
    std::uint32_t m = 0;
    for (auto v : vertices) {
        m |= std::uint32_t{1} << v;
    }
    return m;
}

bool hits_all(std::uint32_t set, const std::vector<std::uint32_t>& cycles)
{
    return std::all_of(cycles.begin(), cycles.end(), [set](std::uint32_t c) { return (c & set) != 0; });
}

// Advance `combo` (sorted indices into [0,n)) to the next k-combination in lexicographic order.
bool next_combination(std::vector<std::size_t>& combo, std::size_t n)
{
    const std::size_t k = combo.size();
    std::size_t i = k;
    while (i > 0) {
        --i;
        if (combo[i] < n - k + i) {
            ++combo[i];
            for (std::size_t j = i + 1; j < k; ++j) {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

} // namespace

bool is_pfvs(const SignedDigraph& g, const std::vector<std::size_t>& vertices)
{
    std::vector<std::uint32_t> masks;
    for (const auto& c : positive_cycles(g)) {
        masks.push_back(mask_of(c.vertices));
    }
    return hits_all(mask_of(vertices), masks);
}

PfvsResult min_pfvs(const SignedDigraph& g, const StateSpace& space)
{
    const std::size_t n = g.n_vertices();
    if (space.n_vars() != n) {
        throw ModelError("state space and wiring diagram differ in dimension");
    }
    PfvsResult result;
    result.positive_cycles = positive_cycles(g);

    std::vector<std::uint32_t> masks;
    for (const auto& c : result.positive_cycles) {
        masks.push_back(mask_of(c.vertices));
    }
    // Only inclusion-minimal vertex sets constrain the search.
    std::sort(masks.begin(), masks.end(), [](auto a, auto b) { return __builtin_popcount(a) < __builtin_popcount(b); });
    std::vector<std::uint32_t> minimal;
    for (auto m : masks) {
        if (std::none_of(minimal.begin(), minimal.end(), [m](auto q) { return (q & m) == q; })) {
            minimal.push_back(m);
        }
    }

    bool found = minimal.empty();
    for (std::size_t k = 1; k <= n && !found; ++k) {
        std::vector<std::size_t> combo(k);
        for (std::size_t i = 0; i < k; ++i) {
            combo[i] = i;
        }
        do {
            if (hits_all(mask_of(combo), minimal)) {
                result.vertices = combo;
                found = true;
                break;
            }
        } while (next_combination(combo, n));
    }

    const auto chosen = mask_of(result.vertices);
    for (const auto& c : result.positive_cycles) {
        std::size_t hit = n;
        for (auto v : c.vertices) {
            if ((chosen >> v) & 1u) {
                hit = std::min(hit, v);
            }
        }
        result.hit_by.push_back(hit);
    }
    result.bound = 1;
    for (auto v : result.vertices) {
        result.bound *= static_cast<std::uint64_t>(space.max_level(v)) + 1;
    }
    return result;
}

} // namespace ssmap
