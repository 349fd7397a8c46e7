#include "cli.hpp"

#include "ssmap/simulation.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ssmap::cli {

using nlohmann::json;

int exit_code_for(Verdict v)
{
    switch (v) {
    case Verdict::one_to_one:
        return kOk;
    case Verdict::partial:
        return kPartial;
    case Verdict::failed:
        return kFailed;
    }
    return kFailed;
}

double canonical(double value)
{
    if (value == 0.0 || !std::isfinite(value)) {
        return value == 0.0 ? 0.0 : value;
    }
    return std::strtod(format_real(value).c_str(), nullptr);
}

namespace {

json vec_json(const Vector& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(canonical(v[i]));
    }
    return a;
}

json state_json(const DiscreteState& s)
{
    return json(s.coords);
}

json indices_json(const std::vector<std::size_t>& idx, bool one_based)
{
    json a = json::array();
    for (auto i : idx) {
        a.push_back(one_based ? i + 1 : i);
    }
    return a;
}

} // namespace

json report_to_json(const CorrespondenceReport& report, const ModelDocument& doc)
{
    json j;
    j["model"] = doc.name;
    j["variables"] = doc.var_names;
    j["verdict"] = to_string(report.verdict);
    j["reasons"] = report.reasons;

    json table = json::array();
    const auto& space = report.induced.network.space();
    for (std::uint64_t s = 0; s < space.state_count(); ++s) {
        const auto& lp = report.induced.limits[s];
        json row;
        row["state"] = state_json(lp.state);
        row["image"] = state_json(space.state_at(report.induced.network.image(s)));
        row["limit"] = vec_json(lp.value);
        row["on_threshold"] = indices_json(lp.on_threshold, true);
        table.push_back(std::move(row));
    }
    j["induced_table"] = std::move(table);

    json fps = json::array();
    for (const auto& fp : report.fixed_points) {
        fps.push_back(state_json(fp));
    }
    j["fixed_points"] = std::move(fps);

    json regions = json::array();
    for (const auto& r : report.regions) {
        json e;
        e["state"] = state_json(r.state);
        e["target"] = state_json(r.target);
        e["status"] = to_string(r.status);
        e["image_lower"] = vec_json(r.image_lower);
        e["image_upper"] = vec_json(r.image_upper);
        e["exact_bounds"] = r.exact_bounds;
        e["reason"] = r.reason;
        regions.push_back(std::move(e));
    }
    j["regions"] = std::move(regions);

    json steady = json::array();
    for (const auto& rec : report.steady_states) {
        json e;
        e["point"] = vec_json(rec.point);
        e["residual"] = canonical(rec.residual);
        e["box"] = state_json(rec.box);
        e["region"] = rec.region ? state_json(*rec.region) : json(nullptr);
        e["near_threshold"] = rec.near_threshold;
        json eig = json::array();
        for (const auto& l : rec.stability.eigenvalues) {
            eig.push_back({canonical(l.real()), canonical(l.imag())});
        }
        e["eigenvalues"] = std::move(eig);
        e["stability"] = to_string(rec.stability.verdict);
        e["gershgorin_certified"] = rec.stability.gershgorin_certified;
        e["matched"] = rec.matched_discrete_fixed_point ? state_json(*rec.matched_discrete_fixed_point) : json(nullptr);
        e["distance_to_limit"] = canonical(rec.distance_to_limit);
        steady.push_back(std::move(e));
    }
    j["steady_states"] = std::move(steady);

    j["contraction"] = {
        {"sup", canonical(report.contraction.sampled_sup_norm)},
        {"bound", canonical(report.contraction.bound)},
        {"passes", report.contraction.passes},
        {"samples", report.contraction.samples},
        {"sampled", report.contraction.sampled},
    };
    j["excluded_measure"] = canonical(report.cover.excluded_measure);
    j["margins"] = [&] {
        json a = json::array();
        for (double d : report.cover.margins) {
            a.push_back(canonical(d));
        }
        return a;
    }();
    j["range"] = {{"supremum", canonical(report.range.supremum)}, {"violation", report.range.violation}};
    return j;
}

json pfvs_to_json(const PfvsResult& result, const ModelDocument& doc, const std::string& source)
{
    json j;
    j["pfvs"] = indices_json(result.vertices, true);
    json names = json::array();
    for (auto v : result.vertices) {
        names.push_back(doc.var_names.at(v));
    }
    j["pfvs_names"] = std::move(names);
    j["bound"] = result.bound;
    j["source"] = source;
    json cycles = json::array();
    for (std::size_t c = 0; c < result.positive_cycles.size(); ++c) {
        const auto& cyc = result.positive_cycles[c];
        json signs = json::array();
        for (auto s : cyc.signs) {
            signs.push_back(to_string(s));
        }
        cycles.push_back({{"vertices", indices_json(cyc.vertices, true)},
                          {"signs", std::move(signs)},
                          {"hit_by", result.hit_by[c] + 1}});
    }
    j["positive_cycles"] = std::move(cycles);
    return j;
}

namespace {

struct Options {
    std::string model_path;
    std::optional<double> uniform_n;
    std::string delta = "0.05";
    double tol = 1e-10;
    bool audit = false;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string format = "json";
    std::string x0;
    double dt = 0.01;
    double t_end = 100.0;
    std::size_t every = 1;
    std::string field_path;
    std::size_t field_grid = 21;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end == item.c_str() || *end != '\0' || !std::isfinite(v)) {
            throw CLI::ValidationError(flag, "expected a comma-separated list of reals, got '" + text + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw CLI::ValidationError(flag, "empty list");
    }
    return values;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : fallback_(fallback)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw Error("cannot open output file '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

ModelDocument load(const Options& opt)
{
    ModelDocument doc = load_model(opt.model_path);
    if (doc.hill && opt.uniform_n) {
        doc.hill = doc.hill->with_uniform_exponent(*opt.uniform_n);
    }
    return doc;
}

std::string levels_summary(const ModelDocument& doc)
{
    const auto& levels = doc.space.levels();
    const bool uniform = std::all_of(levels.begin(), levels.end(), [&](int m) { return m == levels.front(); });
    std::ostringstream os;
    os << doc.n_vars() << (doc.n_vars() == 1 ? " var, " : " vars, ");
    if (uniform) {
        os << levels.front() + 1 << " levels each";
    }
    else {
        os << "levels";
        for (int m : levels) {
            os << ' ' << m + 1;
        }
    }
    os << ", " << doc.space.state_count() << " states";
    return os.str();
}

int cmd_check(const Options& opt, std::ostream& out, std::ostream& err)
{
    const ModelDocument doc = load(opt);
    out << (doc.name.empty() ? opt.model_path : doc.name) << ": " << levels_summary(doc);
    out << (doc.hill ? "; Hill system" : "") << (doc.discrete ? "; truth table" : "")
        << (doc.scheme ? "; thresholds" : "") << '\n';
    if (doc.hill) {
        const RangeReport range = range_supremum(*doc.hill);
        if (range.violation) {
            err << "warning: f exceeds 1 on the cube (sampled supremum " << format_real(range.supremum) << ")\n";
        }
    }
    return kOk;
}

const HillSystem& require_hill(const ModelDocument& doc, const std::string& command)
{
    if (!doc.hill || !doc.scheme) {
        throw ModelError(command + " requires a Hill system (model has none)");
    }
    return *doc.hill;
}

int cmd_correspondence(const Options& opt, std::ostream& out, std::ostream& err)
{
    const ModelDocument doc = load(opt);
    const HillSystem& sys = require_hill(doc, "correspondence");
    CorrespondenceConfig cfg;
    cfg.margins = parse_list(opt.delta, "--delta");
    cfg.solver.tol = opt.tol;
    cfg.audit = opt.audit;
    cfg.seed = opt.seed;
    const CorrespondenceReport report = correspondence_report(sys, *doc.scheme, cfg);
    for (const auto& d : report.induced.degeneracies) {
        err << "note: limit of region " << d.state.label() << " lies on a threshold of";
        for (auto v : d.vars) {
            err << ' ' << doc.var_names[v];
        }
        err << "; classified to the lower level\n";
    }
    if (report.range.violation) {
        err << "warning: f exceeds 1 on the cube (sampled supremum " << format_real(report.range.supremum) << ")\n";
    }
    Output o(opt.out_path, out);
    if (opt.format == "text") {
        auto& s = o.stream();
        s << "verdict: " << to_string(report.verdict) << '\n';
        s << "discrete fixed points:";
        for (const auto& fp : report.fixed_points) {
            s << ' ' << fp.label();
        }
        s << '\n';
        for (const auto& rec : report.steady_states) {
            s << "steady state in K_" << rec.box.label() << ":";
            for (Eigen::Index i = 0; i < rec.point.size(); ++i) {
                s << ' ' << format_real(rec.point[i]);
            }
            s << " (" << to_string(rec.stability.verdict) << ", residual " << format_real(rec.residual) << ")\n";
        }
        s << "contraction: sup " << format_real(report.contraction.sampled_sup_norm) << " vs bound "
          << format_real(report.contraction.bound) << (report.contraction.passes ? " (passes)" : " (fails)") << '\n';
        s << "excluded measure: " << format_real(report.cover.excluded_measure) << '\n';
        for (const auto& r : report.reasons) {
            s << "reason: " << r << '\n';
        }
    }
    else {
        o.stream() << report_to_json(report, doc).dump(2) << '\n';
    }
    return exit_code_for(report.verdict);
}

int cmd_pfvs(const Options& opt, std::ostream& out, std::ostream&)
{
    const ModelDocument doc = load(opt);
    SignedDigraph g;
    std::string source;
    if (doc.discrete) {
        g = wiring_diagram_discrete(*doc.discrete);
        source = "table";
    }
    else {
        g = wiring_diagram_continuous(*doc.hill);
        source = "hill";
    }
    const PfvsResult res = min_pfvs(g, doc.space);
    Output o(opt.out_path, out);
    if (opt.format == "text") {
        auto& s = o.stream();
        s << "pfvs:";
        for (auto v : res.vertices) {
            s << ' ' << doc.var_names[v];
        }
        s << "\nbound: " << res.bound << "\npositive cycles: " << res.positive_cycles.size() << '\n';
    }
    else {
        o.stream() << pfvs_to_json(res, doc, source).dump(2) << '\n';
    }
    return kOk;
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream&)
{
    const ModelDocument doc = load(opt);
    const HillSystem& sys = require_hill(doc, "simulate");
    Vector x0 = Vector::Constant(static_cast<Eigen::Index>(sys.n_vars()), 0.5);
    if (!opt.x0.empty()) {
        const auto values = parse_list(opt.x0, "--x0");
        if (values.size() != sys.n_vars()) {
            throw CLI::ValidationError("--x0", "expected " + std::to_string(sys.n_vars()) + " coordinates");
        }
        x0 = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
    IntegrationOptions io;
    io.dt = opt.dt;
    io.t_end = opt.t_end;
    io.record_every = opt.every;
    const Trajectory traj = integrate_ode(sys, x0, io);
    Output o(opt.out_path, out);
    auto& s = o.stream();
    s << 't';
    for (const auto& name : doc.var_names) {
        s << ',' << name;
    }
    s << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        s << format_real(traj.times[k]);
        for (Eigen::Index i = 0; i < traj.points[k].size(); ++i) {
            s << ',' << format_real(traj.points[k][i]);
        }
        s << '\n';
    }
    return kOk;
}

MultistateNetwork portrait_network(const ModelDocument& doc)
{
    if (doc.discrete) {
        return *doc.discrete;
    }
    return induced_network(*doc.hill, *doc.scheme).network;
}

int cmd_portrait(const Options& opt, std::ostream& out, std::ostream& err)
{
    const ModelDocument doc = load(opt);
    const MultistateNetwork mn = portrait_network(doc);
    const PhasePortrait pp = phase_portrait(mn);
    Output o(opt.out_path, out);
    auto& s = o.stream();
    s << "from,to,fixed_point\n";
    for (std::uint32_t k = 0; k < pp.successor.size(); ++k) {
        s << pp.space.state_at(k).label() << ',' << pp.space.state_at(pp.successor[k]).label() << ','
          << (pp.successor[k] == k ? 1 : 0) << '\n';
    }
    if (!doc.hill) {
        return kOk;
    }
    if (doc.n_vars() != 2) {
        err << "note: vector-field grid is only exported for 2-variable models\n";
        return kOk;
    }
    Output field(opt.field_path, s);
    auto& f = field.stream();
    if (opt.field_path.empty()) {
        f << '\n';
    }
    const auto& sys = *doc.hill;
    f << doc.var_names[0] << ',' << doc.var_names[1] << ",d" << doc.var_names[0] << ",d" << doc.var_names[1] << '\n';
    const std::size_t g = std::max<std::size_t>(opt.field_grid, 2);
    for (std::size_t a = 0; a < g; ++a) {
        for (std::size_t b = 0; b < g; ++b) {
            Vector p(2);
            p << static_cast<double>(a) / static_cast<double>(g - 1), static_cast<double>(b) / static_cast<double>(g - 1);
            const Vector d = Eigen::Map<const Vector>(sys.decay().data(), 2).cwiseProduct(sys.evaluate(p) - p);
            f << format_real(p[0]) << ',' << format_real(p[1]) << ',' << format_real(d[0]) << ',' << format_real(d[1])
              << '\n';
        }
    }
    return kOk;
}

int cmd_limit_net(const Options& opt, std::ostream& out, std::ostream&)
{
    const ModelDocument doc = load(opt);
    const HillSystem& sys = require_hill(doc, "limit-net");
    const InducedNetwork net = induced_network(sys, *doc.scheme);
    Output o(opt.out_path, out);
    auto& s = o.stream();
    const auto& space = net.network.space();
    if (opt.format == "json") {
        json rows = json::array();
        for (std::uint64_t k = 0; k < space.state_count(); ++k) {
            const auto& lp = net.limits[k];
            rows.push_back({{"state", state_json(lp.state)},
                            {"image", state_json(space.state_at(net.network.image(k)))},
                            {"limit", vec_json(lp.value)},
                            {"on_threshold", indices_json(lp.on_threshold, true)}});
        }
        s << json{{"model", doc.name}, {"variables", doc.var_names}, {"table", rows}}.dump(2) << '\n';
        return kOk;
    }
    for (std::size_t i = 0; i < doc.n_vars(); ++i) {
        s << (i ? " " : "# ") << doc.var_names[i];
    }
    s << " -> images   (limit)\n";
    for (std::uint64_t k = 0; k < space.state_count(); ++k) {
        const auto& lp = net.limits[k];
        const auto img = space.state_at(net.network.image(k));
        for (std::size_t i = 0; i < lp.state.size(); ++i) {
            s << (i ? " " : "") << lp.state[i];
        }
        s << " ->";
        for (std::size_t i = 0; i < img.size(); ++i) {
            s << ' ' << img[i];
        }
        s << "   (";
        for (Eigen::Index i = 0; i < lp.value.size(); ++i) {
            s << (i ? ", " : "") << format_real(lp.value[i]);
        }
        s << ')';
        if (!lp.on_threshold.empty()) {
            s << "   # on threshold:";
            for (auto v : lp.on_threshold) {
                s << ' ' << doc.var_names[v];
            }
        }
        s << '\n';
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ssmap: steady states of Hill ODE models versus fixed points of multistate networks"};
    app.set_version_flag("--version", "ssmap 1.0.0");
    app.require_subcommand(1);

    Options opt;
    app.add_option("--n", opt.uniform_n, "Set every Hill exponent to this value")->check(CLI::PositiveNumber);
    app.add_option("--delta", opt.delta, "Cover margin(s), one value or one per variable")->capture_default_str();
    app.add_option("--tol", opt.tol, "Steady-state residual tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_flag("--audit", opt.audit, "Search every box with multiple starts");
    app.add_option("--seed", opt.seed, "Seed for sampled starts")->capture_default_str();
    app.add_option("--out", opt.out_path, "Write the result to this file instead of stdout");
    app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}))->capture_default_str();

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("model", opt.model_path, "Model file")->required();
        sub->fallthrough();
        return sub;
    };
    auto* check = add_model(app.add_subcommand("check", "Parse and validate a model"));
    auto* corr = add_model(app.add_subcommand("correspondence", "Compare continuous steady states with discrete fixed points"));
    auto* pfvs = add_model(app.add_subcommand("pfvs", "Minimum positive feedback vertex set and steady-state bound"));
    auto* sim = add_model(app.add_subcommand("simulate", "Integrate the ODE with fixed-step RK4"));
    sim->add_option("--x0", opt.x0, "Initial condition, comma separated (default: all 0.5)");
    sim->add_option("--dt", opt.dt, "Step size")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--t-end", opt.t_end, "Final time")->check(CLI::NonNegativeNumber)->capture_default_str();
    sim->add_option("--every", opt.every, "Write every k-th step")->check(CLI::PositiveNumber)->capture_default_str();
    auto* portrait = add_model(app.add_subcommand("portrait", "Discrete phase portrait and ODE vector field as CSV"));
    portrait->add_option("--field", opt.field_path, "Write the vector-field grid to this file");
    portrait->add_option("--grid", opt.field_grid, "Vector-field grid points per axis")->capture_default_str();
    auto* limit = add_model(app.add_subcommand("limit-net", "Print the induced truth table"));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    }
    catch (const CLI::CallForVersion&) {
        out << "ssmap 1.0.0\n";
        return kOk;
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }

    try {
        if (*check) {
            return cmd_check(opt, out, err);
        }
        if (*corr) {
            return cmd_correspondence(opt, out, err);
        }
        if (*pfvs) {
            return cmd_pfvs(opt, out, err);
        }
        if (*sim) {
            return cmd_simulate(opt, out, err);
        }
        if (*portrait) {
            return cmd_portrait(opt, out, err);
        }
        if (*limit) {
            if (opt.format == "csv") {
                opt.format = "text";
            }
            return cmd_limit_net(opt, out, err);
        }
    }
    catch (const ParseError& e) {
        err << opt.model_path << ':' << e.line() << ':' << e.column() << ": "
            << (e.kind() == ParseError::Kind::syntax ? "syntax error: " : "error: ") << e.message() << '\n';
        return e.kind() == ParseError::Kind::syntax ? kParseError : kSemanticError;
    }
    catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }
    catch (const ModelError& e) {
        err << "error: " << e.what() << '\n';
        return kSemanticError;
    }
    catch (const UndeclaredThreshold& e) {
        err << "error: " << e.what() << '\n';
        return kSemanticError;
    }
    catch (const MarginTooLarge& e) {
        err << "error: " << e.what() << '\n';
        return kSemanticError;
    }
    catch (const Error& e) {
        // I/O failures (missing model file) land here.
        err << "error: " << e.what() << '\n';
        return kParseError;
    }
    return kParseError;
}

} // namespace ssmap::cli
