#pragma once

// Command dispatch: turns a validated RunConfig into module calls and writes
// CSV/JSON/SVG artifacts. Exit status 0 = ok, 1 = computation error,
// 2 = configuration error.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "degres/cylinder_map.hpp"
#include "degres/equilibria.hpp"
#include "degres/error.hpp"
#include "degres/flow.hpp"
#include "degres/io/config.hpp"
#include "degres/io/format.hpp"
#include "degres/io/parallel.hpp"
#include "degres/io/svg.hpp"
#include "degres/io/verify.hpp"
#include "degres/numerics.hpp"
#include "degres/perturbations.hpp"
#include "degres/portrait.hpp"
#include "degres/reconnection.hpp"
#include "degres/resonance.hpp"

namespace degres::io {

enum ExitStatus : int { kExitOk = 0, kExitComputation = 1, kExitConfig = 2 };

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int jobs = 1;
    bool svg = false;
};

using json = nlohmann::json;

inline json config_json(const RunConfig& cfg)
{
    json c = json::object();
    for (const auto& k : cfg.schema) {
        const auto& v = cfg.values.at(k.name);
        if (std::holds_alternative<std::monostate>(v)) c[k.name] = nullptr;
        else if (const auto* d = std::get_if<double>(&v)) c[k.name] = *d;
        else if (const auto* i = std::get_if<long long>(&v)) c[k.name] = *i;
        else if (const auto* b = std::get_if<bool>(&v)) c[k.name] = *b;
        else if (const auto* t = std::get_if<std::string>(&v)) c[k.name] = *t;
        else c[k.name] = std::get<std::vector<double>>(v);
    }
    return c;
}

inline json meta_json(const RunConfig& cfg)
{
    return {{"version", std::string(kVersion)}, {"command", std::string(to_string(cfg.command))}, {"config", config_json(cfg)}};
}

/// Equilibrium table with the fixed column order of equilibria.csv.
inline CsvTable equilibria_table(const RunConfig& cfg)
{
    CsvTable t;
    t.comments = output_metadata(cfg);
    t.header = {"mu1", "mu2", "p", "a", "b", "label", "u", "v", "kind", "delta", "energy"};
    return t;
}

inline void append_equilibria(CsvTable& t, const ZoneParameters& z, const std::vector<Equilibrium>& es)
{
    for (const auto& e : es)
        t.rows.push_back({format_double(z.mu1), format_double(z.mu2), format_int(z.p), format_double(z.a), format_double(z.b),
                          std::string(to_string(e.label)), format_double(e.state.u), format_double(e.state.v),
                          std::string(to_string(e.kind)), format_double(e.delta), format_double(e.energy)});
}

namespace detail {

class Runner {
public:
    Runner(const RunConfig& cfg, const RunOptions& opts, std::ostream& out) : cfg_(cfg), opts_(opts), out_(out) {}

    void write(const std::string& name, std::string_view content)
    {
        const auto path = opts_.out_dir / name;
        write_file_atomic(path, content);
        out_ << "wrote " << path.string() << "\n";
    }

    void write_csv(const std::string& name, const CsvTable& t) { write(name, to_csv(t)); }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    CsvTable table(std::vector<std::string> header) const
    {
        CsvTable t;
        t.comments = output_metadata(cfg_);
        t.header = std::move(header);
        return t;
    }

    ZoneParameters zone() const
    {
        ZoneParameters z;
        z.a = cfg_.real("a");
        z.b = cfg_.real("b");
        z.p = static_cast<int>(cfg_.integer("p"));
        if (cfg_.values.count("mu1")) z.mu1 = cfg_.real("mu1");
        if (cfg_.values.count("mu2")) z.mu2 = cfg_.real("mu2");
        return z;
    }

    /// Module preconditions checked before any computation count as config errors.
    template <typename F>
    auto precondition(const char* what, F&& f) -> decltype(f())
    {
        try {
            return f();
        } catch (const Error& e) {
            throw ConfigError(std::string(what) + ": " + e.detail());
        }
    }

    int resonances();
    int average();
    int equilibria();
    int bifdiag();
    int portrait();
    int reconnect();
    int map_orbits();
    int verify();

private:
    const RunConfig& cfg_;
    const RunOptions& opts_;
    std::ostream& out_;

    FrequencyProfile profile() const
    {
        const families::CubicTwistOscillator osc{cfg_.real("curvature"), cfg_.real("center")};
        return osc.profile(cfg_.real("I_min"), cfg_.real("I_max"), cfg_.real("nu"));
    }

    std::vector<std::string> meta() const { return output_metadata(cfg_); }
};

inline int Runner::resonances()
{
    const auto prof = profile();
    const auto found = find_resonance_levels(prof, static_cast<int>(cfg_.integer("p_max")),
                                             static_cast<int>(cfg_.integer("q_max")), 2048, cfg_.real("deriv_tol"));
    auto t = table({"p", "q", "I", "j", "bj", "bj1"});
    for (const auto& d : found.diagnostics) t.comments.push_back("diagnostic: " + d);
    for (const auto& l : found.levels)
        t.rows.push_back({format_int(l.p), format_int(l.q), format_double(l.I), format_int(l.j), format_double(l.bj),
                          format_double(l.bj1)});
    write_csv("resonances.csv", t);
    out_ << found.levels.size() << " resonance levels\n";
    return kExitOk;
}

inline int Runner::average()
{
    const auto prof = profile();
    ResonanceSpec spec;
    spec.p = static_cast<int>(cfg_.integer("p"));
    spec.q = static_cast<int>(cfg_.integer("q"));
    if (cfg_.has("I")) {
        const double I = cfg_.real("I");
        precondition("I", [&] {
            if (!(I > prof.I_lo && I < prof.I_hi)) throw Error(ErrorCode::InvalidArgument, "I_min < I < I_max required");
            return 0;
        });
        const auto info = degeneracy_order(prof, I, cfg_.real("deriv_tol"));
        spec.I = I;
        spec.j = info.j;
        spec.bj = info.bj;
        spec.bj1 = info.bj1;
    } else {
        const auto found = find_resonance_levels(prof, spec.p, spec.q, 2048, cfg_.real("deriv_tol"));
        const auto it = std::find_if(found.levels.begin(), found.levels.end(),
                                     [&](const ResonanceSpec& l) { return l.p == spec.p && l.q == spec.q; });
        if (it == found.levels.end())
            throw Error(ErrorCode::Precondition, "no resonance level for p=" + std::to_string(spec.p)
                                                     + ", q=" + std::to_string(spec.q) + " in [I_min, I_max]");
        spec = *it;
    }

    const PerturbationSpec pert = cfg_.text("perturbation") == "harmonic"
                                      ? families::harmonic(cfg_.real("f_amp"), cfg_.real("g_amp"), cfg_.real("f_const"),
                                                           static_cast<int>(cfg_.integer("k")))
                                      : families::cos_x_minus_phi(cfg_.real("amplitude"));
    const auto c = compute_averaged_coefficients(pert, spec, static_cast<int>(cfg_.integer("n_nodes")));
    const auto cls = classify_resonance(c);
    const auto ids = verify_hamiltonian_identities(c);

    auto t = table({"v", "A0", "P0", "Q0", "A0_tilde", "P0_tilde"});
    for (std::size_t i = 0; i < c.v_grid.size(); ++i)
        t.rows.push_back({format_double(c.v_grid[i]), format_double(c.A0[i]), format_double(c.P0[i]), format_double(c.Q0[i]),
                          format_double(c.A0_tilde[i]), format_double(c.P0_tilde[i])});

    json j;
    j["meta"] = meta_json(cfg_);
    j["resonance"] = {{"p", spec.p}, {"q", spec.q}, {"I", spec.I}, {"j", spec.j}, {"bj", spec.bj}, {"bj1", spec.bj1}};
    j["B0"] = c.B0;
    j["B1"] = c.B1;
    j["classification"] = {{"kind", std::string(to_string(cls.kind))}, {"roots", cls.roots}, {"note", cls.note}};
    j["identities"] = {{"identity_residual", ids.identity_residual}, {"abs_B0", ids.abs_B0}, {"abs_B1", ids.abs_B1},
                       {"tolerance", ids.tolerance}, {"pass", ids.pass()}};
    try {
        const auto red = harmonic_reduction(c, spec, cfg_.real("epsilon"), cfg_.real("deformation"));
        j["reduction"] = {{"a", red.zone.a}, {"b", red.zone.b}, {"p", red.zone.p}, {"mu1", red.zone.mu1},
                          {"mu2", red.zone.mu2}, {"b3", red.zone.b3}, {"a_p1", red.harmonic.a_p1},
                          {"c_p1", red.harmonic.c_p1}, {"d_p1", red.harmonic.d_p1}};
    } catch (const Error& e) {
        j["reduction"] = nullptr;
        j["reduction_error"] = e.what();
    }
    write_csv("averaged.csv", t);
    write_json("average.json", j);
    out_ << "classification " << to_string(cls.kind) << ", B0 = " << format_double(c.B0) << "\n";
    return kExitOk;
}

inline int Runner::equilibria()
{
    const ZoneParameters base = zone();
    std::vector<double> m1 = cfg_.reals("mu1_values"), m2 = cfg_.reals("mu2_values");
    if (m1.empty()) m1 = {base.mu1};
    if (m2.empty()) m2 = {base.mu2};
    std::vector<ZoneParameters> points;
    for (double x : m1)
        for (double y : m2) points.push_back(base.with_mu(x, y));
    const bool refine = cfg_.boolean("refine");

    struct Result {
        std::vector<Equilibrium> es;
        double deviation = 0.0;
    };
    const auto results = parallel_map(points.size(), opts_.jobs, [&](std::size_t i) {
        Result r;
        r.es = closed_form_equilibria(points[i]);
        if (refine)
            for (const auto& e : r.es) {
                if (e.kind == EquilibriumKind::Degenerate) continue;
                const auto n = refine_equilibrium(points[i], e.state);
                r.deviation = std::max({r.deviation, std::abs(n.state.u - e.state.u),
                                        std::abs(std::remainder(n.state.v - e.state.v, kTwoPi))});
            }
        return r;
    });

    auto t = equilibria_table(cfg_);
    double dev = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        append_equilibria(t, points[i], results[i].es);
        dev = std::max(dev, results[i].deviation);
    }
    if (refine) t.comments.push_back("newton_max_deviation = " + format_double(dev));
    write_csv("equilibria.csv", t);
    out_ << t.rows.size() << " equilibria at " << points.size() << " parameter points\n";
    return kExitOk;
}

inline int Runner::bifdiag()
{
    DiagramSpec spec;
    spec.a = cfg_.real("a");
    spec.b = cfg_.real("b");
    spec.p = static_cast<int>(cfg_.integer("p"));
    spec.mu1_lo = cfg_.real("mu1_min");
    spec.mu1_hi = cfg_.real("mu1_max");
    spec.mu2_lo = cfg_.real("mu2_min");
    spec.mu2_hi = cfg_.real("mu2_max");
    spec.n_mu1 = static_cast<int>(cfg_.integer("n_mu1"));
    spec.n_mu2 = static_cast<int>(cfg_.integer("n_mu2"));
    spec.curve_samples = static_cast<int>(cfg_.integer("curve_samples"));
    spec.min_component_cells = static_cast<int>(cfg_.integer("min_component_cells"));
    spec.jobs = std::max(1, opts_.jobs);
    precondition("diagram", [&] {
        spec.validate();
        return 0;
    });
    const auto d = build_parameter_diagram(spec);

    json j;
    j["meta"] = meta_json(cfg_);
    j["curves"] = json::array();
    auto csv = table({"curve_id", "mu1", "mu2"});
    for (const auto* set : {&d.analytic_curves, &d.reconnection_curves})
        for (const auto& c : *set) {
            json pts = json::array();
            for (const auto& q : c.points) {
                pts.push_back({q.mu1, q.mu2});
                csv.rows.push_back({c.id, format_double(q.mu1), format_double(q.mu2)});
            }
            j["curves"].push_back({{"id", c.id},
                                   {"tag", std::string(to_string(c.tag))},
                                   {"kind", set == &d.analytic_curves ? "analytic" : "reconnection"},
                                   {"points", std::move(pts)}});
        }
    j["regions"] = json::array();
    for (const auto& r : d.region_samples)
        j["regions"].push_back({{"mu1", r.at.mu1}, {"mu2", r.at.mu2}, {"signature", r.signature.key()}, {"cells", r.cells}});
    j["dropped_fragments"] = d.dropped_fragments;
    j["boundary_cells"] = d.boundary_cells;
    j["distinct_signatures"] = d.distinct_signatures();

    write_json("diagram.json", j);
    write_csv("diagram_curves.csv", csv);
    if (opts_.svg) write("diagram.svg", render_diagram(d, meta()));
    out_ << d.analytic_curves.size() << " analytic curve pieces, " << d.reconnection_curves.size()
         << " reconnection polylines, " << d.region_samples.size() << " regions\n";
    return kExitOk;
}

inline int Runner::portrait()
{
    const ZoneParameters z = precondition("zone", [&] {
        const auto zz = zone();
        zz.validate();
        return zz;
    });
    const PortraitWindow w = precondition("window", [&] {
        PortraitWindow ww{cfg_.real("u_min"), cfg_.real("u_max"), cfg_.real("v_min"), cfg_.real("v_max")};
        ww.validate();
        return ww;
    });
    const auto pp = sample_phase_portrait(z, w, static_cast<int>(cfg_.integer("n_levels")),
                                          static_cast<int>(cfg_.integer("n_grid")));

    std::vector<Equilibrium> saddles;
    if (cfg_.boolean("separatrices"))
        for (const auto& e : closed_form_equilibria(z))
            if (e.kind == EquilibriumKind::Saddle) saddles.push_back(e);
    SeparatrixOptions so;
    so.arc_budget = cfg_.real("arc_budget");
    struct Traced {
        std::vector<SeparatrixBranch> branches;
        std::string error;
    };
    const auto traced = parallel_map(saddles.size(), opts_.jobs, [&](std::size_t i) {
        Traced t;
        try {
            const auto br = trace_separatrices(z, saddles[i], so);
            t.branches.assign(br.begin(), br.end());
        } catch (const Error& e) {
            t.error = e.what();
        }
        return t;
    });

    json j;
    j["meta"] = meta_json(cfg_);
    j["window"] = {{"u_min", w.u_lo}, {"u_max", w.u_hi}, {"v_min", w.v_lo}, {"v_max", w.v_hi}};
    j["h_min"] = pp.h_min;
    j["h_max"] = pp.h_max;
    j["lipschitz_bound"] = pp.lipschitz_bound;
    j["levels"] = json::array();
    auto contours = table({"level_index", "level", "kind", "line", "closed", "u", "v"});
    for (std::size_t k = 0; k < pp.levels.size(); ++k) {
        const auto& lv = pp.levels[k];
        json lines = json::array();
        for (std::size_t l = 0; l < lv.lines.size(); ++l) {
            json pts = json::array();
            for (const auto& s : lv.lines[l].points) {
                pts.push_back({s.u, s.v});
                contours.rows.push_back({format_int(static_cast<long long>(k)), format_double(lv.level),
                                         std::string(to_string(lv.kind)), format_int(static_cast<long long>(l)),
                                         lv.lines[l].closed ? "1" : "0", format_double(s.u), format_double(s.v)});
            }
            lines.push_back({{"closed", lv.lines[l].closed}, {"points", std::move(pts)}});
        }
        j["levels"].push_back({{"level", lv.level}, {"kind", std::string(to_string(lv.kind))}, {"lines", std::move(lines)}});
    }
    j["equilibria"] = json::array();
    for (const auto& e : pp.equilibria)
        j["equilibria"].push_back({{"label", std::string(to_string(e.label))}, {"kind", std::string(to_string(e.kind))},
                                   {"u", e.state.u}, {"v", e.state.v}, {"delta", e.delta}, {"energy", e.energy}});

    auto sep = table({"saddle", "branch", "tau", "u", "v", "energy"});
    std::vector<SeparatrixBranch> all_branches;
    j["separatrices"] = json::array();
    for (std::size_t i = 0; i < saddles.size(); ++i) {
        const std::string label(to_string(saddles[i].label));
        if (!traced[i].error.empty()) {
            j["separatrices"].push_back({{"saddle", label}, {"error", traced[i].error}});
            continue;
        }
        for (const auto& br : traced[i].branches) {
            const std::string name = std::string(br.unstable ? "unstable" : "stable") + (br.side > 0 ? "+" : "-");
            for (const auto& s : br.trace.states)
                sep.rows.push_back({label, name, format_double(s.tau), format_double(s.state.u), format_double(s.state.v),
                                    format_double(hamiltonian(z, s.state))});
            json b = {{"saddle", label},
                      {"branch", name},
                      {"arc_length", br.arc_length},
                      {"max_energy_error", br.max_energy_error},
                      {"returned_to", br.returned_to ? json(std::string(to_string(*br.returned_to))) : json(nullptr)},
                      {"points", br.trace.states.size()}};
            if (br.error) b["error"] = *br.error;
            j["separatrices"].push_back(std::move(b));
            all_branches.push_back(br);
        }
    }

    auto eq = equilibria_table(cfg_);
    append_equilibria(eq, z, pp.equilibria);

    write_json("portrait.json", j);
    write_csv("contours.csv", contours);
    write_csv("equilibria.csv", eq);
    if (!saddles.empty()) write_csv("separatrices.csv", sep);
    if (opts_.svg) write("portrait.svg", render_portrait(pp, all_branches, meta()));
    out_ << pp.levels.size() << " contour levels, " << pp.equilibria.size() << " equilibria in the window\n";
    return kExitOk;
}

inline SaddlePair parse_pair(const std::string& s)
{
    const auto bar = s.find('|');
    if (bar == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected 'LABEL|LABEL', e.g. O1+|O2-");
    const auto a = label_from_string(s.substr(0, bar)), b = label_from_string(s.substr(bar + 1));
    if (a == b || a == EquilibriumLabel::Refined || b == EquilibriumLabel::Refined)
        throw Error(ErrorCode::InvalidArgument, "two distinct closed-form labels required");
    return {a, b};
}

inline int Runner::reconnect()
{
    const ZoneParameters base = precondition("zone", [&] {
        const auto zz = zone();
        zz.validate();
        return zz;
    });
    std::vector<double> grid = cfg_.reals("mu1_values");
    if (grid.empty()) {
        if (!(cfg_.real("mu1_max") >= cfg_.real("mu1_min"))) throw ConfigError("mu1_min <= mu1_max required");
        grid = num::linspace(cfg_.real("mu1_min"), cfg_.real("mu1_max"), static_cast<int>(cfg_.integer("n_mu1")));
    }
    const double lo = cfg_.real("mu2_min"), hi = cfg_.real("mu2_max");
    SaddlePair pair;
    if (cfg_.text("pair") == "auto") {
        const auto def = default_reconnection_pair(base.with_mu(grid.front(), 0.5 * (lo + hi)));
        if (!def)
            throw Error(ErrorCode::MissingSaddle, "fewer than two on-axis saddles at mu1=" + format_double(grid.front())
                                                      + "; set pair explicitly");
        pair = *def;
    } else {
        pair = precondition("pair", [&] { return parse_pair(cfg_.text("pair")); });
    }
    const auto tr = trace_reconnection_curve(base, grid, lo, hi, pair, static_cast<int>(cfg_.integer("n_scan")));

    const std::string id = "m6[" + to_string(pair) + "]";
    auto csv = table({"curve_id", "mu1", "mu2"});
    json j;
    j["meta"] = meta_json(cfg_);
    j["pair"] = to_string(pair);
    j["points"] = json::array();
    for (const auto& q : tr.points) {
        csv.rows.push_back({id + "." + std::to_string(q.segment), format_double(q.mu1), format_double(q.mu2)});
        j["points"].push_back({{"mu1", q.mu1}, {"mu2", q.mu2}, {"residual", q.residual}, {"segment", q.segment}});
    }
    j["skipped"] = json::array();
    for (const auto& s : tr.skipped) j["skipped"].push_back({{"mu1", s.mu1}, {"reason", s.reason}});
    j["end_markers"] = json::array();
    for (const auto& m : tr.end_markers) j["end_markers"].push_back({m.mu1, m.mu2});
    write_csv("reconnection.csv", csv);
    write_json("reconnection.json", j);
    out_ << tr.points.size() << " reconnection points for " << to_string(pair) << ", " << tr.skipped.size()
         << " slices skipped\n";
    return kExitOk;
}

inline std::vector<PhaseState> parse_starts(const std::string& text)
{
    std::vector<PhaseState> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string::npos) end = text.size();
        const std::string item(io::detail::trim(std::string_view(text).substr(pos, end - pos)));
        pos = end + 1;
        if (item.empty()) continue;
        const auto comma = item.find(',');
        double u = 0.0, v = 0.0;
        if (comma == std::string::npos || !parse_double(io::detail::trim(std::string_view(item).substr(0, comma)), u)
            || !parse_double(io::detail::trim(std::string_view(item).substr(comma + 1)), v) || !std::isfinite(u)
            || !std::isfinite(v))
            throw ConfigError("starts: expected 'u,v; u,v; ...', got '" + item + "'");
        out.push_back({u, v});
    }
    return out;
}

inline int Runner::map_orbits()
{
    const std::string kind = cfg_.text("map");
    const ZoneParameters z = precondition("zone", [&] {
        const auto zz = zone();
        zz.validate();
        return zz;
    });
    const double a = cfg_.real("a"), beta = cfg_.real("beta");
    std::optional<MapSpec> spec;
    if (kind == "standard") spec = StandardMap{a, beta};
    else if (kind == "euler") spec = EulerMap{cfg_.real("alpha"), z};
    if (spec) precondition("map", [&] {
            validate(*spec);
            return 0;
        });
    if (!spec && cfg_.has("manifold_u")) throw ConfigError("manifold_u/manifold_v need map = standard or euler");
    if (!(cfg_.real("u_max") > cfg_.real("u_min"))) throw ConfigError("u_min < u_max required");

    auto starts = parse_starts(cfg_.text("starts"));
    std::mt19937_64 rng(static_cast<unsigned long long>(cfg_.integer("seed")));
    for (long long k = 0; k < cfg_.integer("n_random"); ++k)
        starts.push_back({std::uniform_real_distribution<double>(cfg_.real("u_min"), cfg_.real("u_max"))(rng),
                          std::uniform_real_distribution<double>(0.0, kTwoPi)(rng)});
    if (starts.empty()) throw ConfigError("no orbit starts: set starts or n_random");

    const long n_iter = static_cast<long>(cfg_.integer("n_iter"));
    const double tau = cfg_.real("tau"), tol = cfg_.real("tol");
    auto energy = [&](PhaseState s) {
        if (kind == "standard") return approximating_hamiltonian(Iterate::T, a, beta, s);
        return hamiltonian(z, s);
    };

    struct OrbitResult {
        CsvTable table;
        std::vector<PhaseState> wrapped;
        json summary;
    };
    const auto results = parallel_map(starts.size(), opts_.jobs, [&](std::size_t i) {
        OrbitResult r;
        r.table = table({"step_or_tau", "u", "v", "v_unwrapped", "energy"});
        json s = {{"start", {starts[i].u, starts[i].v}}};
        if (spec) {
            const auto orbit = iterate_orbit(*spec, starts[i], n_iter);
            for (std::size_t k = 0; k < orbit.states.size(); ++k) {
                const PhaseState st = orbit.states[k];
                r.table.rows.push_back({format_int(static_cast<long long>(k)), format_double(st.u), format_double(st.v),
                                        format_double(orbit.v_unwrapped[k]), format_double(energy(st))});
            }
            r.wrapped = orbit.states;
            if (cfg_.boolean("rotation") && n_iter >= 1000) {
                const auto rho = rotation_number(*spec, starts[i], n_iter);
                s["rotation_number"] = rho.value;
                s["rotation_tail_estimate"] = rho.tail_estimate;
            }
        } else {
            const auto times = num::linspace(0.0, tau, static_cast<int>(n_iter) + 1);
            const auto tr = integrate_zone_orbit(z, starts[i], tau, tol, times);
            for (const auto& smp : tr.states) {
                const PhaseState w = smp.state.wrapped();
                r.table.rows.push_back({format_double(smp.tau), format_double(w.u), format_double(w.v),
                                        format_double(smp.state.v), format_double(energy(smp.state))});
                r.wrapped.push_back(w);
            }
            s["relative_energy_drift"] = tr.relative_drift().value_or(std::numeric_limits<double>::quiet_NaN());
            s["accepted_steps"] = tr.accepted_steps;
            s["rejected_steps"] = tr.rejected_steps;
        }
        r.summary = std::move(s);
        return r;
    });

    json j;
    j["meta"] = meta_json(cfg_);
    j["orbits"] = json::array();
    std::vector<std::vector<PhaseState>> pictures;
    double u_lo = cfg_.real("u_min"), u_hi = cfg_.real("u_max");
    for (std::size_t i = 0; i < results.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "orbit_%03zu.csv", i);
        write_csv(name, results[i].table);
        auto s = results[i].summary;
        s["file"] = name;
        j["orbits"].push_back(std::move(s));
        pictures.push_back(results[i].wrapped);
        for (const auto& st : results[i].wrapped) {
            u_lo = std::min(u_lo, st.u);
            u_hi = std::max(u_hi, st.u);
        }
    }

    if (spec && cfg_.has("manifold_u")) {
        const PhaseState fp{cfg_.real("manifold_u"), cfg_.real("manifold_v")};
        const auto ms = trace_manifolds(*spec, fp, static_cast<int>(cfg_.integer("segment_iterations")));
        auto csv = table({"branch", "iterate", "seed", "u", "v", "v_unwrapped"});
        json br = json::array();
        for (const auto& b : ms.branches) {
            const std::string name = std::string(b.unstable ? "unstable" : "stable") + (b.side > 0 ? "+" : "-");
            for (const auto& p : b.points)
                csv.rows.push_back({name, format_int(p.iterate), format_double(p.seed), format_double(p.state.u),
                                    format_double(wrap_angle(p.state.v)), format_double(p.state.v)});
            br.push_back({{"branch", name}, {"points", b.points.size()}, {"truncated", b.truncated}});
        }
        j["manifolds"] = {{"fixed_point", {fp.u, fp.v}},
                          {"unstable_multiplier", ms.multipliers.unstable},
                          {"stable_multiplier", ms.multipliers.stable},
                          {"splitting", ms.splitting ? json(*ms.splitting) : json(nullptr)},
                          {"branches", std::move(br)}};
        write_csv("manifolds.csv", csv);
    }
    write_json("orbits.json", j);
    if (opts_.svg) {
        const double pad = 0.05 * (u_hi - u_lo);
        write("orbits.svg", render_orbits(pictures, u_lo - pad, u_hi + pad, meta()));
    }
    out_ << results.size() << " orbits\n";
    return kExitOk;
}

inline int Runner::verify()
{
    const auto rows = run_invariant_suite(static_cast<unsigned long long>(cfg_.integer("seed")), opts_.jobs);
    out_ << format_check_table(rows);
    auto csv = table({"module", "invariant", "value", "condition", "status", "note"});
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.pass;
        csv.rows.push_back({r.module, r.invariant, format_double(r.value), r.threshold, r.pass ? "PASS" : "FAIL", r.note});
    }
    write_csv("verify.csv", csv);
    return ok ? kExitOk : kExitComputation;
}

} // namespace detail

/// Runs a parsed configuration; never throws. Messages go to `err`.
inline int run(const RunConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err)
{
    try {
        if (opts.jobs < 1) throw ConfigError("--jobs must be >= 1");
        detail::Runner r(cfg, opts, out);
        switch (cfg.command) {
        case Command::Resonances: return r.resonances();
        case Command::Average: return r.average();
        case Command::Equilibria: return r.equilibria();
        case Command::Bifdiag: return r.bifdiag();
        case Command::Portrait: return r.portrait();
        case Command::Reconnect: return r.reconnect();
        case Command::MapOrbits: return r.map_orbits();
        case Command::Verify: return r.verify();
        }
        return kExitComputation;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputation;
    }
}

/// Reads and parses the config file, then runs it.
inline int run_command(std::string_view command, const std::filesystem::path& config_path, const RunOptions& opts,
                       std::ostream& out, std::ostream& err)
{
    const auto cmd = command_from_string(command);
    if (!cmd) {
        err << "config error: unknown command '" << command << "'\n";
        return kExitConfig;
    }
    RunConfig cfg;
    try {
        cfg = parse_config(read_file(config_path), *cmd);
    } catch (const ConfigError& e) {
        err << "config error: " << config_path.string() << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return run(cfg, opts, out, err);
}

} // namespace degres::io
