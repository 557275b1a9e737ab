#pragma once

// Self-check suite behind the `verify` command: every invariant of every
// module, evaluated on seeded random samples, reported as one table row each.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "degres/cylinder_map.hpp"
#include "degres/equilibria.hpp"
#include "degres/flow.hpp"
#include "degres/io/format.hpp"
#include "degres/io/parallel.hpp"
#include "degres/perturbations.hpp"
#include "degres/portrait.hpp"
#include "degres/reconnection.hpp"
#include "degres/resonance.hpp"
#include "degres/zone_model.hpp"

namespace degres::io {

struct CheckResult {
    std::string module;
    std::string invariant;
    double value = 0.0;     ///< measured quantity (max error, count, ...)
    std::string threshold;  ///< human-readable acceptance condition
    bool pass = false;
    std::string note;
};

namespace detail {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline ZoneParameters random_zone(Rng& rng)
{
    ZoneParameters z;
    z.a = uniform(rng, 0.5, 3.0);
    z.b = uniform(rng, 0.5, 2.0) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    z.p = 1 + static_cast<int>(uniform(rng, 0.0, 3.0));
    z.mu1 = uniform(rng, -3.0, 3.0);
    z.mu2 = uniform(rng, -3.0, 3.0);
    return z;
}

struct Check {
    std::string module, invariant, threshold;
    std::function<CheckResult(Rng&)> run;
};

inline CheckResult below(double value, double limit, std::string note = {})
{
    return {{}, {}, value, {}, value < limit, std::move(note)};
}

inline int count_on_line(const std::vector<Equilibrium>& es, double v)
{
    return static_cast<int>(std::count_if(es.begin(), es.end(), [&](const Equilibrium& e) {
        return !is_off_axis(e.label) && std::abs(e.state.v - v) < 1e-12;
    }));
}

inline ResonanceSpec unit_resonance(int p)
{
    ResonanceSpec s;
    s.p = p;
    s.q = 1;
    s.I = 1.0;
    s.j = 2;
    s.bj = 1.0;
    return s;
}

inline std::vector<Check> zone_checks()
{
    std::vector<Check> c;
    c.push_back({"zone-model", "field = (-dH/dv, dH/du) vs central differences", "max error < 1e-6", [](Rng& rng) {
                     double worst = 0.0;
                     const double h = 1e-6;
                     for (int k = 0; k < 200; ++k) {
                         const auto z = random_zone(rng);
                         const PhaseState s{uniform(rng, -2, 2), uniform(rng, 0, kTwoPi)};
                         const auto f = vector_field(z, s);
                         const double hu = (hamiltonian(z, {s.u + h, s.v}) - hamiltonian(z, {s.u - h, s.v})) / (2 * h);
                         const double hv = (hamiltonian(z, {s.u, s.v + h}) - hamiltonian(z, {s.u, s.v - h})) / (2 * h);
                         worst = std::max({worst, std::abs(f.du + hv), std::abs(f.dv - hu)});
                     }
                     return below(worst, 1e-6);
                 }});
    c.push_back({"zone-model", "divergence-free Jacobian", "max |trace| = 0", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 1000; ++k) {
                         const auto z = random_zone(rng);
                         worst = std::max(worst, std::abs(field_jacobian(z, {uniform(rng, -3, 3), uniform(rng, 0, kTwoPi)}).trace()));
                     }
                     return CheckResult{{}, {}, worst, {}, worst == 0.0, {}};
                 }});
    c.push_back({"zone-model", "periodic in v", "max |f(v+2pi) - f(v)| < 1e-12", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 1000; ++k) {
                         const auto z = random_zone(rng);
                         const PhaseState s{uniform(rng, -3, 3), uniform(rng, 0, kTwoPi)};
                         const auto f = vector_field(z, s), g = vector_field(z, {s.u, s.v + kTwoPi});
                         worst = std::max({worst, std::abs(f.du - g.du), std::abs(f.dv - g.dv),
                                           std::abs(hamiltonian(z, s) - hamiltonian(z, {s.u, s.v + kTwoPi}))});
                     }
                     return below(worst, 1e-12);
                 }});
    c.push_back({"zone-model", "time-reversal symmetry (u,-v)", "max asymmetry < 1e-13", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 1000; ++k) {
                         const auto z = random_zone(rng);
                         const PhaseState s{uniform(rng, -3, 3), uniform(rng, 0, kTwoPi)};
                         const auto f = vector_field(z, s), g = vector_field(z, {s.u, -s.v});
                         worst = std::max({worst, std::abs(g.du + f.du), std::abs(g.dv - f.dv)});
                     }
                     return below(worst, 1e-13);
                 }});
    return c;
}

inline std::vector<Check> resonance_checks()
{
    std::vector<Check> c;
    c.push_back({"resonance-averaging", "quadrature converges under node doubling", "max |dA0| < 1e-10", [](Rng&) {
                     double worst = 0.0;
                     for (int p = 1; p <= 3; ++p) {
                         const auto a = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), unit_resonance(p), 128);
                         const auto b = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), unit_resonance(p), 256);
                         for (std::size_t i = 0; i < a.A0.size(); ++i) worst = std::max(worst, std::abs(a.A0[i] - b.A0[2 * i]));
                     }
                     return below(worst, 1e-10);
                 }});
    c.push_back({"resonance-averaging", "mean split A0~ + B0 = A0", "max error < 1e-15", [](Rng&) {
                     const auto a = compute_averaged_coefficients(families::harmonic(0.7, 0.0, 0.25), unit_resonance(1), 128);
                     double worst = 0.0;
                     for (std::size_t i = 0; i < a.A0.size(); ++i) worst = std::max(worst, std::abs(a.A0_tilde[i] + a.B0 - a.A0[i]));
                     return below(worst, 1e-15);
                 }});
    c.push_back({"resonance-averaging", "classification invariant under grid refinement", "all 3 classes stable", [](Rng&) {
                     int stable = 0;
                     const std::function<double(double)> fs[] = {[](double v) { return 0.5 * std::sin(2 * v) + 2; },
                                                                 [](double v) { return std::sin(2 * v); },
                                                                 [](double v) { return std::sin(2 * v) + 0.5; }};
                     const Passability want[] = {Passability::Passable, Passability::NonPassable, Passability::PartiallyPassable};
                     for (int k = 0; k < 3; ++k) {
                         bool ok = true;
                         for (int n : {64, 128, 512, 1024}) {
                             const auto co = AveragedCoefficients::from_functions(
                                 2, n, fs[k], [](double) { return 0.0; }, [](double) { return 0.0; });
                             ok = ok && classify_resonance(co).kind == want[k];
                         }
                         stable += ok;
                     }
                     return CheckResult{{}, {}, static_cast<double>(stable), {}, stable == 3, {}};
                 }});
    c.push_back({"resonance-averaging", "|a_p1| decreases with p (p = 1..5)", "strictly decreasing", [](Rng&) {
                     double prev = std::numeric_limits<double>::infinity();
                     bool ok = true;
                     for (int p = 1; p <= 5; ++p) {
                         const auto co = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), unit_resonance(p), 128);
                         const double a = std::abs(harmonic_reduction(co, unit_resonance(p), 0.0).harmonic.a_p1);
                         ok = ok && a < prev;
                         prev = a;
                     }
                     return CheckResult{{}, {}, prev, {}, ok, "value is |a_51|"};
                 }});
    c.push_back({"resonance-averaging", "Hamiltonian identities at 2048 nodes", "max(|P0+dQ0/dv|, |B0|, |B1|) < 1e-8",
                 [](Rng&) {
                     const auto co = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), unit_resonance(1), 2048);
                     const auto r = verify_hamiltonian_identities(co);
                     return below(std::max({r.identity_residual, r.abs_B0, r.abs_B1}), 1e-8);
                 }});
    c.push_back({"resonance-averaging", "F = sin(theta - phi) gives A0 = sin v", "max |A0 - sin v| < 1e-10", [](Rng&) {
                     const auto co = compute_averaged_coefficients(families::harmonic(1.0, 0.0), unit_resonance(1), 2048);
                     double worst = 0.0;
                     for (std::size_t i = 0; i < co.A0.size(); ++i) worst = std::max(worst, std::abs(co.A0[i] - std::sin(co.v_grid[i])));
                     return below(worst, 1e-10);
                 }});
    return c;
}

inline std::vector<Check> equilibria_checks()
{
    std::vector<Check> c;
    c.push_back({"equilibria-bifurcations", "closed form vs Newton from 1e-3 kicks", "max deviation < 1e-10", [](Rng& rng) {
                     double worst = 0.0;
                     int n = 0;
                     for (int k = 0; k < 100; ++k) {
                         const ZoneParameters z{2.0, 1.0, 1, uniform(rng, -3, 3), uniform(rng, -3, 3)};
                         for (const auto& e : closed_form_equilibria(z)) {
                             if (e.kind == EquilibriumKind::Degenerate) continue;
                             const auto r = refine_equilibrium(z, {e.state.u + uniform(rng, -1e-3, 1e-3), e.state.v + uniform(rng, -1e-3, 1e-3)});
                             worst = std::max({worst, std::abs(r.state.u - e.state.u),
                                               std::abs(std::remainder(r.state.v - e.state.v, kTwoPi))});
                             ++n;
                         }
                     }
                     return below(worst, 1e-10, std::to_string(n) + " equilibria");
                 }});
    c.push_back({"equilibria-bifurcations", "count parity on v = 0 and v = pi", "0 or 2 off m3/m4, 1 on them", [](Rng& rng) {
                     bool ok = true;
                     for (int k = 0; k < 200; ++k) {
                         const ZoneParameters z{2.0, 1.0, 1, uniform(rng, -3, 3), uniform(rng, -3, 3)};
                         const auto es = closed_form_equilibria(z);
                         for (double v : {0.0, kPi}) {
                             const int n = count_on_line(es, v);
                             ok = ok && (n == 0 || n == 2);
                         }
                     }
                     const ZoneParameters z{2.0, 1.0, 1, 0.0, 0.0};
                     ok = ok && count_on_line(closed_form_equilibria(z.with_mu(1.0, 2.0)), 0.0) == 1;
                     ok = ok && count_on_line(closed_form_equilibria(z.with_mu(-4.0, 4.0)), kPi) == 1;
                     return CheckResult{{}, {}, ok ? 0.0 : 1.0, {}, ok, {}};
                 }});
    c.push_back({"equilibria-bifurcations", "vertical bifurcation merges a saddle with a center", "delta signs opposite",
                 [](Rng& rng) {
                     bool ok = true;
                     for (int k = 0; k < 50; ++k) {
                         const ZoneParameters base{2.0, 1.0, 1, 0.0, 0.0};
                         const double mu2 = uniform(rng, 0.3, 3.0) * (k % 2 ? 1 : -1);
                         for (bool on_m3 : {true, false}) {
                             const double mu1 = on_m3 ? m3_mu1(base, mu2) : m4_mu1(base, mu2);
                             const auto es = closed_form_equilibria(base.with_mu(mu1, mu2 * (1 + 1e-6)));
                             const auto la = on_m3 ? EquilibriumLabel::O1Plus : EquilibriumLabel::O2Plus;
                             const auto lb = on_m3 ? EquilibriumLabel::O1Minus : EquilibriumLabel::O2Minus;
                             const Equilibrium *a = nullptr, *b = nullptr;
                             for (const auto& e : es) {
                                 if (e.label == la) a = &e;
                                 if (e.label == lb) b = &e;
                             }
                             ok = ok && a && b && a->delta * b->delta < 0.0;
                         }
                     }
                     return CheckResult{{}, {}, ok ? 0.0 : 1.0, {}, ok, {}};
                 }});
    c.push_back({"equilibria-bifurcations", "energy equals H at the state", "max difference = 0", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 200; ++k) {
                         const auto z = random_zone(rng);
                         for (const auto& e : closed_form_equilibria(z)) worst = std::max(worst, std::abs(e.energy - hamiltonian(z, e.state)));
                     }
                     return CheckResult{{}, {}, worst, {}, worst == 0.0, {}};
                 }});
    return c;
}

inline std::vector<Check> reconnection_checks(int jobs)
{
    std::vector<Check> c;
    c.push_back({"reconnection-diagram", "one signature field changes across a single curve", "all crossings",
                 [](Rng&) {
                     DiagramSpec spec;
                     spec.n_mu1 = spec.n_mu2 = 40;
                     spec.curve_samples = 200;
                     const auto d = build_parameter_diagram(spec);
                     const ZoneParameters z = spec.zone();
                     int checked = 0, bad = 0;
                     for (const auto* set : {&d.analytic_curves, &d.reconnection_curves})
                         for (const auto& cv : *set)
                             for (std::size_t i = 1; i + 1 < cv.points.size(); i += 5) {
                                 const auto &p0 = cv.points[i - 1], &p1 = cv.points[i + 1], &q = cv.points[i];
                                 const double t1 = p1.mu1 - p0.mu1, t2 = p1.mu2 - p0.mu2, n = std::hypot(t1, t2);
                                 if (n == 0) continue;
                                 const double n1 = -t2 / n, n2 = t1 / n, h = 1e-4;
                                 auto sig = [&](double s) { return try_region_signature(z.with_mu(q.mu1 + s * n1, q.mu2 + s * n2), 1e-9); };
                                 const auto a = sig(-h), b = sig(h), a2 = sig(-10 * h), b2 = sig(10 * h);
                                 if (!a || !b || !a2 || !b2 || *a == *b || !(*a2 == *a) || !(*b2 == *b)) continue;
                                 // Near an intersection the path crosses a second curve too.
                                 bool single = true;
                                 for (CurveTag other : kLocalCurves) {
                                     if (other == cv.tag) continue;
                                     const double f0 = curve_function(z, other, q.mu1 - 10 * h * n1, q.mu2 - 10 * h * n2);
                                     const double f1 = curve_function(z, other, q.mu1 + 10 * h * n1, q.mu2 + 10 * h * n2);
                                     single = single && (f0 > 0) == (f1 > 0) && f0 != 0.0 && f1 != 0.0;
                                 }
                                 if (!single) continue;
                                 const bool counts = a->n_saddles != b->n_saddles || a->n_centers != b->n_centers;
                                 const bool off = a->has_off_axis != b->has_off_axis;
                                 bool ok = true;
                                 switch (cv.tag) {
                                 case CurveTag::M3:
                                 case CurveTag::M4: ok = counts && !off; break;
                                 case CurveTag::M5Plus:
                                 case CurveTag::M5Minus: ok = off; break;
                                 case CurveTag::M6:
                                     ok = !counts && !off && a->center_labels == b->center_labels && !a->same_ordering(*b);
                                     break;
                                 }
                                 bad += !ok;
                                 ++checked;
                             }
                     return CheckResult{{}, {}, static_cast<double>(bad), {}, bad == 0 && checked > 50,
                                        std::to_string(checked) + " crossings"};
                 }});
    c.push_back({"reconnection-diagram", "m6: equal saddle energies, strict order either side", "|h1-h2| < 1e-10",
                 [](Rng&) {
                     const ZoneParameters z{2.0, 1.0, 1, 0.0, 0.0};
                     const SaddlePair pair{EquilibriumLabel::O1Plus, EquilibriumLabel::O2Minus};
                     const auto tr = trace_reconnection_curve(z, {0.1, 0.2, 0.3, 0.4, 0.5}, 1.5, 3.5, pair);
                     double worst = tr.points.size() == 5 ? 0.0 : 1.0;
                     bool ordered = true;
                     for (const auto& q : tr.points) {
                         worst = std::max(worst, std::abs(q.residual));
                         const double lo = reconnection_residual(z.with_mu(q.mu1, q.mu2 - 1e-3), pair);
                         const double hi = reconnection_residual(z.with_mu(q.mu1, q.mu2 + 1e-3), pair);
                         ordered = ordered && lo * hi < 0.0;
                     }
                     return CheckResult{{}, {}, worst, {}, worst < 1e-10 && ordered, {}};
                 }});
    c.push_back({"reconnection-diagram", "no off-axis equilibria at mu1 = 0.01, |mu2| <= 10", "none found", [](Rng&) {
                     const ZoneParameters z{2.0, 1.0, 1, 0.0, 0.0};
                     int found = 0;
                     for (int k = 0; k <= 2000; ++k) {
                         const auto s = try_region_signature(z.with_mu(0.01, -10.0 + 20.0 * k / 2000), 0.0);
                         if (s && s->has_off_axis) ++found;
                     }
                     return CheckResult{{}, {}, static_cast<double>(found), {}, found == 0, {}};
                 }});
    c.push_back({"reconnection-diagram", "signatures independent of traversal order", "identical diagrams", [jobs](Rng&) {
                     DiagramSpec spec;
                     spec.n_mu1 = spec.n_mu2 = 80;
                     const auto a = build_parameter_diagram(spec);
                     spec.jobs = std::max(3, jobs);
                     const auto b = build_parameter_diagram(spec);
                     bool same = a.region_samples.size() == b.region_samples.size();
                     for (std::size_t i = 0; same && i < a.region_samples.size(); ++i)
                         same = a.region_samples[i].signature == b.region_samples[i].signature
                             && a.region_samples[i].at.mu1 == b.region_samples[i].at.mu1
                             && a.region_samples[i].at.mu2 == b.region_samples[i].at.mu2;
                     const ZoneParameters z = spec.zone().with_mu(0.7, 1.1);
                     same = same && region_signature(z) == region_signature(z);
                     return CheckResult{{}, {}, same ? 0.0 : 1.0, {}, same, {}};
                 }});
    return c;
}

inline std::vector<Check> flow_checks()
{
    std::vector<Check> c;
    c.push_back({"flow-integrator", "relative energy drift over tau = 100 at tol 1e-10", "max < 1e-8 over 20 starts",
                 [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 20; ++k) {
                         const ZoneParameters z{2.0, 1.0, 1 + k % 2, uniform(rng, -3, 3), uniform(rng, -3, 3)};
                         const auto tr = integrate_zone_orbit(z, {uniform(rng, -1.5, 1.5), uniform(rng, 0, kTwoPi)}, 100.0, 1e-10);
                         worst = std::max(worst, tr.relative_drift().value_or(INFINITY));
                     }
                     return below(worst, 1e-8);
                 }});
    c.push_back({"flow-integrator", "homoclinic branches return to their saddle", "distance < 1e-5", [](Rng&) {
                     const ZoneParameters z{2.0, 1.0, 1, 1.0, 0.0};
                     double worst = 0.0;
                     int returned = 0;
                     for (const auto& e : closed_form_equilibria(z)) {
                         if (e.kind != EquilibriumKind::Saddle) continue;
                         for (const auto& br : trace_separatrices(z, e)) {
                             if (!br.returned_to) {
                                 worst = INFINITY;
                                 continue;
                             }
                             ++returned;
                             for (const auto& t : closed_form_equilibria(z))
                                 if (t.label == *br.returned_to)
                                     worst = std::max(worst, degres::detail::periodic_distance(br.trace.states.back().state, t.state));
                         }
                     }
                     return below(worst, 1e-5, std::to_string(returned) + " branches");
                 }});
    c.push_back({"flow-integrator", "every center enclosed by a closed contour", "all centers", [](Rng&) {
                     int missing = 0, total = 0;
                     for (const ZoneParameters z : {ZoneParameters{2.0, 1.0, 1, 1.0, 0.0}, ZoneParameters{2.0, 1.0, 1, 0.5, 2.0},
                                                    ZoneParameters{2.0, 1.0, 1, -1.0, 1.0}, ZoneParameters{2.0, 1.0, 1, 2.0, 1.5}}) {
                         for (const auto& e : closed_form_equilibria(z)) {
                             if (e.kind != EquilibriumKind::Center) continue;
                             ++total;
                             const auto pp = sample_phase_portrait(z, {-3.0, 3.0, e.state.v - kPi, e.state.v + kPi}, 12, 256);
                             bool found = false;
                             for (const auto& lv : pp.levels)
                                 for (const auto& line : lv.lines) found = found || encloses(line, e.state);
                             missing += !found;
                         }
                     }
                     return CheckResult{{}, {}, static_cast<double>(missing), {}, missing == 0,
                                        std::to_string(total) + " centers"};
                 }});
    return c;
}

inline MapSpec random_map(Rng& rng, int k)
{
    if (k % 2 == 0) return StandardMap{uniform(rng, 0.0, 2.0), uniform(rng, 0.05, 1.0)};
    return EulerMap{uniform(rng, 0.001, 0.2), ZoneParameters{uniform(rng, 0.5, 3.0), 1.0, 1 + k % 3, uniform(rng, -2, 2), uniform(rng, -2, 2)}};
}

inline std::vector<Check> map_checks()
{
    std::vector<Check> c;
    c.push_back({"cylinder-maps", "area preservation, analytic Jacobian", "max |det J - 1| < 1e-12", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 200; ++k) {
                         const auto m = random_map(rng, k);
                         worst = std::max(worst, std::abs(map_jacobian_det(m, {uniform(rng, -2, 2), uniform(rng, 0, kTwoPi)}) - 1.0));
                     }
                     return below(worst, 1e-12);
                 }});
    c.push_back({"cylinder-maps", "area preservation, finite differences", "max |det J - 1| < 1e-6", [](Rng& rng) {
                     double worst = 0.0;
                     const double h = 1e-6;
                     for (int k = 0; k < 200; ++k) {
                         const auto m = random_map(rng, k);
                         const PhaseState s{uniform(rng, -2, 2), uniform(rng, 0, kTwoPi)};
                         const auto up = map_step_unwrapped(m, {s.u + h, s.v}), um = map_step_unwrapped(m, {s.u - h, s.v});
                         const auto vp = map_step_unwrapped(m, {s.u, s.v + h}), vm = map_step_unwrapped(m, {s.u, s.v - h});
                         const Matrix2 j{(up.u - um.u) / (2 * h), (vp.u - vm.u) / (2 * h), (up.v - um.v) / (2 * h), (vp.v - vm.v) / (2 * h)};
                         worst = std::max(worst, std::abs(j.det() - 1.0));
                     }
                     return below(worst, 1e-6);
                 }});
    c.push_back({"cylinder-maps", "step then inverse returns the state", "max error < 1e-10", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 200; ++k) {
                         const auto m = random_map(rng, k);
                         const PhaseState s{uniform(rng, -2, 2), uniform(rng, 0, kTwoPi)};
                         const auto back = inverse_step(m, map_step_unwrapped(m, s));
                         worst = std::max({worst, std::abs(back.u - s.u), std::abs(std::remainder(back.v - s.v, kTwoPi))});
                     }
                     return below(worst, 1e-10);
                 }});
    c.push_back({"cylinder-maps", "Euler step vs flow over tau = alpha", "observed order >= 1.8", [](Rng& rng) {
                     double worst = INFINITY;
                     for (int k = 0; k < 10; ++k) {
                         const ZoneParameters z{2.0, 1.0, 1 + k % 2, uniform(rng, -2, 2), uniform(rng, -2, 2)};
                         const PhaseState s{uniform(rng, -1.5, 1.5), uniform(rng, 0, kTwoPi)};
                         double err[2];
                         int i = 0;
                         for (double alpha : {0.01, 0.005}) {
                             const auto m = map_step_unwrapped(EulerMap{alpha, z}, s);
                             const auto f = integrate_zone_orbit(z, s, alpha, 1e-13).states.back().state;
                             err[i++] = std::hypot(m.u - f.u, m.v - f.v);
                         }
                         worst = std::min(worst, std::log2(err[0] / err[1]));
                     }
                     return CheckResult{{}, {}, worst, {}, worst >= 1.8, "value is the lowest order"};
                 }});
    c.push_back({"cylinder-maps", "second iterate equals two steps", "max error < 1e-12", [](Rng& rng) {
                     double worst = 0.0;
                     for (int k = 0; k < 200; ++k) {
                         const StandardMap m{uniform(rng, 0.0, 2.0), uniform(rng, 0.05, 1.0)};
                         const PhaseState s{uniform(rng, -2, 2), uniform(rng, 0, kTwoPi)};
                         const auto a = second_iterate(m, s), b = map_step_unwrapped(m, map_step_unwrapped(m, s));
                         worst = std::max({worst, std::abs(a.u - b.u), std::abs(a.v - b.v)});
                     }
                     return below(worst, 1e-12);
                 }});
    return c;
}

inline std::vector<Check> io_checks()
{
    std::vector<Check> c;
    c.push_back({"cli-io", "CSV number round trip", "max relative loss < 1e-15", [](Rng& rng) {
                     double worst = 0.0;
                     std::uniform_int_distribution<int> ex(-300, 300);
                     CsvTable t;
                     t.header = {"x"};
                     std::vector<double> xs;
                     for (int k = 0; k < 5000; ++k) {
                         const double x = uniform(rng, -1, 1) * std::pow(10.0, ex(rng));
                         xs.push_back(x);
                         t.rows.push_back({format_double(x)});
                     }
                     for (double x : {0.1, 1.0 / 3.0, kPi, 5e-324, 1.7976931348623157e308, -0.0}) {
                         xs.push_back(x);
                         t.rows.push_back({format_double(x)});
                     }
                     const auto back = parse_csv(to_csv(t));
                     for (std::size_t i = 0; i < xs.size(); ++i) {
                         const double y = back.number(i, "x");
                         worst = std::max(worst, xs[i] == 0.0 ? std::abs(y) : std::abs(y - xs[i]) / std::abs(xs[i]));
                     }
                     return below(worst, 1e-15);
                 }});
    c.push_back({"cli-io", "JSON number round trip", "max relative loss < 1e-15", [](Rng& rng) {
                     double worst = 0.0;
                     nlohmann::json arr = nlohmann::json::array();
                     std::vector<double> xs;
                     for (int k = 0; k < 5000; ++k) {
                         xs.push_back(uniform(rng, -1, 1) * std::pow(10.0, uniform(rng, -300, 300)));
                         arr.push_back(xs.back());
                     }
                     const auto back = nlohmann::json::parse(arr.dump());
                     for (std::size_t i = 0; i < xs.size(); ++i)
                         worst = std::max(worst, std::abs(back[i].get<double>() - xs[i]) / std::abs(xs[i]));
                     return below(worst, 1e-15);
                 }});
    return c;
}

} // namespace detail

/// Runs every invariant check; each draws from its own generator seeded from
/// `seed` and its index, so rows do not depend on evaluation order.
inline std::vector<CheckResult> run_invariant_suite(unsigned long long seed = 1, int jobs = 1)
{
    std::vector<detail::Check> checks;
    for (auto part : {detail::zone_checks(), detail::resonance_checks(), detail::equilibria_checks(),
                      detail::reconnection_checks(jobs), detail::flow_checks(), detail::map_checks(), detail::io_checks()})
        for (auto& ch : part) checks.push_back(std::move(ch));

    return parallel_map(checks.size(), jobs, [&](std::size_t i) {
        detail::Rng rng(seed * 1000003ULL + i);
        CheckResult r;
        try {
            r = checks[i].run(rng);
        } catch (const std::exception& e) {
            r.pass = false;
            r.value = std::numeric_limits<double>::quiet_NaN();
            r.note = e.what();
        }
        r.module = checks[i].module;
        r.invariant = checks[i].invariant;
        r.threshold = checks[i].threshold;
        return r;
    });
}

/// Fixed-width pass/fail table.
inline std::string format_check_table(const std::vector<CheckResult>& rows)
{
    std::size_t wm = 6, wi = 9;
    for (const auto& r : rows) {
        wm = std::max(wm, r.module.size());
        wi = std::max(wi, r.invariant.size());
    }
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    std::string out = pad("status", 7) + pad("module", wm + 2) + pad("invariant", wi + 2) + pad("value", 24) + "condition\n";
    int failed = 0;
    for (const auto& r : rows) {
        failed += !r.pass;
        out += pad(r.pass ? "PASS" : "FAIL", 7) + pad(r.module, wm + 2) + pad(r.invariant, wi + 2)
               + pad(format_double(r.value), 24) + r.threshold;
        if (!r.note.empty()) out += " (" + r.note + ")";
        out += "\n";
    }
    out += std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) + " invariants pass\n";
    return out;
}

} // namespace degres::io
