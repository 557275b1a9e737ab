#pragma once

// Adaptive Dormand-Prince 5(4) integration of planar autonomous fields with
// dense output, and separatrix tracing from saddles of the zone system.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "degres/equilibria.hpp"
#include "degres/error.hpp"
#include "degres/zone_model.hpp"

namespace degres {

using PlanarField = std::function<FieldValue(PhaseState)>;
using EnergyFunction = std::function<double(PhaseState)>;

struct OrbitSample {
    double tau = 0.0;
    PhaseState state; ///< v unwrapped
};

struct OrbitTrace {
    std::vector<OrbitSample> states;
    std::optional<double> energy_drift; ///< max |H - H0| over accepted steps, Hamiltonian fields only
    double initial_energy = 0.0;
    int accepted_steps = 0;
    int rejected_steps = 0;
    bool stopped_early = false;

    /// Drift relative to max(1, |H0|).
    std::optional<double> relative_drift() const
    {
        if (!energy_drift) return std::nullopt;
        return *energy_drift / std::max(1.0, std::abs(initial_energy));
    }
};

struct IntegratorOptions {
    double h0 = 0.0;          ///< initial step, 0 = automatic
    double blowup = 1e6;      ///< |u| limit
    long max_steps = 50'000'000;
    /// With an energy function, pull each accepted step back onto the initial
    /// level along grad H = (dv, -du). Assumes the field is Hamiltonian for it.
    bool project_energy = true;
    /// Optional stop predicate checked after every accepted step.
    std::function<bool(double, PhaseState)> stop;
};

namespace detail {

struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

struct Vec2 {
    double u, v;
};

inline Vec2 as_vec(FieldValue f) { return {f.du, f.dv}; }

// Dense-output coefficients of one accepted step.
struct DenseStep {
    double t0, h;
    std::array<Vec2, 5> r;

    PhaseState at(double t) const
    {
        const double s = (t - t0) / h, s1 = 1.0 - s;
        auto comp = [&](auto get) {
            return get(r[0]) + s * (get(r[1]) + s1 * (get(r[2]) + s * (get(r[3]) + s1 * get(r[4]))));
        };
        return {comp([](const Vec2& x) { return x.u; }), comp([](const Vec2& x) { return x.v; })};
    }
};

} // namespace detail

/// Integrates `field` from `start` over [t0, t1] (t1 < t0 integrates
/// backwards) with relative and absolute tolerance `tol`. When `output_times`
/// is empty every accepted step is recorded, otherwise the dense interpolant is
/// sampled at those times (which must lie in the span and be monotone in the
/// direction of integration).
inline OrbitTrace integrate_orbit(const PlanarField& field, PhaseState start, double t0, double t1, double tol,
                                  const EnergyFunction& energy = {}, const std::vector<double>& output_times = {},
                                  const IntegratorOptions& opts = {})
{
    using detail::Dopri5;
    using detail::Vec2;
    if (!(tol >= 1e-13 && tol <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "tol must lie in [1e-13, 1e-3]");
    if (!std::isfinite(start.u) || !std::isfinite(start.v)) throw Error(ErrorCode::NonFinite, "non-finite start");

    OrbitTrace out;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    if (energy) out.initial_energy = energy(start);
    double drift = 0.0;

    std::size_t next_out = 0;
    const bool dense = !output_times.empty();
    auto record_dense = [&](const detail::DenseStep& ds, double t_end) {
        while (next_out < output_times.size() && dir * (output_times[next_out] - t_end) <= 0.0) {
            out.states.push_back({output_times[next_out], ds.at(output_times[next_out])});
            ++next_out;
        }
    };
    if (dense) {
        while (next_out < output_times.size() && output_times[next_out] == t0) {
            out.states.push_back({t0, start});
            ++next_out;
        }
    } else {
        out.states.push_back({t0, start});
    }

    auto f = [&](double u, double v) {
        const auto r = field({u, v});
        return Vec2{r.du, r.dv};
    };
    auto scale = [&](double a, double b) { return tol + tol * std::max(std::abs(a), std::abs(b)); };
    // v is an angle: its unwrapped size must not loosen the tolerance.
    auto vscale = [&](double, double) { return tol + tol * kPi; };

    double t = t0;
    Vec2 y{start.u, start.v};
    Vec2 k1 = f(y.u, y.v);

    double h = opts.h0;
    if (h <= 0.0) {
        // Hairer's starting-step heuristic.
        const double d0 = std::hypot(y.u / scale(y.u, y.u), y.v / scale(y.v, y.v)) / std::sqrt(2.0);
        const double d1 = std::hypot(k1.u / scale(y.u, y.u), k1.v / vscale(y.v, y.v)) / std::sqrt(2.0);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span > 0 ? span : h0);
        const Vec2 y1{y.u + dir * h0 * k1.u, y.v + dir * h0 * k1.v};
        const Vec2 k2 = f(y1.u, y1.v);
        const double d2 = std::hypot((k2.u - k1.u) / scale(y.u, y.u), (k2.v - k1.v) / vscale(y.v, y.v)) / std::sqrt(2.0) / h0;
        const double m = std::max(d1, d2);
        const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
        h = std::min(100 * h0, h1);
    }
    h = std::min(h, span > 0 ? span : h);

    constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9, facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    double facold = 1e-4;
    bool last = false;
    long steps = 0;

    while (span > 0.0 && !last) {
        if (++steps > opts.max_steps) throw Error(ErrorCode::StepUnderflow, "maximum number of steps exceeded");
        if (dir * (t + dir * h - t1) >= 0.0) {
            h = std::abs(t1 - t);
            last = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw Error(ErrorCode::StepUnderflow, "step size underflow at tau=" + std::to_string(t));
        const double hs = dir * h;

        const Vec2 k2 = f(y.u + hs * Dopri5::a21 * k1.u, y.v + hs * Dopri5::a21 * k1.v);
        const Vec2 k3 = f(y.u + hs * (Dopri5::a31 * k1.u + Dopri5::a32 * k2.u),
                          y.v + hs * (Dopri5::a31 * k1.v + Dopri5::a32 * k2.v));
        const Vec2 k4 = f(y.u + hs * (Dopri5::a41 * k1.u + Dopri5::a42 * k2.u + Dopri5::a43 * k3.u),
                          y.v + hs * (Dopri5::a41 * k1.v + Dopri5::a42 * k2.v + Dopri5::a43 * k3.v));
        const Vec2 k5 = f(y.u + hs * (Dopri5::a51 * k1.u + Dopri5::a52 * k2.u + Dopri5::a53 * k3.u + Dopri5::a54 * k4.u),
                          y.v + hs * (Dopri5::a51 * k1.v + Dopri5::a52 * k2.v + Dopri5::a53 * k3.v + Dopri5::a54 * k4.v));
        const Vec2 k6 = f(y.u + hs * (Dopri5::a61 * k1.u + Dopri5::a62 * k2.u + Dopri5::a63 * k3.u + Dopri5::a64 * k4.u
                                      + Dopri5::a65 * k5.u),
                          y.v + hs * (Dopri5::a61 * k1.v + Dopri5::a62 * k2.v + Dopri5::a63 * k3.v + Dopri5::a64 * k4.v
                                      + Dopri5::a65 * k5.v));
        const Vec2 y1{y.u + hs * (Dopri5::a71 * k1.u + Dopri5::a73 * k3.u + Dopri5::a74 * k4.u + Dopri5::a75 * k5.u
                                  + Dopri5::a76 * k6.u),
                      y.v + hs * (Dopri5::a71 * k1.v + Dopri5::a73 * k3.v + Dopri5::a74 * k4.v + Dopri5::a75 * k5.v
                                  + Dopri5::a76 * k6.v)};
        const Vec2 k7 = f(y1.u, y1.v);

        const double eu = hs * (Dopri5::e1 * k1.u + Dopri5::e3 * k3.u + Dopri5::e4 * k4.u + Dopri5::e5 * k5.u
                                + Dopri5::e6 * k6.u + Dopri5::e7 * k7.u);
        const double ev = hs * (Dopri5::e1 * k1.v + Dopri5::e3 * k3.v + Dopri5::e4 * k4.v + Dopri5::e5 * k5.v
                                + Dopri5::e6 * k6.v + Dopri5::e7 * k7.v);
        double err = std::sqrt(0.5 * (std::pow(eu / scale(y.u, y1.u), 2) + std::pow(ev / vscale(y.v, y1.v), 2)));
        if (!std::isfinite(err) || !std::isfinite(y1.u) || !std::isfinite(y1.v)) {
            if (!std::isfinite(y.u) || std::abs(y.u) > opts.blowup)
                throw Error(ErrorCode::Blowup, "solution left |u| <= " + std::to_string(opts.blowup));
            err = 1e10; // reject and shrink
        }

        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            ++out.accepted_steps;

            detail::DenseStep ds{t, hs, {}};
            const Vec2 dy{y1.u - y.u, y1.v - y.v};
            ds.r[0] = y;
            ds.r[1] = dy;
            ds.r[2] = {hs * k1.u - dy.u, hs * k1.v - dy.v};
            ds.r[3] = {dy.u - hs * k7.u - ds.r[2].u, dy.v - hs * k7.v - ds.r[2].v};
            ds.r[4] = {hs * (Dopri5::d1 * k1.u + Dopri5::d3 * k3.u + Dopri5::d4 * k4.u + Dopri5::d5 * k5.u
                             + Dopri5::d6 * k6.u + Dopri5::d7 * k7.u),
                       hs * (Dopri5::d1 * k1.v + Dopri5::d3 * k3.v + Dopri5::d4 * k4.v + Dopri5::d5 * k5.v
                             + Dopri5::d6 * k6.v + Dopri5::d7 * k7.v)};

            const double t_new = last ? t1 : t + hs;
            if (dense) record_dense(ds, t_new);
            else out.states.push_back({t_new, {y1.u, y1.v}});

            t = t_new;
            y = y1;
            k1 = k7;
            if (energy && opts.project_energy) {
                bool moved = false;
                for (int it = 0; it < 3; ++it) {
                    const double g2 = k1.u * k1.u + k1.v * k1.v;
                    const double dh = energy({y.u, y.v}) - out.initial_energy;
                    // Near an equilibrium the gradient is too weak to steer by.
                    if (dh == 0.0 || std::abs(dh) > tol * std::sqrt(g2)) break;
                    y.u -= dh * k1.v / g2;
                    y.v += dh * k1.u / g2;
                    k1 = f(y.u, y.v);
                    moved = true;
                }
                if (moved && !dense) out.states.back().state = {y.u, y.v};
            }
            if (std::abs(y.u) > opts.blowup)
                throw Error(ErrorCode::Blowup, "|u| exceeded " + std::to_string(opts.blowup) + " at tau=" + std::to_string(t));
            if (energy) drift = std::max(drift, std::abs(energy({y.u, y.v}) - out.initial_energy));
            if (opts.stop && opts.stop(t, {y.u, y.v})) {
                out.stopped_early = !last;
                break;
            }
            h = std::abs(hs) / fac;
            if (std::abs(t1 - t) > 0.0) h = std::min(h, std::abs(t1 - t));
        } else {
            ++out.rejected_steps;
            h = std::abs(hs) / std::min(facc1, fac11 / safe);
            last = false;
        }
    }
    if (energy) out.energy_drift = drift;
    return out;
}

/// Zone-system field and Hamiltonian as callables.
inline PlanarField zone_field(const ZoneParameters& z)
{
    return [z](PhaseState s) { return vector_field(z, s); };
}

inline EnergyFunction zone_energy(const ZoneParameters& z)
{
    return [z](PhaseState s) { return hamiltonian(z, s); };
}

inline OrbitTrace integrate_zone_orbit(const ZoneParameters& z, PhaseState start, double tau_end, double tol,
                                       const std::vector<double>& output_times = {})
{
    z.validate();
    return integrate_orbit(zone_field(z), start, 0.0, tau_end, tol, zone_energy(z), output_times);
}

// ---------------------------------------------------------------------------
// Separatrices

struct SeparatrixBranch {
    bool unstable = true; ///< unstable branches run forward, stable ones backward
    int side = 1;         ///< +-1 along the eigenvector
    OrbitTrace trace;
    double arc_length = 0.0;
    std::optional<EquilibriumLabel> returned_to; ///< saddle reached within 1e-5
    double max_energy_error = 0.0;
    std::optional<std::string> error;
};

struct SeparatrixOptions {
    double offset = 1e-7;
    double arc_budget = 40.0;
    double capture_radius = 1e-5;
    double tol = 1e-11;
    double tau_max = 1e4;
};

/// Unit eigenvectors (unstable, stable) of the Jacobian at a saddle.
inline std::array<std::array<double, 2>, 2> saddle_eigenvectors(const ZoneParameters& z, PhaseState s)
{
    const Matrix2 j = field_jacobian(z, s);
    const double disc = -j.det();
    if (!(disc > 0.0)) throw Error(ErrorCode::Precondition, "not a saddle: delta >= 0");
    const double lam = std::sqrt(disc);
    std::array<std::array<double, 2>, 2> out{};
    for (int k = 0; k < 2; ++k) {
        const double l = k == 0 ? lam : -lam;
        // (J - l I) e = 0: pick the better-conditioned row.
        double e1 = j.uv, e2 = l - j.uu;
        const double f1 = l - j.vv, f2 = j.vu;
        if (std::hypot(f1, f2) > std::hypot(e1, e2)) {
            e1 = f1;
            e2 = f2;
        }
        const double n = std::hypot(e1, e2);
        out[k] = {e1 / n, e2 / n};
    }
    return out;
}

namespace detail {

inline double periodic_distance(PhaseState a, PhaseState b)
{
    return std::hypot(a.u - b.u, std::remainder(a.v - b.v, kTwoPi));
}

} // namespace detail

/// Four branches launched at `offset` along the eigenvectors of a saddle,
/// followed until the arc budget is spent or they come within capture_radius
/// of a saddle (including the starting one, after leaving its neighbourhood).
inline std::array<SeparatrixBranch, 4> trace_separatrices(const ZoneParameters& z, const Equilibrium& saddle,
                                                          const SeparatrixOptions& opts = {})
{
    if (saddle.kind != EquilibriumKind::Saddle) throw Error(ErrorCode::Precondition, "separatrices need a saddle");
    const auto ev = saddle_eigenvectors(z, saddle.state);
    std::vector<Equilibrium> saddles;
    if (z.b3 == 0.0) {
        for (const auto& e : closed_form_equilibria(z))
            if (e.kind == EquilibriumKind::Saddle) saddles.push_back(e);
    } else {
        saddles.push_back(saddle);
    }
    const double h_saddle = hamiltonian(z, saddle.state);

    std::array<SeparatrixBranch, 4> out;
    int idx = 0;
    for (int k = 0; k < 2; ++k) {
        for (int side : {1, -1}) {
            SeparatrixBranch& br = out[idx++];
            br.unstable = k == 0;
            br.side = side;
            const PhaseState start{saddle.state.u + side * opts.offset * ev[k][0],
                                   saddle.state.v + side * opts.offset * ev[k][1]};
            double arc = 0.0;
            PhaseState prev = start;
            bool left = false;
            IntegratorOptions io;
            io.stop = [&](double, PhaseState s) {
                arc += std::hypot(s.u - prev.u, s.v - prev.v);
                prev = s;
                if (!left && detail::periodic_distance(s, saddle.state) > 100 * opts.capture_radius) left = true;
                if (arc >= opts.arc_budget) return true;
                if (!left) return false;
                for (const auto& q : saddles)
                    if (detail::periodic_distance(s, q.state) < opts.capture_radius) {
                        br.returned_to = q.label;
                        return true;
                    }
                return false;
            };
            try {
                br.trace = integrate_orbit(zone_field(z), start, 0.0, br.unstable ? opts.tau_max : -opts.tau_max, opts.tol,
                                           zone_energy(z), {}, io);
            } catch (const Error& e) {
                br.error = e.what();
            }
            br.arc_length = arc;
            for (const auto& s : br.trace.states)
                br.max_energy_error = std::max(br.max_energy_error, std::abs(hamiltonian(z, s.state) - h_saddle));
        }
    }
    return out;
}

} // namespace degres
