#pragma once

// Equilibria of the rescaled zone system: closed forms, Newton refinement and
// the local bifurcation curves in the (mu1, mu2) plane.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "degres/error.hpp"
#include "degres/numerics.hpp"
#include "degres/zone_model.hpp"

namespace degres {

enum class EquilibriumKind { Saddle, Center, Degenerate };

enum class EquilibriumLabel { O1Plus, O1Minus, O2Plus, O2Minus, O3, O4, Refined };

constexpr std::string_view to_string(EquilibriumKind k)
{
    switch (k) {
    case EquilibriumKind::Saddle: return "saddle";
    case EquilibriumKind::Center: return "center";
    case EquilibriumKind::Degenerate: return "degenerate";
    }
    return "unknown";
}

constexpr std::string_view to_string(EquilibriumLabel l)
{
    switch (l) {
    case EquilibriumLabel::O1Plus: return "O1+";
    case EquilibriumLabel::O1Minus: return "O1-";
    case EquilibriumLabel::O2Plus: return "O2+";
    case EquilibriumLabel::O2Minus: return "O2-";
    case EquilibriumLabel::O3: return "O3";
    case EquilibriumLabel::O4: return "O4";
    case EquilibriumLabel::Refined: return "refined";
    }
    return "unknown";
}

inline EquilibriumLabel label_from_string(std::string_view s)
{
    for (auto l : {EquilibriumLabel::O1Plus, EquilibriumLabel::O1Minus, EquilibriumLabel::O2Plus,
                   EquilibriumLabel::O2Minus, EquilibriumLabel::O3, EquilibriumLabel::O4, EquilibriumLabel::Refined})
        if (to_string(l) == s) return l;
    throw Error(ErrorCode::InvalidArgument, "unknown equilibrium label '" + std::string(s) + "'");
}

/// Equilibria off the lines v = 0 and v = pi.
inline bool is_off_axis(EquilibriumLabel l) { return l == EquilibriumLabel::O3 || l == EquilibriumLabel::O4; }

struct Equilibrium {
    PhaseState state;
    double delta = 0.0; ///< determinant of the Jacobian
    EquilibriumKind kind = EquilibriumKind::Degenerate;
    double energy = 0.0;
    EquilibriumLabel label = EquilibriumLabel::Refined;
    int newton_steps = 0;
};

inline constexpr double kDeltaTol = 1e-9;

inline EquilibriumKind classify_delta(double delta, double tol = kDeltaTol)
{
    if (delta < -tol) return EquilibriumKind::Saddle;
    if (delta > tol) return EquilibriumKind::Center;
    return EquilibriumKind::Degenerate;
}

inline Equilibrium make_equilibrium(const ZoneParameters& z, PhaseState s, EquilibriumLabel label)
{
    Equilibrium e;
    e.state = s.wrapped();
    e.delta = equilibrium_delta(z, e.state);
    e.kind = classify_delta(e.delta);
    e.energy = hamiltonian(z, e.state);
    e.label = label;
    return e;
}

namespace detail {

// Roots of b u^2 + mu2 u + c = 0 as (plus, minus) following the sign of the
// square root in (-mu2 +- sqrt(D)) / (2b); cancellation-free.
inline int quadratic_roots(double b, double mu2, double c, double& plus, double& minus)
{
    const double disc = mu2 * mu2 - 4.0 * b * c;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    if (disc == 0.0) {
        plus = minus = -mu2 / (2.0 * b);
        return 1;
    }
    const double q = -0.5 * (mu2 + std::copysign(sq, mu2));
    const double r1 = q / b;
    const double r2 = c / q;
    const double hi = std::max(r1, r2);
    const double lo = std::min(r1, r2);
    // (-mu2 + sqrt(D))/(2b) is the larger root when b > 0.
    plus = b > 0.0 ? hi : lo;
    minus = b > 0.0 ? lo : hi;
    return 2;
}

} // namespace detail

/// All equilibria in closed form. On the lines v = 0 and v = pi they solve
/// b u^2 + mu2 u +- mu1/p = 0; off-axis points sit at u = -a/mu1 with
/// cos v = -p (b u^2 + mu2 u) / mu1. Requires b3 = 0.
inline std::vector<Equilibrium> closed_form_equilibria(const ZoneParameters& z)
{
    z.validate();
    if (z.b3 != 0.0) throw Error(ErrorCode::Precondition, "closed forms assume b3 = 0; use refine_equilibrium");
    std::vector<Equilibrium> out;
    out.reserve(6);

    double plus = 0.0, minus = 0.0;
    // v = 0: p(b u^2 + mu2 u) + mu1 = 0
    int n = detail::quadratic_roots(z.b, z.mu2, z.mu1 / z.p, plus, minus);
    if (n >= 1) out.push_back(make_equilibrium(z, {plus, 0.0}, EquilibriumLabel::O1Plus));
    if (n == 2) out.push_back(make_equilibrium(z, {minus, 0.0}, EquilibriumLabel::O1Minus));
    // v = pi: p(b u^2 + mu2 u) - mu1 = 0
    n = detail::quadratic_roots(z.b, z.mu2, -z.mu1 / z.p, plus, minus);
    if (n >= 1) out.push_back(make_equilibrium(z, {plus, kPi}, EquilibriumLabel::O2Plus));
    if (n == 2) out.push_back(make_equilibrium(z, {minus, kPi}, EquilibriumLabel::O2Minus));

    if (z.mu1 != 0.0) {
        const double u = -z.a / z.mu1;
        const double c = -z.p * (z.b * u * u + z.mu2 * u) / z.mu1;
        if (std::abs(c) <= 1.0) {
            const double v = std::acos(c);
            out.push_back(make_equilibrium(z, {u, v}, EquilibriumLabel::O3));
            out.push_back(make_equilibrium(z, {u, v == 0.0 ? 0.0 : kTwoPi - v}, EquilibriumLabel::O4));
        }
    }
    return out;
}

struct RefineOptions {
    bool allow_degenerate = false;
    int max_steps = 50;
    double residual_tol = 1e-12;
};

/// Damped Newton iteration on the vector field. The result is labelled with
/// the matching closed-form equilibrium when one exists within 1e-8.
inline Equilibrium refine_equilibrium(const ZoneParameters& z, PhaseState guess, const RefineOptions& opts = {})
{
    z.validate();
    PhaseState x = guess;
    double res = vector_field(z, x).norm();
    int steps = 0;
    while (!(res < opts.residual_tol)) {
        if (steps >= opts.max_steps)
            throw Error(ErrorCode::NoConvergence, "Newton did not converge in " + std::to_string(opts.max_steps)
                                                      + " steps (residual " + std::to_string(res) + ")");
        const FieldValue f = vector_field(z, x);
        const Matrix2 j = field_jacobian(z, x);
        const double det = j.det();
        if (det == 0.0) throw Error(ErrorCode::SingularJacobian, "Jacobian is singular along the Newton path");
        const double du = -(j.vv * f.du - j.uv * f.dv) / det;
        const double dv = -(-j.vu * f.du + j.uu * f.dv) / det;
        if (!(std::hypot(du, dv) <= 1e8)) throw Error(ErrorCode::SingularJacobian, "Newton step exceeds 1e8");

        double lambda = 1.0;
        PhaseState trial{x.u + du, x.v + dv};
        double trial_res = vector_field(z, trial).norm();
        for (int k = 0; k < 30 && !(trial_res < res); ++k) {
            lambda *= 0.5;
            trial = {x.u + lambda * du, x.v + lambda * dv};
            trial_res = vector_field(z, trial).norm();
        }
        x = trial;
        res = trial_res;
        ++steps;
    }

    EquilibriumLabel label = EquilibriumLabel::Refined;
    if (z.b3 == 0.0) {
        const PhaseState w = x.wrapped();
        for (const auto& e : closed_form_equilibria(z)) {
            const double dv = std::abs(std::remainder(e.state.v - w.v, kTwoPi));
            if (std::abs(e.state.u - w.u) < 1e-8 && dv < 1e-8) {
                label = e.label;
                break;
            }
        }
    }
    Equilibrium out = make_equilibrium(z, x, label);
    out.newton_steps = steps;
    if (out.kind == EquilibriumKind::Degenerate && !opts.allow_degenerate)
        throw Error(ErrorCode::SingularJacobian, "converged to a degenerate equilibrium");
    return out;
}

enum class CurveTag { M3, M4, M5Plus, M5Minus, M6 };

constexpr std::string_view to_string(CurveTag t)
{
    switch (t) {
    case CurveTag::M3: return "m3";
    case CurveTag::M4: return "m4";
    case CurveTag::M5Plus: return "m5+";
    case CurveTag::M5Minus: return "m5-";
    case CurveTag::M6: return "m6";
    }
    return "unknown";
}

/// Defining functions of the local bifurcation curves; each vanishes exactly
/// on its curve and changes sign across it.
///   m3:  p mu2^2 - 4 b mu1          (double point on v = 0)
///   m4:  p mu2^2 + 4 b mu1          (double point on v = pi)
///   m5+: p a (mu1 mu2 - a b) - mu1^3 (off-axis pair merges at v = 0)
///   m5-: p a (mu1 mu2 - a b) + mu1^3 (off-axis pair merges at v = pi)
inline double curve_function(const ZoneParameters& z, CurveTag tag, double mu1, double mu2)
{
    switch (tag) {
    case CurveTag::M3: return z.p * mu2 * mu2 - 4.0 * z.b * mu1;
    case CurveTag::M4: return z.p * mu2 * mu2 + 4.0 * z.b * mu1;
    case CurveTag::M5Plus: return z.p * z.a * (mu1 * mu2 - z.a * z.b) - mu1 * mu1 * mu1;
    case CurveTag::M5Minus: return z.p * z.a * (mu1 * mu2 - z.a * z.b) + mu1 * mu1 * mu1;
    case CurveTag::M6: break;
    }
    throw Error(ErrorCode::InvalidArgument, "m6 has no closed-form defining function");
}

inline constexpr std::array<CurveTag, 4> kLocalCurves{CurveTag::M3, CurveTag::M4, CurveTag::M5Plus, CurveTag::M5Minus};

/// mu1 on m3 / m4 as a function of mu2.
inline double m3_mu1(const ZoneParameters& z, double mu2) { return z.p * mu2 * mu2 / (4.0 * z.b); }
inline double m4_mu1(const ZoneParameters& z, double mu2) { return -z.p * mu2 * mu2 / (4.0 * z.b); }

/// mu2 on m5+ / m5- as a function of mu1 != 0: mu2 = a b / mu1 +- mu1^2 / (p a).
inline double m5_mu2(const ZoneParameters& z, double mu1, bool plus)
{
    const double tail = mu1 * mu1 / (z.p * z.a);
    return z.a * z.b / mu1 + (plus ? tail : -tail);
}

struct CurveSample {
    double mu1 = 0.0;
    CurveTag tag = CurveTag::M3;
    double mu2 = 0.0;
};

/// mu2 values of the four local curve branches at each mu1 of the grid.
/// m3 and m4 contribute two values (+-) where they exist; m5 branches need mu1 != 0.
inline std::vector<CurveSample> local_bifurcation_curves(const ZoneParameters& z, const std::vector<double>& mu1_grid)
{
    z.validate();
    std::vector<CurveSample> out;
    for (double mu1 : mu1_grid) {
        const double r3 = 4.0 * z.b * mu1 / z.p;
        if (r3 >= 0.0) {
            const double m = std::sqrt(r3);
            out.push_back({mu1, CurveTag::M3, m});
            if (m != 0.0) out.push_back({mu1, CurveTag::M3, -m});
        }
        if (-r3 >= 0.0) {
            const double m = std::sqrt(-r3);
            out.push_back({mu1, CurveTag::M4, m});
            if (m != 0.0) out.push_back({mu1, CurveTag::M4, -m});
        }
        if (mu1 != 0.0 && z.a != 0.0) {
            out.push_back({mu1, CurveTag::M5Plus, m5_mu2(z, mu1, true)});
            out.push_back({mu1, CurveTag::M5Minus, m5_mu2(z, mu1, false)});
        }
    }
    return out;
}

enum class LocalEventKind { Vertical, HorizontalTripleSaddle };

constexpr std::string_view to_string(LocalEventKind k)
{
    return k == LocalEventKind::Vertical ? "VERTICAL" : "HORIZONTAL_TRIPLE_SADDLE";
}

struct ParameterPoint {
    double mu1 = 0.0;
    double mu2 = 0.0;
};

struct LocalBifurcationEvent {
    LocalEventKind kind = LocalEventKind::Vertical;
    CurveTag curve = CurveTag::M3;
    double t = 0.0; ///< path parameter in [0, 1]
    ParameterPoint at;
    bool verified = false;
};

/// Crossings of the local curves along the straight segment from -> to.
inline std::vector<LocalBifurcationEvent> detect_local_bifurcation(const ZoneParameters& z, ParameterPoint from,
                                                                   ParameterPoint to, int n_samples = 2000)
{
    z.validate();
    auto point = [&](double t) { return ParameterPoint{from.mu1 + t * (to.mu1 - from.mu1), from.mu2 + t * (to.mu2 - from.mu2)}; };
    std::vector<LocalBifurcationEvent> events;

    for (CurveTag tag : kLocalCurves) {
        auto f = [&](double t) {
            const auto pt = point(t);
            return curve_function(z, tag, pt.mu1, pt.mu2);
        };
        std::vector<double> fs(n_samples + 1);
        double scale = 0.0;
        for (int i = 0; i <= n_samples; ++i) {
            fs[i] = f(static_cast<double>(i) / n_samples);
            scale = std::max(scale, std::abs(fs[i]));
        }
        const double on_curve = 1e-12 * std::max(scale, 1.0);
        if (std::abs(fs.front()) <= on_curve || std::abs(fs.back()) <= on_curve)
            throw Error(ErrorCode::Precondition, "path endpoint lies on curve " + std::string(to_string(tag)));

        auto record = [&](double t, double t0, double t1) {
            LocalBifurcationEvent ev;
            ev.curve = tag;
            ev.kind = (tag == CurveTag::M3 || tag == CurveTag::M4) ? LocalEventKind::Vertical
                                                                    : LocalEventKind::HorizontalTripleSaddle;
            ev.t = t;
            ev.at = point(t);
            const ZoneParameters zc = z.with_mu(ev.at.mu1, ev.at.mu2);
            if (ev.kind == LocalEventKind::Vertical) {
                // Double root: both closed-form roots coincide and delta vanishes there.
                const double v = tag == CurveTag::M3 ? 0.0 : kPi;
                const PhaseState dbl{-ev.at.mu2 / (2.0 * z.b), v};
                ev.verified = std::abs(equilibrium_delta(zc, dbl)) < 1e-6 && vector_field(zc, dbl).norm() < 1e-6;
            } else {
                const double dt = std::max(1e-9, 1e-6 * (t1 - t0));
                auto off_axis = [&](double s) {
                    const auto pt = point(s);
                    for (const auto& e : closed_form_equilibria(z.with_mu(pt.mu1, pt.mu2)))
                        if (is_off_axis(e.label)) return true;
                    return false;
                };
                ev.verified = off_axis(t - dt) != off_axis(t + dt);
            }
            events.push_back(ev);
        };
        auto sign = [](double x) { return (x > 0.0) - (x < 0.0); };
        auto tangential = [&] {
            return Error(ErrorCode::TangentialCrossing,
                         "path touches curve " + std::string(to_string(tag)) + " without crossing");
        };

        for (int i = 0; i < n_samples; ++i) {
            const double t0 = static_cast<double>(i) / n_samples;
            const double t1 = static_cast<double>(i + 1) / n_samples;
            if (sign(fs[i]) * sign(fs[i + 1]) < 0) {
                record(num::bisect(f, t0, t1), t0, t1);
                continue;
            }
            if (i == 0) continue;
            if (fs[i] == 0.0) {
                if (sign(fs[i - 1]) == sign(fs[i + 1])) throw tangential();
                record(t0, t0 - 1.0 / n_samples, t1);
                continue;
            }
            // Local minimum of |f| without a sign change: check for a touch.
            const double a = std::abs(fs[i - 1]), b = std::abs(fs[i]), c = std::abs(fs[i + 1]);
            if (b <= a && b <= c && sign(fs[i - 1]) == sign(fs[i]) && sign(fs[i]) == sign(fs[i + 1])) {
                double lo = (i - 1.0) / n_samples, hi = t1;
                for (int k = 0; k < 100; ++k) {
                    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    if (std::abs(f(m1)) < std::abs(f(m2))) hi = m2;
                    else lo = m1;
                }
                if (std::abs(f(0.5 * (lo + hi))) < 1e-9 * std::max(scale, 1.0)) throw tangential();
            }
        }
    }
    std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) { return x.t < y.t; });
    return events;
}

} // namespace degres
