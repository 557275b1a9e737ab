#pragma once

// Area-preserving maps of the cylinder: the standard map with non-monotone
// rotation and the conservative Euler discretisation of the zone system,
// with inverses, Jacobians, orbits, rotation numbers and invariant manifolds.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "degres/error.hpp"
#include "degres/zone_model.hpp"

namespace degres {

/// u' = u + a sin v,  v' = v + u' - beta u'^2.
struct StandardMap {
    double a = 0.0;
    double beta = 0.25;
};

/// u' = (u + alpha a sin v) / (1 - alpha mu1 sin v),
/// v' = v + alpha (p b u'^2 + mu2 p u' + mu1 cos v).
struct EulerMap {
    double alpha = 0.01;
    ZoneParameters zone;
};

using MapSpec = std::variant<StandardMap, EulerMap>;

inline constexpr double kSingularDenominator = 1e-12;

inline void validate(const MapSpec& spec)
{
    if (const auto* s = std::get_if<StandardMap>(&spec)) {
        if (!std::isfinite(s->a) || !std::isfinite(s->beta))
            throw Error(ErrorCode::NonFinite, "standard map parameters must be finite");
    } else {
        const auto& e = std::get<EulerMap>(spec);
        if (!(e.alpha > 0.0) || !std::isfinite(e.alpha)) throw Error(ErrorCode::InvalidArgument, "alpha > 0 required");
        e.zone.validate();
    }
}

namespace detail {

inline double euler_denominator(const EulerMap& m, double v)
{
    const double d = 1.0 - m.alpha * m.zone.mu1 * std::sin(v);
    if (!(std::abs(d) > kSingularDenominator))
        throw Error(ErrorCode::SingularDenominator, "|1 - alpha mu1 sin v| <= 1e-12 at v=" + std::to_string(v));
    return d;
}

// alpha p (b u^2 + mu2 u), the u-dependent part of the phase increment.
inline double euler_kick(const EulerMap& m, double u)
{
    const auto& z = m.zone;
    return m.alpha * z.p * (z.b * u * u + z.mu2 * u);
}

inline double euler_kick_du(const EulerMap& m, double u)
{
    const auto& z = m.zone;
    return m.alpha * z.p * (2.0 * z.b * u + z.mu2);
}

} // namespace detail

/// One forward step keeping v unwrapped.
inline PhaseState map_step_unwrapped(const MapSpec& spec, PhaseState s)
{
    if (const auto* m = std::get_if<StandardMap>(&spec)) {
        const double u1 = s.u + m->a * std::sin(s.v);
        return {u1, s.v + u1 - m->beta * u1 * u1};
    }
    const auto& m = std::get<EulerMap>(spec);
    const double d = detail::euler_denominator(m, s.v);
    const double u1 = (s.u + m.alpha * m.zone.a * std::sin(s.v)) / d;
    return {u1, s.v + detail::euler_kick(m, u1) + m.alpha * m.zone.mu1 * std::cos(s.v)};
}

/// One forward step with v reported in [0, 2pi).
inline PhaseState map_step(const MapSpec& spec, PhaseState s) { return map_step_unwrapped(spec, s).wrapped(); }

/// Exact inverse of map_step_unwrapped. The Euler variant solves
/// v + alpha mu1 cos v = v' - kick(u') by Newton (monotone for |alpha mu1| < 1),
/// then recovers u.
inline PhaseState inverse_step(const MapSpec& spec, PhaseState s)
{
    if (const auto* m = std::get_if<StandardMap>(&spec)) {
        const double v0 = s.v - s.u + m->beta * s.u * s.u;
        return {s.u - m->a * std::sin(v0), v0};
    }
    const auto& m = std::get<EulerMap>(spec);
    const double c = s.v - detail::euler_kick(m, s.u);
    const double k = m.alpha * m.zone.mu1;
    double v = c - k * std::cos(c);
    for (int it = 0; it < 60; ++it) {
        const double f = v + k * std::cos(v) - c;
        const double df = 1.0 - k * std::sin(v);
        if (std::abs(df) <= kSingularDenominator)
            throw Error(ErrorCode::SingularDenominator, "inverse step hit a singular denominator");
        const double dv = f / df;
        v -= dv;
        if (std::abs(dv) <= 1e-16 * (1.0 + std::abs(v))) break;
    }
    const double d = detail::euler_denominator(m, v);
    return {s.u * d - m.alpha * m.zone.a * std::sin(v), v};
}

/// Analytic Jacobian d(u', v')/d(u, v).
inline Matrix2 map_jacobian(const MapSpec& spec, PhaseState s)
{
    Matrix2 j;
    if (const auto* m = std::get_if<StandardMap>(&spec)) {
        const double u1 = s.u + m->a * std::sin(s.v);
        const double g = 1.0 - 2.0 * m->beta * u1;
        const double ac = m->a * std::cos(s.v);
        j.uu = 1.0;
        j.uv = ac;
        j.vu = g;
        j.vv = 1.0 + g * ac;
        return j;
    }
    const auto& m = std::get<EulerMap>(spec);
    const double d = detail::euler_denominator(m, s.v);
    const double sv = std::sin(s.v), cv = std::cos(s.v);
    const double num = s.u + m.alpha * m.zone.a * sv;
    const double u1 = num / d;
    // du'/dv = (alpha a cos v d + num alpha mu1 cos v) / d^2
    j.uu = 1.0 / d;
    j.uv = m.alpha * cv * (m.zone.a + m.zone.mu1 * u1) / d;
    const double kp = detail::euler_kick_du(m, u1);
    j.vu = kp * j.uu;
    j.vv = 1.0 + kp * j.uv - m.alpha * m.zone.mu1 * sv;
    return j;
}

inline double map_jacobian_det(const MapSpec& spec, PhaseState s) { return map_jacobian(spec, s).det(); }

/// Implicit form of the Euler map, u' = u + alpha (a + mu1 u') sin v, solved by
/// fixed-point iteration. Only used to cross-check the explicit form.
inline PhaseState implicit_euler_step(const EulerMap& m, PhaseState s, double tol = 1e-12, int max_iter = 200)
{
    const auto& z = m.zone;
    double u1 = s.u;
    for (int it = 0; it < max_iter; ++it) {
        const double next = s.u + m.alpha * (z.a + z.mu1 * u1) * std::sin(s.v);
        const bool done = std::abs(next - u1) <= tol * (1.0 + std::abs(next));
        u1 = next;
        if (done) return {u1, s.v + m.alpha * (z.p * z.b * u1 * u1 + z.mu2 * z.p * u1 + z.mu1 * std::cos(s.v))};
    }
    throw Error(ErrorCode::NoConvergence, "implicit step did not converge");
}

// ---------------------------------------------------------------------------
// Orbits

struct MapOrbit {
    std::vector<PhaseState> states; ///< v in [0, 2pi); states[0] is the start
    std::vector<double> v_unwrapped;
};

/// n iterates of the map. A singular denominator is reported with the index
/// of the iterate that could not be computed.
inline MapOrbit iterate_orbit(const MapSpec& spec, PhaseState start, long n)
{
    validate(spec);
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n >= 1 required");
    MapOrbit out;
    out.states.reserve(static_cast<std::size_t>(n) + 1);
    out.v_unwrapped.reserve(static_cast<std::size_t>(n) + 1);
    PhaseState s = start;
    out.states.push_back(s.wrapped());
    out.v_unwrapped.push_back(s.v);
    for (long k = 1; k <= n; ++k) {
        try {
            s = map_step_unwrapped(spec, s);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.detail()) + " (iterate " + std::to_string(k) + ")");
        }
        if (!std::isfinite(s.u) || !std::isfinite(s.v))
            throw Error(ErrorCode::NonFinite, "non-finite state at iterate " + std::to_string(k));
        out.states.push_back(s.wrapped());
        out.v_unwrapped.push_back(s.v);
    }
    return out;
}

/// Explicit second iterate of the map.
inline PhaseState second_iterate(const MapSpec& spec, PhaseState s)
{
    return map_step_unwrapped(spec, map_step_unwrapped(spec, s));
}

struct RotationNumber {
    double value = 0.0;         ///< (v_n - v_0) / (2 pi n), not reduced mod 1
    double tail_estimate = 0.0; ///< |rho_n - rho_{n/2}|
    long n = 0;
};

inline RotationNumber rotation_number(const MapSpec& spec, PhaseState start, long n)
{
    if (n < 1000) throw Error(ErrorCode::InvalidArgument, "rotation number needs n >= 1000");
    const auto orbit = iterate_orbit(spec, start, n);
    const long h = n / 2;
    const double v0 = orbit.v_unwrapped.front();
    RotationNumber r;
    r.n = n;
    r.value = (orbit.v_unwrapped[static_cast<std::size_t>(n)] - v0) / (kTwoPi * n);
    const double half = (orbit.v_unwrapped[static_cast<std::size_t>(h)] - v0) / (kTwoPi * h);
    r.tail_estimate = std::abs(r.value - half);
    return r;
}

// ---------------------------------------------------------------------------
// Approximating Hamiltonians of the standard map and its square

enum class Iterate { T, T2 };

inline std::string_view to_string(Iterate w) { return w == Iterate::T ? "T" : "T2"; }

/// T:  u^2/2 - beta u^3/3 + a cos v
/// T2: u^2/2 - beta u^3/3 + (a^2/16)(1 - 2 beta u) cos 2v
inline double approximating_hamiltonian(Iterate which, double a, double beta, PhaseState s)
{
    const double base = s.u * s.u / 2.0 - beta * s.u * s.u * s.u / 3.0;
    if (which == Iterate::T) return base + a * std::cos(s.v);
    return base + (a * a / 16.0) * (1.0 - 2.0 * beta * s.u) * std::cos(2.0 * s.v);
}

/// The same Hamiltonians written as zone systems. For T2 the phase is w = 2v,
/// which doubles the Hamiltonian: p = 2, a' = a^2/8, mu1 = -a^2 beta/4.
inline ZoneParameters approximating_zone(Iterate which, double a, double beta)
{
    if (beta == 0.0) throw Error(ErrorCode::InvalidArgument, "beta must be nonzero");
    ZoneParameters z;
    z.b = -beta;
    z.mu2 = 1.0;
    if (which == Iterate::T) {
        z.a = a;
        z.p = 1;
        z.mu1 = 0.0;
    } else {
        z.a = a * a / 8.0;
        z.p = 2;
        z.mu1 = -a * a * beta / 4.0;
    }
    return z;
}

// ---------------------------------------------------------------------------
// Fixed points and invariant manifolds

struct MapFixedPoint {
    PhaseState state;
    double trace = 0.0;
    bool saddle = false; ///< |trace| > 2: real multipliers
};

inline MapFixedPoint classify_fixed_point(const MapSpec& spec, PhaseState s)
{
    const double tr = map_jacobian(spec, s).trace();
    return {s, tr, std::abs(tr) > 2.0};
}

/// The m = 0 fixed points of the standard map: (0,0), (0,pi), (1/beta,0), (1/beta,pi).
inline std::vector<MapFixedPoint> standard_fixed_points(const StandardMap& m)
{
    std::vector<MapFixedPoint> out;
    std::vector<double> us{0.0};
    if (m.beta != 0.0) us.push_back(1.0 / m.beta);
    for (double u : us)
        for (double v : {0.0, kPi}) out.push_back(classify_fixed_point(m, {u, v}));
    return out;
}

struct Multipliers {
    double unstable = 0.0; ///< |lambda| > 1
    double stable = 0.0;
    double eu[2] = {0.0, 0.0};
    double es[2] = {0.0, 0.0};
};

inline Multipliers saddle_multipliers(const MapSpec& spec, PhaseState s)
{
    const Matrix2 j = map_jacobian(spec, s);
    const double tr = j.trace(), det = j.det();
    const double disc = tr * tr - 4.0 * det;
    if (!(disc > 0.0) || std::abs(tr) <= 2.0)
        throw Error(ErrorCode::NonrealMultipliers, "fixed point is not a saddle (trace " + std::to_string(tr) + ")");
    const double sq = std::sqrt(disc);
    // Cancellation-free pair of roots.
    const double l1 = 0.5 * (tr + std::copysign(sq, tr));
    const double l2 = det / l1;
    Multipliers m;
    m.unstable = std::abs(l1) > std::abs(l2) ? l1 : l2;
    m.stable = std::abs(l1) > std::abs(l2) ? l2 : l1;
    auto eigvec = [&](double l, double* e) {
        double e1 = j.uv, e2 = l - j.uu;
        const double f1 = l - j.vv, f2 = j.vu;
        if (std::hypot(f1, f2) > std::hypot(e1, e2)) {
            e1 = f1;
            e2 = f2;
        }
        const double n = std::hypot(e1, e2);
        // Orient with u >= 0 (v >= 0 when u vanishes) so "side +1" is well defined.
        const double sgn = (e1 < 0.0 || (e1 == 0.0 && e2 < 0.0)) ? -1.0 : 1.0;
        e[0] = sgn * e1 / n;
        e[1] = sgn * e2 / n;
    };
    eigvec(m.unstable, m.eu);
    eigvec(m.stable, m.es);
    return m;
}

struct ManifoldPoint {
    PhaseState state; ///< v unwrapped
    double seed = 0.0; ///< parameter on the fundamental segment, in [0, 1]
    int iterate = 0;
};

struct ManifoldBranch {
    bool unstable = true;
    int side = 1;
    std::vector<ManifoldPoint> points;
    bool truncated = false; ///< point budget exhausted
};

struct ManifoldOptions {
    double offset = 1e-7;
    int segment_points = 1000;
    double max_gap = 1e-2;
    std::size_t max_points = 200'000; ///< per branch
};

struct ManifoldSet {
    PhaseState fixed_point;
    Multipliers multipliers;
    std::vector<ManifoldBranch> branches; ///< unstable +, unstable -, stable +, stable -
    std::optional<double> splitting;       ///< see splitting_indicator
};

namespace detail {

struct ManifoldSeed {
    const MapSpec* spec;
    PhaseState x0;
    double dir[2];
    double lambda; ///< expansion factor along the branch
    double offset;
    bool forward;

    PhaseState seed(double s) const
    {
        const double r = offset * std::pow(lambda, s);
        return {x0.u + r * dir[0], x0.v + r * dir[1]};
    }

    PhaseState step(PhaseState p) const { return forward ? map_step_unwrapped(*spec, p) : inverse_step(*spec, p); }

    PhaseState image(double s, int k) const
    {
        PhaseState p = seed(s);
        for (int i = 0; i < k; ++i) p = step(p);
        return p;
    }
};

inline double gap(PhaseState a, PhaseState b) { return std::hypot(a.u - b.u, a.v - b.v); }

inline ManifoldBranch grow_branch(const ManifoldSeed& sd, int iterations, const ManifoldOptions& o, bool unstable,
                                  int side)
{
    ManifoldBranch br;
    br.unstable = unstable;
    br.side = side;
    std::vector<ManifoldPoint> seg;
    for (int i = 0; i < o.segment_points; ++i) {
        const double s = static_cast<double>(i) / (o.segment_points - 1);
        seg.push_back({sd.seed(s), s, 0});
    }
    auto refine = [&](std::vector<ManifoldPoint>& pts, int k) {
        std::vector<ManifoldPoint> out;
        out.reserve(pts.size());
        out.push_back(pts.front());
        std::size_t budget = o.max_points > br.points.size() ? o.max_points - br.points.size() : 0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            // Bisect in the seed parameter until the image gap closes.
            std::vector<ManifoldPoint> stack{pts[i]};
            while (!stack.empty()) {
                const ManifoldPoint next = stack.back();
                const ManifoldPoint& prev = out.back();
                if (gap(prev.state, next.state) > o.max_gap && next.seed - prev.seed > 1e-14 && out.size() < budget) {
                    const double sm = 0.5 * (prev.seed + next.seed);
                    stack.push_back({sd.image(sm, k), sm, k});
                } else {
                    out.push_back(next);
                    stack.pop_back();
                }
            }
            if (out.size() >= budget) {
                br.truncated = true;
                break;
            }
        }
        pts = std::move(out);
    };
    refine(seg, 0);
    br.points = seg;
    for (int k = 1; k <= iterations && !br.truncated; ++k) {
        for (auto& p : seg) {
            p.state = sd.step(p.state);
            p.iterate = k;
        }
        refine(seg, k);
        // The first point of each image repeats the last point of the previous one.
        br.points.insert(br.points.end(), seg.begin() + 1, seg.end());
        if (br.points.size() >= o.max_points) br.truncated = true;
    }
    return br;
}

// u where the branch first crosses the vertical line v = vc, refined by
// bisection in the seed parameter of the bracketing pair.
inline std::optional<double> first_crossing(const ManifoldSeed& sd, const ManifoldBranch& br, double vc)
{
    for (std::size_t i = 1; i < br.points.size(); ++i) {
        const auto& a = br.points[i - 1];
        const auto& b = br.points[i];
        if ((a.state.v - vc) * (b.state.v - vc) > 0.0) continue;
        if (a.iterate != b.iterate) {
            // Segment junction: the end of one image is the start of the next.
            return a.state.v == vc ? a.state.u : b.state.u;
        }
        double lo = a.seed, hi = b.seed;
        const bool rising = a.state.v < b.state.v;
        PhaseState p = a.state;
        for (int it = 0; it < 80 && hi - lo > 1e-17; ++it) {
            const double m = 0.5 * (lo + hi);
            p = sd.image(m, a.iterate);
            if ((p.v < vc) == rising) lo = m;
            else hi = m;
        }
        return p.u;
    }
    return std::nullopt;
}

} // namespace detail

/// Unstable and stable manifolds of a saddle fixed point. Each branch is the
/// fundamental segment between x0 + offset*e and its first image, iterated
/// `segment_iterations` times (the inverse map for stable branches) and
/// resampled wherever neighbouring images separate by more than max_gap.
///
/// The splitting indicator compares the +u unstable branch with the +u stable
/// branch shifted by 2pi in the direction the unstable branch travels:
/// max |u_u(v) - u_s(v)| over v within 1 of the half-way line v0 +- pi.
inline ManifoldSet trace_manifolds(const MapSpec& spec, PhaseState fixed_point, int segment_iterations,
                                   const ManifoldOptions& o = {})
{
    validate(spec);
    if (segment_iterations < 0) throw Error(ErrorCode::InvalidArgument, "segment_iterations >= 0 required");
    if (o.segment_points < 2) throw Error(ErrorCode::InvalidArgument, "segment_points >= 2 required");
    ManifoldSet out;
    out.fixed_point = fixed_point;
    out.multipliers = saddle_multipliers(spec, fixed_point);
    const auto& mu = out.multipliers;
    const double lam = std::abs(mu.unstable);

    std::vector<detail::ManifoldSeed> seeds;
    for (bool unstable : {true, false}) {
        for (int side : {1, -1}) {
            const double* e = unstable ? mu.eu : mu.es;
            detail::ManifoldSeed sd{&spec, fixed_point, {side * e[0], side * e[1]}, lam, o.offset, unstable};
            // A negative multiplier flips sides every step; the fundamental
            // segment then runs to the second image.
            if ((unstable ? mu.unstable : mu.stable) < 0.0) sd.lambda = lam * lam;
            out.branches.push_back(detail::grow_branch(sd, segment_iterations, o, unstable, side));
            seeds.push_back(sd);
        }
    }

    const auto& uu = out.branches[0];
    const auto& ss = out.branches[2];
    if (uu.points.size() > 1) {
        double far_v = 0.0;
        for (const auto& p : uu.points)
            if (std::abs(p.state.v - fixed_point.v) > std::abs(far_v)) far_v = p.state.v - fixed_point.v;
        const double d = far_v >= 0.0 ? 1.0 : -1.0;
        const double v_mid = fixed_point.v + d * kPi;
        double worst = -1.0;
        for (int i = 0; i <= 40; ++i) {
            const double vc = v_mid - 1.0 + 2.0 * i / 40.0;
            const auto a = detail::first_crossing(seeds[0], uu, vc);
            const auto b = detail::first_crossing(seeds[2], ss, vc - d * kTwoPi);
            if (!a || !b) {
                worst = -1.0;
                break;
            }
            worst = std::max(worst, std::abs(*a - *b));
        }
        if (worst >= 0.0) out.splitting = worst;
    }
    return out;
}

} // namespace degres
