#pragma once

// Averaged planar system of a degenerate (order 2) resonance zone and the
// general second-approximation system it is reduced from.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "degres/error.hpp"

namespace degres {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2pi).
inline double wrap_angle(double v)
{
    double w = std::fmod(v, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

struct PhaseState {
    double u = 0.0; ///< slow action deviation
    double v = 0.0; ///< slow phase, cyclic

    PhaseState wrapped() const { return {u, wrap_angle(v)}; }
};

struct FieldValue {
    double du = 0.0;
    double dv = 0.0;

    double norm() const { return std::hypot(du, dv); }
};

/// Row-major 2x2 matrix [[uu, uv], [vu, vv]]; rows are (du, dv), columns (u, v).
struct Matrix2 {
    double uu = 0.0, uv = 0.0, vu = 0.0, vv = 0.0;

    double det() const { return uu * vv - uv * vu; }
    double trace() const { return uu + vv; }
};

/// Coefficients of the rescaled averaged system
///   u' = (a + mu1 u) sin v,
///   v' = p (b u^2 + mu2 u) + mu1 cos v  (+ p b3 u^3).
/// `mu1` already carries the eps^{1/3} factor; `b3` is likewise the scaled
/// coefficient of the quartic Hamiltonian term and defaults to zero.
struct ZoneParameters {
    double a = 2.0;
    double b = 1.0;
    int p = 1;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double b3 = 0.0;

    void validate() const
    {
        if (p < 1) throw Error(ErrorCode::InvalidArgument, "p >= 1 required, got " + std::to_string(p));
        if (b == 0.0) throw Error(ErrorCode::InvalidArgument, "b must be nonzero (degeneracy order 2)");
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(mu1) || !std::isfinite(mu2) || !std::isfinite(b3))
            throw Error(ErrorCode::NonFinite, "zone parameters must be finite");
    }

    ZoneParameters with_mu(double m1, double m2) const
    {
        ZoneParameters out = *this;
        out.mu1 = m1;
        out.mu2 = m2;
        return out;
    }
};

/// H(u, v) = p (mu2 u^2/2 + b u^3/3 + b3 u^4/4) + (a + mu1 u) cos v.
inline double hamiltonian(const ZoneParameters& z, PhaseState s)
{
    const double u = s.u;
    const double poly = z.mu2 * u * u / 2.0 + z.b * u * u * u / 3.0 + z.b3 * u * u * u * u / 4.0;
    return z.p * poly + (z.a + z.mu1 * u) * std::cos(s.v);
}

/// (du, dv) = (-dH/dv, dH/du).
inline FieldValue vector_field(const ZoneParameters& z, PhaseState s)
{
    const double u = s.u;
    const double sv = std::sin(s.v);
    const double cv = std::cos(s.v);
    return {(z.a + z.mu1 * u) * sv,
            z.p * (z.b * u * u + z.mu2 * u + z.b3 * u * u * u) + z.mu1 * cv};
}

inline Matrix2 field_jacobian(const ZoneParameters& z, PhaseState s)
{
    const double u = s.u;
    const double sv = std::sin(s.v);
    const double cv = std::cos(s.v);
    Matrix2 j;
    j.uu = z.mu1 * sv;
    j.uv = (z.a + z.mu1 * u) * cv;
    j.vu = z.p * (2.0 * z.b * u + z.mu2 + 3.0 * z.b3 * u * u);
    j.vv = -z.mu1 * sv;
    return j;
}

/// Determinant of the linearization; the characteristic equation is l^2 + delta = 0.
inline double equilibrium_delta(const ZoneParameters& z, PhaseState s) { return field_jacobian(z, s).det(); }

/// Single harmonic of a Hamiltonian perturbation after averaging:
/// A0~ = a sin(pv), P0~ = c sin(pv), Q0 = d cos(pv), with c = p d.
struct HarmonicCoefficients {
    double a_p1 = 0.0;
    double c_p1 = 0.0;
    double d_p1 = 0.0;
};

/// Second-approximation averaged system of a resonance zone of order j:
///   u. = eps^{1-s} A0(v) + eps P0(v) u
///   v. = eps^{1-s} b_j u^j + eps (b_{j+1} u^{j+1} + Q0(v)),  s = 1/(1+j).
struct GeneralAveragedModel {
    int j = 2;
    int p = 1;
    double bj = 1.0;
    double bj1 = 0.0;
    double epsilon = 0.0;
    std::function<double(double)> A0;
    std::function<double(double)> P0;
    std::function<double(double)> Q0;

    double s() const { return 1.0 / (1.0 + j); }

    void validate() const
    {
        if (j < 2) throw Error(ErrorCode::InvalidArgument, "degeneracy order j >= 2 required");
        if (p < 1) throw Error(ErrorCode::InvalidArgument, "p >= 1 required");
        if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon >= 0 required");
    }

    /// Largest deviation of A0/P0/Q0 from 2pi/p periodicity over `n` probe points.
    double periodicity_defect(int n = 64) const
    {
        const double period = kTwoPi / p;
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
            const double v = period * k / n;
            for (const auto* f : {&A0, &P0, &Q0}) {
                if (*f) worst = std::max(worst, std::abs((*f)(v + period) - (*f)(v)));
            }
        }
        return worst;
    }
};

/// H = b_j u^{j+1}/(j+1) + (a/p) cos(pv) + eps^s ((c/p) u cos(pv) + b_{j+1} u^{j+2}/(j+2))
///     + sum_k b_k u^{k+1}/(k+1),  k = 1..j-1 (deformation terms, optional).
inline double reduced_hamiltonian(const GeneralAveragedModel& m, const HarmonicCoefficients& h, PhaseState s,
                                  std::span<const double> deformation = {})
{
    m.validate();
    const double scale = std::max(1.0, std::abs(h.c_p1));
    if (std::abs(h.c_p1 - m.p * h.d_p1) > 1e-12 * scale)
        throw Error(ErrorCode::IdentityViolated, "harmonic coefficients must satisfy c = p d");
    if (deformation.size() > static_cast<std::size_t>(m.j - 1))
        throw Error(ErrorCode::InvalidArgument, "at most j-1 deformation coefficients");

    const double u = s.u;
    const double cpv = std::cos(m.p * s.v);
    const double eps_s = std::pow(m.epsilon, m.s());
    double out = m.bj * std::pow(u, m.j + 1) / (m.j + 1) + h.a_p1 / m.p * cpv
                 + eps_s * (h.c_p1 / m.p * u * cpv + m.bj1 * std::pow(u, m.j + 2) / (m.j + 2));
    for (std::size_t k = 1; k <= deformation.size(); ++k)
        out += deformation[k - 1] * std::pow(u, static_cast<double>(k + 1)) / static_cast<double>(k + 1);
    return out;
}

/// Right-hand side of the second-approximation system in fast time.
inline FieldValue general_field(const GeneralAveragedModel& m, PhaseState s)
{
    m.validate();
    if (m.epsilon == 0.0) return {0.0, 0.0};
    const double lead = std::pow(m.epsilon, 1.0 - m.s());
    const double a0 = m.A0 ? m.A0(s.v) : 0.0;
    const double p0 = m.P0 ? m.P0(s.v) : 0.0;
    const double q0 = m.Q0 ? m.Q0(s.v) : 0.0;
    if (!std::isfinite(a0) || !std::isfinite(p0) || !std::isfinite(q0))
        throw Error(ErrorCode::NonFinite, "averaged function not finite at v=" + std::to_string(s.v));
    const double u = s.u;
    return {lead * a0 + m.epsilon * p0 * u,
            lead * m.bj * std::pow(u, m.j) + m.epsilon * (m.bj1 * std::pow(u, m.j + 1) + q0)};
}

} // namespace degres
