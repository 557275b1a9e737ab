#pragma once

// Resonance levels of a nonlinear oscillator under periodic forcing, their
// degeneracy order, and the second-approximation averaged coefficients.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "degres/error.hpp"
#include "degres/fourier.hpp"
#include "degres/numerics.hpp"
#include "degres/zone_model.hpp"

namespace degres {

/// Unperturbed frequency omega(I) on a closed action interval, and the
/// forcing frequency nu.
struct FrequencyProfile {
    std::function<double(double)> omega;
    double I_lo = 0.0;
    double I_hi = 1.0;
    double nu = 1.0;
};

/// Perturbation in action-angle form: I. = eps F(I, theta, phi),
/// theta. = omega(I) + eps G(I, theta, phi). Both 2pi-periodic in the angles.
struct PerturbationSpec {
    std::function<double(double, double, double)> F;
    std::function<double(double, double, double)> G;
};

struct ResonanceSpec {
    int p = 1;
    int q = 1;
    double I = 0.0;
    int j = 1;
    double bj = 0.0;  ///< omega^(j)(I)/j!
    double bj1 = 0.0; ///< omega^(j+1)(I)/(j+1)!

    double s() const { return 1.0 / (1.0 + j); }
};

struct DegeneracyInfo {
    int j = 0;
    double bj = 0.0;
    double bj1 = 0.0;
    double deriv_tol = 0.0;
    std::array<double, 6> derivatives{}; ///< omega^(k)(I0), k = 0..5
};

inline constexpr double kDefaultDerivTol = 1e-6;
inline constexpr int kMaxDegeneracyOrder = 4;

/// Degeneracy order of the level I0: the first derivative of omega that does
/// not vanish (|omega^(k)| >= deriv_tol). Derivatives come from central
/// differences with Richardson extrapolation.
inline DegeneracyInfo degeneracy_order(const FrequencyProfile& profile, double I0, double deriv_tol = kDefaultDerivTol)
{
    if (!(I0 > profile.I_lo && I0 < profile.I_hi))
        throw Error(ErrorCode::Precondition, "I0 must be interior to the action interval");
    const double room = std::min(I0 - profile.I_lo, profile.I_hi - I0);
    const double scale = std::max(1.0, std::abs(I0));

    DegeneracyInfo info;
    info.deriv_tol = deriv_tol;
    info.derivatives[0] = profile.omega(I0);
    for (int k = 1; k <= kMaxDegeneracyOrder + 1; ++k) {
        const double h0 = std::min(0.2 * scale, 0.99 * room / (0.5 * k));
        info.derivatives[k] = num::richardson_derivative(profile.omega, I0, k, h0, 4);
    }
    for (int k = 1; k <= kMaxDegeneracyOrder; ++k) {
        if (std::abs(info.derivatives[k]) >= deriv_tol) {
            info.j = k;
            info.bj = info.derivatives[k] / std::tgamma(k + 1.0);
            info.bj1 = info.derivatives[k + 1] / std::tgamma(k + 2.0);
            return info;
        }
    }
    throw Error(ErrorCode::OrderTooHigh, "no derivative of order <= 4 exceeds deriv_tol=" + std::to_string(deriv_tol)
                                             + " at I=" + std::to_string(I0));
}

struct ResonanceSearch {
    std::vector<ResonanceSpec> levels;
    std::vector<std::string> diagnostics; ///< roots skipped or suspicious at scan resolution
};

namespace detail {

// Roots of g touching zero without a sign change: local minima of |g| on the
// scan grid, refined by bisecting the sign of a central-difference slope.
template <typename G>
std::vector<double> tangent_roots(G&& g, const std::vector<double>& xs, const std::vector<double>& gs, double accept)
{
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        const bool same_sign = (gs[i - 1] > 0) == (gs[i] > 0) && (gs[i] > 0) == (gs[i + 1] > 0);
        if (!same_sign || gs[i] == 0.0) continue;
        if (std::abs(gs[i]) > std::abs(gs[i - 1]) || std::abs(gs[i]) > std::abs(gs[i + 1])) continue;
        const double h = 1e-3 * (xs[i + 1] - xs[i - 1]);
        auto slope = [&](double x) { return g(x + h) - g(x - h); };
        const double s_lo = slope(xs[i - 1]);
        const double s_hi = slope(xs[i + 1]);
        double x_star = xs[i];
        if (s_lo != 0.0 && s_hi != 0.0 && (s_lo > 0) != (s_hi > 0)) x_star = num::bisect(slope, xs[i - 1], xs[i + 1]);
        if (std::abs(g(x_star)) < accept) out.push_back(x_star);
    }
    return out;
}

} // namespace detail

/// All resonance levels omega(I) = (q/p) nu for co-prime p <= p_max, q <= q_max.
inline ResonanceSearch find_resonance_levels(const FrequencyProfile& profile, int p_max, int q_max,
                                             int n_scan = 2048, double deriv_tol = kDefaultDerivTol)
{
    if (p_max < 1 || q_max < 1) throw Error(ErrorCode::InvalidArgument, "p_max, q_max >= 1 required");
    if (!(profile.I_hi > profile.I_lo)) throw Error(ErrorCode::InvalidArgument, "empty action interval");
    constexpr double kResidual = 1e-12;

    ResonanceSearch out;
    const auto xs = num::linspace(profile.I_lo, profile.I_hi, n_scan + 1);
    for (int p = 1; p <= p_max; ++p) {
        for (int q = 1; q <= q_max; ++q) {
            if (std::gcd(p, q) != 1) continue;
            const double target = profile.nu * q / p;
            auto g = [&](double I) { return profile.omega(I) - target; };

            std::vector<double> gs(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) gs[i] = g(xs[i]);

            std::vector<double> roots = num::scan_roots(g, profile.I_lo, profile.I_hi, n_scan);
            const auto tangent = detail::tangent_roots(g, xs, gs, kResidual);
            roots.insert(roots.end(), tangent.begin(), tangent.end());
            std::sort(roots.begin(), roots.end());
            roots.erase(std::unique(roots.begin(), roots.end(),
                                    [&](double x, double y) { return std::abs(x - y) < 1e-9 * std::max(1.0, std::abs(x)); }),
                        roots.end());

            for (double I : roots) {
                const std::string tag = "(p,q)=(" + std::to_string(p) + "," + std::to_string(q) + ") I=" + std::to_string(I);
                if (!(std::abs(g(I)) < kResidual)) {
                    out.diagnostics.push_back(tag + ": sign change without a root (omega not continuous at scan resolution)");
                    continue;
                }
                if (!(I > profile.I_lo && I < profile.I_hi)) {
                    out.diagnostics.push_back(tag + ": root on the interval boundary, degeneracy not evaluated");
                    continue;
                }
                try {
                    const auto deg = degeneracy_order(profile, I, deriv_tol);
                    out.levels.push_back({p, q, I, deg.j, deg.bj, deg.bj1});
                } catch (const Error& e) {
                    out.diagnostics.push_back(tag + ": " + e.what());
                }
            }
        }
    }
    return out;
}

/// Averaged coefficients sampled on a uniform grid over one period 2pi/p of v.
struct AveragedCoefficients {
    int p = 1;
    std::vector<double> v_grid;
    std::vector<double> A0, P0, Q0;
    std::vector<double> A0_tilde, P0_tilde;
    double B0 = 0.0;
    double B1 = 0.0;

    double period() const { return kTwoPi / p; }

    /// Builds the mean split from raw samples on the uniform grid of size A0.size().
    static AveragedCoefficients from_samples(int p, std::vector<double> a0, std::vector<double> p0,
                                             std::vector<double> q0)
    {
        if (p < 1) throw Error(ErrorCode::InvalidArgument, "p >= 1 required");
        const std::size_t n = a0.size();
        if (n == 0 || p0.size() != n || q0.size() != n)
            throw Error(ErrorCode::InvalidArgument, "A0, P0, Q0 must be nonempty and equally sized");
        AveragedCoefficients c;
        c.p = p;
        c.v_grid.resize(n);
        for (std::size_t i = 0; i < n; ++i) c.v_grid[i] = c.period() * static_cast<double>(i) / static_cast<double>(n);
        c.A0 = std::move(a0);
        c.P0 = std::move(p0);
        c.Q0 = std::move(q0);
        c.B0 = fourier::mean(c.A0);
        c.B1 = fourier::mean(c.P0);
        c.A0_tilde.resize(n);
        c.P0_tilde.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            c.A0_tilde[i] = c.A0[i] - c.B0;
            c.P0_tilde[i] = c.P0[i] - c.B1;
        }
        return c;
    }

    /// Samples callables on the grid.
    template <typename FA, typename FP, typename FQ>
    static AveragedCoefficients from_functions(int p, int n, FA&& a0, FP&& p0, FQ&& q0)
    {
        std::vector<double> A(n), P(n), Q(n);
        const double period = kTwoPi / p;
        for (int i = 0; i < n; ++i) {
            const double v = period * i / n;
            A[i] = a0(v);
            P[i] = p0(v);
            Q[i] = q0(v);
        }
        return from_samples(p, std::move(A), std::move(P), std::move(Q));
    }
};

/// Second-approximation coefficients by trapezoid quadrature in phi.
///
/// The integrand phi -> F(I, v + q phi/p, phi) is 2pi p periodic, so the
/// trapezoid rule with `n_nodes` nodes per 2pi of phi is spectrally accurate.
/// dF/dI is a central difference with step 1e-5 max(1, |I|). The v-grid has
/// n_nodes points on [0, 2pi/p).
inline AveragedCoefficients compute_averaged_coefficients(const PerturbationSpec& pert, const ResonanceSpec& spec,
                                                          int n_nodes)
{
    if (n_nodes < 64 || n_nodes % 2 != 0) throw Error(ErrorCode::InvalidArgument, "n_nodes must be even and >= 64");
    if (!pert.F) throw Error(ErrorCode::InvalidArgument, "perturbation F is required");
    const int p = spec.p;
    const double ratio = static_cast<double>(spec.q) / p;
    const double I = spec.I;
    const double dI = 1e-5 * std::max(1.0, std::abs(I));
    const int m_nodes = n_nodes * p;
    const double dphi = kTwoPi * p / m_nodes;

    std::vector<double> A(n_nodes), P(n_nodes), Q(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        const double v = kTwoPi / p * i / n_nodes;
        double sa = 0.0, sp = 0.0, sq = 0.0;
        for (int m = 0; m < m_nodes; ++m) {
            const double phi = dphi * m;
            const double theta = v + ratio * phi;
            const double f = pert.F(I, theta, phi);
            const double fp = pert.F(I + dI, theta, phi);
            const double fm = pert.F(I - dI, theta, phi);
            const double g = pert.G ? pert.G(I, theta, phi) : 0.0;
            if (!std::isfinite(f) || !std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(g))
                throw Error(ErrorCode::NonFinite, "perturbation not finite at theta=" + std::to_string(theta)
                                                      + " phi=" + std::to_string(phi));
            sa += f;
            sp += (fp - fm) / (2.0 * dI);
            sq += g;
        }
        A[i] = sa / m_nodes;
        P[i] = sp / m_nodes;
        Q[i] = sq / m_nodes;
    }
    return AveragedCoefficients::from_samples(p, std::move(A), std::move(P), std::move(Q));
}

enum class Passability { Passable, PartiallyPassable, NonPassable, Ambiguous };

constexpr std::string_view to_string(Passability c)
{
    switch (c) {
    case Passability::Passable: return "PASSABLE";
    case Passability::PartiallyPassable: return "PARTIALLY_PASSABLE";
    case Passability::NonPassable: return "NON_PASSABLE";
    case Passability::Ambiguous: return "AMBIGUOUS";
    }
    return "UNKNOWN";
}

struct Classification {
    Passability kind = Passability::Ambiguous;
    std::vector<double> roots; ///< zeros of A0 on one period
    double B0 = 0.0;
    std::string note;
};

inline constexpr double kB0Tol = 1e-8;

/// Passable: A0 has no zeros. Partially passable: simple zeros and B0 != 0.
/// Non-passable: B0 = 0 (within b0_tol). Tangential zeros are AMBIGUOUS.
inline Classification classify_resonance(const AveragedCoefficients& c, double b0_tol = kB0Tol)
{
    Classification out;
    out.B0 = c.B0;
    const fourier::TrigInterpolant a0(c.A0, c.period());
    double amp = 0.0;
    for (double x : c.A0) amp = std::max(amp, std::abs(x));
    const double flat = 1e-8 * std::max(amp, 1e-300);

    const int n_scan = 1024;
    out.roots = num::scan_roots(a0, 0.0, c.period(), n_scan);
    if (!out.roots.empty() && out.roots.back() >= c.period() * (1.0 - 1e-14)) out.roots.pop_back();

    bool tangential = false;
    for (double r : out.roots)
        if (std::abs(a0.derivative(r)) < flat) tangential = true;
    std::vector<double> xs(n_scan + 1), ys(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        xs[i] = c.period() * i / n_scan;
        ys[i] = a0(xs[i]);
    }
    if (!detail::tangent_roots(a0, xs, ys, flat).empty()) tangential = true;

    if (std::abs(c.B0) < b0_tol) {
        out.kind = Passability::NonPassable;
        out.note = "mean of A0 vanishes";
    } else if (tangential) {
        out.kind = Passability::Ambiguous;
        out.note = "A0 has a non-simple zero at grid resolution";
    } else if (out.roots.empty()) {
        out.kind = Passability::Passable;
    } else {
        out.kind = Passability::PartiallyPassable;
    }
    return out;
}

struct IdentityReport {
    double identity_residual = 0.0; ///< max |P0 + dQ0/dv|
    double abs_B0 = 0.0;
    double abs_B1 = 0.0;
    double tolerance = 1e-8;

    bool identity_pass() const { return identity_residual < tolerance; }
    bool pass() const { return identity_pass() && abs_B0 < tolerance && abs_B1 < tolerance; }
};

/// Residuals of the identities a Hamiltonian perturbation must satisfy:
/// P0 + dQ0/dv = 0 and B0 = B1 = 0. dQ0/dv is spectral on the v-grid.
inline IdentityReport verify_hamiltonian_identities(const AveragedCoefficients& c, double tolerance = 1e-8)
{
    IdentityReport r;
    r.tolerance = tolerance;
    const auto dq = fourier::spectral_derivative(c.Q0, c.period());
    for (std::size_t i = 0; i < c.P0.size(); ++i) r.identity_residual = std::max(r.identity_residual, std::abs(c.P0[i] + dq[i]));
    r.abs_B0 = std::abs(c.B0);
    r.abs_B1 = std::abs(c.B1);
    return r;
}

struct HarmonicReduction {
    ZoneParameters zone;
    HarmonicCoefficients harmonic;
};

/// Reduces single-harmonic averaged coefficients of a j = 2, q = 1 resonance to
/// the rescaled zone system: a = a_p1, b = b_2, mu1 = eps^{1/3} c_p1,
/// mu2 = deformation, b3 = eps^{1/3} b_3.
inline HarmonicReduction harmonic_reduction(const AveragedCoefficients& c, const ResonanceSpec& spec, double epsilon,
                                            double deformation = 0.0)
{
    if (spec.q != 1) throw Error(ErrorCode::Precondition, "harmonic reduction requires q = 1");
    if (spec.j != 2) throw Error(ErrorCode::Precondition, "harmonic reduction requires degeneracy order j = 2");
    if (spec.p != c.p) throw Error(ErrorCode::InvalidArgument, "resonance p does not match the coefficient grid");
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon >= 0 required");

    // On the v-grid over [0, 2pi/p) the first grid harmonic is sin(pv)/cos(pv).
    const auto ha = fourier::project(c.A0_tilde, 1);
    const auto hp = fourier::project(c.P0_tilde, 1);
    const auto hq = fourier::project(c.Q0, 1);
    HarmonicCoefficients h{ha.sin_coeff, hp.sin_coeff, hq.cos_coeff};

    const double scale = std::max({std::abs(h.a_p1), std::abs(h.c_p1), std::abs(h.d_p1)});
    if (scale == 0.0) throw Error(ErrorCode::Precondition, "averaged coefficients carry no harmonic of order p");
    const double limit = 1e-8 * scale;
    double stray = std::max({std::abs(ha.cos_coeff), std::abs(hp.cos_coeff), std::abs(hq.sin_coeff),
                             std::abs(fourier::mean(c.Q0))});
    const int kmax = static_cast<int>(c.A0.size() / 2);
    for (int k = 2; k <= kmax; ++k) {
        for (const auto* s : {&c.A0_tilde, &c.P0_tilde, &c.Q0}) {
            const auto hk = fourier::project(*s, k);
            stray = std::max({stray, std::abs(hk.cos_coeff), std::abs(hk.sin_coeff)});
        }
    }
    if (stray > limit)
        throw Error(ErrorCode::Precondition, "averaged coefficients are not single-harmonic (stray mode "
                                                 + std::to_string(stray) + ")");
    if (std::abs(h.c_p1 - spec.p * h.d_p1) > 1e-8 * std::max(1.0, std::abs(h.c_p1)))
        throw Error(ErrorCode::IdentityViolated, "c_p1 != p d_p1: perturbation is not Hamiltonian");

    const double eps13 = std::cbrt(epsilon);
    HarmonicReduction out;
    out.harmonic = h;
    out.zone.a = h.a_p1;
    out.zone.b = spec.bj;
    out.zone.p = spec.p;
    out.zone.mu1 = eps13 * h.c_p1;
    out.zone.mu2 = deformation;
    out.zone.b3 = eps13 * spec.bj1;
    out.zone.validate();
    return out;
}

} // namespace degres
