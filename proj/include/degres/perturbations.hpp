#pragma once

// Ready-made oscillator/perturbation pairs used by the CLI and the tests.

#include <cmath>

#include "degres/resonance.hpp"

namespace degres::families {

/// Oscillator with explicit action-angle coordinates x = sqrt(2I) sin(theta),
/// y = sqrt(2I) cos(theta) and Hamiltonian H0(I) = I + c (I - I_c)^3 / 3,
/// i.e. omega(I) = 1 + c (I - I_c)^2. The level I = I_c is degenerate of order 2.
struct CubicTwistOscillator {
    double curvature = 1.0;
    double center = 1.0;

    double omega(double I) const { return 1.0 + curvature * (I - center) * (I - center); }

    FrequencyProfile profile(double I_lo, double I_hi, double nu) const
    {
        return {[*this](double I) { return omega(I); }, I_lo, I_hi, nu};
    }
};

/// Hamiltonian perturbation eps W with W = amplitude cos(x - phi), pushed
/// through the action-angle transformation of CubicTwistOscillator:
///   F = -dW/dtheta = amplitude sin(x - phi) sqrt(2I) cos(theta)
///   G =  dW/dI     = -amplitude sin(x - phi) sin(theta) / sqrt(2I)
inline PerturbationSpec cos_x_minus_phi(double amplitude)
{
    PerturbationSpec s;
    s.F = [amplitude](double I, double theta, double phi) {
        const double r = std::sqrt(2.0 * I);
        return amplitude * std::sin(r * std::sin(theta) - phi) * r * std::cos(theta);
    };
    s.G = [amplitude](double I, double theta, double phi) {
        const double r = std::sqrt(2.0 * I);
        return -amplitude * std::sin(r * std::sin(theta) - phi) * std::sin(theta) / r;
    };
    return s;
}

/// F = f_amp sin(k theta - phi) + f_const, G = g_amp cos(k theta - phi).
/// Hamiltonian only when f_const = 0 and the amplitudes derive from one W.
inline PerturbationSpec harmonic(double f_amp, double g_amp, double f_const = 0.0, int k = 1)
{
    PerturbationSpec s;
    s.F = [=](double, double theta, double phi) { return f_amp * std::sin(k * theta - phi) + f_const; };
    s.G = [=](double, double theta, double phi) { return g_amp * std::cos(k * theta - phi); };
    return s;
}

} // namespace degres::families
