#pragma once

// Discrete Fourier helpers for uniformly sampled periodic functions. The
// grids here are small (a few thousand points), so a direct O(n^2) transform
// keeps the code dependency-free.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "degres/zone_model.hpp"

namespace degres::fourier {

/// Cosine/sine coefficients of the k-th harmonic of samples f_i = f(x_i),
/// x_i = i * period / n: f ~ c0 + sum_k (ak cos(2 pi k x / period) + bk sin(...)).
struct Harmonic {
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

inline Harmonic project(std::span<const double> samples, int k)
{
    const std::size_t n = samples.size();
    Harmonic h;
    if (n == 0) return h;
    const std::size_t kk = static_cast<std::size_t>(k) % n;
    for (std::size_t i = 0; i < n; ++i) {
        // Reduce k*i modulo n first so the trig arguments stay in [0, 2pi).
        const double phase = kTwoPi * static_cast<double>((kk * i) % n) / static_cast<double>(n);
        h.cos_coeff += samples[i] * std::cos(phase);
        h.sin_coeff += samples[i] * std::sin(phase);
    }
    // Mean and Nyquist carry weight 1/n, the rest 2/n.
    const bool edge = (k == 0) || (2 * static_cast<std::size_t>(k) == n);
    const double w = edge ? 1.0 / n : 2.0 / n;
    h.cos_coeff *= w;
    h.sin_coeff *= w;
    return h;
}

inline double mean(std::span<const double> samples)
{
    double s = 0.0;
    for (double x : samples) s += x;
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
}

/// Real trigonometric interpolant of uniform samples over one period.
class TrigInterpolant {
public:
    TrigInterpolant() = default;

    TrigInterpolant(std::span<const double> samples, double period) : period_(period)
    {
        const int n = static_cast<int>(samples.size());
        const int kmax = n / 2;
        coeffs_.resize(kmax + 1);
        for (int k = 0; k <= kmax; ++k) coeffs_[k] = project(samples, k);
        // Split the Nyquist cosine between +-k so the interpolant stays real and symmetric.
        if (n % 2 == 0 && kmax > 0) coeffs_[kmax].sin_coeff = 0.0;
    }

    double operator()(double x) const { return eval(x, 0); }
    double derivative(double x) const { return eval(x, 1); }

    double period() const { return period_; }
    int max_mode() const { return static_cast<int>(coeffs_.size()) - 1; }
    const Harmonic& mode(int k) const { return coeffs_.at(k); }

private:
    double eval(double x, int order) const
    {
        const double w = kTwoPi / period_;
        double out = order == 0 ? coeffs_.empty() ? 0.0 : coeffs_[0].cos_coeff : 0.0;
        for (std::size_t k = 1; k < coeffs_.size(); ++k) {
            const double arg = w * static_cast<double>(k) * x;
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            if (order == 0) {
                out += coeffs_[k].cos_coeff * c + coeffs_[k].sin_coeff * s;
            } else {
                const double kw = w * static_cast<double>(k);
                out += kw * (-coeffs_[k].cos_coeff * s + coeffs_[k].sin_coeff * c);
            }
        }
        return out;
    }

    double period_ = kTwoPi;
    std::vector<Harmonic> coeffs_;
};

/// Spectral derivative of uniform samples over one period, evaluated on the
/// same grid.
inline std::vector<double> spectral_derivative(std::span<const double> samples, double period)
{
    const TrigInterpolant interp(samples, period);
    const std::size_t n = samples.size();
    std::vector<double> out(n, 0.0);
    for (int k = 1; k <= interp.max_mode(); ++k) {
        const auto& h = interp.mode(k);
        const double kw = kTwoPi / period * k;
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = kTwoPi * static_cast<double>((static_cast<std::size_t>(k) * i) % n) / static_cast<double>(n);
            out[i] += kw * (-h.cos_coeff * std::sin(phase) + h.sin_coeff * std::cos(phase));
        }
    }
    return out;
}

} // namespace degres::fourier
