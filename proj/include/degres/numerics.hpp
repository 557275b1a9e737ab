#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "degres/error.hpp"

namespace degres::num {

/// Bisection on a bracket [lo, hi] with f(lo) f(hi) <= 0. Stops when the
/// bracket collapses to adjacent doubles or |f| <= f_tol.
template <typename F>
double bisect(F&& f, double lo, double hi, double f_tol = 0.0, int max_iter = 200)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw Error(ErrorCode::Precondition, "bisection bracket has no sign change");
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
        const double fm = f(mid);
        if (fm == 0.0 || std::abs(fm) <= f_tol) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

/// Binomial coefficient for small arguments.
inline double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Central difference of order `k` with step h (error O(h^2), even in h).
template <typename F>
double central_derivative(F&& f, double x, int k, double h)
{
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binomial(k, i) * f(x + (0.5 * k - i) * h);
    }
    return acc / std::pow(h, k);
}

/// k-th derivative by central differences refined with a Richardson table
/// over steps h0, h0/2, ..., h0/2^(levels-1).
template <typename F>
double richardson_derivative(F&& f, double x, int k, double h0, int levels = 4)
{
    std::vector<std::vector<double>> table(levels);
    for (int i = 0; i < levels; ++i) {
        table[i].resize(i + 1);
        table[i][0] = central_derivative(f, x, k, h0 / std::pow(2.0, i));
        double factor = 4.0;
        for (int m = 1; m <= i; ++m) {
            table[i][m] = table[i][m - 1] + (table[i][m - 1] - table[i - 1][m - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
    }
    return table[levels - 1][levels - 1];
}

/// Uniform sample grid of n points on [lo, hi] (endpoints included).
inline std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    return out;
}

/// Sign-change scan plus bisection: all roots of f on [lo, hi] detectable at
/// the scan resolution. Tangential (even-order) roots are not reported.
template <typename F>
std::vector<double> scan_roots(F&& f, double lo, double hi, int n_scan, double f_tol = 0.0)
{
    std::vector<double> roots;
    double x_prev = lo;
    double f_prev = f(lo);
    for (int i = 1; i <= n_scan; ++i) {
        const double x = lo + (hi - lo) * i / n_scan;
        const double fx = f(x);
        if (f_prev == 0.0) {
            roots.push_back(x_prev);
        } else if (fx != 0.0 && (fx > 0.0) != (f_prev > 0.0)) {
            roots.push_back(bisect(f, x_prev, x, f_tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    if (f_prev == 0.0) roots.push_back(x_prev);
    return roots;
}

} // namespace degres::num
