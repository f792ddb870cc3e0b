// Test-only oracles, independent of the library implementation paths they
// check: direct binomial enumeration via lgamma, quadrature for the normal
// CDF and the lognormal put, and a brute-force domination pricer.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline double binom_pmf(int n, int k, double p) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// XoL price by direct summation with lgamma-based pmf (independent of the
/// library's multiplicative recurrence).
inline double xol_price_direct(int n, double e, double p) {
    double total = 0.0;
    for (int k = 0; k <= n; ++k)
        if (k > e) total += (k - e) * binom_pmf(n, k, p);
    return total;
}

/// Standard normal CDF by Simpson quadrature of the density on [-12, x],
/// step chosen for ~1e-12 accuracy. Independent of std::erfc.
inline double normal_cdf_quadrature(double x) {
    if (x < -12.0) return 0.0;
    if (x > 12.0) return 1.0;
    const double a = -12.0;
    const int steps = 4000;  // Simpson error ~ (b-a)^5 / steps^4 * f'''' tiny
    const double h = (x - a) / steps;
    auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    double sum = phi(a) + phi(x);
    for (int i = 1; i < steps; ++i) sum += phi(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// European put on a dividend-paying lognormal stock by Gauss-Legendre-free
/// Simpson quadrature over the terminal density.
inline double bs_put_quadrature(double s0, double strike, double vol, double t, double r,
                                double defer) {
    const double mu = std::log(s0) + (r - defer - 0.5 * vol * vol) * t;
    const double sd = vol * std::sqrt(t);
    // (strike - S)^+ is supported on log S < log strike
    const double hi = std::log(strike);
    const double lo = mu - 14.0 * sd;
    if (hi <= lo) return 0.0;
    const int steps = 20000;
    const double h = (hi - lo) / steps;
    auto f = [&](double x) {
        const double z = (x - mu) / sd;
        const double dens = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
        return (strike - std::exp(x)) * dens;
    };
    double sum = f(lo) + f(hi);
    for (int i = 1; i < steps; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return std::exp(-r * t) * sum * h / 3.0;
}

}  // namespace oracle
