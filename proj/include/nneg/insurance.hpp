#pragma once

#include <cmath>
#include <string>

#include "nneg/errors.hpp"

namespace nneg {

/// Reinsurance pricing basis: death probability p, excess margin eps,
/// mortality loading eta. The attachment point uses a = p(1+eps); the
/// reinsurer prices deaths at b = p(1+eta).
struct ReinsurerBasis {
    double p = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;

    double a() const { return p * (1.0 + epsilon); }
    double b() const { return p * (1.0 + eta); }

    void validate() const {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("ReinsurerBasis: p must be in (0,1)");
        if (!(epsilon > 0.0)) throw ValidationError("ReinsurerBasis: epsilon must be > 0");
        if (!(eta >= 0.0 && eta < epsilon))
            throw ValidationError("ReinsurerBasis: need 0 <= eta < epsilon");
        if (!(a() < 1.0))
            throw ValidationError("ReinsurerBasis: p(1+epsilon) must be < 1, got " +
                                  std::to_string(a()));
    }
};

/// Quoted excess-of-loss contract on n lives: pays (D - e)^+ at time 1.
struct XoLQuote {
    int n = 0;
    double e = 0.0;
    double x0 = 0.0;

    void validate() const {
        if (n < 1) throw ValidationError("XoLQuote: n must be >= 1");
        if (!(e >= 0.0 && e < static_cast<double>(n)))
            throw ValidationError("XoLQuote: excess must satisfy 0 <= e < n");
        if (!(x0 >= 0.0)) throw ValidationError("XoLQuote: price must be >= 0");
    }
};

/// Group life assurance on n lives: pays 1 per death, costs n*p.
struct GLAQuote {
    int n = 0;
    double p = 0.0;
    double price() const { return n * p; }
};

/// Attachment point e(n) = n*p*(1+eps).
inline double xol_excess(int n, const ReinsurerBasis& basis) {
    basis.validate();
    if (n < 1) throw ValidationError("xol_excess: n must be >= 1");
    return n * basis.a();
}

/// Exact binomial XoL price: sum_{k>e} (k-e) C(n,k) p^k (1-p)^(n-k).
/// The pmf recurrence runs in log space and stays stable up to n ~ 10,000.
inline double xol_price_binomial(int n, double e, double death_prob) {
    if (n < 1) throw ValidationError("xol_price_binomial: n must be >= 1");
    if (e >= static_cast<double>(n))
        throw ValidationError("xol_price_binomial: excess >= n makes the contract worthless");
    if (e < 0.0) throw ValidationError("xol_price_binomial: excess must be >= 0");
    if (!(death_prob > 0.0 && death_prob < 1.0))
        throw ValidationError("xol_price_binomial: death probability must be in (0,1)");
    const double log_ratio = std::log(death_prob) - std::log1p(-death_prob);
    double log_pmf = n * std::log1p(-death_prob);
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        if (k > e) total += (k - e) * std::exp(log_pmf);
        if (k < n) log_pmf += std::log((n - k) / (k + 1.0)) + log_ratio;
    }
    return total;
}

/// Large-deviations rate function I_p(a) = a log(a/p) + (1-a) log((1-a)/(1-p)).
inline double rate_function(double p, double a) {
    if (!(p > 0.0 && p < 1.0 && a > 0.0 && a < 1.0))
        throw ValidationError("rate_function: arguments must be in the open interval (0,1)");
    return a * std::log(a / p) + (1.0 - a) * std::log((1.0 - a) / (1.0 - p));
}

/// Chernoff-style price bound (n - floor(e(n))) * exp(-n * I_b(a)).
inline double ldp_price_bound(int n, const ReinsurerBasis& basis) {
    basis.validate();
    if (n < 1) throw ValidationError("ldp_price_bound: n must be >= 1");
    const double e = xol_excess(n, basis);
    return (n - std::floor(e)) * std::exp(-n * rate_function(basis.b(), basis.a()));
}

struct NoArbitrageReport {
    bool pass = false;
    double margin = 0.0;  ///< p - x0/(n-e); positive means strictly arbitrage-free
};

/// Combined-market bound: x0/(n-e) < p strictly.
inline NoArbitrageReport check_no_arbitrage(const XoLQuote& quote, double p) {
    quote.validate();
    const double ratio = quote.x0 / (quote.n - quote.e);
    return NoArbitrageReport{ratio < p, p - ratio};
}

/// Both conditions for the XoL-plus-puts regime, via the equivalences
/// (1/n)x0 < q(1 - p(1+eps)) <=> x0/(n - e(n)) < q and
/// (1/n)x0 < p(1 - q(1+eps)) <=> e(n)q + x0 < np.
inline bool asymptotic_regime_test(int n, double q, const ReinsurerBasis& basis, double x0) {
    basis.validate();
    if (n < 1) throw ValidationError("asymptotic_regime_test: n must be >= 1");
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("asymptotic_regime_test: q must be in (0,1)");
    if (!(x0 >= 0.0)) throw ValidationError("asymptotic_regime_test: x0 must be >= 0");
    const double cap = 1.0 / (1.0 + basis.epsilon);
    if (!(basis.p < cap && q < cap))
        throw ValidationError("asymptotic_regime_test: regime undefined, needs max(p,q) < 1/(1+eps)");
    const double per_life = x0 / n;
    return per_life < basis.p * (1.0 - q * (1.0 + basis.epsilon)) &&
           per_life < q * (1.0 - basis.p * (1.0 + basis.epsilon));
}

}  // namespace nneg
