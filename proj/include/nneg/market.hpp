#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "nneg/errors.hpp"

namespace nneg {

/// One-period binomial model for the property stock: S1 = s0*u or s0*d.
struct PropertyBinomial {
    double s0 = 0.0;  ///< spot price, > 0
    double u = 0.0;   ///< up factor, > 1
    double d = 0.0;   ///< down factor, in (0,1)

    double up_price() const { return s0 * u; }
    double down_price() const { return s0 * d; }

    void validate() const {
        if (!(s0 > 0.0)) throw ValidationError("PropertyBinomial: s0 must be > 0");
        if (!(d > 0.0 && d < 1.0 && u > 1.0))
            throw ValidationError("PropertyBinomial: need 0 < d < 1 < u, got u=" +
                                  std::to_string(u) + " d=" + std::to_string(d));
    }
};

/// Risk-neutral probability of the down move, q = (u-1)/(u-d).
inline double risk_neutral_down_prob(const PropertyBinomial& model) {
    model.validate();
    const double q = (model.u - 1.0) / (model.u - model.d);
    return q;
}

/// Symmetric exponential calibration u = e^vol, d = e^-vol.
inline PropertyBinomial crr_from_vol(double s0, double vol) {
    if (!(vol > 0.0)) throw ValidationError("crr_from_vol: vol must be > 0");
    PropertyBinomial m{s0, std::exp(vol), std::exp(-vol)};
    m.validate();
    return m;
}

/// Accumulated loan amount, interest already included.
struct LoanSpec {
    double loan = 0.0;

    void validate() const {
        if (!(loan >= 0.0)) throw ValidationError("LoanSpec: loan must be >= 0");
    }
};

/// Decomposition of the per-death claim (L - S1)^+ into a GLA part plus a
/// scaled unit claim with strike clamped into (S0*d, S0*u].
struct ClaimNormalization {
    double gla_addon = 0.0;         ///< (L - S0*u)^+, paid per death in every state
    double effective_strike = 0.0;  ///< min(L, S0*u)
    double scale = 0.0;             ///< effective_strike - S0*d; claim per death in the down state
    bool degenerate = false;        ///< true iff L <= S0*d (claim a.s. zero)
};

inline ClaimNormalization normalize_claim(const PropertyBinomial& model, const LoanSpec& loan) {
    model.validate();
    loan.validate();
    ClaimNormalization norm;
    const double lo = model.down_price();
    const double hi = model.up_price();
    if (loan.loan <= lo) {
        norm.degenerate = true;
        norm.effective_strike = loan.loan;
        return norm;
    }
    norm.effective_strike = std::min(loan.loan, hi);
    norm.gla_addon = std::max(loan.loan - hi, 0.0);
    norm.scale = norm.effective_strike - lo;
    return norm;
}

/// Price of a one-period put with strike inside the band (S0*d, S0*u].
inline double put_price_one_period(const PropertyBinomial& model, double strike) {
    const double q = risk_neutral_down_prob(model);
    if (!(strike > model.down_price() && strike <= model.up_price()))
        throw ValidationError("put_price_one_period: strike " + std::to_string(strike) +
                              " outside (S0*d, S0*u]; normalize the claim first");
    return (strike - model.down_price()) * q;
}

/// Costs are invariant under the interest rate in the normalized market;
/// this validates r and leaves the cost unchanged. Payout schedules at the
/// report boundary are inflated by (1+r) separately (see undiscounted_payout).
inline double apply_interest(double normalized_cost, double r) {
    if (!(r > -1.0)) throw ValidationError("apply_interest: rate must be > -1");
    return normalized_cost;
}

/// Undiscounted payout for reports: payout * (1+r).
inline double undiscounted_payout(double normalized_payout, double r) {
    if (!(r > -1.0)) throw ValidationError("undiscounted_payout: rate must be > -1");
    return normalized_payout * (1.0 + r);
}

}  // namespace nneg
