#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nneg/errors.hpp"
#include "nneg/instance.hpp"
#include "nneg/insurance.hpp"
#include "nneg/market.hpp"
#include "nneg/simplex.hpp"

namespace nneg {

enum class HedgeCase { XolPlusPuts, GlaOnly, AllPuts };

inline const char* to_string(HedgeCase c) {
    switch (c) {
        case HedgeCase::XolPlusPuts: return "XOL_PLUS_PUTS";
        case HedgeCase::GlaOnly: return "GLA_ONLY";
        case HedgeCase::AllPuts: return "ALL_PUTS";
    }
    return "?";
}

/// Asset holdings; any sign. `sla` is per-life and only populated by the
/// general (book) LP path.
struct HedgePortfolio {
    double puts = 0.0;
    double put_strike = 0.0;
    double gla = 0.0;
    double xol = 0.0;
    double cash = 0.0;
    double stock = 0.0;
    std::vector<double> sla;
};

/// Joint law of (deaths, property move) on the reduced state space:
/// x[k] = Q(D=k, up), y[k] = Q(D=k, down).
struct ExtremalMeasure {
    Eigen::VectorXd x;
    Eigen::VectorXd y;

    int n() const { return static_cast<int>(x.size()) - 1; }
    double total_mass() const { return x.sum() + y.sum(); }
    double down_mass() const { return y.sum(); }
    double mean_deaths() const {
        double m = 0.0;
        for (int k = 0; k <= n(); ++k) m += k * (x[k] + y[k]);
        return m;
    }
    double xol_value(double e) const {
        double v = 0.0;
        for (int k = 0; k <= n(); ++k) v += std::max(k - e, 0.0) * (x[k] + y[k]);
        return v;
    }
    /// E[D (L-S1)^+] with the normalized unit claim k * 1_down.
    double expected_claim() const {
        double v = 0.0;
        for (int k = 0; k <= n(); ++k) v += k * y[k];
        return v;
    }
};

struct SuperhedgeResult {
    HedgeCase case_id = HedgeCase::GlaOnly;
    double cost = 0.0;  ///< normalized units (claim k per death in the down state)
    HedgePortfolio portfolio;
    ExtremalMeasure certificate;
    bool lp_fallback = false;  ///< true when the closed-form value was unattainable
                               ///< on the integer state space and the LP priced it
};

namespace detail {

constexpr double kMassTol = 1e-9;

inline bool nearly_integer(double e) { return std::abs(e - std::round(e)) < 1e-12; }

/// Split mass `m` with death-count mean `mean` across the two integers
/// bracketing `mean`; appends to the measure branch.
inline void place_split(Eigen::VectorXd& branch, double m, double mean, int n) {
    if (m <= 0.0) return;
    if (nearly_integer(mean)) {
        branch[std::min(static_cast<int>(std::llround(mean)), n)] += m;
        return;
    }
    const double lo = std::floor(mean);
    const int f = static_cast<int>(lo);
    if (f >= n) {
        branch[n] += m;
        return;
    }
    const double w_hi = (mean - lo) * m;
    branch[f] += m - w_hi;
    branch[f + 1] += w_hi;
}

}  // namespace detail

/// One-period no-arbitrage screen and case selection for the
/// normalized claim. Validates the quote against both sides of the
/// arbitrage-free region: x0/(n-e) < p (equality is
/// admitted at n=1 where the XoL payout is affine in D and merely redundant)
/// and x0 >= np - e (an XoL cheaper than its GLA-and-cash replica is also an
/// arbitrage). At boundary equalities the
/// candidate costs tie and either choice is minimal.
inline HedgeCase classify_case(int n, double p, double q, double e, double x0) {
    if (n < 1) throw ValidationError("classify_case: n must be >= 1");
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
        throw ValidationError("classify_case: p and q must be in (0,1)");
    if (!(x0 >= 0.0)) throw ValidationError("classify_case: x0 must be >= 0");
    if (e >= n) throw ValidationError("classify_case: excess e >= n, contract is worthless");

    if (e <= 0.0) {
        // (D-e)^+ = D - e: the XoL is one GLA plus (-e) cash. Any other quote
        // reprices a replicable payoff.
        const double fair = n * p - e;
        if (std::abs(x0 - fair) > detail::kMassTol * std::max(1.0, fair))
            throw ArbitrageError("classify_case: XoL with e <= 0 is GLA-equivalent; quote " +
                                 std::to_string(x0) + " != replication price " + std::to_string(fair));
        return p <= q ? HedgeCase::GlaOnly : HedgeCase::AllPuts;
    }

    const double ratio = x0 / (n - e);
    if (n == 1) {
        if (ratio > p + 1e-12)
            throw ArbitrageError("classify_case: x0/(n-e) = " + std::to_string(ratio) +
                                 " > p = " + std::to_string(p));
    } else if (!(ratio < p)) {
        throw ArbitrageError("classify_case: violated x0/(n-e) < p (" + std::to_string(ratio) +
                             " >= " + std::to_string(p) + ")");
    }
    if (x0 < n * p - e - detail::kMassTol)
        throw ArbitrageError("classify_case: x0 = " + std::to_string(x0) + " < np - e = " +
                             std::to_string(n * p - e) + "; XoL underpriced against GLA + cash");

    if (n * p < e * q + x0) return HedgeCase::GlaOnly;
    if (ratio >= q) return HedgeCase::AllPuts;
    return HedgeCase::XolPlusPuts;
}

inline double case_cost(HedgeCase c, int n, double p, double q, double e, double x0) {
    switch (c) {
        case HedgeCase::XolPlusPuts: return e * q + x0;
        case HedgeCase::GlaOnly: return n * p;
        case HedgeCase::AllPuts: return n * q;
    }
    return 0.0;
}

namespace detail {

/// Closed-form masses for integer excess; they land exactly on states.
inline ExtremalMeasure integer_measure(HedgeCase c, int n, double p, double q, double e,
                                       double x0) {
    ExtremalMeasure m;
    m.x = Eigen::VectorXd::Zero(n + 1);
    m.y = Eigen::VectorXd::Zero(n + 1);
    const int ei = static_cast<int>(std::llround(e));
    const double r = x0 / (n - e);
    switch (c) {
        case HedgeCase::XolPlusPuts:
            m.y[n] += r;
            m.y[ei] += q - r;
            m.x[ei] += (n * p - (e * q + x0)) / e;
            m.x[0] += 1.0 - q - (n * p - (e * q + x0)) / e;
            break;
        case HedgeCase::GlaOnly:
            m.y[n] += r;
            m.y[ei] += (n / e) * (p - r);
            m.y[0] += q - (n * p - x0) / e;
            m.x[0] += 1.0 - q;
            break;
        case HedgeCase::AllPuts:
            m.y[n] += q;
            m.x[n] += r - q;
            m.x[ei] += (n / e) * (p - r);
            m.x[0] += 1.0 - (n * p - x0) / e;
            break;
    }
    for (int k = 0; k <= n; ++k) {
        for (double* v : {&m.x[k], &m.y[k]}) {
            if (*v < 0.0) {
                if (*v < -1e-11)
                    throw InternalInconsistency("integer_measure: negative mass " +
                                                std::to_string(*v) + " at k=" + std::to_string(k));
                *v = 0.0;
            }
        }
    }
    return m;
}

/// GLA-equivalent quote (e <= 0): the XoL moment is linear in D and holds
/// automatically, so split masses matching mass/q/np and the claim suffice.
inline ExtremalMeasure redundant_measure(HedgeCase c, int n, double p, double q) {
    ExtremalMeasure m;
    m.x = Eigen::VectorXd::Zero(n + 1);
    m.y = Eigen::VectorXd::Zero(n + 1);
    if (c == HedgeCase::GlaOnly) {  // p <= q: all death mass rides the down branch
        place_split(m.y, q, n * p / q, n);
        m.x[0] += 1.0 - q;
    } else {  // q < p
        m.y[n] += q;
        place_split(m.x, 1.0 - q, n * (p - q) / (1.0 - q), n);
    }
    return m;
}

/// Fractional excess: exact feasibility solve on the restricted support
/// {0, floor(e), ceil(e), n} x {up, down} at the target cost. A point mass
/// at the fractional count k=e has no integer state; a two-point split alone
/// breaks the XoL moment, so the compensating adjustments are solved for
/// exactly. Empty support means the target cost is not attainable here.
inline std::optional<ExtremalMeasure> restricted_support_measure(int n, double p, double q,
                                                                 double e, double x0,
                                                                 double target_cost) {
    std::vector<int> ks{0};
    const int f = static_cast<int>(std::floor(e));
    for (int k : {f, f + 1, n})
        if (k >= 0 && k <= n && k != 0 && (ks.empty() || k != ks.back())) ks.push_back(k);
    const auto nk = static_cast<Eigen::Index>(ks.size());

    lp::StandardForm<double> sf;
    sf.A.resize(5, 2 * nk);
    sf.b.resize(5);
    sf.c = lp::DenseVector<double>::Zero(2 * nk);
    for (Eigen::Index j = 0; j < 2 * nk; ++j) {
        const bool down = j < nk;
        const int k = ks[static_cast<std::size_t>(down ? j : j - nk)];
        sf.A(0, j) = 1.0;
        sf.A(1, j) = down ? 1.0 : 0.0;
        sf.A(2, j) = k;
        sf.A(3, j) = std::max(k - e, 0.0);
        sf.A(4, j) = down ? k : 0.0;
    }
    sf.b << 1.0, q, n * p, x0, target_cost;

    const auto res = lp::simplex_solve(sf);
    if (res.status != lp::SolveStatus::Optimal) return std::nullopt;
    ExtremalMeasure m;
    m.x = Eigen::VectorXd::Zero(n + 1);
    m.y = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index j = 0; j < 2 * nk; ++j) {
        const bool down = j < nk;
        const int k = ks[static_cast<std::size_t>(down ? j : j - nk)];
        (down ? m.y : m.x)[k] += res.x[j];
    }
    return m;
}

}  // namespace detail

struct CertificateReport {
    bool pass = true;
    double max_violation = 0.0;
    std::vector<std::string> violations;
};

/// Checks nonnegativity, total mass, the four pricing moments and the claim
/// value, all to the given absolute tolerance.
inline CertificateReport verify_certificate(const ExtremalMeasure& m, int n, double p, double q,
                                            double e, double x0, double claimed_cost,
                                            double tol = 1e-9) {
    CertificateReport rep;
    auto fail = [&](const std::string& msg, double violation) {
        rep.pass = false;
        rep.max_violation = std::max(rep.max_violation, violation);
        rep.violations.push_back(msg);
    };
    if (m.x.size() != n + 1 || m.y.size() != n + 1) {
        fail("measure has wrong length", 1.0);
        return rep;
    }
    for (int k = 0; k <= n; ++k) {
        if (m.x[k] < -tol) fail("negative mass x[" + std::to_string(k) + "]", -m.x[k]);
        if (m.y[k] < -tol) fail("negative mass y[" + std::to_string(k) + "]", -m.y[k]);
    }
    const auto check = [&](const char* name, double got, double want) {
        const double err = std::abs(got - want);
        if (err > tol) fail(std::string(name) + ": got " + std::to_string(got) + ", want " +
                                std::to_string(want), err);
    };
    check("total mass", m.total_mass(), 1.0);
    check("down-state mass (stock constraint)", m.down_mass(), q);
    check("mean deaths (GLA constraint)", m.mean_deaths(), n * p);
    check("XoL constraint", m.xol_value(e), x0);
    check("expected claim", m.expected_claim(), claimed_cost);
    return rep;
}

/// Extremal measure certifying the case cost. Integer excess uses the exact
/// closed-form masses; fractional excess solves the restricted-support split.
/// When the case cost is unattainable on integer states the maximizing
/// measure from the symmetric dual LP is returned instead (its expected claim
/// is then strictly below the case cost).
inline ExtremalMeasure build_extremal_measure(HedgeCase c, int n, double p, double q, double e,
                                              double x0) {
    if (e <= 0.0) return detail::redundant_measure(c, n, p, q);
    const double cost = case_cost(c, n, p, q, e, x0);
    if (detail::nearly_integer(e) && e >= 1.0)
        return detail::integer_measure(c, n, p, q, std::round(e), x0);
    if (auto m = detail::restricted_support_measure(n, p, q, e, x0, cost)) {
        if (verify_certificate(*m, n, p, q, e, x0, cost).pass) return *m;
    }
    const auto sol = solve_primal(build_symmetric_instance(n, p, q, e, x0));
    if (sol.status != LpStatus::Optimal)
        throw ArbitrageError("build_extremal_measure: no pricing measure exists for the quote");
    ExtremalMeasure m;
    m.x = Eigen::VectorXd::Zero(n + 1);
    m.y = Eigen::VectorXd::Zero(n + 1);
    for (int k = 0; k <= n; ++k) {
        m.x[k] = sol.dual[2 * k];      // states ordered (k, up), (k, down)
        m.y[k] = sol.dual[2 * k + 1];
    }
    return m;
}

/// Cheapest superhedge of the normalized claim D * 1_down in the combined
/// market (cash, stock, GLA at np, XoL(e) at x0). The closed-form candidate
/// min(np, nq, eq+x0) is returned with its named portfolio whenever a
/// certificate attains it (always, for integer e); otherwise the candidate is
/// only an upper bound on the integer state space and the symmetric LP prices
/// the hedge, with holdings and maximizing measure taken from that solve.
inline SuperhedgeResult superhedge_price(int n, double p, double q, double e, double x0) {
    const HedgeCase c = classify_case(n, p, q, e, x0);
    SuperhedgeResult res;
    res.case_id = c;
    res.cost = case_cost(c, n, p, q, e, x0);
    switch (c) {
        case HedgeCase::XolPlusPuts:
            res.portfolio.puts = e;
            res.portfolio.xol = 1.0;
            break;
        case HedgeCase::GlaOnly:
            res.portfolio.gla = 1.0;
            break;
        case HedgeCase::AllPuts:
            res.portfolio.puts = n;
            break;
    }

    if (e <= 0.0) {
        res.cost = std::min(n * p, n * q);
        res.portfolio = HedgePortfolio{};
        if (c == HedgeCase::GlaOnly)
            res.portfolio.gla = 1.0;
        else
            res.portfolio.puts = n;
        res.certificate = detail::redundant_measure(c, n, p, q);
        return res;
    }

    if (detail::nearly_integer(e) && e >= 1.0) {
        res.certificate = detail::integer_measure(c, n, p, q, std::round(e), x0);
        return res;
    }
    if (auto m = detail::restricted_support_measure(n, p, q, e, x0, res.cost)) {
        if (verify_certificate(*m, n, p, q, e, x0, res.cost).pass) {
            res.certificate = *m;
            return res;
        }
    }

    const auto inst = build_symmetric_instance(n, p, q, e, x0);
    const auto sol = solve_primal(inst);
    if (sol.status != LpStatus::Optimal)
        throw ArbitrageError("superhedge_price: quotes admit an arbitrage (no pricing measure)");
    res.lp_fallback = true;
    res.cost = sol.cost;
    res.portfolio = HedgePortfolio{};
    res.portfolio.cash = sol.holdings[0];
    res.portfolio.puts = sol.holdings[1];
    res.portfolio.gla = sol.holdings[2];
    res.portfolio.xol = sol.holdings[3];
    res.certificate.x = Eigen::VectorXd::Zero(n + 1);
    res.certificate.y = Eigen::VectorXd::Zero(n + 1);
    for (int k = 0; k <= n; ++k) {
        res.certificate.x[k] = sol.dual[2 * k];
        res.certificate.y[k] = sol.dual[2 * k + 1];
    }
    return res;
}

struct SuperhedgeCheck {
    bool pass = true;
    double min_slack = std::numeric_limits<double>::infinity();
    std::vector<std::string> violations;
};

/// State-by-state domination check over the 2(n+1) reduced states for a
/// cohort-symmetric portfolio. Claim per death is (L - S1)^+.
inline SuperhedgeCheck verify_superhedge(const HedgePortfolio& portfolio, int n,
                                         const PropertyBinomial& model, const LoanSpec& loan,
                                         double e, double tol = 1e-9) {
    for (double s : portfolio.sla)
        if (s != 0.0)
            throw ValidationError(
                "verify_superhedge: per-life SLA holdings need full states; use the book LP checks");
    const double strike = portfolio.put_strike > 0.0
                              ? portfolio.put_strike
                              : normalize_claim(model, loan).effective_strike;
    SuperhedgeCheck rep;
    for (int k = 0; k <= n; ++k) {
        for (int down = 0; down <= 1; ++down) {
            const double s1 = down ? model.down_price() : model.up_price();
            const double claim = k * std::max(loan.loan - s1, 0.0);
            const double value = portfolio.cash + portfolio.stock * s1 +
                                 portfolio.puts * std::max(strike - s1, 0.0) + portfolio.gla * k +
                                 portfolio.xol * std::max(k - e, 0.0);
            const double slack = value - claim;
            rep.min_slack = std::min(rep.min_slack, slack);
            if (slack < -tol) {
                rep.pass = false;
                std::ostringstream os;
                os << "short by " << -slack << " at (k=" << k << ", " << (down ? "down" : "up")
                   << ")";
                rep.violations.push_back(os.str());
            }
        }
    }
    return rep;
}

/// Full single-period NNEG pricing in market units: calibrates q, normalizes
/// the claim, prices the XoL (binomial on the reinsurer basis unless an
/// explicit unit quote is given), runs the normalized engine and rescales.
struct SinglePeriodPricing {
    PropertyBinomial model;
    LoanSpec loan;
    ClaimNormalization norm;
    int n = 0;
    double p = 0.0;
    double q = 0.0;
    double e = 0.0;        ///< attachment point in death units
    double x0_unit = 0.0;  ///< XoL price per unit death benefit
    bool degenerate = false;
    SuperhedgeResult normalized;  ///< engine output on the unit claim
    double cost = 0.0;            ///< currency: n*p*gla_addon + scale * normalized cost
    double per_life = 0.0;
    HedgePortfolio portfolio;     ///< currency-unit holdings; puts are counts at the effective strike
};

inline SinglePeriodPricing price_single_period(const PropertyBinomial& model, const LoanSpec& loan,
                                               int n, double p, double eps, double eta,
                                               std::optional<double> explicit_x0 = std::nullopt) {
    if (n < 1) throw ValidationError("price_single_period: n must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("price_single_period: p must be in (0,1)");
    SinglePeriodPricing out;
    out.model = model;
    out.loan = loan;
    out.n = n;
    out.p = p;
    out.q = risk_neutral_down_prob(model);
    out.norm = normalize_claim(model, loan);
    if (out.norm.degenerate) {
        out.degenerate = true;
        return out;
    }
    const ReinsurerBasis basis{p, eps, eta};
    out.e = xol_excess(n, basis);
    out.x0_unit = explicit_x0 ? *explicit_x0 : xol_price_binomial(n, out.e, basis.b());
    out.normalized = superhedge_price(n, p, out.q, out.e, out.x0_unit);

    const double scale = out.norm.scale;
    out.cost = n * p * out.norm.gla_addon + scale * out.normalized.cost;
    out.per_life = out.cost / n;
    const HedgePortfolio& np_ = out.normalized.portfolio;
    out.portfolio.puts = np_.puts;
    out.portfolio.put_strike = out.norm.effective_strike;
    out.portfolio.gla = scale * np_.gla + out.norm.gla_addon;
    out.portfolio.xol = scale * np_.xol;
    out.portfolio.cash = scale * np_.cash;
    out.portfolio.stock = scale * np_.stock;
    return out;
}

}  // namespace nneg
