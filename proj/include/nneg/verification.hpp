#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nneg/book.hpp"
#include "nneg/insurance.hpp"
#include "nneg/instance.hpp"
#include "nneg/superhedge.hpp"

namespace nneg {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Deterministic generator of strictly arbitrage-free (n, p, q, e, x0)
/// tuples. Alternates integer excesses (closed forms exactly optimal) with
/// fractional ones (certificate-or-LP path). Raw engine output only; no
/// platform-dependent distributions.
class TupleGenerator {
public:
    explicit TupleGenerator(std::uint64_t seed) : rng_(seed) {}

    struct Tuple {
        int n = 0;
        double p = 0.0, q = 0.0, e = 0.0, x0 = 0.0;
        bool integer_excess = false;
    };

    Tuple next() {
        const bool integer_e = (count_++ % 2) == 0;
        while (true) {
            Tuple t;
            t.integer_excess = integer_e;
            t.n = integer_e ? uniform_int(2, 120) : uniform_int(1, 120);
            t.p = unif(0.03, 0.93);
            t.q = unif(0.03, 0.93);
            if (integer_e) {
                t.e = uniform_int(1, t.n - 1);
            } else {
                t.e = unif(1e-3, t.n * 0.999);
                if (std::abs(t.e - std::round(t.e)) < 1e-6) continue;
            }
            if (t.n == 1) {
                t.x0 = t.p * (1.0 - t.e);
                return t;
            }
            const double lo = std::max(0.0, t.n * t.p - t.e);
            const double hi = t.p * (t.n - t.e);
            if (hi <= lo * (1.0 + 1e-9) + 1e-12) continue;
            t.x0 = lo + unif(0.02, 0.98) * (hi - lo);
            return t;
        }
    }

private:
    std::mt19937_64 rng_;
    std::uint64_t count_ = 0;
    double unif(double lo, double hi) { return lo + (hi - lo) * ((rng_() >> 11) * 0x1.0p-53); }
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

namespace suites {

/// Certificates across the case grid, including fractional splits, the n=1
/// redundant quote and the GLA-equivalent e=0 path. inject_fault perturbs one
/// measure to prove the harness detects violations.
inline SuiteResult certificate_grid(bool inject_fault = false) {
    SuiteResult res{"certificate-grid", true, ""};
    std::ostringstream detail;
    int checked = 0;

    struct Config {
        int n;
        double p, q, e;
        double x0;  ///< negative means "price from the binomial law at p"
    };
    const std::vector<Config> grid = {
        {1, 0.45, 0.5374, 0.495, -1.0},  {2, 0.45, 0.5374, 0.99, -1.0},
        {10, 0.45, 0.5374, 4.95, -1.0},  {100, 0.45, 0.5374, 49.5, -1.0},
        {100, 0.45, 0.5374, 50.0, -1.0}, {5, 0.9, 0.2, 2.0, 2.6},
        {6, 0.9, 0.25, 2.0, 3.5},        {10, 0.2, 0.8, 5.0, 0.9},
        {17, 0.55, 0.3, 8.5, -1.0},      {4, 0.45, 0.5, 0.0, 1.8},
        {40, 0.3, 0.6, 13.0, -1.0},      {33, 0.7, 0.4, 11.1, -1.0},
    };
    for (const auto& cfg : grid) {
        double x0 = cfg.x0;
        if (x0 < 0.0) {
            if (cfg.n == 1)
                x0 = cfg.p * (1.0 - cfg.e);
            else
                x0 = xol_price_binomial(cfg.n, cfg.e, cfg.p);
        }
        SuperhedgeResult priced;
        try {
            priced = superhedge_price(cfg.n, cfg.p, cfg.q, cfg.e, x0);
        } catch (const std::exception& ex) {
            res.pass = false;
            detail << "pricing failed at n=" << cfg.n << ": " << ex.what() << "; ";
            continue;
        }
        auto measure = priced.certificate;
        if (inject_fault && checked == 3) measure.y[cfg.n] += 1e-3;
        const bool xol_constraint_applies = cfg.e > 0.0;
        const auto rep = xol_constraint_applies
                             ? verify_certificate(measure, cfg.n, cfg.p, cfg.q, cfg.e, x0,
                                                  priced.cost)
                             : CertificateReport{};
        if (xol_constraint_applies && !rep.pass) {
            res.pass = false;
            detail << "certificate failed at n=" << cfg.n << " e=" << cfg.e << " ("
                   << (rep.violations.empty() ? "?" : rep.violations.front()) << "); ";
        }
        ++checked;
    }
    if (res.pass) detail << checked << " configurations certified";
    res.detail = detail.str();
    return res;
}

/// Closed-form cost = primal LP = dual maximum on random no-arbitrage tuples,
/// every certificate re-verified, and the independence (undervaluation)
/// lower bound n*p*q respected.
inline SuiteResult strong_duality(std::uint64_t seed, int tuples) {
    SuiteResult res{"strong-duality", true, ""};
    std::ostringstream detail;
    TupleGenerator gen(seed);
    int fallbacks = 0;
    double worst_gap = 0.0;
    for (int i = 0; i < tuples; ++i) {
        const auto t = gen.next();
        SuperhedgeResult priced;
        try {
            priced = superhedge_price(t.n, t.p, t.q, t.e, t.x0);
        } catch (const std::exception& ex) {
            res.pass = false;
            detail << "tuple " << i << " rejected: " << ex.what() << "; ";
            continue;
        }
        if (priced.lp_fallback) ++fallbacks;
        const auto inst = build_symmetric_instance(t.n, t.p, t.q, t.e, t.x0);
        const auto sol = solve_primal(inst);
        const auto bounds = solve_dual_bounds(inst);
        const double gap = std::max(std::abs(priced.cost - sol.cost),
                                    std::abs(priced.cost - bounds.p_high));
        worst_gap = std::max(worst_gap, gap);
        if (sol.status != LpStatus::Optimal || gap > 1e-8) {
            res.pass = false;
            detail << "duality gap " << gap << " at tuple " << i << " (n=" << t.n << "); ";
        }
        if (!verify_certificate(priced.certificate, t.n, t.p, t.q, t.e, t.x0, priced.cost).pass) {
            res.pass = false;
            detail << "certificate failed at tuple " << i << "; ";
        }
        if (t.n * t.p * t.q > priced.cost + 1e-9) {
            res.pass = false;
            detail << "undervaluation bound violated at tuple " << i << "; ";
        }
        if (t.integer_excess &&
            std::abs(priced.cost - std::min({t.n * t.p, t.n * t.q, t.e * t.q + t.x0})) > 1e-12) {
            res.pass = false;
            detail << "integer-excess closed form off at tuple " << i << "; ";
        }
    }
    if (res.pass)
        detail << tuples << " tuples, worst gap " << worst_gap << ", " << fallbacks
               << " via LP fallback";
    res.detail = detail.str();
    return res;
}

/// FULL 2^(n+1)-state optimum equals the SYMMETRIC 2(n+1)-state optimum on
/// homogeneous books, n = 2..6.
inline SuiteResult exchangeability_reduction(std::uint64_t seed) {
    SuiteResult res{"exchangeability-reduction", true, ""};
    std::ostringstream detail;
    std::mt19937_64 rng(seed);
    auto unif = [&](double lo, double hi) { return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53); };
    const PropertyBinomial model{100.0, 1.6, 0.5};
    const double q = risk_neutral_down_prob(model);
    int checked = 0;
    for (int n = 2; n <= 6; ++n) {
        for (int rep = 0; rep < 5; ++rep) {
            const double p = unif(0.1, 0.8);
            const double ltv = unif(55.0, 155.0);
            const double unit = ltv - 50.0;
            const double e_currency = unif(0.2, 0.9) * n * unit;
            VaryingLoanBook book;
            for (int i = 0; i < n; ++i) book.lives.push_back({1.0, ltv, p});
            const double x0 = xol_price_independent(model, book, e_currency);
            if (x0 <= 0.0) continue;
            const auto full = solve_primal(build_general_instance(model, book, e_currency, x0));
            const auto symm =
                solve_primal(build_symmetric_instance(n, p, q, e_currency, x0, unit));
            if (full.status != LpStatus::Optimal || symm.status != LpStatus::Optimal ||
                std::abs(full.cost - symm.cost) > 1e-8 * std::max(1.0, std::abs(full.cost))) {
                res.pass = false;
                detail << "mismatch at n=" << n << " (" << full.cost << " vs " << symm.cost
                       << "); ";
            }
            ++checked;
        }
    }
    if (res.pass) detail << checked << " book/instance pairs agree";
    res.detail = detail.str();
    return res;
}

/// Exact binomial XoL price below the Chernoff-style bound for n = 1..2000
/// and eta in {0, 0.05}; reports the first N beyond which the per-life price
/// stays under 1e-6 (exact scan up to the bound-certified tail).
inline SuiteResult large_deviations() {
    SuiteResult res{"large-deviations", true, ""};
    std::ostringstream detail;
    for (double eta : {0.0, 0.05}) {
        const ReinsurerBasis basis{0.45, 0.1, eta};
        const double rate = rate_function(basis.b(), basis.a());
        for (int n = 1; n <= 2000; ++n) {
            const double e = xol_excess(n, basis);
            if (e >= n) continue;
            const double exact = xol_price_binomial(n, e, basis.b());
            if (exact > ldp_price_bound(n, basis) + 1e-12) {
                res.pass = false;
                detail << "bound violated at n=" << n << " eta=" << eta << "; ";
            }
        }
        // past n_cert the bound itself certifies a per-life price below 1e-6
        const int n_cert = static_cast<int>(std::ceil(std::log(1e6) / rate)) + 1;
        int threshold = -1;
        for (int n = 1; n <= n_cert; ++n) {
            const double e = xol_excess(n, basis);
            const double per_life =
                e >= n ? 0.0 : xol_price_binomial(n, e, basis.b()) / n;
            if (per_life < 1e-6) {
                if (threshold < 0) threshold = n;
            } else {
                threshold = -1;
            }
        }
        if (threshold < 0) {
            res.pass = false;
            detail << "no per-life threshold found for eta=" << eta << "; ";
        } else {
            detail << "eta=" << eta << ": per-life price < 1e-6 for all n >= " << threshold
                   << " (exact to " << n_cert << ", bound beyond); ";
        }
    }
    res.detail = detail.str();
    return res;
}

/// The varying-loan counter-example: SH costs 40.00 / 40.5 / 49.09, LP
/// optimum 37.14, independent-lives quote 1.8225.
inline SuiteResult counterexample_regression() {
    SuiteResult res{"counterexample-regression", true, ""};
    std::ostringstream detail;
    const PropertyBinomial model{100.0, 1.6, 0.5};
    VaryingLoanBook book;
    book.lives = {{1.0, 70.0, 0.45}, {1.0, 80.0, 0.45}, {1.0, 90.0, 0.45}};
    const auto costs = sh_strategy_costs(model, book, 70.0, 1.822);
    const auto sol = solve_primal(build_general_instance(model, book, 70.0, 1.822));
    const double x_indep = xol_price_independent(model, book, 70.0);
    auto expect = [&](const char* name, double got, double want, double tol) {
        if (std::abs(got - want) > tol) {
            res.pass = false;
            detail << name << " = " << got << ", want " << want << " +- " << tol << "; ";
        }
    };
    expect("SH1", costs.sh1_xol_puts, 40.00, 0.01);
    expect("SH2", costs.sh2_gla, 40.5, 0.01);
    expect("SH3", costs.sh3_puts, 49.09, 0.01);
    expect("LP optimum", sol.cost, 37.14, 0.01);
    expect("independent x0", x_indep, 1.8225, 0.0005);
    if (sol.cost >= std::min({costs.sh1_xol_puts, costs.sh2_gla, costs.sh3_puts})) {
        res.pass = false;
        detail << "LP optimum does not beat the named strategies; ";
    }
    if (res.pass) detail << "LP 37.14 < min(40.00, 40.5, 49.09), x0 1.8225 reproduced";
    res.detail = detail.str();
    return res;
}

}  // namespace suites

/// The full verification battery used by the CLI.
inline std::vector<SuiteResult> run_verification(std::uint64_t seed, int tuples,
                                                 bool inject_fault = false) {
    std::vector<SuiteResult> out;
    out.push_back(suites::certificate_grid(inject_fault));
    out.push_back(suites::strong_duality(seed, tuples));
    out.push_back(suites::exchangeability_reduction(seed + 1));
    out.push_back(suites::large_deviations());
    out.push_back(suites::counterexample_regression());
    return out;
}

}  // namespace nneg
