// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs against the shipped sample mortality table; the soft
// regulator-comparison check additionally runs when NNEG_A6770_TABLE names a
// user-supplied table.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nneg/book.hpp"
#include "nneg/insurance.hpp"
#include "nneg/lattice.hpp"
#include "nneg/market.hpp"
#include "nneg/mortality.hpp"
#include "nneg/superhedge.hpp"
#include "nneg/verification.hpp"

using namespace nneg;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds) {
    std::ostringstream line;
    line << (pass ? "PASS" : "FAIL") << "  criterion " << criterion << ": " << detail << "  ["
         << std::fixed << seconds << "s]";
    std::cout << line.str() << "\n";
    if (!pass) ++g_failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void criterion_1_calibration() {
    Timer t;
    const auto model = crr_from_vol(100.0, 0.15);
    const double q = risk_neutral_down_prob(model);
    const double loan = model.down_price() + 1.0;
    const bool pass = std::abs(q - 0.5374) <= 0.0005 && std::abs(loan - 87.07) <= 0.01;
    std::ostringstream d;
    d << "calibration q = " << q << " (want 0.5374 +- 0.0005), normalized loan = " << loan
      << " (want 87.07 +- 0.01)";
    report(1, pass, d.str(), t.elapsed());
}

void criterion_2_fig1_regime() {
    Timer t;
    const double p = 0.45, q = 0.5374, eps = 0.1;
    bool pass = true;
    std::ostringstream d;

    int crossover = -1;
    double per_life_1000 = 0.0;
    for (int n = 1; n <= 1000; ++n) {
        const double e = n * p * (1.0 + eps);
        const double x0 = xol_price_binomial(n, e, p);
        const auto res = superhedge_price(n, p, q, e, x0);
        const double per_life = res.cost / n;
        const bool xol_cheaper = e * q + x0 < n * p;
        if (crossover < 0 && xol_cheaper) crossover = n;
        if (crossover < 0) {
            // GLA regime: per-life cost pinned at p
            if (res.case_id != HedgeCase::GlaOnly || std::abs(per_life - p) > 1e-12) {
                pass = false;
                d << "expected GLA at 0.45 for n=" << n << " got " << per_life << "; ";
            }
        } else {
            if (res.case_id != HedgeCase::XolPlusPuts || per_life >= p) {
                pass = false;
                d << "expected XoL regime below 0.45 at n=" << n << "; ";
            }
        }
        if (n == 1000) per_life_1000 = per_life;
    }
    const double limit = p * q * (1.0 + eps);
    if (crossover < 0) {
        pass = false;
        d << "no crossover found; ";
    }
    if (std::abs(per_life_1000 - 0.2660) > 0.002) {
        pass = false;
        d << "per-life at n=1000 is " << per_life_1000 << ", want 0.2660 +- 0.002; ";
    }
    d << "GLA at 0.45 for n < " << crossover << ", XoL+puts below 0.45 beyond, per-life(1000) = "
      << per_life_1000 << " vs pq(1+eps) = " << limit;
    report(2, pass, d.str(), t.elapsed());
}

void criterion_3_counterexample() {
    Timer t;
    const auto res = suites::counterexample_regression();
    report(3, res.pass, res.detail, t.elapsed());
}

// Returns the tuples checked so criterion 7 can reuse them.
std::vector<TupleGenerator::Tuple> criterion_4_strong_duality() {
    Timer t;
    const int count = 500;
    TupleGenerator gen(20240817);
    std::vector<TupleGenerator::Tuple> tuples;
    bool pass = true;
    std::ostringstream d;
    double worst = 0.0;
    int fallbacks = 0;
    for (int i = 0; i < count; ++i) {
        const auto tp = gen.next();
        tuples.push_back(tp);
        SuperhedgeResult res;
        try {
            res = superhedge_price(tp.n, tp.p, tp.q, tp.e, tp.x0);
        } catch (const std::exception& ex) {
            pass = false;
            d << "tuple " << i << " rejected (" << ex.what() << "); ";
            continue;
        }
        if (res.lp_fallback) ++fallbacks;
        const auto inst = build_symmetric_instance(tp.n, tp.p, tp.q, tp.e, tp.x0);
        const auto sol = solve_primal(inst);
        const auto bounds = solve_dual_bounds(inst);
        const double gap = std::max(std::abs(res.cost - sol.cost),
                                    std::abs(res.cost - bounds.p_high));
        worst = std::max(worst, gap);
        if (sol.status != LpStatus::Optimal || gap > 1e-8) {
            pass = false;
            d << "gap " << gap << " at tuple " << i << "; ";
        }
        if (!verify_certificate(res.certificate, tp.n, tp.p, tp.q, tp.e, tp.x0, res.cost).pass) {
            pass = false;
            d << "certificate failed at tuple " << i << "; ";
        }
    }
    d << count << " tuples: engine = LP = dual max (worst gap " << worst << "), " << fallbacks
      << " LP-priced fractional points, all certificates verified";
    report(4, pass, d.str(), t.elapsed());
    return tuples;
}

void criterion_5_reduction() {
    Timer t;
    const auto res = suites::exchangeability_reduction(77);
    report(5, res.pass, res.detail, t.elapsed());
}

void criterion_6_large_deviations() {
    Timer t;
    const auto res = suites::large_deviations();
    report(6, res.pass, res.detail, t.elapsed());
}

void criterion_7_undervaluation(const std::vector<TupleGenerator::Tuple>& tuples,
                                const std::vector<MultiPeriodResult>& sweep) {
    Timer t;
    bool pass = true;
    std::ostringstream d;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const auto& tp = tuples[i];
        try {
            const auto res = superhedge_price(tp.n, tp.p, tp.q, tp.e, tp.x0);
            if (tp.n * tp.p * tp.q > res.cost + 1e-9) {
                pass = false;
                d << "n*p*q exceeds the superhedge cost at tuple " << i << "; ";
            }
        } catch (const std::exception&) {
        }
    }
    for (const auto& r : sweep) {
        if (r.dcf_bs > r.v0 + 1e-9) {
            pass = false;
            d << "dcf_bs " << r.dcf_bs << " exceeds v0 " << r.v0 << "; ";
        }
    }
    d << "n*p*q <= cost on all " << tuples.size() << " tuples and dcf_bs <= v0 on all "
      << sweep.size() << " swept cohorts";
    report(7, pass, d.str(), t.elapsed());
}

std::vector<MultiPeriodResult> criterion_8_multi_period() {
    Timer t;
    bool pass = true;
    std::ostringstream d;
    const auto table = load_table_file("data/sample_mortality.csv");
    const auto model = crr_from_vol(100.0, 0.15);
    const ReinsurerBasis basis{0.45, 0.1, 0.0};

    // T = 1 lattice equals single-period pricing
    const MortalityTable t1(70, {0.45, 1.0});
    for (int n : {1, 3, 25}) {
        const PolicySchedule s{87.07, 0.0, 1, 70, n};
        const auto multi = backward_induct(s, t1, basis, model);
        const auto single = price_single_period(model, LoanSpec{87.07}, n, 0.45, 0.1, 0.0);
        if (std::abs(multi.v0 - single.cost) > 1e-9) {
            pass = false;
            d << "T=1 mismatch at n=" << n << " (" << multi.v0 << " vs " << single.cost << "); ";
        }
    }

    // exhaustive path simulation: no funding shortfall
    long paths = 0;
    for (int n : {1, 2, 3}) {
        const PolicySchedule s{70.0, 0.05, 4, 70, n};
        const auto result = backward_induct(s, table, basis, model);
        const auto rep = simulate_paths(s, table, basis, model, result, 1e-9);
        paths += rep.paths;
        if (rep.shortfalls != 0) {
            pass = false;
            d << rep.shortfalls << " shortfalls at n=" << n << "; ";
        }
    }

    // Fig-2-style sweep on the shipped sample table
    std::vector<MultiPeriodResult> sweep;
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {1, 2, 5, 10, 20, 50, 100}) {
        const PolicySchedule s{40.0, 0.05, 41, 70, n};
        sweep.push_back(backward_induct(s, table, basis, model));
        const double per = sweep.back().per_policy;
        if (per > prev + 1e-9) {
            pass = false;
            d << "per-policy cost increased at n=" << n << " (" << per << " > " << prev << "); ";
        }
        prev = per;
    }
    d << "T=1 consistency 1e-9, " << paths << " simulated paths with zero shortfall, v0/n "
      << "non-increasing over the sweep (" << sweep.front().per_policy << " down to "
      << sweep.back().per_policy << ")";

    // soft regulator comparison, only with a user-supplied table
    if (const char* a6770 = std::getenv("NNEG_A6770_TABLE")) {
        const auto user_table = load_table_file(a6770);
        const PolicySchedule s{40.0, 0.05, 1000, 70, 100};
        const auto r = backward_induct(s, user_table, basis, model);
        const double ratio = 31.5 / r.per_policy;
        if (ratio < 2.0 || ratio > 3.0) {
            pass = false;
            d << "; regulator comparison ratio " << ratio << " outside [2, 3]";
        } else {
            d << "; regulator comparison ratio " << ratio << " in [2, 3]";
        }
    } else {
        d << "; regulator comparison skipped (set NNEG_A6770_TABLE to run)";
    }
    report(8, pass, d.str(), t.elapsed());
    return sweep;
}

}  // namespace

int main() {
    std::cout.precision(10);
    criterion_1_calibration();
    criterion_2_fig1_regime();
    criterion_3_counterexample();
    const auto tuples = criterion_4_strong_duality();
    criterion_5_reduction();
    criterion_6_large_deviations();
    const auto sweep = criterion_8_multi_period();
    criterion_7_undervaluation(tuples, sweep);
    if (g_failures == 0) {
        std::cout << "acceptance: all criteria passed\n";
        return 0;
    }
    std::cout << "acceptance: " << g_failures << " criteria FAILED\n";
    return 1;
}
