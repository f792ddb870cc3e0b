#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nneg/errors.hpp"
#include "nneg/insurance.hpp"
#include "nneg/instance.hpp"
#include "nneg/market.hpp"
#include "nneg/mortality.hpp"
#include "nneg/superhedge.hpp"

namespace nneg {

/// Cohort of n identical policies: loan L_t = L0 (1+g)^t, annual periods.
struct PolicySchedule {
    double initial_loan = 0.0;
    double loan_rate = 0.0;
    int horizon = 0;
    int start_age = 0;
    int n = 0;

    void validate() const {
        if (!(initial_loan >= 0.0)) throw ValidationError("PolicySchedule: loan must be >= 0");
        if (!(loan_rate > -1.0)) throw ValidationError("PolicySchedule: loan rate must be > -1");
        if (horizon < 1) throw ValidationError("PolicySchedule: horizon must be >= 1");
        if (n < 1) throw ValidationError("PolicySchedule: n must be >= 1");
    }
};

inline double accumulate_loan(const PolicySchedule& schedule, int t) {
    if (t < 0 || t > schedule.horizon) throw ValidationError("accumulate_loan: t out of range");
    return schedule.initial_loan * std::pow(1.0 + schedule.loan_rate, t);
}

struct LatticeNode {
    int t = 0;
    int k = 0;  ///< cumulative deaths
    int j = 0;  ///< up-move count
    double price = 0.0;
    double continuation_cost = 0.0;
};

struct NodeHedge {
    double cost = 0.0;
    HedgePortfolio portfolio;
    bool closed_form = false;  ///< priced by the one-period closed form rather than the node LP
};

namespace detail {

/// Node XoL terms when the contract is usable: attachment below the survivor
/// count and a quote passing the node no-arbitrage screen (with the
/// redundant-fair equality admitted at one survivor).
inline std::optional<XoLQuote> node_xol(int m, double pt, const ReinsurerBasis& basis) {
    const double e = m * pt * (1.0 + basis.epsilon);
    if (!(e < m)) return std::nullopt;
    const double b = pt * (1.0 + basis.eta);
    if (!(b > 0.0 && b < 1.0)) return std::nullopt;
    const double x0 = xol_price_binomial(m, e, b);
    const double ratio = x0 / (m - e);
    if (m == 1) {
        if (ratio > pt + 1e-12) return std::nullopt;
    } else if (!(ratio < pt)) {
        return std::nullopt;
    }
    return XoLQuote{m, e, x0};
}

}  // namespace detail

/// Cheapest one-period superhedge at a lattice node: cover this period's
/// death claims plus the successor continuation costs in every reachable
/// state. next_up[dj] / next_down[dj] are the continuation costs after dj
/// further deaths. At nodes with no continuation liability and a usable XoL
/// the one-period closed form prices the node; otherwise the node LP does.
inline NodeHedge node_superhedge(int t, int k, int j, const PolicySchedule& schedule,
                                 const MortalityTable& table, const ReinsurerBasis& basis,
                                 const PropertyBinomial& model, const Eigen::VectorXd& next_up,
                                 const Eigen::VectorXd& next_down) {
    schedule.validate();
    model.validate();
    const int m = schedule.n - k;
    if (m < 0) throw ValidationError("node_superhedge: deaths exceed cohort");
    NodeHedge out;
    if (m == 0) return out;
    if (next_up.size() != m + 1 || next_down.size() != m + 1)
        throw ValidationError("node_superhedge: need continuation costs for all 2(m+1) successors");

    const double pt = period_death_prob(table, schedule.start_age + t);
    const double node_price = model.s0 * std::pow(model.u, j) * std::pow(model.d, t - j);
    const double strike = accumulate_loan(schedule, t + 1);
    const PropertyBinomial node_model{node_price, model.u, model.d};
    const double q = risk_neutral_down_prob(node_model);
    const double put_up = std::max(strike - node_model.up_price(), 0.0);
    const double put_down = std::max(strike - node_model.down_price(), 0.0);

    // Degenerate transitions: deaths are certain or impossible, so the only
    // uncertainty left is the property move; replication prices it.
    if (pt >= 1.0 || pt <= 0.0) {
        const int dj = pt >= 1.0 ? m : 0;
        const double vu = dj * put_up + next_up[dj];
        const double vd = dj * put_down + next_down[dj];
        out.cost = (1.0 - q) * vu + q * vd;
        out.portfolio.stock = (vu - vd) / (node_model.up_price() - node_model.down_price());
        out.portfolio.cash = vu - out.portfolio.stock * node_model.up_price();
        out.portfolio.gla = 0.0;
        return out;
    }

    const auto xol = detail::node_xol(m, pt, basis);
    const bool no_continuation = next_up.isZero(0.0) && next_down.isZero(0.0);

    if (no_continuation && xol) {
        const auto priced = price_single_period(node_model, LoanSpec{strike}, m, pt, basis.epsilon,
                                                basis.eta, xol->x0);
        out.cost = priced.degenerate ? 0.0 : priced.cost;
        out.portfolio = priced.portfolio;
        out.closed_form = true;
        return out;
    }
    if (no_continuation && strike <= node_model.down_price()) return out;  // claim a.s. zero

    LpInstance inst;
    inst.mode = StateMode::Symmetric;
    inst.n_lives = m;
    for (int dj = 0; dj <= m; ++dj) {
        for (int down = 0; down <= 1; ++down) {
            LpState st;
            st.deaths = dj;
            st.down = (down == 1);
            st.claim = dj * (down ? put_down : put_up) + (down ? next_down[dj] : next_up[dj]);
            inst.states.push_back(st);
        }
    }
    const auto ns = static_cast<Eigen::Index>(inst.states.size());
    auto payoff_of = [&](auto&& f) {
        Eigen::VectorXd v(ns);
        for (Eigen::Index s = 0; s < ns; ++s) v[s] = f(inst.states[static_cast<std::size_t>(s)]);
        return v;
    };
    inst.assets.push_back({"cash", 1.0, payoff_of([](const LpState&) { return 1.0; })});
    inst.assets.push_back({"stock", node_price, payoff_of([&](const LpState& s) {
                               return s.down ? node_model.down_price() : node_model.up_price();
                           })});
    inst.assets.push_back({"gla", m * pt, payoff_of([](const LpState& s) {
                               return static_cast<double>(s.deaths);
                           })});
    if (xol)
        inst.assets.push_back({"xol", xol->x0, payoff_of([&](const LpState& s) {
                                   return std::max(s.deaths - xol->e, 0.0);
                               })});

    const auto sol = solve_primal(inst);
    if (sol.status != LpStatus::Optimal)
        throw ArbitrageError("node_superhedge: arbitrage among node quotes at (t=" +
                             std::to_string(t) + ", k=" + std::to_string(k) + ", j=" +
                             std::to_string(j) + ")");
    out.cost = sol.cost;
    out.portfolio.cash = sol.holdings[0];
    out.portfolio.stock = sol.holdings[1];
    out.portfolio.gla = sol.holdings[2];
    if (xol) out.portfolio.xol = sol.holdings[3];
    return out;
}

struct MultiPeriodResult {
    double v0 = 0.0;
    double per_policy = 0.0;
    double dcf_bs = 0.0;
    int horizon_used = 0;
    /// continuation[t] is an (n+1) x (t+1) table of setup costs over
    /// (cumulative deaths, up-move count).
    std::vector<Eigen::MatrixXd> continuation;
};

/// European put on a dividend-paying lognormal stock. Phi via erfc, absolute
/// error well under 1e-10.
inline double bs_put(double s0, double strike, double vol, double t, double r, double deferment) {
    if (!(s0 > 0.0 && vol > 0.0 && t > 0.0)) throw ValidationError("bs_put: need s0, vol, t > 0");
    if (strike < 0.0) throw ValidationError("bs_put: strike must be >= 0");
    if (strike == 0.0) return 0.0;
    auto Phi = [](double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); };
    const double sd = vol * std::sqrt(t);
    const double d1 = (std::log(s0 / strike) + (r - deferment + 0.5 * vol * vol) * t) / sd;
    const double d2 = d1 - sd;
    return strike * std::exp(-r * t) * Phi(-d2) - s0 * std::exp(-deferment * t) * Phi(-d1);
}

/// Industry DCF comparator: sum_t q_t * P(0, L_t) with q_t the expected
/// deaths in period t.
inline double dcf_black_scholes(const PolicySchedule& schedule, const MortalityTable& table,
                                double s0, double vol, double deferment) {
    schedule.validate();
    const auto deaths = expected_deaths_schedule(table, schedule.start_age,
                                                 static_cast<double>(schedule.n), schedule.horizon);
    double total = 0.0;
    for (int t = 1; t <= schedule.horizon; ++t) {
        if (deaths[t - 1] == 0.0) continue;
        const double strike = accumulate_loan(schedule, t);
        if (strike <= 0.0) continue;
        total += deaths[t - 1] * bs_put(s0, strike, vol, t, 0.0, deferment);
    }
    return total;
}

/// Backward induction over the (time, cumulative deaths, price level)
/// lattice. The horizon is truncated at the mortality table's terminal age;
/// past it the cohort is extinct and continuation costs vanish.
inline MultiPeriodResult backward_induct(const PolicySchedule& schedule, const MortalityTable& table,
                                         const ReinsurerBasis& basis, const PropertyBinomial& model,
                                         double dcf_deferment = 0.0) {
    schedule.validate();
    model.validate();
    // basis.p is unused here (each node takes its death probability from the
    // table), so only the margin parameters are checked.
    if (!(basis.epsilon > 0.0) || basis.eta < 0.0 || basis.eta >= basis.epsilon)
        throw ValidationError("backward_induct: need epsilon > 0 and 0 <= eta < epsilon");
    if (!table.contains(schedule.start_age))
        throw ValidationError("backward_induct: start age outside the mortality table");
    const int span = table.last_age() - schedule.start_age + 1;
    const int T = std::min(schedule.horizon, span);

    MultiPeriodResult result;
    result.horizon_used = T;
    result.continuation.assign(static_cast<std::size_t>(T) + 1, Eigen::MatrixXd());
    result.continuation[static_cast<std::size_t>(T)] =
        Eigen::MatrixXd::Zero(schedule.n + 1, T + 1);

    for (int t = T - 1; t >= 0; --t) {
        Eigen::MatrixXd slice = Eigen::MatrixXd::Zero(schedule.n + 1, t + 1);
        const Eigen::MatrixXd& next = result.continuation[static_cast<std::size_t>(t) + 1];
        for (int k = 0; k <= schedule.n; ++k) {
            const int m = schedule.n - k;
            for (int j = 0; j <= t; ++j) {
                if (m == 0) continue;
                Eigen::VectorXd next_up(m + 1), next_down(m + 1);
                for (int dj = 0; dj <= m; ++dj) {
                    next_up[dj] = next(k + dj, j + 1);
                    next_down[dj] = next(k + dj, j);
                }
                slice(k, j) = node_superhedge(t, k, j, schedule, table, basis, model, next_up,
                                              next_down)
                                  .cost;
            }
        }
        result.continuation[static_cast<std::size_t>(t)] = std::move(slice);
    }

    result.v0 = result.continuation[0](0, 0);
    result.per_policy = result.v0 / schedule.n;
    const double vol = 0.5 * (std::log(model.u) - std::log(model.d));
    PolicySchedule truncated = schedule;
    truncated.horizon = T;
    result.dcf_bs = dcf_black_scholes(truncated, table, model.s0, vol, dcf_deferment);
    return result;
}

/// Exhaustive walk over every (deaths, direction) transition sequence,
/// rebuilding the node portfolio and checking that its realized value funds
/// the claims plus the next setup cost. Surplus at a step is the slack. Only
/// sized for small cohorts and horizons.
struct PathSimReport {
    long paths = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    double max_surplus = 0.0;
    long shortfalls = 0;  ///< transitions where value + tol < claim + next cost
};

inline void simulate_paths_rec(int t, int k, int j, const PolicySchedule& schedule,
                               const MortalityTable& table, const ReinsurerBasis& basis,
                               const PropertyBinomial& model, const MultiPeriodResult& result,
                               PathSimReport& rep, double tol) {
    const int T = result.horizon_used;
    if (t >= T || k >= schedule.n) {
        ++rep.paths;
        return;
    }
    const int m = schedule.n - k;
    const Eigen::MatrixXd& next = result.continuation[static_cast<std::size_t>(t) + 1];
    Eigen::VectorXd next_up(m + 1), next_down(m + 1);
    for (int dj = 0; dj <= m; ++dj) {
        next_up[dj] = next(k + dj, j + 1);
        next_down[dj] = next(k + dj, j);
    }
    const auto hedge =
        node_superhedge(t, k, j, schedule, table, basis, model, next_up, next_down);
    const double pt = period_death_prob(table, schedule.start_age + t);
    const double node_price = model.s0 * std::pow(model.u, j) * std::pow(model.d, t - j);
    const double strike = accumulate_loan(schedule, t + 1);
    const double e = m * pt * (1.0 + basis.epsilon);

    std::vector<int> deaths;
    if (pt >= 1.0)
        deaths = {m};
    else if (pt <= 0.0)
        deaths = {0};
    else
        for (int dj = 0; dj <= m; ++dj) deaths.push_back(dj);

    for (int dj : deaths) {
        for (int down = 0; down <= 1; ++down) {
            const double s1 = node_price * (down ? model.d : model.u);
            const double claim = dj * std::max(strike - s1, 0.0);
            const double cnext = down ? next_down[dj] : next_up[dj];
            const auto& pf = hedge.portfolio;
            const double put_pay = pf.puts * std::max(pf.put_strike - s1, 0.0);
            const double value = pf.cash + pf.stock * s1 + put_pay + pf.gla * dj +
                                 pf.xol * std::max(dj - e, 0.0);
            const double slack = value - claim - cnext;
            rep.min_slack = std::min(rep.min_slack, slack);
            rep.max_surplus = std::max(rep.max_surplus, slack);
            if (slack < -tol) ++rep.shortfalls;
            simulate_paths_rec(t + 1, k + dj, j + (down ? 0 : 1), schedule, table, basis, model,
                               result, rep, tol);
        }
    }
}

inline PathSimReport simulate_paths(const PolicySchedule& schedule, const MortalityTable& table,
                                    const ReinsurerBasis& basis, const PropertyBinomial& model,
                                    const MultiPeriodResult& result, double tol = 1e-9) {
    if (schedule.n > 3 || result.horizon_used > 4)
        throw CapacityError("simulate_paths: exhaustive walk sized for n <= 3, T <= 4");
    PathSimReport rep;
    simulate_paths_rec(0, 0, 0, schedule, table, basis, model, result, rep, tol);
    if (rep.min_slack == std::numeric_limits<double>::infinity()) rep.min_slack = 0.0;
    return rep;
}

}  // namespace nneg
