#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nneg/errors.hpp"
#include "nneg/simplex.hpp"

namespace nneg {

enum class StateMode { Symmetric, Full };

/// One time-1 market state. Symmetric mode: (deaths, up/down), 2(n+1) states.
/// Full mode: a life/property indicator word, 2^(n+1) states; bit 0 is the
/// property up indicator and bit i the death of life i.
struct LpState {
    int deaths = 0;
    bool down = false;
    std::uint32_t mask = 0;
    double claim = 0.0;
};

struct LpAsset {
    std::string name;
    double price = 0.0;
    Eigen::VectorXd payoff;  ///< one entry per state
};

struct LpInstance {
    StateMode mode = StateMode::Symmetric;
    int n_lives = 0;
    std::vector<LpState> states;
    std::vector<LpAsset> assets;

    Eigen::VectorXd claims() const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(states.size()));
        for (std::size_t s = 0; s < states.size(); ++s) v[static_cast<Eigen::Index>(s)] = states[s].claim;
        return v;
    }

    void erase_asset(const std::string& name) {
        for (auto it = assets.begin(); it != assets.end(); ++it) {
            if (it->name == name) {
                assets.erase(it);
                return;
            }
        }
        throw ValidationError("erase_asset: no asset named '" + name + "'");
    }
};

enum class LpStatus { Optimal, ArbitrageUnbounded };

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    double cost = 0.0;                  ///< minimal superhedge setup cost
    Eigen::VectorXd holdings;           ///< per-asset amounts, any sign
    Eigen::VectorXd dual;               ///< state masses of the maximizing measure
    Eigen::VectorXd arbitrage_portfolio;  ///< witness when status != Optimal
};

/// Normalized symmetric one-period instance over states (k, up/down).
/// Assets: cash, put (pays unit in the down state; the cash+stock span),
/// GLA paying unit per death, XoL paying (k*unit - e)^+. Claim is
/// claim_per_death * k in the down state; claim_per_death defaults to unit.
inline LpInstance build_symmetric_instance(int n, double p, double q, double e, double x0,
                                           double unit = 1.0) {
    if (n < 1) throw ValidationError("build_symmetric_instance: n must be >= 1");
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0))
        throw ValidationError("build_symmetric_instance: p and q must be in (0,1)");
    if (!(unit > 0.0)) throw ValidationError("build_symmetric_instance: unit must be > 0");
    if (!(x0 >= 0.0)) throw ValidationError("build_symmetric_instance: x0 must be >= 0");
    LpInstance inst;
    inst.mode = StateMode::Symmetric;
    inst.n_lives = n;
    const int ns = 2 * (n + 1);
    inst.states.reserve(static_cast<std::size_t>(ns));
    for (int k = 0; k <= n; ++k) {
        for (int down = 0; down <= 1; ++down) {
            LpState st;
            st.deaths = k;
            st.down = (down == 1);
            st.claim = st.down ? k * unit : 0.0;
            inst.states.push_back(st);
        }
    }
    auto payoff_of = [&](auto&& f) {
        Eigen::VectorXd v(ns);
        for (int s = 0; s < ns; ++s) v[s] = f(inst.states[static_cast<std::size_t>(s)]);
        return v;
    };
    inst.assets.push_back({"cash", 1.0, payoff_of([](const LpState&) { return 1.0; })});
    inst.assets.push_back({"put", q * unit, payoff_of([&](const LpState& s) { return s.down ? unit : 0.0; })});
    inst.assets.push_back({"gla", n * p * unit, payoff_of([&](const LpState& s) { return s.deaths * unit; })});
    inst.assets.push_back({"xol", x0, payoff_of([&](const LpState& s) {
                               return std::max(s.deaths * unit - e, 0.0);
                           })});
    return inst;
}

/// Minimal-cost superhedge over the instance: min price'h with payoff'h >= claim
/// in every state, holdings unrestricted in sign. Solved through the dual
/// (max claim'z over nonnegative state masses pricing every asset exactly),
/// which has one row per asset; the holdings come out of the same tableau as
/// the equality multipliers. Dual infeasibility certifies an arbitrage among
/// the quoted assets and is reported with a witnessing portfolio.
inline LpSolution solve_primal(const LpInstance& inst) {
    const auto ns = static_cast<Eigen::Index>(inst.states.size());
    const auto na = static_cast<Eigen::Index>(inst.assets.size());
    if (ns == 0 || na == 0) throw ValidationError("solve_primal: empty instance");
    bool has_cash = false;
    for (const auto& a : inst.assets)
        if (a.name == "cash") has_cash = true;
    if (!has_cash) throw ValidationError("solve_primal: instance must include the cash asset");

    lp::StandardForm<double> sf;
    sf.A.resize(na, ns);
    sf.b.resize(na);
    for (Eigen::Index j = 0; j < na; ++j) {
        const auto& a = inst.assets[static_cast<std::size_t>(j)];
        if (a.payoff.size() != ns) throw ValidationError("solve_primal: payoff size mismatch");
        if (a.price < 0.0) throw ValidationError("solve_primal: negative asset price");
        sf.A.row(j) = a.payoff.transpose();
        sf.b[j] = a.price;
    }
    sf.c = -inst.claims();

    const auto res = lp::simplex_solve(sf);
    LpSolution sol;
    if (res.status == lp::SolveStatus::Infeasible) {
        sol.status = LpStatus::ArbitrageUnbounded;
        sol.arbitrage_portfolio = -res.farkas;
        return sol;
    }
    if (res.status != lp::SolveStatus::Optimal)
        throw InternalInconsistency("solve_primal: measure problem unbounded");
    sol.status = LpStatus::Optimal;
    sol.cost = -res.objective;
    sol.dual = res.x;
    sol.holdings = -res.y;
    return sol;
}

/// Range of expected claims over all measures pricing the quoted assets.
struct DualBounds {
    double p_low = 0.0;
    double p_high = 0.0;
};

inline DualBounds solve_dual_bounds(const LpInstance& inst) {
    const auto ns = static_cast<Eigen::Index>(inst.states.size());
    const auto na = static_cast<Eigen::Index>(inst.assets.size());
    lp::StandardForm<double> sf;
    sf.A.resize(na, ns);
    sf.b.resize(na);
    for (Eigen::Index j = 0; j < na; ++j) {
        sf.A.row(j) = inst.assets[static_cast<std::size_t>(j)].payoff.transpose();
        sf.b[j] = inst.assets[static_cast<std::size_t>(j)].price;
    }
    const Eigen::VectorXd claims = inst.claims();

    sf.c = -claims;
    const auto hi = lp::simplex_solve(sf);
    if (hi.status == lp::SolveStatus::Infeasible)
        throw ArbitrageError("solve_dual_bounds: no pricing measure exists (arbitrage among quotes)");
    sf.c = claims;
    const auto lo = lp::simplex_solve(sf);
    if (lo.status != lp::SolveStatus::Optimal || hi.status != lp::SolveStatus::Optimal)
        throw InternalInconsistency("solve_dual_bounds: bounded problem reported unbounded");
    return DualBounds{lo.objective, -hi.objective};
}

}  // namespace nneg
