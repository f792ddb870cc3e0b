#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "nneg/errors.hpp"
#include "nneg/instance.hpp"
#include "nneg/insurance.hpp"
#include "nneg/market.hpp"

namespace nneg {

/// A portfolio of ERM policies with varying loans and death probabilities.
/// The property "price" is an index; the down-state shortfall on life i is
/// alpha_i = property_value_i * (ltv_i - S0*d).
struct BookEntry {
    double property_value = 0.0;
    double ltv = 0.0;  ///< loan-to-value ratio on the index scale
    double death_prob = 0.0;
};

struct VaryingLoanBook {
    std::vector<BookEntry> lives;

    int size() const { return static_cast<int>(lives.size()); }

    void validate(const PropertyBinomial& model) const {
        model.validate();
        if (lives.empty()) throw ValidationError("book: at least one life required");
        for (std::size_t i = 0; i < lives.size(); ++i) {
            const auto& l = lives[i];
            const std::string who = "book life " + std::to_string(i + 1);
            if (!(l.property_value > 0.0)) throw ValidationError(who + ": property value must be > 0");
            if (!(l.ltv > model.down_price() && l.ltv < model.up_price()))
                throw ValidationError(who + ": ltv must lie strictly inside (S0*d, S0*u)");
            if (!(l.death_prob > 0.0 && l.death_prob < 1.0))
                throw ValidationError(who + ": death probability must be in (0,1)");
        }
    }

    double alpha(int i, const PropertyBinomial& model) const {
        const auto& l = lives[static_cast<std::size_t>(i)];
        return l.property_value * (l.ltv - model.down_price());
    }

    Eigen::VectorXd alphas(const PropertyBinomial& model) const {
        Eigen::VectorXd a(size());
        for (int i = 0; i < size(); ++i) a[i] = alpha(i, model);
        return a;
    }

    double sigma(const PropertyBinomial& model) const { return alphas(model).sum(); }

    bool homogeneous_mortality() const {
        for (const auto& l : lives)
            if (l.death_prob != lives.front().death_prob) return false;
        return true;
    }
};

/// Book CSV: header `property_value,ltv,death_prob`, one row per life.
inline VaryingLoanBook load_book(std::istream& in) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ValidationError("book CSV: empty input");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "property_value,ltv,death_prob")
        throw ValidationError("book CSV line 1: expected header 'property_value,ltv,death_prob'");
    VaryingLoanBook book;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        BookEntry entry;
        std::size_t a = line.find(',');
        std::size_t b = (a == std::string::npos) ? std::string::npos : line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos)
            throw ValidationError("book CSV line " + std::to_string(lineno) + ": expected 3 fields");
        try {
            std::size_t used = 0;
            const std::string f1 = line.substr(0, a);
            const std::string f2 = line.substr(a + 1, b - a - 1);
            const std::string f3 = line.substr(b + 1);
            entry.property_value = std::stod(f1, &used);
            if (used != f1.size()) throw std::invalid_argument("f1");
            entry.ltv = std::stod(f2, &used);
            if (used != f2.size()) throw std::invalid_argument("f2");
            entry.death_prob = std::stod(f3, &used);
            if (used != f3.size()) throw std::invalid_argument("f3");
        } catch (const std::exception&) {
            throw ValidationError("book CSV line " + std::to_string(lineno) + ": cannot parse '" +
                                  line + "'");
        }
        book.lives.push_back(entry);
    }
    if (book.lives.empty()) throw ValidationError("book CSV: no data rows");
    return book;
}

inline VaryingLoanBook load_book_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open book '" + path + "'");
    try {
        return load_book(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

constexpr int kFullEnumerationCap = 20;

/// Full-state instance over omega in {0,1}^(n+1) (bit 0 = property up, bit i
/// = death of life i). Assets: cash, stock, n single-life assurances, the
/// modified GLA paying sum(alpha_i w_i) and the modified XoL paying
/// (sum(alpha_i w_i) - e)^+. Claim per state: (1 - w0) * sum(alpha_i w_i).
inline LpInstance build_general_instance(const PropertyBinomial& model, const VaryingLoanBook& book,
                                         double xol_excess, double xol_price) {
    book.validate(model);
    const int n = book.size();
    if (n > kFullEnumerationCap)
        throw CapacityError("build_general_instance: n = " + std::to_string(n) + " exceeds " +
                            std::to_string(kFullEnumerationCap) +
                            "; use the symmetric reduction or group similar lives");
    if (!(xol_excess >= 0.0)) throw ValidationError("build_general_instance: excess must be >= 0");
    if (!(xol_price >= 0.0)) throw ValidationError("build_general_instance: XoL price must be >= 0");
    const Eigen::VectorXd alpha = book.alphas(model);

    LpInstance inst;
    inst.mode = StateMode::Full;
    inst.n_lives = n;
    const std::uint32_t nstates = 1u << (n + 1);
    inst.states.reserve(nstates);
    for (std::uint32_t mask = 0; mask < nstates; ++mask) {
        LpState st;
        st.mask = mask;
        st.down = (mask & 1u) == 0;
        double loss = 0.0;
        int deaths = 0;
        for (int i = 1; i <= n; ++i) {
            if (mask & (1u << i)) {
                loss += alpha[i - 1];
                ++deaths;
            }
        }
        st.deaths = deaths;
        st.claim = st.down ? loss : 0.0;
        inst.states.push_back(st);
    }

    const auto payoff_of = [&](auto&& f) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(nstates));
        for (std::uint32_t s = 0; s < nstates; ++s) v[s] = f(inst.states[s]);
        return v;
    };
    const auto loss_of = [&](const LpState& st) {
        double loss = 0.0;
        for (int i = 1; i <= n; ++i)
            if (st.mask & (1u << i)) loss += alpha[i - 1];
        return loss;
    };
    inst.assets.push_back({"cash", 1.0, payoff_of([](const LpState&) { return 1.0; })});
    inst.assets.push_back({"stock", model.s0, payoff_of([&](const LpState& s) {
                               return s.down ? model.down_price() : model.up_price();
                           })});
    double gla_price = 0.0;
    for (int i = 0; i < n; ++i)
        gla_price += alpha[i] * book.lives[static_cast<std::size_t>(i)].death_prob;
    for (int i = 1; i <= n; ++i) {
        inst.assets.push_back({"sla" + std::to_string(i),
                               book.lives[static_cast<std::size_t>(i - 1)].death_prob,
                               payoff_of([&](const LpState& s) {
                                   return (s.mask & (1u << i)) ? 1.0 : 0.0;
                               })});
    }
    inst.assets.push_back({"gla", gla_price, payoff_of(loss_of)});
    inst.assets.push_back({"xol", xol_price, payoff_of([&](const LpState& s) {
                               return std::max(loss_of(s) - xol_excess, 0.0);
                           })});
    return inst;
}

/// XoL price under independent lives: E[(sum alpha_i w_i - e)^+] with
/// w_i ~ Bernoulli(p_i), by enumeration (n <= 20).
inline double xol_price_independent(const PropertyBinomial& model, const VaryingLoanBook& book,
                                    double excess) {
    book.validate(model);
    const int n = book.size();
    if (n > kFullEnumerationCap)
        throw CapacityError("xol_price_independent: n exceeds the enumeration cap");
    const Eigen::VectorXd alpha = book.alphas(model);
    double total = 0.0;
    const std::uint32_t lim = 1u << n;
    for (std::uint32_t mask = 0; mask < lim; ++mask) {
        double prob = 1.0;
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double pi = book.lives[static_cast<std::size_t>(i)].death_prob;
            if (mask & (1u << i)) {
                prob *= pi;
                loss += alpha[i];
            } else {
                prob *= 1.0 - pi;
            }
        }
        if (loss > excess) total += prob * (loss - excess);
    }
    return total;
}

/// Setup costs of the three named strategies; each is verified to dominate
/// the claim state-by-state before being reported.
struct StrategyCosts {
    double sh1_xol_puts = 0.0;  ///< e*q + x0
    double sh2_gla = 0.0;       ///< sum alpha_i p_i
    double sh3_puts = 0.0;      ///< Sigma * q
};

inline StrategyCosts sh_strategy_costs(const PropertyBinomial& model, const VaryingLoanBook& book,
                                       double xol_excess, double xol_price) {
    book.validate(model);
    const int n = book.size();
    const Eigen::VectorXd alpha = book.alphas(model);
    const double sigma = alpha.sum();
    const double q = risk_neutral_down_prob(model);
    if (!(xol_excess >= 0.0 && xol_excess < sigma))
        throw ValidationError("sh_strategy_costs: excess must satisfy 0 <= e < Sigma");
    StrategyCosts costs;
    costs.sh1_xol_puts = xol_excess * q + xol_price;
    for (int i = 0; i < n; ++i)
        costs.sh2_gla += alpha[i] * book.lives[static_cast<std::size_t>(i)].death_prob;
    costs.sh3_puts = sigma * q;

    // Domination, state by state over subsets of deaths. SH1: puts worth e in
    // the down state plus the XoL; SH2: the modified GLA; SH3: puts worth
    // Sigma in the down state.
    const std::uint32_t lim = 1u << n;
    for (std::uint32_t mask = 0; mask < lim; ++mask) {
        double loss = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) loss += alpha[i];
        const double xol_pay = std::max(loss - xol_excess, 0.0);
        if (xol_excess + xol_pay < loss - 1e-12)
            throw InternalInconsistency("SH1 fails domination");
        if (sigma < loss - 1e-12) throw InternalInconsistency("SH3 fails domination");
        // SH2 pays exactly the loss in every state.
    }
    return costs;
}

/// Five-point certificate of the varying-loan proposition. Requires a
/// designated subset with shortfall sum exactly e (and its complement
/// smaller), homogeneous p, and 1 - 2p + x0/(Sigma - e) >= 0.
struct SparseMeasure {
    std::vector<std::pair<std::uint32_t, double>> mass;  ///< (state mask, probability)
};

inline std::optional<std::vector<int>> find_excess_subset(const Eigen::VectorXd& alpha, double e,
                                                          double tol = 1e-9) {
    const int n = static_cast<int>(alpha.size());
    const std::uint32_t lim = 1u << n;
    for (std::uint32_t mask = 1; mask < lim; ++mask) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) s += alpha[i];
        if (std::abs(s - e) <= tol) {
            std::vector<int> subset;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) subset.push_back(i);
            return subset;
        }
    }
    return std::nullopt;
}

class CertificateUnavailable : public std::runtime_error {
public:
    explicit CertificateUnavailable(const std::string& what) : std::runtime_error(what) {}
};

inline SparseMeasure prop52_certificate(const PropertyBinomial& model, const VaryingLoanBook& book,
                                        double xol_excess, double xol_price, int case_id) {
    book.validate(model);
    if (case_id != 1 && case_id != 3)
        throw ValidationError("prop52_certificate: case must be 1 or 3");
    if (!book.homogeneous_mortality())
        throw CertificateUnavailable("prop52_certificate: requires a single death probability");
    const int n = book.size();
    const Eigen::VectorXd alpha = book.alphas(model);
    const double sigma = alpha.sum();
    const double p = book.lives.front().death_prob;
    const double q = risk_neutral_down_prob(model);
    if (!(xol_excess > 0.0 && xol_excess < sigma))
        throw ValidationError("prop52_certificate: need 0 < e < Sigma");
    const double r = xol_price / (sigma - xol_excess);

    const auto subset = find_excess_subset(alpha, xol_excess);
    if (!subset)
        throw CertificateUnavailable("prop52_certificate: no subset of shortfalls sums to e");
    if (!(xol_excess > sigma - xol_excess))
        throw CertificateUnavailable("prop52_certificate: needs e > Sigma - e");
    if (!(r < p))
        throw CertificateUnavailable("prop52_certificate: needs x0/(Sigma-e) < p");
    if (1.0 - 2.0 * p + r < -1e-12)
        throw CertificateUnavailable("prop52_certificate: needs 1 - 2p + x0/(Sigma-e) >= 0");
    if (case_id == 1 && !(r < q && p >= q))
        throw CertificateUnavailable("prop52_certificate case 1: needs x0/(Sigma-e) < q and p >= q");
    if (case_id == 3 && !(r >= q))
        throw CertificateUnavailable("prop52_certificate case 3: needs x0/(Sigma-e) >= q");

    // Masks: bit 0 is the property up indicator.
    std::uint32_t omega_e = 0;
    for (int i : *subset) omega_e |= 1u << (i + 1);
    const std::uint32_t all_lives = ((1u << n) - 1u) << 1;
    const std::uint32_t omega_e_tilde = (all_lives & ~omega_e) | 1u;  // complement, property up
    const std::uint32_t all_dead_down = all_lives;                    // (0,1,...,1)

    SparseMeasure m;
    if (case_id == 1) {
        m.mass = {{all_dead_down, r},
                  {omega_e, q - r},
                  {omega_e | 1u, p - q},
                  {omega_e_tilde, p - r},
                  {1u, 1.0 - 2.0 * p + r}};
    } else {
        m.mass = {{all_dead_down, q},
                  {all_lives | 1u, r - q},
                  {omega_e | 1u, p - r},
                  {omega_e_tilde, p - r},
                  {1u, 1.0 - 2.0 * p + r}};
    }
    for (const auto& [mask, w] : m.mass) {
        (void)mask;
        if (w < -1e-12) throw InternalInconsistency("prop52_certificate: negative mass");
    }
    return m;
}

/// Heterogeneous no-arbitrage screen: x0/(Sigma - e) < (1/Sigma) sum alpha_i p_i.
inline NoArbitrageReport xol_arbitrage_bound_heterogeneous(const PropertyBinomial& model,
                                                           const VaryingLoanBook& book,
                                                           double xol_excess, double xol_price) {
    book.validate(model);
    const Eigen::VectorXd alpha = book.alphas(model);
    const double sigma = alpha.sum();
    if (!(sigma - xol_excess > 0.0))
        throw ValidationError("xol_arbitrage_bound_heterogeneous: Sigma must exceed the excess");
    double avg = 0.0;
    for (int i = 0; i < book.size(); ++i)
        avg += alpha[i] * book.lives[static_cast<std::size_t>(i)].death_prob;
    avg /= sigma;
    const double ratio = xol_price / (sigma - xol_excess);
    return NoArbitrageReport{ratio < avg, avg - ratio};
}

}  // namespace nneg
