// Command-line front end: single-period pricing, heterogeneous book pricing,
// multi-period lattice pricing, sweeps with CSV output, verification suites.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nneg/book.hpp"
#include "nneg/errors.hpp"
#include "nneg/insurance.hpp"
#include "nneg/lattice.hpp"
#include "nneg/market.hpp"
#include "nneg/mortality.hpp"
#include "nneg/superhedge.hpp"
#include "nneg/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitValidation = 2;
constexpr int kExitArbitrage = 3;

int g_precision = 6;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", g_precision, v);
    return buf;
}

struct ModelFlags {
    double s0 = 100.0;
    double vol = 0.0;
    double u = 0.0;
    double d = 0.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--s0", s0, "Initial property price");
        cmd->add_option("--vol", vol, "Per-period volatility; sets u = e^vol, d = e^-vol");
        cmd->add_option("--u", u, "Explicit up factor (with --d, overrides --vol)");
        cmd->add_option("--d", d, "Explicit down factor");
    }

    nneg::PropertyBinomial build() const {
        if (u > 0.0 || d > 0.0) {
            if (!(u > 0.0 && d > 0.0))
                throw nneg::ValidationError("both --u and --d are required together");
            nneg::PropertyBinomial m{s0, u, d};
            m.validate();
            return m;
        }
        if (vol <= 0.0) throw nneg::ValidationError("either --vol or --u/--d must be given");
        return nneg::crr_from_vol(s0, vol);
    }
};

void attach_config(CLI::App* cmd, std::string& sink) {
    cmd->add_option("--config", sink,
                    "Config file with 'key = value' lines and # comments; flags override")
        ->configurable(false);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Flat `key = value` config lines with # comments. Values fill in options
/// the command line did not set, so explicit flags always win.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    bool explicit_path = !path.empty();
    if (path.empty()) {
        if (const char* env = std::getenv("NNEG_CONFIG")) path = env;
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) {
        if (explicit_path) throw nneg::ValidationError("cannot open config file '" + path + "'");
        return args;  // an unset or dangling NNEG_CONFIG default is not an error
    }
    std::vector<std::string> out = args;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw nneg::ValidationError(path + " line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw nneg::ValidationError(path + " line " + std::to_string(lineno) + ": empty key");
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : out)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        if (value == "true") {
            out.push_back(flag);
        } else {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

void print_portfolio(const nneg::HedgePortfolio& pf) {
    if (pf.puts != 0.0)
        std::cout << "  puts:  " << num(pf.puts) << " @ strike " << num(pf.put_strike) << "\n";
    if (pf.gla != 0.0) std::cout << "  gla:   " << num(pf.gla) << "\n";
    if (pf.xol != 0.0) std::cout << "  xol:   " << num(pf.xol) << "\n";
    if (pf.cash != 0.0) std::cout << "  cash:  " << num(pf.cash) << "\n";
    if (pf.stock != 0.0) std::cout << "  stock: " << num(pf.stock) << "\n";
    for (std::size_t i = 0; i < pf.sla.size(); ++i)
        if (pf.sla[i] != 0.0) std::cout << "  sla" << (i + 1) << ":  " << num(pf.sla[i]) << "\n";
}

int cmd_price_single(int n, double p, const ModelFlags& mf, double loan, double eps, double eta,
                     std::optional<double> xol_price, double rate) {
    const auto model = mf.build();
    (void)nneg::apply_interest(0.0, rate);
    const auto priced =
        nneg::price_single_period(model, nneg::LoanSpec{loan}, n, p, eps, eta, xol_price);
    std::cout << "model: s0=" << num(model.s0) << " u=" << num(model.u) << " d=" << num(model.d)
              << " q=" << num(priced.q) << "\n";
    if (priced.degenerate) {
        std::cout << "claim degenerate (loan <= S0*d): cost 0\n";
        return kExitOk;
    }
    std::cout << "normalization: effective_strike=" << num(priced.norm.effective_strike)
              << " scale=" << num(priced.norm.scale) << " gla_addon=" << num(priced.norm.gla_addon)
              << "\n";
    std::cout << "xol: e=" << num(priced.e) << " x0_unit=" << num(priced.x0_unit) << "\n";
    std::cout << "case: " << nneg::to_string(priced.normalized.case_id)
              << (priced.normalized.lp_fallback ? " (LP-priced, closed form unattainable)" : "")
              << "\n";
    std::cout << "cost: " << num(priced.cost) << "\n";
    std::cout << "per-life: " << num(priced.per_life) << "\n";
    if (rate != 0.0)
        std::cout << "undiscounted payout scale: " << num(1.0 + rate) << "x at period end\n";
    std::cout << "portfolio:\n";
    print_portfolio(priced.portfolio);
    const auto& cert = priced.normalized.certificate;
    std::cout << "certificate: mass=" << num(cert.total_mass()) << " down=" << num(cert.down_mass())
              << " mean_deaths=" << num(cert.mean_deaths())
              << " claim=" << num(cert.expected_claim()) << "\n";
    const auto rep = nneg::verify_certificate(cert, n, p, priced.q, priced.e, priced.x0_unit,
                                              priced.normalized.cost);
    std::cout << "certificate check: " << (rep.pass ? "pass" : "FAIL") << "\n";
    return rep.pass ? kExitOk : kExitVerifyFail;
}

int cmd_price_book(const std::string& book_path, const ModelFlags& mf, double xol_excess,
                   std::optional<double> xol_price, bool xol_independent) {
    const auto model = mf.build();
    const auto book = nneg::load_book_file(book_path);
    book.validate(model);
    double x0 = 0.0;
    if (xol_independent)
        x0 = nneg::xol_price_independent(model, book, xol_excess);
    else if (xol_price)
        x0 = *xol_price;
    else
        throw nneg::ValidationError("provide --xol-price or --xol-basis independent");

    const double q = nneg::risk_neutral_down_prob(model);
    const auto costs = nneg::sh_strategy_costs(model, book, xol_excess, x0);
    std::cout << "book: n=" << book.size() << " Sigma=" << num(book.sigma(model))
              << " q=" << num(q) << " x0=" << num(x0) << "\n";
    std::cout << "SH1 (xol + puts): " << num(costs.sh1_xol_puts) << "\n";
    std::cout << "SH2 (gla):        " << num(costs.sh2_gla) << "\n";
    std::cout << "SH3 (puts):       " << num(costs.sh3_puts) << "\n";

    const auto screen = nneg::xol_arbitrage_bound_heterogeneous(model, book, xol_excess, x0);
    if (!screen.pass)
        throw nneg::ArbitrageError("XoL quote fails the no-arbitrage bound by " +
                                   num(-screen.margin));

    const auto inst = nneg::build_general_instance(model, book, xol_excess, x0);
    const auto sol = nneg::solve_primal(inst);
    if (sol.status != nneg::LpStatus::Optimal)
        throw nneg::ArbitrageError("quotes admit an arbitrage; witness portfolio available");
    std::cout << "LP optimum: " << num(sol.cost) << "\n";
    std::cout << "holdings:\n";
    for (std::size_t j = 0; j < inst.assets.size(); ++j) {
        const double h = sol.holdings[static_cast<Eigen::Index>(j)];
        if (std::abs(h) > 1e-10) std::cout << "  " << inst.assets[j].name << ": " << num(h) << "\n";
    }
    const auto bounds = nneg::solve_dual_bounds(inst);
    std::cout << "arbitrage-free price range: [" << num(bounds.p_low) << ", " << num(bounds.p_high)
              << "]\n";
    return kExitOk;
}

int cmd_price_multi(const std::string& table_path, int age, int n, const ModelFlags& mf,
                    double loan, double loan_rate, int horizon, double eps, double eta,
                    double deferment) {
    const auto model = mf.build();
    const auto table = nneg::load_table_file(table_path);
    const nneg::PolicySchedule schedule{loan, loan_rate, horizon, age, n};
    const auto result = nneg::backward_induct(schedule, table, {0.5, eps, eta}, model, deferment);
    std::cout << "horizon used: " << result.horizon_used << " periods\n";
    std::cout << "v0: " << num(result.v0) << "\n";
    std::cout << "per-policy: " << num(result.per_policy) << "\n";
    std::cout << "dcf_bs: " << num(result.dcf_bs)
              << (deferment != 0.0 ? " (deferment " + num(deferment) + ")" : "") << "\n";
    return kExitOk;
}

int cmd_sweep(int n_from, int n_to, int n_step, bool multi, double p, const ModelFlags& mf,
              double loan, double eps, double eta, const std::string& table_path, int age,
              double loan_rate, int horizon, double deferment, const std::string& out_path) {
    if (n_from < 1 || n_to < n_from || n_step < 1)
        throw nneg::ValidationError("sweep range must satisfy 1 <= n-from <= n-to, step >= 1");
    const auto model = mf.build();
    std::ostringstream csv;
    if (multi) {
        const auto table = nneg::load_table_file(table_path);
        csv << "n,v0,v0_per_policy,dcf_bs,dcf_bs_per_policy\n";
        for (int n = n_from; n <= n_to; n += n_step) {
            const nneg::PolicySchedule schedule{loan, loan_rate, horizon, age, n};
            const auto r =
                nneg::backward_induct(schedule, table, {0.5, eps, eta}, model, deferment);
            csv << n << ',' << num(r.v0) << ',' << num(r.per_policy) << ',' << num(r.dcf_bs) << ','
                << num(r.dcf_bs / n) << "\n";
        }
    } else {
        csv << "n,case,cost,cost_per_life\n";
        for (int n = n_from; n <= n_to; n += n_step) {
            const auto priced =
                nneg::price_single_period(model, nneg::LoanSpec{loan}, n, p, eps, eta);
            csv << n << ','
                << (priced.degenerate ? "DEGENERATE" : nneg::to_string(priced.normalized.case_id))
                << ',' << num(priced.cost) << ',' << num(priced.per_life) << "\n";
        }
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        if (!out) throw nneg::ValidationError("cannot write '" + out_path + "'");
        out << csv.str();
    }
    return kExitOk;
}

int cmd_verify(std::uint64_t seed, int tuples, bool inject_fault) {
    const auto results = nneg::run_verification(seed, tuples, inject_fault);
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.detail << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "verification passed" : "verification FAILED") << "\n";
    return all_pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cfg_sink;
    CLI::App app{"Superhedge pricing for no-negative-equity guarantees in an incomplete market"};
    app.require_subcommand(1);
    app.add_option("--precision", g_precision, "Significant digits in printed numbers")
        ->capture_default_str();

    // price-single
    auto* ps = app.add_subcommand("price-single", "One-period cohort superhedge");
    ps->fallthrough();
    int ps_n = 0;
    double ps_p = 0.0, ps_loan = -1.0, ps_eps = 0.0, ps_eta = 0.0, ps_rate = 0.0;
    double ps_xol = -1.0;
    ModelFlags ps_mf;
    ps->add_option("--n", ps_n, "Number of lives")->required();
    ps->add_option("--p", ps_p, "One-period death probability")->required();
    ps_mf.add_to(ps);
    ps->add_option("--loan", ps_loan, "Accumulated loan amount")->required();
    ps->add_option("--eps", ps_eps, "XoL excess margin epsilon")->required();
    ps->add_option("--eta", ps_eta, "Reinsurer mortality loading");
    ps->add_option("--xol-price", ps_xol, "Explicit XoL quote per unit death benefit");
    ps->add_option("--rate", ps_rate, "Cash rate for undiscounted payout reporting");
    attach_config(ps, cfg_sink);

    // price-book
    auto* pb = app.add_subcommand("price-book", "Heterogeneous book LP pricing");
    pb->fallthrough();
    std::string pb_book;
    double pb_excess = 0.0, pb_price = -1.0;
    std::string pb_basis;
    ModelFlags pb_mf;
    pb->add_option("--book", pb_book, "Book CSV (property_value,ltv,death_prob)")->required();
    pb_mf.add_to(pb);
    pb->add_option("--xol-excess", pb_excess, "XoL attachment in shortfall currency")->required();
    pb->add_option("--xol-price", pb_price, "XoL quote");
    pb->add_option("--xol-basis", pb_basis, "'independent' prices the XoL from the book");
    attach_config(pb, cfg_sink);

    // price-multi
    auto* pm = app.add_subcommand("price-multi", "Multi-period lattice superhedge");
    pm->fallthrough();
    std::string pm_table;
    int pm_age = 70, pm_n = 1, pm_horizon = 1000;
    double pm_loan = 0.0, pm_g = 0.0, pm_eps = 0.0, pm_eta = 0.0, pm_defer = 0.0;
    ModelFlags pm_mf;
    pm->add_option("--table", pm_table, "Mortality CSV (age,qx)")->required();
    pm->add_option("--age", pm_age, "Age at outset")->required();
    pm->add_option("--n", pm_n, "Number of lives")->required();
    pm_mf.add_to(pm);
    pm->add_option("--loan", pm_loan, "Initial loan L0")->required();
    pm->add_option("--loan-rate", pm_g, "Loan accrual rate per period");
    pm->add_option("--horizon", pm_horizon, "Periods (truncated at the table's terminal age)");
    pm->add_option("--eps", pm_eps, "XoL excess margin epsilon")->required();
    pm->add_option("--eta", pm_eta, "Reinsurer mortality loading");
    pm->add_option("--deferment", pm_defer, "Deferment rate for the DCF comparator");
    attach_config(pm, cfg_sink);

    // sweep
    auto* sw = app.add_subcommand("sweep", "Sweep n and emit CSV");
    sw->fallthrough();
    int sw_from = 0, sw_to = 0, sw_step = 1;
    bool sw_multi = false;
    int sw_age = 70, sw_horizon = 1000;
    double sw_p = 0.0, sw_loan = 0.0, sw_eps = 0.0, sw_eta = 0.0, sw_g = 0.0, sw_defer = 0.0;
    std::string sw_table, sw_out;
    ModelFlags sw_mf;
    sw->add_option("--n-from", sw_from)->required();
    sw->add_option("--n-to", sw_to)->required();
    sw->add_option("--n-step", sw_step);
    sw->add_flag("--multi", sw_multi, "Multi-period sweep (needs --table)");
    sw->add_option("--p", sw_p, "Death probability (single-period mode)");
    sw_mf.add_to(sw);
    sw->add_option("--loan", sw_loan)->required();
    sw->add_option("--eps", sw_eps)->required();
    sw->add_option("--eta", sw_eta);
    sw->add_option("--table", sw_table, "Mortality CSV (multi mode)");
    sw->add_option("--age", sw_age);
    sw->add_option("--loan-rate", sw_g);
    sw->add_option("--horizon", sw_horizon);
    sw->add_option("--deferment", sw_defer);
    sw->add_option("--out", sw_out, "Write CSV here instead of stdout");
    attach_config(sw, cfg_sink);

    // verify
    auto* vf = app.add_subcommand("verify", "Run the verification suites");
    vf->fallthrough();
    std::uint64_t vf_seed = 12345;
    int vf_tuples = 500;
    bool vf_fault = false;
    vf->add_option("--seed", vf_seed, "Random tuple seed");
    vf->add_option("--tuples", vf_tuples, "Random tuples in the duality suite");
    vf->add_flag("--inject-fault", vf_fault, "Corrupt one certificate (harness self-test)");
    attach_config(vf, cfg_sink);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config_file(args);
    } catch (const nneg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    std::vector<std::string> full;
    full.push_back(argv[0]);
    full.insert(full.end(), args.begin(), args.end());
    std::vector<char*> cargv;
    for (auto& a : full) cargv.push_back(a.data());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (ps->parsed()) {
            std::optional<double> xol =
                ps->count("--xol-price") ? std::optional<double>(ps_xol) : std::nullopt;
            return cmd_price_single(ps_n, ps_p, ps_mf, ps_loan, ps_eps, ps_eta, xol, ps_rate);
        }
        if (pb->parsed()) {
            if (!pb_basis.empty() && pb_basis != "independent")
                throw nneg::ValidationError("--xol-basis accepts only 'independent'");
            std::optional<double> price =
                pb->count("--xol-price") ? std::optional<double>(pb_price) : std::nullopt;
            return cmd_price_book(pb_book, pb_mf, pb_excess, price, pb_basis == "independent");
        }
        if (pm->parsed())
            return cmd_price_multi(pm_table, pm_age, pm_n, pm_mf, pm_loan, pm_g, pm_horizon,
                                   pm_eps, pm_eta, pm_defer);
        if (sw->parsed()) {
            if (sw_multi && sw_table.empty())
                throw nneg::ValidationError("--multi sweeps require --table");
            if (!sw_multi && !(sw_p > 0.0))
                throw nneg::ValidationError("single-period sweeps require --p");
            return cmd_sweep(sw_from, sw_to, sw_step, sw_multi, sw_p, sw_mf, sw_loan, sw_eps,
                             sw_eta, sw_table, sw_age, sw_g, sw_horizon, sw_defer, sw_out);
        }
        if (vf->parsed()) return cmd_verify(vf_seed, vf_tuples, vf_fault);
    } catch (const nneg::ArbitrageError& e) {
        std::cerr << "arbitrage: " << e.what() << "\n";
        return kExitArbitrage;
    } catch (const nneg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
