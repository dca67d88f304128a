#pragma once

// Command-line front end. run_cli() returns the process exit code:
// 0 success, 1 validation error, 2 resource-cap refusal.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finitekelly/io.hpp"
#include "finitekelly/kelly.hpp"
#include "finitekelly/resource.hpp"
#include "finitekelly/sideinfo.hpp"
#include "finitekelly/sim.hpp"
#include "finitekelly/types.hpp"
#include "finitekelly/utility.hpp"

namespace finitekelly::cli {

namespace detail {

struct Grid {
    double lo, hi, step;
};

inline Grid parse_grid(const std::string& spec)
{
    Grid g{};
    char extra = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &g.lo, &g.hi, &g.step, &extra) != 3)
        throw std::invalid_argument("grid '" + spec + "' must have the form lo:hi:step");
    if (!(g.step > 0.0) || !(g.hi >= g.lo))
        throw std::invalid_argument("grid '" + spec + "' needs step > 0 and hi >= lo");
    return g;
}

inline std::vector<double> grid_points(const Grid& g)
{
    const auto count = static_cast<std::size_t>(std::floor((g.hi - g.lo) / g.step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::round((g.lo + static_cast<double>(i) * g.step) * 1e12) / 1e12;
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty())
            out.push_back(cur);
    return out;
}

inline std::vector<Symbol> parse_symbols(const std::string& s, std::size_t k)
{
    std::vector<Symbol> out;
    for (const auto& tok : split(s, ',')) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0' || v >= k)
            throw std::invalid_argument("outcome symbol '" + tok + "' is not in [0, " + std::to_string(k) + ")");
        out.push_back(static_cast<Symbol>(v));
    }
    if (out.empty())
        throw std::invalid_argument("empty outcome sequence");
    return out;
}

inline std::string one_line(std::string s)
{
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

inline void emit(const std::string& out_path, std::ostream& out, const std::string& text)
{
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f)
        throw std::invalid_argument("cannot open output file '" + out_path + "'");
    f << text;
}

inline std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

} // namespace detail

struct RunConfig {
    std::string out_path;
    unsigned threads = 0;

    std::string p_path, qa_path, qb_path, q_path, pxyz_path;
    std::uint64_t n = 0;
    double epsilon = 0.0;
    double k_bits = 0.0;
    double beta = 0.0;
    double alpha = 1.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t k = 0;
    double target = 0.0;
    double grid_step = 0.0;
    std::uint64_t cap = kDefaultTypeCap;
    std::string eps_grid = "0.05:0.95:0.05";
    std::string report = "value,equilibrium";
    std::string mode = "real";
    std::string outcome;
    bool best_type = false;
};

namespace detail {

inline std::string cmd_frontier(const RunConfig& c)
{
    const Dist p = io::load_dist(c.p_path);
    const Dist qb = io::load_dist(c.qb_path);
    const auto pts = grid_points(parse_grid(c.eps_grid));
    for (double e : pts)
        if (!(e > 0.0 && e <= 1.0 + 1e-12))
            throw std::invalid_argument("epsilon grid values must lie in (0, 1]");
    std::vector<RiskRewardBound> rows(pts.size());
    parallel_for(pts.size(), c.threads,
                 [&](std::size_t i) { rows[i] = risk_reward_bound(p, qb, std::min(1.0, pts[i]), c.n); });
    std::string s = "epsilon,eta,reward_bits,risk_exponent,bound_bits\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& r = rows[i];
        s += io::fmt(std::min(1.0, pts[i])) + "," + io::fmt(r.achieved.eta) + "," +
             io::fmt(r.achieved.reward_bits_per_round) + "," + io::fmt(r.achieved.risk_exponent) + "," +
             io::fmt(r.bound_bits) + "\n";
    }
    return s;
}

inline io::json point_json(const RiskRewardPoint& pt)
{
    io::json j;
    j["eta"] = io::num(pt.eta);
    j["multiplier"] = io::num(pt.multiplier);
    j["constraint_active"] = pt.constraint_active;
    j["reward_bits"] = io::num(pt.reward_bits_per_round);
    j["risk_exponent_bits"] = io::num(pt.risk_exponent);
    j["strategy"] = io::to_json(pt.strategy);
    return j;
}

inline std::string cmd_optimize(const RunConfig& c, bool has_eps, bool has_k)
{
    const Dist p = io::load_dist(c.p_path);
    const Dist qb = io::load_dist(c.qb_path);
    if (has_eps == has_k)
        throw std::invalid_argument("optimize needs exactly one of --epsilon (with --n) or --k");
    io::json j;
    if (has_eps) {
        if (c.n == 0)
            throw std::invalid_argument("--epsilon requires --n >= 1");
        const auto b = risk_reward_bound(p, qb, c.epsilon, c.n);
        j["problem"] = "risk_constrained";
        j["epsilon"] = c.epsilon;
        j["n"] = c.n;
        j["budget_bits"] = io::num(b.achieved.budget);
        j["optimum"] = point_json(b.achieved);
        j["bound_bits"] = io::num(b.bound_bits);
        if (c.best_type) {
            const auto bt = best_type_under_risk(p, qb, c.n, c.epsilon, c.cap);
            io::json t;
            t["counts"] = bt.type.counts();
            t["reward_bits"] = io::num(bt.reward_bits);
            t["probability"] = io::num(bt.probability);
            j["best_type"] = t;
        }
    } else {
        const auto pt = solve_payoff_constrained(p, qb, c.k_bits);
        j["problem"] = "payoff_constrained";
        j["k_bits"] = c.k_bits;
        j["optimum"] = point_json(pt);
    }
    return dump(j);
}

inline std::string cmd_utility(const RunConfig& c)
{
    const Dist p = io::load_dist(c.p_path);
    const Dist qb = io::load_dist(c.qb_path);
    if (c.beta == 1.0)
        throw std::invalid_argument("--beta 1 is the Kelly case; use optimize instead");
    const double eta = eta_from_beta(c.beta);
    const Dist q = crra_optimal_strategy(p, qb, c.beta);
    io::json j;
    j["beta"] = c.beta;
    j["eta"] = io::num(eta);
    j["strategy"] = io::to_json(q);
    j["rate_closed_form_bits"] = io::num(expected_log_wealth_closed_form(p, qb, eta));
    j["rate_direct_bits"] = io::num(expected_log_wealth_direct(p, q, qb));
    if (c.n > 0)
        j["expected_utility"] = io::num(expected_utility_estimate(p, q, qb, c.beta, c.n, c.cap));
    return dump(j);
}

inline std::string cmd_simulate(const RunConfig& c, bool has_target)
{
    const Dist p = io::load_dist(c.p_path);
    const Dist qa = io::load_dist(c.qa_path);
    const Dist qb = io::load_dist(c.qb_path);
    if (c.n == 0 || c.trials == 0)
        throw std::invalid_argument("--n and --trials must be >= 1");
    const auto st = run_betting(p, qa, qb, c.n, c.trials, c.seed, c.threads);
    io::json j;
    j["n"] = c.n;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["rng"] = "philox4x32-10/v" + std::to_string(kRngVersion);
    j["mean_rate_bits"] = io::num(st.mean_rate);
    j["std_rate_bits"] = io::num(st.std_rate);
    j["ruin_count"] = st.ruined;
    j["increment_variance"] = io::num(st.increment_variance);
    j["band_3sigma_bits"] = io::num(st.band_halfwidth);
    j["expected_rate_bits"] = io::num(asymptotic_kelly_rate(p, qa, qb));
    if (has_target) {
        const auto sr = empirical_success_rate(p, qa, qb, c.n, c.target, c.trials, c.seed, c.threads, c.cap);
        io::json s;
        s["target_rate_bits"] = io::num(c.target);
        s["empirical"] = io::num(sr.empirical);
        s["successes"] = sr.successes;
        if (sr.exact)
            s["exact"] = io::num(*sr.exact);
        j["success"] = s;
    }
    return dump(j);
}

inline std::string cmd_sideinfo(const RunConfig& c, bool has_seed)
{
    const TripartiteDist p = io::load_tensor(c.pxyz_path);
    io::json j;
    for (const auto& item : split(c.report, ',')) {
        if (item == "value") {
            j["value_bits"] = io::num(asymptotic_value(p));
            j["h_z_given_y"] = io::num(conditional_entropy(p.p_yz()));
            j["h_z_given_x"] = io::num(conditional_entropy(p.p_xz()));
        } else if (item == "equilibrium") {
            const auto eq = equilibrium_strategies(p);
            j["alice_z_given_x"] = io::to_json(eq.alice);
            j["bob_z_given_y"] = io::to_json(eq.bob);
        } else if (item == "simulate") {
            if (!has_seed)
                throw std::invalid_argument("--report simulate requires --seed");
            if (c.n == 0 || c.trials == 0)
                throw std::invalid_argument("--report simulate requires --n and --trials >= 1");
            const auto eq = equilibrium_strategies(p);
            const auto st = run_sideinfo_game(p, eq.alice, eq.bob, c.n, c.trials, c.seed, c.threads);
            io::json s;
            s["n"] = c.n;
            s["trials"] = c.trials;
            s["seed"] = c.seed;
            s["mean_rate_bits"] = io::num(st.mean_rate);
            s["std_rate_bits"] = io::num(st.std_rate);
            s["band_3sigma_bits"] = io::num(st.band_halfwidth);
            s["ruin_count"] = st.ruined;
            j["simulation"] = s;
        } else {
            throw std::invalid_argument("unknown --report item '" + item + "' (value, equilibrium, simulate)");
        }
    }
    return dump(j);
}

inline std::string cmd_monotones(const RunConfig& c)
{
    const TripartiteDist p = io::load_tensor(c.pxyz_path);
    if (!(c.alpha >= 0.0))
        throw std::invalid_argument("--alpha must be >= 0");
    InfimumOptions opts;
    opts.threads = c.threads;
    opts.seed = c.seed;
    auto entry = [&](const MonotoneResult& r) {
        io::json e;
        e["value_bits"] = io::num(r.value);
        e["minimizer"] = io::to_json(r.minimizer);
        if (r.closed_form)
            e["closed_form_bits"] = io::num(*r.closed_form);
        if (r.grid_value)
            e["grid_value_bits"] = io::num(*r.grid_value);
        return e;
    };
    io::json j;
    j["alpha"] = c.alpha;
    j["free_state"] = is_free_state(p, 1e-9);
    j["E_alpha_XZ"] = entry(monotone_E_alpha(p.p_xz(), c.alpha, opts));
    j["E_alpha_YZ"] = entry(monotone_E_alpha(p.p_yz(), c.alpha, opts));
    j["negentropy_Z_given_X"] = entry(conditional_negentropy_E_alpha(p.p_xz(), c.alpha, opts));
    j["negentropy_Z_given_Y"] = entry(conditional_negentropy_E_alpha(p.p_yz(), c.alpha, opts));
    const auto s = p.sizes();
    if (s[0] <= 2 && s[1] <= 2 && s[2] <= 2) {
        const auto m = monotone_M_alpha(p, c.alpha);
        io::json e;
        e["value_bits"] = io::num(m.value);
        e["grid_value_bits"] = io::num(m.grid_value);
        if (m.closed_form)
            e["closed_form_bits"] = io::num(*m.closed_form);
        j["M_alpha"] = e;
    }
    j["arq_log_value_bits"] = io::num(arq_log_value(p));
    if (c.grid_step > 0.0) {
        const auto r = arq_numeric(p, [](double w) { return std::log2(w); }, c.grid_step, c.threads);
        io::json e;
        e["grid_step"] = c.grid_step;
        e["sup_inf_bits"] = io::num(r.sup_inf);
        e["inf_sup_bits"] = io::num(r.inf_sup);
        j["arq_numeric"] = e;
    }
    return dump(j);
}

inline std::string cmd_kraft(const RunConfig& c)
{
    CodeMode mode;
    if (c.mode == "real")
        mode = CodeMode::Real;
    else if (c.mode == "integer")
        mode = CodeMode::Integer;
    else
        throw std::invalid_argument("--mode must be 'real' or 'integer'");
    const Dist q = io::load_dist(c.q_path);
    const CodeTable ta = lengths_from_strategy(q, mode);
    io::json j;
    j["mode"] = c.mode;
    io::json lens = io::json::array();
    for (double l : ta.lengths())
        lens.push_back(io::num(l));
    j["lengths_bits"] = lens;
    j["kraft_sum"] = io::num(ta.kraft_sum());
    if (!c.qb_path.empty()) {
        const CodeTable tb = lengths_from_strategy(io::load_dist(c.qb_path), mode);
        if (c.outcome.empty())
            throw std::invalid_argument("--qb requires --outcome");
        const auto seq = parse_symbols(c.outcome, q.size());
        j["payout_bits"] = io::num(payout_bits(tb, ta, seq));
    }
    return dump(j);
}

inline std::string cmd_types(const RunConfig& c, bool has_p)
{
    if (c.n == 0 || c.k == 0)
        throw std::invalid_argument("--n and --k must be >= 1");
    std::optional<Dist> p;
    if (has_p) {
        p = io::load_dist(c.p_path);
        if (p->size() != c.k)
            throw std::invalid_argument("--p alphabet size differs from --k");
    }
    const auto types = enumerate_types(c.n, c.k, c.cap);
    std::string s = "type,class_size,lower_bound,upper_bound";
    s += p ? ",probability\n" : "\n";
    for (const auto& t : types) {
        const auto b = type_size_bounds_check(t);
        std::string counts;
        for (std::size_t i = 0; i < t.counts().size(); ++i)
            counts += (i ? " " : "") + std::to_string(t.counts()[i]);
        s += counts + "," + b.size.str() + "," + io::fmt(b.lower) + "," + io::fmt(b.upper);
        if (p)
            s += "," + io::fmt(type_class_probability_exact(*p, t));
        s += "\n";
    }
    return s;
}

} // namespace detail

/// Parses args (without the program name), runs the command and writes
/// results to --out or `out`. Diagnostics go to `err` as a single line.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig c;
    CLI::App app{"Finite-horizon Kelly betting toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto add_common = [&](CLI::App* s) {
        s->add_option("--out", c.out_path, "Output file (default: stdout)");
        s->add_option("--threads", c.threads, "Worker threads (0: machine parallelism)");
    };

    auto* frontier = app.add_subcommand("frontier", "Risk-reward frontier over an epsilon grid (CSV)");
    frontier->add_option("--p", c.p_path, "True distribution (JSON)")->required();
    frontier->add_option("--qb", c.qb_path, "Bookmaker distribution (JSON)")->required();
    frontier->add_option("--n", c.n, "Number of rounds")->required()->check(CLI::PositiveNumber);
    frontier->add_option("--eps-grid", c.eps_grid, "lo:hi:step");
    add_common(frontier);

    auto* optimize = app.add_subcommand("optimize", "Risk- or payoff-constrained optimal bet (JSON)");
    optimize->add_option("--p", c.p_path)->required();
    optimize->add_option("--qb", c.qb_path)->required();
    auto* opt_eps = optimize->add_option("--epsilon", c.epsilon, "Success probability floor");
    auto* opt_k = optimize->add_option("--k", c.k_bits, "Payoff target in bits per round");
    optimize->add_option("--n", c.n);
    optimize->add_option("--cap", c.cap);
    optimize->add_flag("--best-type", c.best_type, "Also report the exact single-type optimum");
    add_common(optimize);

    auto* utility = app.add_subcommand("utility", "CRRA-optimal strategy and rates (JSON)");
    utility->add_option("--p", c.p_path)->required();
    utility->add_option("--qb", c.qb_path)->required();
    utility->add_option("--beta", c.beta)->required();
    utility->add_option("--n", c.n, "Rounds for the exact expected utility");
    utility->add_option("--cap", c.cap);
    add_common(utility);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo betting trials (JSON)");
    simulate->add_option("--p", c.p_path)->required();
    simulate->add_option("--qa", c.qa_path)->required();
    simulate->add_option("--qb", c.qb_path)->required();
    simulate->add_option("--n", c.n)->required();
    simulate->add_option("--trials", c.trials)->required();
    simulate->add_option("--seed", c.seed)->required();
    auto* sim_target = simulate->add_option("--target", c.target, "Success threshold in bits per round");
    simulate->add_option("--cap", c.cap);
    add_common(simulate);

    auto* sideinfo = app.add_subcommand("sideinfo", "Side-information game analysis (JSON)");
    sideinfo->add_option("--pxyz", c.pxyz_path)->required();
    sideinfo->add_option("--report", c.report, "Comma list of value, equilibrium, simulate");
    sideinfo->add_option("--n", c.n);
    sideinfo->add_option("--trials", c.trials);
    auto* side_seed = sideinfo->add_option("--seed", c.seed);
    add_common(sideinfo);

    auto* monotones = app.add_subcommand("monotones", "Resource monotones of a tripartite tensor (JSON)");
    monotones->add_option("--pxyz", c.pxyz_path)->required();
    monotones->add_option("--alpha", c.alpha);
    monotones->add_option("--grid-step", c.grid_step, "Strategy grid step for the numeric ARQ (0: skip)");
    monotones->add_option("--seed", c.seed, "Multi-start seed");
    add_common(monotones);

    auto* kraft = app.add_subcommand("kraft", "Code lengths and payouts (JSON)");
    kraft->add_option("--q", c.q_path, "Alice's strategy (JSON)")->required();
    kraft->add_option("--qb", c.qb_path, "Bob's strategy (JSON)");
    kraft->add_option("--mode", c.mode, "real or integer");
    kraft->add_option("--outcome", c.outcome, "Comma-separated outcome symbols");
    add_common(kraft);

    auto* types = app.add_subcommand("types", "Enumerate types with class sizes (CSV)");
    types->add_option("--n", c.n)->required();
    types->add_option("--k", c.k)->required();
    auto* types_p = types->add_option("--p", c.p_path);
    types->add_option("--cap", c.cap);
    add_common(types);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return 1;
    }

    try {
        std::string text;
        if (frontier->parsed())
            text = detail::cmd_frontier(c);
        else if (optimize->parsed())
            text = detail::cmd_optimize(c, opt_eps->count() > 0, opt_k->count() > 0);
        else if (utility->parsed())
            text = detail::cmd_utility(c);
        else if (simulate->parsed())
            text = detail::cmd_simulate(c, sim_target->count() > 0);
        else if (sideinfo->parsed())
            text = detail::cmd_sideinfo(c, side_seed->count() > 0);
        else if (monotones->parsed())
            text = detail::cmd_monotones(c);
        else if (kraft->parsed())
            text = detail::cmd_kraft(c);
        else if (types->parsed())
            text = detail::cmd_types(c, types_p->count() > 0);
        detail::emit(c.out_path, out, text);
        return 0;
    } catch (const ResourceCapError& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << detail::one_line(e.what()) << '\n';
        return 1;
    }
}

} // namespace finitekelly::cli
