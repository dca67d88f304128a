#pragma once

// Resource-theory layer: free states, divergence monotones computed as
// numerical infima over product references, conditional negentropies,
// adversarial payoff functionals, and the prefix-code realization of bets.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finitekelly/divergence.hpp"
#include "finitekelly/kelly.hpp"
#include "finitekelly/optimize.hpp"
#include "finitekelly/parallel.hpp"
#include "finitekelly/rng.hpp"
#include "finitekelly/sideinfo.hpp"

namespace finitekelly {

/// True iff max |P_XYZ - P_X P_Y P_Z| <= tol.
inline bool is_free_state(const TripartiteDist& p, double tol)
{
    const Dist factors[] = {p.p_x(), p.p_y(), p.p_z()};
    const JointDist prod = JointDist::product(factors);
    return p.joint().flat().max_abs_diff(prod.flat()) <= tol;
}

struct MonotoneResult {
    double value = kInf;              ///< best incumbent of the infimum
    Dist minimizer;                   ///< Q_A attaining `value`
    std::optional<double> closed_form; ///< alpha = 1 closed form, when available
    std::optional<double> grid_value; ///< best simplex-grid value (|A| <= 3)
    int starts = 0;
    bool converged = false;
};

struct InfimumOptions {
    int starts = 8;           ///< random multi-start count (plus uniform and P_A starts)
    std::uint64_t seed = 0x5eed;
    unsigned threads = 1;
    std::size_t grid_steps_2 = 400; ///< simplex grid resolution for |A| = 2
    std::size_t grid_steps_3 = 100; ///< simplex grid resolution for |A| = 3
};

namespace detail {

/// inf over Q_A of D_alpha(P_AZ || Q_A x ref_Z).
inline MonotoneResult infimum_over_first_factor(const JointDist& p_az, double alpha, const Dist& ref_z,
                                                const InfimumOptions& opts)
{
    if (p_az.rank() != 2)
        throw std::invalid_argument("monotone: expected a joint distribution over A x Z");
    if (!(alpha >= 0.0))
        throw std::invalid_argument("monotone: alpha must be >= 0");
    const std::size_t ka = p_az.dims()[0];
    if (ref_z.size() != p_az.dims()[1])
        throw std::invalid_argument("monotone: reference size mismatch");
    const Dist& flat = p_az.flat();

    auto objective_q = [&](const Dist& qa) {
        const Dist factors[] = {qa, ref_z};
        return renyi_divergence(alpha, flat, JointDist::product(factors).flat());
    };
    auto objective = [&](const std::vector<double>& logits) { return objective_q(opt::simplex_from_logits(logits)); };

    MonotoneResult out;
    const Dist pa = p_az.marginal({0}).flat();

    // Start points: uniform, P_A (smoothed), grid best, then seeded random logits.
    std::vector<std::vector<double>> starts;
    starts.push_back(std::vector<double>(ka - 1, 0.0));
    {
        std::vector<double> smooth(pa.vec());
        for (double& v : smooth)
            v = 0.999 * v + 0.001 / static_cast<double>(ka);
        starts.push_back(opt::logits_from_simplex(Dist::from_weights(std::move(smooth))));
    }
    if (ka <= 3 && ka >= 2) {
        const std::size_t steps = ka == 2 ? opts.grid_steps_2 : opts.grid_steps_3;
        double best = kInf;
        std::vector<double> best_q;
        opt::for_each_simplex_point(ka, steps, false, [&](const std::vector<double>& q) {
            const double v = objective_q(Dist::from_weights(q));
            if (v < best) {
                best = v;
                best_q = q;
            }
        });
        out.grid_value = best;
        std::vector<double> smooth(best_q);
        for (double& v : smooth)
            v = 0.999 * v + 0.001 / static_cast<double>(ka);
        starts.push_back(opt::logits_from_simplex(Dist::from_weights(std::move(smooth))));
    }
    for (int s = 0; s < opts.starts; ++s) {
        PhiloxStream rng(opts.seed, static_cast<std::uint64_t>(s));
        std::vector<double> x(ka - 1);
        for (double& v : x)
            v = 6.0 * rng.uniform01() - 3.0;
        starts.push_back(std::move(x));
    }

    std::vector<opt::MinimizeResult> results(starts.size());
    parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
        auto r = opt::nelder_mead(objective, starts[i]);
        // one restart from the incumbent tightens the simplex
        auto r2 = opt::nelder_mead(objective, r.x, 0.05);
        results[i] = r2.value <= r.value ? r2 : r;
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].value < results[best].value)
            best = i;
    out.value = results[best].value;
    out.minimizer = opt::simplex_from_logits(results[best].x);
    out.converged = results[best].converged;
    out.starts = static_cast<int>(starts.size());
    if (out.grid_value && *out.grid_value < out.value) {
        // grid incumbent wins only if local search failed to improve on it
        out.value = *out.grid_value;
    }
    if (ka == 1) {
        out.minimizer = Dist::uniform(1);
        out.value = objective_q(out.minimizer);
    }
    return out;
}

} // namespace detail

/// E_alpha(A:Z) = inf_{Q_A} D_alpha(P_AZ || Q_A x P_Z). At alpha = 1 the
/// closed form I(A:Z) is attached and must agree with the numeric infimum.
inline MonotoneResult monotone_E_alpha(const JointDist& p_az, double alpha, const InfimumOptions& opts = {})
{
    const Dist pz = p_az.marginal({1}).flat();
    auto out = detail::infimum_over_first_factor(p_az, alpha, pz, opts);
    if (alpha == 1.0) {
        out.closed_form = mutual_information(p_az);
        if (std::abs(*out.closed_form - out.value) > 1e-6)
            throw std::runtime_error("monotone_E_alpha: numeric infimum " + std::to_string(out.value) +
                                     " disagrees with I(A:Z) = " + std::to_string(*out.closed_form));
    }
    return out;
}

/// E_alpha(Z|A) = inf_{Q_A} D_alpha(P_AZ || Q_A x mu_Z), with mu_Z uniform.
/// At alpha = 1 this is log2|Z| - H(Z|A).
inline MonotoneResult conditional_negentropy_E_alpha(const JointDist& p_az, double alpha,
                                                     const InfimumOptions& opts = {})
{
    const std::size_t kz = p_az.dims().at(1);
    auto out = detail::infimum_over_first_factor(p_az, alpha, Dist::uniform(kz), opts);
    if (alpha == 1.0) {
        out.closed_form = std::log2(static_cast<double>(kz)) - conditional_entropy(p_az);
        if (std::abs(*out.closed_form - out.value) > 1e-6)
            throw std::runtime_error("conditional_negentropy_E_alpha: numeric infimum disagrees with closed form");
    }
    return out;
}

struct ProductInfimumResult {
    double value = kInf;
    double grid_value = kInf;
    std::array<Dist, 3> minimizer;
    std::optional<double> closed_form; ///< total correlation at alpha = 1
};

/// M_alpha = inf over product distributions Q_X Q_Y Q_Z of D_alpha(P_XYZ || Q).
/// Desk scale only: every alphabet must have at most two symbols.
inline ProductInfimumResult monotone_M_alpha(const TripartiteDist& p, double alpha, std::size_t grid_steps = 50)
{
    const auto s = p.sizes();
    if (s[0] > 2 || s[1] > 2 || s[2] > 2)
        throw ResourceCapError("monotone_M_alpha: only alphabets of size <= 2 are supported");
    const Dist& flat = p.joint().flat();
    auto eval = [&](const Dist& a, const Dist& b, const Dist& c) {
        const Dist factors[] = {a, b, c};
        return renyi_divergence(alpha, flat, JointDist::product(factors).flat());
    };
    auto binary = [](std::size_t k, double t) { return k == 1 ? Dist::uniform(1) : Dist({t, 1.0 - t}); };

    ProductInfimumResult out;
    std::array<double, 3> best_t{0.5, 0.5, 0.5};
    for (std::size_t i = 0; i <= grid_steps; ++i)
        for (std::size_t j = 0; j <= grid_steps; ++j)
            for (std::size_t k = 0; k <= grid_steps; ++k) {
                const double a = static_cast<double>(i) / grid_steps;
                const double b = static_cast<double>(j) / grid_steps;
                const double c = static_cast<double>(k) / grid_steps;
                const double v = eval(binary(s[0], a), binary(s[1], b), binary(s[2], c));
                if (v < out.grid_value) {
                    out.grid_value = v;
                    best_t = {a, b, c};
                }
            }
    auto to_logit = [](double t) {
        t = std::clamp(t, 1e-6, 1.0 - 1e-6);
        return std::log(t / (1.0 - t));
    };
    auto from_logit = [](double l) { return 1.0 / (1.0 + std::exp(-l)); };
    auto objective = [&](const std::vector<double>& l) {
        return eval(binary(s[0], from_logit(l[0])), binary(s[1], from_logit(l[1])), binary(s[2], from_logit(l[2])));
    };
    auto r = opt::nelder_mead(objective, {to_logit(best_t[0]), to_logit(best_t[1]), to_logit(best_t[2])}, 0.1);
    r = opt::nelder_mead(objective, r.x, 0.01);
    if (r.value <= out.grid_value) {
        out.value = r.value;
        out.minimizer = {binary(s[0], from_logit(r.x[0])), binary(s[1], from_logit(r.x[1])),
                         binary(s[2], from_logit(r.x[2]))};
    } else {
        out.value = out.grid_value;
        out.minimizer = {binary(s[0], best_t[0]), binary(s[1], best_t[1]), binary(s[2], best_t[2])};
    }
    if (alpha == 1.0)
        out.closed_form = shannon_entropy(p.p_x()) + shannon_entropy(p.p_y()) + shannon_entropy(p.p_z()) -
                          shannon_entropy(flat);
    return out;
}

/// The f = log adversarial payoff: H(Z|Y) - H(Z|X).
inline double arq_log_value(const TripartiteDist& p) { return asymptotic_value(p); }

struct ArqResult {
    double sup_inf;  ///< max over Alice's grid of min over Bob's grid
    double inf_sup;  ///< min over Bob's grid of max over Alice's grid
    std::size_t alice_strategies;
    std::size_t bob_strategies;
};

inline constexpr std::size_t kDefaultArqStrategyCap = 200'000;

/// All conditional strategies whose rows are interior simplex-grid points.
inline std::vector<CondStrategy> conditional_strategy_grid(std::size_t given, std::size_t outcomes, double grid_step,
                                                           std::size_t cap = kDefaultArqStrategyCap)
{
    if (!(grid_step > 0.0 && grid_step <= 1.0))
        throw std::invalid_argument("conditional_strategy_grid: grid_step must lie in (0, 1]");
    const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid_step));
    if (std::abs(static_cast<double>(steps) * grid_step - 1.0) > 1e-9)
        throw std::invalid_argument("conditional_strategy_grid: 1/grid_step must be an integer");
    const long double per_row = opt::simplex_grid_size(outcomes, steps, true);
    const long double total = std::pow(per_row, static_cast<long double>(given));
    if (total > static_cast<long double>(cap))
        throw ResourceCapError("conditional_strategy_grid: " + std::to_string(static_cast<double>(total)) +
                               " strategies exceed the cap of " + std::to_string(cap));
    if (per_row == 0)
        throw std::invalid_argument("conditional_strategy_grid: grid too coarse for an interior point");
    std::vector<Dist> rows;
    opt::for_each_simplex_point(outcomes, steps, true,
                                [&](const std::vector<double>& q) { rows.push_back(Dist::from_weights(q)); });
    std::vector<CondStrategy> out;
    std::vector<std::size_t> pick(given, 0);
    while (true) {
        std::vector<Dist> chosen;
        chosen.reserve(given);
        for (std::size_t g = 0; g < given; ++g)
            chosen.push_back(rows[pick[g]]);
        out.emplace_back(std::move(chosen));
        std::size_t g = 0;
        while (g < given && ++pick[g] == rows.size())
            pick[g++] = 0;
        if (g == given)
            break;
    }
    return out;
}

/// Grid sup-inf and inf-sup of E[f(Q_A(Z|X)/Q_B(Z|Y))] over explicit
/// strategy sets (one round).
inline ArqResult arq_on_strategy_sets(const TripartiteDist& p, const std::function<double(double)>& f,
                                      std::span<const CondStrategy> alice, std::span<const CondStrategy> bob,
                                      unsigned threads = 1)
{
    if (alice.empty() || bob.empty())
        throw std::invalid_argument("arq: empty strategy set");
    const auto s = p.sizes();
    struct Cell {
        std::size_t x, y, z;
        double mass;
    };
    std::vector<Cell> cells;
    for (std::size_t x = 0; x < s[0]; ++x)
        for (std::size_t y = 0; y < s[1]; ++y)
            for (std::size_t z = 0; z < s[2]; ++z)
                if (p(x, y, z) > 0.0)
                    cells.push_back({x, y, z, p(x, y, z)});

    std::vector<double> payoff(alice.size() * bob.size());
    parallel_for(alice.size(), threads, [&](std::size_t a) {
        for (std::size_t b = 0; b < bob.size(); ++b) {
            detail::CompensatedSum acc;
            for (const Cell& c : cells)
                acc.add(c.mass * f(alice[a](c.z, c.x) / bob[b](c.z, c.y)));
            payoff[a * bob.size() + b] = acc.value();
        }
    });
    ArqResult out{-kInf, kInf, alice.size(), bob.size()};
    for (std::size_t a = 0; a < alice.size(); ++a) {
        double row_min = kInf;
        for (std::size_t b = 0; b < bob.size(); ++b)
            row_min = std::min(row_min, payoff[a * bob.size() + b]);
        out.sup_inf = std::max(out.sup_inf, row_min);
    }
    for (std::size_t b = 0; b < bob.size(); ++b) {
        double col_max = -kInf;
        for (std::size_t a = 0; a < alice.size(); ++a)
            col_max = std::max(col_max, payoff[a * bob.size() + b]);
        out.inf_sup = std::min(out.inf_sup, col_max);
    }
    return out;
}

/// Grid approximation of sup_{Q_A} inf_{Q_B} E[f(Q_A(Z|X)/Q_B(Z|Y))].
inline ArqResult arq_numeric(const TripartiteDist& p, const std::function<double(double)>& f, double grid_step,
                             unsigned threads = 1, std::size_t cap = kDefaultArqStrategyCap)
{
    const auto s = p.sizes();
    if (s[0] > 3 || s[1] > 3 || s[2] > 3)
        throw ResourceCapError("arq_numeric: alphabets larger than 3 are out of desk scale");
    const auto alice = conditional_strategy_grid(s[0], s[2], grid_step, cap);
    const auto bob = conditional_strategy_grid(s[1], s[2], grid_step, cap);
    if (static_cast<long double>(alice.size()) * static_cast<long double>(bob.size()) > 1e9L)
        throw ResourceCapError("arq_numeric: payoff matrix too large");
    auto out = arq_on_strategy_sets(p, f, alice, bob, threads);
    if (out.sup_inf > out.inf_sup + 2.0 * grid_step)
        throw std::logic_error("arq_numeric: sup-inf exceeds inf-sup");
    return out;
}

// ---------------------------------------------------------------------------
// Prefix-code realization

enum class CodeMode { Real, Integer };

/// Per-symbol code lengths in bits; a sequence's length is the sum.
/// Zero-probability outcomes in integer mode get no codeword (+inf length).
class CodeTable {
public:
    CodeTable(CodeMode mode, std::vector<double> lengths) : mode_(mode), lengths_(std::move(lengths))
    {
        if (lengths_.empty())
            throw std::invalid_argument("CodeTable: empty outcome alphabet");
        for (double l : lengths_) {
            if (std::isnan(l) || l < 0.0)
                throw std::invalid_argument("CodeTable: lengths must be non-negative");
            if (mode_ == CodeMode::Integer && std::isfinite(l) && l != std::floor(l))
                throw std::invalid_argument("CodeTable: integer mode requires integral lengths");
            if (mode_ == CodeMode::Real && !std::isfinite(l))
                throw std::invalid_argument("CodeTable: real mode requires finite lengths");
        }
        const double k = kraft_sum();
        if (mode_ == CodeMode::Real && std::abs(k - 1.0) > 1e-10)
            throw std::invalid_argument("CodeTable: Kraft-McMillan equality violated (sum " + std::to_string(k) + ")");
        if (mode_ == CodeMode::Integer && k > 1.0 + 1e-12)
            throw std::invalid_argument("CodeTable: Kraft-McMillan inequality violated (sum " + std::to_string(k) +
                                        ")");
    }

    CodeMode mode() const noexcept { return mode_; }
    std::size_t size() const noexcept { return lengths_.size(); }
    double length(std::size_t z) const { return lengths_.at(z); }
    const std::vector<double>& lengths() const noexcept { return lengths_; }

    double kraft_sum() const
    {
        detail::CompensatedSum s;
        for (double l : lengths_)
            if (std::isfinite(l))
                s.add(std::exp2(-l));
        return s.value();
    }

    /// Implied bet 2^{-l(z)}.
    double implied_probability(std::size_t z) const { return std::exp2(-length(z)); }

private:
    CodeMode mode_;
    std::vector<double> lengths_;
};

/// Real mode: l(z) = -log2 q(z) (Kraft equality). Integer mode: Shannon
/// lengths ceil(-log2 q(z)) (Kraft inequality).
inline CodeTable lengths_from_strategy(const Dist& q, CodeMode mode)
{
    std::vector<double> lengths(q.size());
    for (std::size_t z = 0; z < q.size(); ++z) {
        if (q[z] == 0.0) {
            if (mode == CodeMode::Real)
                throw std::domain_error("lengths_from_strategy: zero-probability outcome has no real-valued length");
            lengths[z] = kInf;
            continue;
        }
        const double l = -std::log2(q[z]);
        if (mode == CodeMode::Real) {
            lengths[z] = l;
        } else {
            const double r = std::round(l);
            lengths[z] = std::abs(l - r) < 1e-12 ? r : std::ceil(l);
        }
    }
    if (mode == CodeMode::Real) {
        // Absorb rounding so the Kraft sum is 1 to within double precision.
        const double shift = std::log2(detail::compensated_sum(std::vector<double>(
            [&] {
                std::vector<double> t(lengths.size());
                for (std::size_t z = 0; z < t.size(); ++z)
                    t[z] = std::exp2(-lengths[z]);
                return t;
            }())));
        for (double& l : lengths)
            l += shift;
    }
    return CodeTable(mode, std::move(lengths));
}

/// Per-conditioning-symbol code tables l(z|g).
class ConditionalCodeTable {
public:
    explicit ConditionalCodeTable(std::vector<CodeTable> rows) : rows_(std::move(rows))
    {
        if (rows_.empty())
            throw std::invalid_argument("ConditionalCodeTable: no rows");
    }
    const CodeTable& row(std::size_t g) const { return rows_.at(g); }
    std::size_t given_size() const noexcept { return rows_.size(); }

private:
    std::vector<CodeTable> rows_;
};

inline ConditionalCodeTable lengths_from_strategy(const CondStrategy& q, CodeMode mode)
{
    std::vector<CodeTable> rows;
    for (const Dist& r : q.rows())
        rows.push_back(lengths_from_strategy(r, mode));
    return ConditionalCodeTable(std::move(rows));
}

/// Surplus k = l_B(z^n) - l_A(z^n); negative k is Alice's cost.
inline double payout_bits(const CodeTable& table_b, const CodeTable& table_a, std::span<const Symbol> outcome)
{
    if (table_a.size() != table_b.size())
        throw std::invalid_argument("payout_bits: tables over different outcome alphabets");
    detail::CompensatedSum lb, la;
    for (Symbol z : outcome) {
        if (z >= table_a.size())
            throw std::out_of_range("payout_bits: outcome symbol out of range");
        lb.add(table_b.length(z));
        la.add(table_a.length(z));
    }
    return detail::divergence_difference(lb.value(), la.value(), "payout_bits");
}

/// Conditional version: k = l_B(z^n|y^n) - l_A(z^n|x^n).
inline double payout_bits(const ConditionalCodeTable& table_b, const ConditionalCodeTable& table_a,
                          std::span<const Symbol> xs, std::span<const Symbol> ys, std::span<const Symbol> zs)
{
    if (xs.size() != zs.size() || ys.size() != zs.size())
        throw std::invalid_argument("payout_bits: sequence length mismatch");
    detail::CompensatedSum lb, la;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        lb.add(table_b.row(ys[i]).length(zs[i]));
        la.add(table_a.row(xs[i]).length(zs[i]));
    }
    return detail::divergence_difference(lb.value(), la.value(), "payout_bits");
}

} // namespace finitekelly
