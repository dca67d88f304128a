#pragma once

// Seeded Monte Carlo: i.i.d. sampling, reinvested betting trials, success
// rates and the side-information code game. Trial t draws from the Philox
// stream (seed, t), so results do not depend on the worker count.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "finitekelly/kelly.hpp"
#include "finitekelly/parallel.hpp"
#include "finitekelly/resource.hpp"
#include "finitekelly/rng.hpp"
#include "finitekelly/sideinfo.hpp"
#include "finitekelly/types.hpp"

namespace finitekelly {

inline std::vector<Symbol> sample_iid(const Dist& p, std::uint64_t n, std::uint64_t seed, std::uint64_t stream = 0)
{
    if (n == 0)
        throw std::invalid_argument("sample_iid: n must be >= 1");
    PhiloxStream rng(seed, stream);
    const DiscreteSampler draw(p);
    std::vector<Symbol> out(n);
    for (auto& s : out)
        s = draw(rng);
    return out;
}

struct TripartiteSample {
    std::vector<Symbol> x, y, z;
};

inline TripartiteSample sample_tripartite(const TripartiteDist& p, std::uint64_t n, std::uint64_t seed,
                                          std::uint64_t stream = 0)
{
    const auto s = p.sizes();
    const auto flat = sample_iid(p.joint().flat(), n, seed, stream);
    TripartiteSample out;
    out.x.resize(n);
    out.y.resize(n);
    out.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.z[i] = flat[i] % s[2];
        out.y[i] = (flat[i] / s[2]) % s[1];
        out.x[i] = flat[i] / (s[1] * s[2]);
    }
    return out;
}

struct WealthLedger {
    std::uint64_t n_rounds = 0;
    std::vector<double> log2_wealth_trajectory; ///< log2 W after each round, W_i = 1
    EmpiricalType realized_type;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

struct BettingStats {
    std::uint64_t n = 0;
    std::uint64_t trials = 0;
    std::uint64_t ruined = 0;       ///< trials whose log-wealth reached -inf
    double mean_rate = 0.0;         ///< over non-ruined trials, bits/round
    double std_rate = 0.0;          ///< sample std of the per-trial rates
    double increment_variance = 0.0; ///< plug-in variance of per-round increments
    double band_halfwidth = 0.0;    ///< 3 sigma for mean_rate
    std::vector<double> rates;      ///< per-trial (1/n) log2 W_F
    std::vector<WealthLedger> ledgers;

    bool within_band(double target) const { return std::abs(mean_rate - target) <= band_halfwidth; }
};

namespace detail {

/// Per-symbol increment log2(q_a(x)/q_b(x)); -inf when q_a(x) = 0.
inline std::vector<double> increments(const Dist& q_a, const Dist& q_b)
{
    std::vector<double> inc(q_a.size());
    for (std::size_t x = 0; x < inc.size(); ++x) {
        if (q_a[x] == 0.0)
            inc[x] = -kInf;
        else if (q_b[x] == 0.0)
            inc[x] = kInf;
        else
            inc[x] = std::log2(q_a[x]) - std::log2(q_b[x]);
    }
    return inc;
}

struct TrialOutcome {
    double rate = 0.0;
    bool ruined = false;
    double inc_sum = 0.0;
    double inc_sumsq = 0.0;
    std::uint64_t inc_count = 0;
};

inline void summarize(BettingStats& st, std::span<const TrialOutcome> outcomes)
{
    CompensatedSum sum, inc_sum, inc_sq;
    std::uint64_t ok = 0, inc_count = 0;
    for (const auto& o : outcomes) {
        st.rates.push_back(o.rate);
        inc_sum.add(o.inc_sum);
        inc_sq.add(o.inc_sumsq);
        inc_count += o.inc_count;
        if (o.ruined) {
            ++st.ruined;
            continue;
        }
        sum.add(o.rate);
        ++ok;
    }
    st.mean_rate = ok ? sum.value() / static_cast<double>(ok) : -kInf;
    CompensatedSum dev;
    for (const auto& o : outcomes)
        if (!o.ruined)
            dev.add((o.rate - st.mean_rate) * (o.rate - st.mean_rate));
    st.std_rate = ok > 1 ? std::sqrt(dev.value() / static_cast<double>(ok - 1)) : 0.0;
    if (inc_count > 0) {
        const double m = inc_sum.value() / static_cast<double>(inc_count);
        st.increment_variance = std::max(0.0, inc_sq.value() / static_cast<double>(inc_count) - m * m);
    }
    if (ok > 0)
        st.band_halfwidth = 3.0 * std::sqrt(st.increment_variance / (static_cast<double>(st.n) * static_cast<double>(ok)));
}

} // namespace detail

/// Reinvested betting over n rounds per trial; per-trial log2 W accumulates
/// log2(q_a(x)/q_b(x)).
inline BettingStats run_betting(const Dist& p, const Dist& q_a, const Dist& q_b, std::uint64_t n, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads = 1, bool keep_ledgers = false)
{
    require_same_alphabet(p, q_a, "run_betting");
    require_same_alphabet(p, q_b, "run_betting");
    if (n == 0 || trials == 0)
        throw std::invalid_argument("run_betting: n and trials must be >= 1");
    const auto inc = detail::increments(q_a, q_b);
    const DiscreteSampler draw(p);
    std::vector<detail::TrialOutcome> outcomes(trials);
    std::vector<WealthLedger> ledgers(keep_ledgers ? trials : 0);

    parallel_for(trials, threads, [&](std::size_t t) {
        PhiloxStream rng(seed, t);
        std::vector<Count> counts(p.size(), 0);
        std::vector<double> traj;
        if (keep_ledgers)
            traj.reserve(n);
        detail::CompensatedSum lw;
        detail::TrialOutcome o;
        bool ruined = false;
        for (std::uint64_t i = 0; i < n; ++i) {
            const Symbol x = draw(rng);
            ++counts[x];
            if (std::isfinite(inc[x])) {
                lw.add(inc[x]);
                o.inc_sum += inc[x];
                o.inc_sumsq += inc[x] * inc[x];
                ++o.inc_count;
            } else if (inc[x] < 0) {
                ruined = true;
            }
            if (keep_ledgers)
                traj.push_back(ruined ? -kInf : lw.value());
        }
        o.ruined = ruined;
        o.rate = ruined ? -kInf : lw.value() / static_cast<double>(n);
        outcomes[t] = o;
        if (keep_ledgers) {
            WealthLedger& led = ledgers[t];
            led.n_rounds = n;
            led.log2_wealth_trajectory = std::move(traj);
            led.realized_type = EmpiricalType(std::move(counts));
            led.seed = seed;
            led.trial = t;
        }
    });

    BettingStats st;
    st.n = n;
    st.trials = trials;
    detail::summarize(st, outcomes);
    st.ledgers = std::move(ledgers);
    return st;
}

/// |final log-wealth - wealth_log_ratio(realized type)|; 0 when both are -inf.
inline double ledger_consistency_gap(const WealthLedger& led, const Dist& q_a, const Dist& q_b)
{
    if (led.log2_wealth_trajectory.size() != led.n_rounds)
        throw std::logic_error("WealthLedger: trajectory length differs from n_rounds");
    const double fin = led.log2_wealth_trajectory.back();
    const double ref = wealth_log_ratio(q_a, q_b, led.realized_type);
    if (fin == ref)
        return 0.0;
    return std::abs(fin - ref);
}

struct SuccessRate {
    double empirical = 0.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    std::optional<double> exact; ///< enumerated probability when feasible
    double band_halfwidth = 0.0; ///< 3 sigma binomial band around `exact`
};

/// Probability that (1/n) log2 W_F >= target_rate, by type enumeration.
inline double exact_success_probability(const Dist& p, const Dist& q_a, const Dist& q_b, std::uint64_t n,
                                        double target_rate, std::uint64_t cap = kDefaultTypeCap)
{
    detail::CompensatedSum acc;
    for (const auto& t : enumerate_types(n, p.size(), cap))
        if (wealth_log_ratio(q_a, q_b, t) / static_cast<double>(n) >= target_rate)
            acc.add(type_class_probability_exact(p, t));
    return std::min(1.0, acc.value());
}

/// Fraction of trials with (1/n) log2 W_F >= target_rate. Trial rates go
/// through the realized type, the same path as the exact enumeration.
inline SuccessRate empirical_success_rate(const Dist& p, const Dist& q_a, const Dist& q_b, std::uint64_t n,
                                          double target_rate, std::uint64_t trials, std::uint64_t seed,
                                          unsigned threads = 1, std::uint64_t cap = kDefaultTypeCap)
{
    require_same_alphabet(p, q_a, "empirical_success_rate");
    require_same_alphabet(p, q_b, "empirical_success_rate");
    if (n == 0 || trials == 0)
        throw std::invalid_argument("empirical_success_rate: n and trials must be >= 1");
    const DiscreteSampler draw(p);
    std::vector<char> hit(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        PhiloxStream rng(seed, t);
        std::vector<Count> counts(p.size(), 0);
        for (std::uint64_t i = 0; i < n; ++i)
            ++counts[draw(rng)];
        const double rate = wealth_log_ratio(q_a, q_b, EmpiricalType(std::move(counts))) / static_cast<double>(n);
        hit[t] = rate >= target_rate ? 1 : 0;
    });
    SuccessRate out;
    out.trials = trials;
    for (char h : hit)
        out.successes += static_cast<std::uint64_t>(h);
    out.empirical = static_cast<double>(out.successes) / static_cast<double>(trials);
    if (number_of_types(n, p.size()) <= static_cast<long double>(cap)) {
        const double e = exact_success_probability(p, q_a, q_b, n, target_rate, cap);
        out.exact = e;
        out.band_halfwidth = 3.0 * std::sqrt(e * (1.0 - e) / static_cast<double>(trials));
    }
    return out;
}

/// Side-information game over n rounds: per-round increment
/// log2 Q_A(z|x) - log2 Q_B(z|y).
inline BettingStats run_sideinfo_game(const TripartiteDist& p, const CondStrategy& q_a, const CondStrategy& q_b,
                                      std::uint64_t n, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1)
{
    const auto s = p.sizes();
    if (q_a.given_size() != s[0] || q_b.given_size() != s[1] || q_a.out_size() != s[2] || q_b.out_size() != s[2])
        throw std::invalid_argument("run_sideinfo_game: strategy shapes do not match the tensor");
    if (n == 0 || trials == 0)
        throw std::invalid_argument("run_sideinfo_game: n and trials must be >= 1");
    std::vector<double> inc(s[0] * s[1] * s[2]);
    for (std::size_t x = 0; x < s[0]; ++x)
        for (std::size_t y = 0; y < s[1]; ++y)
            for (std::size_t z = 0; z < s[2]; ++z) {
                const double a = q_a(z, x), b = q_b(z, y);
                inc[(x * s[1] + y) * s[2] + z] = a == 0.0 ? -kInf : (b == 0.0 ? kInf : std::log2(a) - std::log2(b));
            }
    const DiscreteSampler draw(p.joint().flat());
    std::vector<detail::TrialOutcome> outcomes(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        PhiloxStream rng(seed, t);
        detail::CompensatedSum lw;
        detail::TrialOutcome o;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double d = inc[draw(rng)];
            if (std::isfinite(d)) {
                lw.add(d);
                o.inc_sum += d;
                o.inc_sumsq += d * d;
                ++o.inc_count;
            } else if (d < 0) {
                o.ruined = true;
            }
        }
        o.rate = o.ruined ? -kInf : lw.value() / static_cast<double>(n);
        outcomes[t] = o;
    });
    BettingStats st;
    st.n = n;
    st.trials = trials;
    detail::summarize(st, outcomes);
    return st;
}

/// Code-game realization: per trial, (1/n) payout_bits(table_b, table_a)
/// over sampled (x^n, y^n, z^n).
inline BettingStats run_code_game(const TripartiteDist& p, const ConditionalCodeTable& table_a,
                                  const ConditionalCodeTable& table_b, std::uint64_t n, std::uint64_t trials,
                                  std::uint64_t seed, unsigned threads = 1)
{
    if (n == 0 || trials == 0)
        throw std::invalid_argument("run_code_game: n and trials must be >= 1");
    std::vector<detail::TrialOutcome> outcomes(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        const auto smp = sample_tripartite(p, n, seed, t);
        detail::TrialOutcome o;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = table_b.row(smp.y[i]).length(smp.z[i]) - table_a.row(smp.x[i]).length(smp.z[i]);
            if (std::isfinite(d)) {
                o.inc_sum += d;
                o.inc_sumsq += d * d;
                ++o.inc_count;
            } else {
                o.ruined = true;
            }
        }
        o.rate = o.ruined ? -kInf : payout_bits(table_b, table_a, smp.x, smp.y, smp.z) / static_cast<double>(n);
        outcomes[t] = o;
    });
    BettingStats st;
    st.n = n;
    st.trials = trials;
    detail::summarize(st, outcomes);
    return st;
}

} // namespace finitekelly
