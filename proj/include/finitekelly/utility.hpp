#pragma once

// CRRA expected-utility layer.
//
// Note on parameters: crra_utility(w, beta) is (w^(1-beta) - 1)/(1-beta),
// whose relative risk aversion is beta. crra_optimal_strategy(beta) is the
// tilted bet with eta = 1/(1-beta); it is the stationary point of the power
// utility (w^beta - 1)/beta, i.e. of crra_utility with risk aversion
// 1 - beta. power_utility() exposes that objective.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "finitekelly/kelly.hpp"

namespace finitekelly {

struct UtilityParams {
    double beta = 0.0;

    /// 1/(1-beta); undefined at beta = 1.
    double alpha() const
    {
        if (beta == 1.0)
            throw std::domain_error("UtilityParams: alpha = 1/(1-beta) is undefined at beta = 1");
        return 1.0 / (1.0 - beta);
    }
};

/// u_beta(w) = (w^(1-beta) - 1)/(1-beta); log2 w at beta = 1.
inline double crra_utility(double w, UtilityParams params)
{
    if (!(w > 0.0))
        throw std::domain_error("crra_utility: wealth must be positive");
    if (params.beta == 1.0)
        return std::log2(w);
    const double e = 1.0 - params.beta;
    return (std::pow(w, e) - 1.0) / e;
}

/// Power utility (w^gamma - 1)/gamma, log2 w at gamma = 0. Equal to
/// crra_utility with beta = 1 - gamma (up to the log base at gamma = 0).
inline double power_utility(double w, double gamma)
{
    if (!(w > 0.0))
        throw std::domain_error("power_utility: wealth must be positive");
    if (gamma == 0.0)
        return std::log2(w);
    return (std::pow(w, gamma) - 1.0) / gamma;
}

inline double eta_from_beta(double beta)
{
    if (beta == 1.0)
        throw std::domain_error("eta_from_beta: beta = 1 is the Kelly case; bet q_a = p");
    return 1.0 / (1.0 - beta);
}

/// Q(x) ∝ p(x)^(1/(1-beta)) O(x)^(beta/(1-beta)) with odds O = 1/q_b.
/// Computed directly from the odds, independently of tilted_bet.
inline Dist crra_optimal_strategy(const Dist& p, const Dist& q_b, double beta)
{
    require_same_alphabet(p, q_b, "crra_optimal_strategy");
    if (beta == 1.0)
        throw std::domain_error("crra_optimal_strategy: beta = 1 is the Kelly case; bet q_a = p");
    if (beta == 0.0)
        return p;
    const double ep = 1.0 / (1.0 - beta);
    const double eo = beta / (1.0 - beta);
    std::vector<double> log_w(p.size(), -kInf);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0 && q_b[i] > 0.0) {
            const double log_odds = -std::log2(q_b[i]);
            log_w[i] = ep * std::log2(p[i]) + eo * log_odds;
        }
    }
    return Dist::from_log2_weights(log_w);
}

/// alpha D(p||q_b) + (1-alpha) D_alpha(p||q_b): the expected log-wealth rate
/// of the tilted bet at eta = alpha. For alpha < 0 the sgn-free Renyi
/// continuation is used.
inline double expected_log_wealth_closed_form(const Dist& p, const Dist& q_b, double alpha)
{
    require_same_alphabet(p, q_b, "expected_log_wealth_closed_form");
    if (alpha == 0.0 || !std::isfinite(alpha))
        throw std::domain_error("expected_log_wealth_closed_form: alpha must be finite and non-zero");
    const double d = kl_divergence(p, q_b);
    if (alpha == 1.0)
        return d;
    const double r = renyi_continuation(alpha, p, q_b);
    const double value = alpha * d + (1.0 - alpha) * r;
    if (std::isnan(value))
        throw std::domain_error("expected_log_wealth_closed_form: Renyi sum diverges");
    return value;
}

/// D(p||q_b) - D(p||q_a).
inline double expected_log_wealth_direct(const Dist& p, const Dist& q_a, const Dist& q_b)
{
    return asymptotic_kelly_rate(p, q_a, q_b);
}

/// Exact E[u(W_F/W_i)] over all length-n sequences, summed by type class.
/// W = 0 (a realized outcome with zero stake) uses the limit u(0+).
inline double expected_utility_exact(const Dist& p, const Dist& q_a, const Dist& q_b, std::uint64_t n,
                                     const std::function<double(double)>& u, double u_at_zero,
                                     std::uint64_t cap = kDefaultTypeCap)
{
    require_same_alphabet(p, q_a, "expected_utility");
    require_same_alphabet(p, q_b, "expected_utility");
    const long double seqs = std::pow(static_cast<long double>(p.size()), static_cast<long double>(n));
    if (seqs > static_cast<long double>(cap))
        throw ResourceCapError("expected_utility: k^n exceeds the cap");
    detail::CompensatedSum acc;
    for (const auto& t : enumerate_types(n, p.size(), cap)) {
        const double prob = type_class_probability_exact(p, t);
        if (prob == 0.0)
            continue;
        const double lw = wealth_log_ratio(q_a, q_b, t);
        const double val = lw == -kInf ? u_at_zero : u(std::exp2(lw));
        acc.add(prob * val);
    }
    return acc.value();
}

/// Exact expected CRRA utility sum_{x^n} P(x^n) u_beta(W(x^n)).
inline double expected_utility_estimate(const Dist& p, const Dist& q_a, const Dist& q_b, double beta,
                                        std::uint64_t n, std::uint64_t cap = kDefaultTypeCap)
{
    const double u0 = beta < 1.0 ? -1.0 / (1.0 - beta) : -kInf;
    return expected_utility_exact(
        p, q_a, q_b, n, [beta](double w) { return crra_utility(w, {beta}); }, u0, cap);
}

} // namespace finitekelly
