#pragma once

// Entropy and divergences between finite distributions, in bits.
//
// +infinity is an ordinary return value: D(p||q) = +inf whenever p puts
// mass where q does not. 0 log 0 is taken as 0.

#include <cmath>
#include <vector>

#include "finitekelly/dist.hpp"

namespace finitekelly {

inline double shannon_entropy(const Dist& p)
{
    detail::CompensatedSum s;
    for (double x : p.probs())
        if (x > 0.0)
            s.add(-x * std::log2(x));
    return std::max(0.0, s.value());
}

inline double kl_divergence(const Dist& p, const Dist& q)
{
    require_same_alphabet(p, q, "kl_divergence");
    detail::CompensatedSum s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0)
            continue;
        if (q[i] == 0.0)
            return kInf;
        s.add(p[i] * (std::log2(p[i]) - std::log2(q[i])));
    }
    return std::max(0.0, s.value());
}

namespace detail {

/// log2 sum_x p(x)^alpha q(x)^(1-alpha) over the support of p, for finite
/// alpha not in {0, 1}. Returns +inf or -inf where the sum diverges or
/// vanishes.
inline double log2_renyi_sum(double alpha, const Dist& p, const Dist& q)
{
    std::vector<double> terms;
    terms.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            if (alpha < 0.0)
                return kInf;
            continue;
        }
        if (q[i] == 0.0) {
            if (alpha > 1.0)
                return kInf;
            continue; // q^(1-alpha) = 0 for alpha < 1
        }
        terms.push_back(alpha * std::log2(p[i]) + (1.0 - alpha) * std::log2(q[i]));
    }
    if (terms.empty())
        return -kInf;
    return log2_sum_exp2(terms);
}

} // namespace detail

/// Renyi divergence of order alpha, sgn(alpha)/(alpha-1) log2 sum p^a q^(1-a).
/// alpha = 0, 1 and +inf use the standard limits.
inline double renyi_divergence(double alpha, const Dist& p, const Dist& q)
{
    require_same_alphabet(p, q, "renyi_divergence");
    if (std::isnan(alpha))
        throw std::invalid_argument("renyi_divergence: alpha is NaN");
    if (alpha == 1.0)
        return kl_divergence(p, q);
    if (alpha == kInf) {
        double best = -kInf;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == 0.0)
                continue;
            if (q[i] == 0.0)
                return kInf;
            best = std::max(best, std::log2(p[i]) - std::log2(q[i]));
        }
        return std::max(0.0, best);
    }
    if (alpha == -kInf)
        throw std::invalid_argument("renyi_divergence: alpha = -inf is not supported");
    if (alpha == 0.0) {
        detail::CompensatedSum s;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] > 0.0)
                s.add(q[i]);
        const double mass = s.value();
        return mass > 0.0 ? std::max(0.0, -std::log2(std::min(1.0, mass))) : kInf;
    }
    const double log_sum = detail::log2_renyi_sum(alpha, p, q);
    const double sign = alpha > 0.0 ? 1.0 : -1.0;
    if (log_sum == kInf)
        return kInf;
    if (log_sum == -kInf)
        return alpha < 1.0 ? kInf : -kInf;
    return std::max(0.0, sign * log_sum / (alpha - 1.0));
}

/// (1/(alpha-1)) log2 sum p^a q^(1-a) without the sgn(alpha) factor. Equals
/// renyi_divergence for alpha > 0 and its negation for alpha < 0; this is the
/// quantity log2 Z(alpha) / (alpha - 1) that appears in tilted-family identities.
inline double renyi_continuation(double alpha, const Dist& p, const Dist& q)
{
    require_same_alphabet(p, q, "renyi_continuation");
    if (alpha > 0.0)
        return renyi_divergence(alpha, p, q);
    if (alpha == 0.0 || !std::isfinite(alpha))
        throw std::invalid_argument("renyi_continuation: alpha must be finite and non-zero");
    const double log_sum = detail::log2_renyi_sum(alpha, p, q);
    return log_sum / (alpha - 1.0);
}

/// Mutual information of a two-axis joint distribution, as D(P_AB || P_A x P_B).
inline double mutual_information(const JointDist& pab)
{
    if (pab.rank() != 2)
        throw std::invalid_argument("mutual_information: expected a two-axis distribution");
    const Dist pa = pab.marginal({0}).flat();
    const Dist pb = pab.marginal({1}).flat();
    const Dist factors[] = {pa, pb};
    return kl_divergence(pab.flat(), JointDist::product(factors).flat());
}

/// H(B|A) = H(AB) - H(A) for a two-axis joint distribution.
inline double conditional_entropy(const JointDist& pab)
{
    if (pab.rank() != 2)
        throw std::invalid_argument("conditional_entropy: expected a two-axis distribution");
    return shannon_entropy(pab.flat()) - shannon_entropy(pab.marginal({0}).flat());
}

} // namespace finitekelly
