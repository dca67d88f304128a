#pragma once

// Single-shot and finite-n Kelly analysis: wealth relatives, the tilted
// family P^eta Q_B^(1-eta), the two constrained-divergence optimizers and
// the risk-reward frontier.
//
// Parameter convention: eta is always the exponent on P. The geodesic
// parameter lambda (exponent on Q_B) is lambda = 1 - eta.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "finitekelly/divergence.hpp"
#include "finitekelly/types.hpp"

namespace finitekelly {

namespace detail {

/// a - b for divergences that may be +inf; inf - inf is undefined.
inline double divergence_difference(double a, double b, const char* where)
{
    if (a == kInf && b == kInf)
        throw std::domain_error(std::string(where) + ": outcome lies outside both supports");
    if (b == kInf)
        return -kInf;
    if (a == kInf)
        return kInf;
    return a - b;
}

} // namespace detail

/// log2 W_F/W_i = n (D(lambda||q_b) - D(lambda||q_a)) for a realized type.
inline double wealth_log_ratio(const Dist& q_a, const Dist& q_b, const EmpiricalType& t)
{
    require_same_alphabet(q_a, q_b, "wealth_log_ratio");
    detail::require_type_alphabet(q_a, t, "wealth_log_ratio");
    const Dist lam = t.freq();
    const double diff =
        detail::divergence_difference(kl_divergence(lam, q_b), kl_divergence(lam, q_a), "wealth_log_ratio");
    return std::isfinite(diff) ? static_cast<double>(t.n()) * diff : diff;
}

/// Kelly's growth rate D(p||q_b) - D(p||q_a), bits per round.
inline double asymptotic_kelly_rate(const Dist& p, const Dist& q_a, const Dist& q_b)
{
    require_same_alphabet(p, q_a, "asymptotic_kelly_rate");
    require_same_alphabet(p, q_b, "asymptotic_kelly_rate");
    return detail::divergence_difference(kl_divergence(p, q_b), kl_divergence(p, q_a), "asymptotic_kelly_rate");
}

/// Normalized geometric mixture Q(x) ∝ p(x)^eta q_b(x)^(1-eta).
///
/// eta = 1 returns p and eta = 0 returns q_b exactly. For any other eta the
/// family lives on the intersection of the supports. eta = +inf / -inf give
/// the limiting point masses on argmax / argmin of p/q_b (ties share mass).
inline Dist tilted_bet(const Dist& p, const Dist& q_b, double eta)
{
    require_same_alphabet(p, q_b, "tilted_bet");
    if (std::isnan(eta))
        throw std::invalid_argument("tilted_bet: eta is NaN");
    if (eta == 1.0)
        return p;
    if (eta == 0.0)
        return q_b;
    std::vector<double> log_w(p.size(), -kInf);
    bool any = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0 && q_b[i] > 0.0) {
            any = true;
            const double lp = std::log2(p[i]);
            const double lq = std::log2(q_b[i]);
            log_w[i] = std::isinf(eta) ? lp - lq : eta * lp + (1.0 - eta) * lq;
        }
    }
    if (!any)
        throw std::domain_error("tilted_bet: p and q_b have disjoint supports, the normalizer vanishes");
    if (std::isinf(eta)) {
        double target = eta > 0 ? -kInf : kInf;
        for (double v : log_w)
            if (v != -kInf)
                target = eta > 0 ? std::max(target, v) : std::min(target, v);
        std::vector<double> w(p.size(), 0.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            if (log_w[i] != -kInf && std::abs(log_w[i] - target) <= 1e-12)
                w[i] = 1.0;
        return Dist::from_weights(std::move(w));
    }
    return Dist::from_log2_weights(log_w);
}

/// A point on the risk-reward frontier.
struct RiskRewardPoint {
    double epsilon = 1.0;             ///< success probability floor (NaN for payoff-constrained solves)
    double budget = 0.0;              ///< risk budget d = -(1/n) log2 eps, or the payoff target k
    double eta = 1.0;                 ///< exponent on P of the optimal tilted bet
    double multiplier = 0.0;          ///< KKT multiplier of the divergence constraint (>= 0)
    Dist strategy;                    ///< optimal bet Q*
    double reward_bits_per_round = 0; ///< D(Q*||Q_B)
    double risk_exponent = 0;         ///< D(Q*||P)
    bool constraint_active = false;   ///< false when the optimum does not touch the constraint

    /// eta in the convention with exponent 1-eta on P (used by the optimizers' KKT analysis).
    double lemma_eta() const { return 1.0 - eta; }
};

namespace detail {

struct FamilyEval {
    double eta;
    Dist q;
    double risk;   // D(Q||p)
    double reward; // D(Q||q_b)
};

inline FamilyEval eval_family(const Dist& p, const Dist& q_b, double eta)
{
    Dist q = tilted_bet(p, q_b, eta);
    const double risk = kl_divergence(q, p);
    const double reward = kl_divergence(q, q_b);
    return {eta, std::move(q), risk, reward};
}

/// Finds eta on the branch starting at `origin` and moving in `direction`
/// (+1 or -1) where the monotone function g(eta) first reaches `target`.
/// Returns nullopt when the branch limit stays below the target.
template <class G>
std::optional<double> branch_root(G&& g, double origin, double direction, double target)
{
    const double limit_value = g(direction * kInf);
    if (limit_value < target)
        return std::nullopt;
    double lo = origin;
    double step = 1.0;
    double hi = origin + direction * step;
    int expansions = 0;
    while (g(hi) < target) {
        lo = hi;
        step *= 2.0;
        hi = origin + direction * step;
        if (++expansions > 1100)
            return std::nullopt;
    }
    // 33-point pre-scan of the bracket, then bisection on the first
    // sub-interval that crosses the target.
    constexpr int kScan = 33;
    double a = lo;
    for (int i = 1; i < kScan; ++i) {
        const double b = lo + (hi - lo) * static_cast<double>(i) / (kScan - 1);
        if (g(b) >= target) {
            hi = b;
            break;
        }
        a = b;
    }
    lo = a;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        if (g(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    // Pick whichever end lands closer to the target.
    return std::abs(g(lo) - target) < std::abs(g(hi) - target) ? lo : hi;
}

inline RiskRewardPoint make_point(const FamilyEval& e, double epsilon, double budget, double multiplier, bool active)
{
    RiskRewardPoint pt;
    pt.epsilon = epsilon;
    pt.budget = budget;
    pt.eta = e.eta;
    pt.multiplier = multiplier;
    pt.strategy = e.q;
    pt.reward_bits_per_round = e.reward;
    pt.risk_exponent = e.risk;
    pt.constraint_active = active;
    return pt;
}

inline void require_kelly_inputs(const Dist& p, const Dist& q_b, const char* where)
{
    require_same_alphabet(p, q_b, where);
    if (kl_divergence(p, q_b) == kInf)
        throw std::domain_error(std::string(where) + ": support(p) must lie inside support(q_b)");
}

} // namespace detail

/// Maximize D(Q||q_b) subject to D(Q||p) <= d with d = -(1/n) log2 eps.
///
/// Stationary points of this problem lie on the tilted family with
/// eta > 1 (moving from p away from q_b) or eta <= 0 (beyond q_b), with KKT
/// multiplier mu = eta/(eta-1) >= 0. Along each branch the constraint value
/// is monotone in eta, so each branch has one boundary root; the reward is
/// convex along the family with its minimum at q_b, so the optimum is the
/// better of the two roots. A branch whose vertex limit already satisfies
/// the budget returns that vertex with the constraint slack.
inline RiskRewardPoint solve_risk_constrained(const Dist& p, const Dist& q_b, double epsilon, std::uint64_t n)
{
    detail::require_kelly_inputs(p, q_b, "solve_risk_constrained");
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("solve_risk_constrained: epsilon must lie in (0, 1]");
    if (n < 1)
        throw std::invalid_argument("solve_risk_constrained: n must be >= 1");
    const double d = -std::log2(epsilon) / static_cast<double>(n);
    if (d <= 0.0 || p == q_b) {
        const auto e = detail::eval_family(p, q_b, 1.0);
        return detail::make_point(e, epsilon, 0.0, kInf, d > 0.0 ? false : true);
    }

    auto risk = [&](double eta) { return kl_divergence(tilted_bet(p, q_b, eta), p); };
    std::optional<detail::FamilyEval> best;
    bool best_active = false;
    for (double direction : {+1.0, -1.0}) {
        const auto root = detail::branch_root(risk, 1.0, direction, d);
        const bool active = root.has_value();
        const auto e = detail::eval_family(p, q_b, active ? *root : direction * kInf);
        if (e.risk > d + 1e-12 && !active)
            continue;
        if (!best || e.reward > best->reward) {
            best = e;
            best_active = active;
        }
    }
    if (!best)
        throw std::logic_error("solve_risk_constrained: no feasible point on either branch");
    const double eta = best->eta;
    const double mu = std::isinf(eta) ? 1.0 : eta / (eta - 1.0);
    return detail::make_point(*best, epsilon, d, best_active ? mu : 0.0, best_active);
}

/// Minimize D(Q||p) subject to D(Q||q_b) >= k_bits.
///
/// Inactive when k_bits <= D(p||q_b): returns Q = p with multiplier 0.
/// Otherwise the optimum lies on the tilted family at eta >= 1
/// (lemma_eta() <= 0) or eta < 0; the lower-risk root is returned.
/// Throws std::domain_error if neither branch reaches k_bits.
inline RiskRewardPoint solve_payoff_constrained(const Dist& p, const Dist& q_b, double k_bits)
{
    detail::require_kelly_inputs(p, q_b, "solve_payoff_constrained");
    if (!(k_bits >= 0.0) || !std::isfinite(k_bits))
        throw std::invalid_argument("solve_payoff_constrained: k_bits must be finite and >= 0");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto at_p = detail::eval_family(p, q_b, 1.0);
    if (k_bits <= at_p.reward)
        return detail::make_point(at_p, nan, k_bits, 0.0, k_bits == at_p.reward);

    auto reward = [&](double eta) { return kl_divergence(tilted_bet(p, q_b, eta), q_b); };
    std::optional<detail::FamilyEval> best;
    // eta >= 1 branch: reward increases from D(p||q_b).
    if (auto r = detail::branch_root(reward, 1.0, +1.0, k_bits))
        best = detail::eval_family(p, q_b, *r);
    // eta < 0 branch: reward increases from 0 at q_b.
    if (auto r = detail::branch_root(reward, 0.0, -1.0, k_bits)) {
        auto e = detail::eval_family(p, q_b, *r);
        if (!best || e.risk < best->risk)
            best = std::move(e);
    }
    if (!best)
        throw std::domain_error("solve_payoff_constrained: payoff target " + std::to_string(k_bits) +
                                " bits is not reachable on the tilted family");
    const double mu = 1.0 - 1.0 / best->eta;
    return detail::make_point(*best, nan, k_bits, mu, true);
}

struct BestType {
    EmpiricalType type;
    double reward_bits;   ///< D(lambda||q_b)
    double probability;   ///< exact type-class probability
};

/// Exact single-type optimum: among types whose exact class probability is
/// at least eps, the one maximizing D(lambda||q_b). Ties go to the
/// lexicographically smallest counts.
inline BestType best_type_under_risk(const Dist& p, const Dist& q_b, std::uint64_t n, double epsilon,
                                     std::uint64_t cap = kDefaultTypeCap)
{
    require_same_alphabet(p, q_b, "best_type_under_risk");
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("best_type_under_risk: epsilon must lie in (0, 1]");
    const auto types = enumerate_types(n, p.size(), cap);
    std::optional<BestType> best;
    for (const auto& t : types) {
        const double prob = type_class_probability_exact(p, t);
        if (prob < epsilon)
            continue;
        const double r = kl_divergence(t.freq(), q_b);
        if (!best || r > best->reward_bits)
            best = BestType{t, r, prob};
    }
    if (!best)
        throw std::domain_error("best_type_under_risk: no single type class has probability >= epsilon");
    return *best;
}

/// Both sides of the geodesic identities at R ∝ p^(1-lam) q_b^lam:
///   (1-lam) D(R||p) + lam D(R||q_b) = (1-lam) D_lam(q_b||p)
///   D(R||q_b) = D_eta(p||q_b) - eta/(1-eta) D(R||p),   eta = 1 - lam.
struct RewardIdentity {
    double geodesic_lhs;
    double geodesic_rhs;
    double reward_lhs;
    double reward_rhs;

    double max_gap() const
    {
        return std::max(std::abs(geodesic_lhs - geodesic_rhs), std::abs(reward_lhs - reward_rhs));
    }
};

inline RewardIdentity reward_identity_check(const Dist& p, const Dist& q_b, double lam)
{
    require_same_alphabet(p, q_b, "reward_identity_check");
    if (!(lam > 0.0 && lam < 1.0))
        throw std::invalid_argument("reward_identity_check: lambda must lie in (0, 1)");
    const double eta = 1.0 - lam;
    const Dist r = tilted_bet(p, q_b, eta);
    const double d_rp = kl_divergence(r, p);
    const double d_rq = kl_divergence(r, q_b);
    RewardIdentity out;
    out.geodesic_lhs = (1.0 - lam) * d_rp + lam * d_rq;
    out.geodesic_rhs = (1.0 - lam) * renyi_divergence(lam, q_b, p);
    out.reward_lhs = d_rq;
    out.reward_rhs = renyi_divergence(eta, p, q_b) - eta / (1.0 - eta) * d_rp;
    const double scale = 1.0 + std::max(std::abs(out.geodesic_lhs), std::abs(out.reward_lhs));
    if (out.max_gap() > 1e-10 * scale)
        throw std::logic_error("reward_identity_check: identity violated");
    return out;
}

struct RiskRewardBound {
    double bound_bits;  ///< D_eta(p||q_b) + eta/(1-eta) * log2(eps)/n
    RiskRewardPoint achieved;
};

/// The guaranteed-growth lower bound at success probability eps, evaluated
/// with the solver's eta as the multiplier lambda(eps), and checked against
/// the achieved reward D(Q*||q_b).
///
/// For eta < 0 the sgn-free continuation log2 Z / (eta - 1) replaces
/// D_eta. When the budget is slack the bound is evaluated at the realized
/// risk exponent instead of -(1/n) log2 eps.
inline RiskRewardBound risk_reward_bound(const Dist& p, const Dist& q_b, double epsilon, std::uint64_t n)
{
    RiskRewardBound out{0.0, solve_risk_constrained(p, q_b, epsilon, n)};
    const auto& pt = out.achieved;
    if (pt.eta == 1.0) {
        out.bound_bits = kl_divergence(p, q_b);
    } else if (std::isinf(pt.eta)) {
        // Vertex limit: log2(p/q_b) at the vertex plus the realized risk.
        std::size_t v = 0;
        for (std::size_t i = 0; i < pt.strategy.size(); ++i)
            if (pt.strategy[i] > pt.strategy[v])
                v = i;
        out.bound_bits = std::log2(p[v]) - std::log2(q_b[v]) + pt.risk_exponent;
    } else {
        const double log_eps_over_n = pt.constraint_active ? -pt.budget : -pt.risk_exponent;
        out.bound_bits = renyi_continuation(pt.eta, p, q_b) + pt.eta / (1.0 - pt.eta) * log_eps_over_n;
    }
    const double tol = 1e-10 * (1.0 + std::abs(pt.reward_bits_per_round));
    if (out.bound_bits > pt.reward_bits_per_round + tol)
        throw std::logic_error("risk_reward_bound: bound exceeds the achieved reward");
    return out;
}

} // namespace finitekelly
