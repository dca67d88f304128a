#pragma once

// The tripartite betting game: Alice sees X, Bob sees Y, both bet on Z.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "finitekelly/divergence.hpp"
#include "finitekelly/kelly.hpp"
#include "finitekelly/types.hpp"

namespace finitekelly {

/// Conditional rows P(b|a) of a two-axis joint. Rows with zero mass on the
/// conditioning symbol are set to uniform.
inline CondStrategy conditional_of(const JointDist& pab)
{
    if (pab.rank() != 2)
        throw std::invalid_argument("conditional_of: expected a two-axis distribution");
    const std::size_t na = pab.dims()[0];
    const std::size_t nb = pab.dims()[1];
    std::vector<Dist> rows;
    rows.reserve(na);
    for (std::size_t a = 0; a < na; ++a) {
        std::vector<double> w(nb);
        double mass = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            w[b] = pab({a, b});
            mass += w[b];
        }
        rows.push_back(mass > 0.0 ? Dist::from_weights(std::move(w)) : Dist::uniform(nb));
    }
    return CondStrategy(std::move(rows));
}

/// Joint pmf over X x Y x Z with cached marginals and conditionals.
class TripartiteDist {
public:
    enum Axis : std::size_t { X = 0, Y = 1, Z = 2 };

    TripartiteDist() = default;

    TripartiteDist(std::array<std::size_t, 3> sizes, std::vector<double> probs)
        : joint_({sizes[0], sizes[1], sizes[2]}, Dist(std::move(probs)))
    {
        px_ = joint_.marginal({X}).flat();
        py_ = joint_.marginal({Y}).flat();
        pz_ = joint_.marginal({Z}).flat();
        pxy_ = joint_.marginal({X, Y});
        pxz_ = joint_.marginal({X, Z});
        pyz_ = joint_.marginal({Y, Z});
        z_given_x_ = conditional_of(pxz_);
        z_given_y_ = conditional_of(pyz_);
    }

    explicit TripartiteDist(const JointDist& joint)
        : TripartiteDist(shape_of(joint), joint.flat().vec())
    {
    }

    std::array<std::size_t, 3> sizes() const { return {joint_.dims()[0], joint_.dims()[1], joint_.dims()[2]}; }
    const JointDist& joint() const noexcept { return joint_; }
    double operator()(std::size_t x, std::size_t y, std::size_t z) const { return joint_({x, y, z}); }

    const Dist& p_x() const noexcept { return px_; }
    const Dist& p_y() const noexcept { return py_; }
    const Dist& p_z() const noexcept { return pz_; }
    const JointDist& p_xy() const noexcept { return pxy_; }
    const JointDist& p_xz() const noexcept { return pxz_; }
    const JointDist& p_yz() const noexcept { return pyz_; }
    const CondStrategy& z_given_x() const noexcept { return z_given_x_; }
    const CondStrategy& z_given_y() const noexcept { return z_given_y_; }

    /// Max deviation between each cached marginal and a fresh re-derivation.
    double cache_consistency_gap() const
    {
        double gap = 0.0;
        gap = std::max(gap, px_.max_abs_diff(joint_.marginal({X}).flat()));
        gap = std::max(gap, pyz_.flat().max_abs_diff(joint_.marginal({Y, Z}).flat()));
        gap = std::max(gap, pxz_.flat().max_abs_diff(joint_.marginal({X, Z}).flat()));
        for (std::size_t x = 0; x < px_.size(); ++x)
            for (std::size_t z = 0; z < pz_.size(); ++z)
                if (px_[x] > 0.0)
                    gap = std::max(gap, std::abs(px_[x] * z_given_x_(z, x) - pxz_({x, z})));
        return gap;
    }

private:
    static std::array<std::size_t, 3> shape_of(const JointDist& j)
    {
        if (j.rank() != 3)
            throw std::invalid_argument("TripartiteDist: expected a three-axis distribution");
        return {j.dims()[0], j.dims()[1], j.dims()[2]};
    }

    JointDist joint_;
    Dist px_, py_, pz_;
    JointDist pxy_, pxz_, pyz_;
    CondStrategy z_given_x_, z_given_y_;
};

namespace detail {

inline void require_game_shapes(const CondStrategy& q_a, const CondStrategy& q_b, const JointEmpiricalType& jt,
                                const char* where)
{
    if (jt.dims().size() != 3)
        throw std::invalid_argument(std::string(where) + ": joint type must be over X x Y x Z");
    const auto& d = jt.dims();
    if (q_a.given_size() != d[0] || q_b.given_size() != d[1] || q_a.out_size() != d[2] || q_b.out_size() != d[2])
        throw std::invalid_argument(std::string(where) + ": strategy shapes do not match the joint type");
}

} // namespace detail

/// log2 Q_A(z^n|x^n)/Q_B(z^n|y^n) via
/// n (D(l_yz||l_y Q_B) - D(l_xz||l_x Q_A) + H_l(Z|Y) - H_l(Z|X)).
inline double payoff_conditional_form(const CondStrategy& q_a, const CondStrategy& q_b, const JointEmpiricalType& jt)
{
    detail::require_game_shapes(q_a, q_b, jt, "payoff_conditional_form");
    const Dist l_x = jt.marginal({0}).flatten().freq();
    const Dist l_y = jt.marginal({1}).flatten().freq();
    const Dist l_xz = jt.marginal({0, 2}).flatten().freq();
    const Dist l_yz = jt.marginal({1, 2}).flatten().freq();
    const double d_b = kl_divergence(l_yz, q_b.joint_with(l_y));
    const double d_a = kl_divergence(l_xz, q_a.joint_with(l_x));
    const double diff = detail::divergence_difference(d_b, d_a, "payoff_conditional_form");
    if (!std::isfinite(diff))
        return diff;
    const double h_zy = shannon_entropy(l_yz) - shannon_entropy(l_y);
    const double h_zx = shannon_entropy(l_xz) - shannon_entropy(l_x);
    return static_cast<double>(jt.n()) * (diff + h_zy - h_zx);
}

/// Same payoff via n (D(l_xyz||l_xy Q_B) - D(l_xyz||l_xy Q_A)).
inline double payoff_global_form(const CondStrategy& q_a, const CondStrategy& q_b, const JointEmpiricalType& jt)
{
    detail::require_game_shapes(q_a, q_b, jt, "payoff_global_form");
    const auto& d = jt.dims();
    const Dist l_xyz = jt.flatten().freq();
    const Dist l_xy = jt.marginal({0, 1}).flatten().freq();
    std::vector<double> wa, wb;
    wa.reserve(l_xyz.size());
    wb.reserve(l_xyz.size());
    for (std::size_t x = 0; x < d[0]; ++x)
        for (std::size_t y = 0; y < d[1]; ++y)
            for (std::size_t z = 0; z < d[2]; ++z) {
                const double m = l_xy[x * d[1] + y];
                wa.push_back(m * q_a(z, x));
                wb.push_back(m * q_b(z, y));
            }
    const double diff = detail::divergence_difference(kl_divergence(l_xyz, Dist::from_weights(std::move(wb))),
                                                      kl_divergence(l_xyz, Dist::from_weights(std::move(wa))),
                                                      "payoff_global_form");
    return std::isfinite(diff) ? static_cast<double>(jt.n()) * diff : diff;
}

/// H(Z|Y) - H(Z|X), bits per round.
inline double asymptotic_value(const TripartiteDist& p)
{
    const double h_zy = shannon_entropy(p.p_yz().flat()) - shannon_entropy(p.p_y());
    const double h_zx = shannon_entropy(p.p_xz().flat()) - shannon_entropy(p.p_x());
    return h_zy - h_zx;
}

struct Equilibrium {
    CondStrategy alice; ///< P_{Z|X}
    CondStrategy bob;   ///< P_{Z|Y}
};

inline Equilibrium equilibrium_strategies(const TripartiteDist& p) { return {p.z_given_x(), p.z_given_y()}; }

namespace detail {

inline double weighted_row_divergence(const Dist& weights, const CondStrategy& truth, const CondStrategy& played)
{
    if (played.given_size() != truth.given_size() || played.out_size() != truth.out_size())
        throw std::invalid_argument("deviation penalty: strategy shape mismatch");
    CompensatedSum acc;
    for (std::size_t g = 0; g < weights.size(); ++g) {
        if (weights[g] == 0.0)
            continue;
        const double d = kl_divergence(truth.row(g), played.row(g));
        if (d == kInf)
            return kInf;
        acc.add(weights[g] * d);
    }
    return std::max(0.0, acc.value());
}

} // namespace detail

/// Alice's asymptotic rate loss from playing q_a instead of P_{Z|X}:
/// sum_x P(x) D(P_{Z|X=x} || q_a(.|x)).
inline double deviation_penalty(const TripartiteDist& p, const CondStrategy& q_a)
{
    return detail::weighted_row_divergence(p.p_x(), p.z_given_x(), q_a);
}

/// Bob's asymptotic loss (Alice's gain) from setting odds q_b instead of P_{Z|Y}.
inline double bob_deviation_penalty(const TripartiteDist& p, const CondStrategy& q_b)
{
    return detail::weighted_row_divergence(p.p_y(), p.z_given_y(), q_b);
}

/// Alice's expected log-wealth rate E[log2 q_a(Z|X) - log2 q_b(Z|Y)] by
/// direct summation over the tensor.
inline double expected_payoff_rate(const TripartiteDist& p, const CondStrategy& q_a, const CondStrategy& q_b)
{
    const auto s = p.sizes();
    detail::CompensatedSum acc;
    for (std::size_t x = 0; x < s[0]; ++x)
        for (std::size_t y = 0; y < s[1]; ++y)
            for (std::size_t z = 0; z < s[2]; ++z) {
                const double m = p(x, y, z);
                if (m == 0.0)
                    continue;
                const double a = q_a(z, x);
                const double b = q_b(z, y);
                if (a == 0.0 && b == 0.0)
                    throw std::domain_error("expected_payoff_rate: outcome outside both supports");
                if (a == 0.0)
                    return -kInf;
                if (b == 0.0)
                    return kInf;
                acc.add(m * (std::log2(a) - std::log2(b)));
            }
    return acc.value();
}

/// Risk/reward pair for Alice concentrating on a joint type.
struct SideInfoRiskReward {
    double risk_exponent;  ///< n D(l_yz || P_YZ); P_suc ≐ 2^{-risk_exponent}
    double reward_bits;    ///< n (D(l_yz || 1_Y Q_B) + H(l_yz) - H_l(Z|X))
    double divergence_to_odds; ///< D(l_yz || 1_Y Q_B) = D(l_yz || mu_Y Q_B) - log2|Y|
    double entropy_yz;     ///< H(l_yz)
    double cond_entropy_zx; ///< H_l(Z|X)
};

/// Evaluated on a full X x Y x Z joint type; n is the type's length.
inline SideInfoRiskReward sideinfo_risk_reward(const TripartiteDist& p, const JointEmpiricalType& jt_xyz,
                                               const CondStrategy& q_b)
{
    if (jt_xyz.dims().size() != 3 || jt_xyz.dims() != std::vector<std::size_t>{p.sizes()[0], p.sizes()[1], p.sizes()[2]})
        throw std::invalid_argument("sideinfo_risk_reward: joint type shape does not match the distribution");
    if (q_b.given_size() != p.sizes()[1] || q_b.out_size() != p.sizes()[2])
        throw std::invalid_argument("sideinfo_risk_reward: odds shape mismatch");
    const double n = static_cast<double>(jt_xyz.n());
    const std::size_t ny = p.sizes()[1];
    const Dist l_yz = jt_xyz.marginal({1, 2}).flatten().freq();
    const Dist l_x = jt_xyz.marginal({0}).flatten().freq();
    const Dist l_xz = jt_xyz.marginal({0, 2}).flatten().freq();

    SideInfoRiskReward out;
    const double risk = kl_divergence(l_yz, p.p_yz().flat());
    out.risk_exponent = risk == kInf ? kInf : n * risk;
    out.divergence_to_odds =
        kl_divergence(l_yz, q_b.joint_with(Dist::uniform(ny))) - std::log2(static_cast<double>(ny));
    out.entropy_yz = shannon_entropy(l_yz);
    out.cond_entropy_zx = shannon_entropy(l_xz) - shannon_entropy(l_x);
    out.reward_bits = std::isfinite(out.divergence_to_odds)
                          ? n * (out.divergence_to_odds + out.entropy_yz - out.cond_entropy_zx)
                          : kInf;
    return out;
}

/// Y x Z-only variant: Alice has no side information (|X| = 1), so
/// H_l(Z|X) = H(l_z).
inline SideInfoRiskReward sideinfo_risk_reward_yz(const JointDist& p_yz, const JointEmpiricalType& jt_yz,
                                                  const CondStrategy& q_b)
{
    if (p_yz.rank() != 2 || jt_yz.dims() != p_yz.dims())
        throw std::invalid_argument("sideinfo_risk_reward_yz: shape mismatch");
    const TripartiteDist lifted({1, p_yz.dims()[0], p_yz.dims()[1]}, p_yz.flat().vec());
    const JointEmpiricalType lifted_type({1, jt_yz.dims()[0], jt_yz.dims()[1]}, jt_yz.counts());
    return sideinfo_risk_reward(lifted, lifted_type, q_b);
}

} // namespace finitekelly
