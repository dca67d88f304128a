#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "finitekelly/divergence.hpp"
#include "finitekelly/optimize.hpp"
#include "finitekelly/sideinfo.hpp"

namespace fk_test {

using finitekelly::Dist;

/// Flat-Dirichlet draw; entries bounded away from zero by `floor`.
inline Dist random_dist(std::mt19937_64& rng, std::size_t k, double floor = 1e-3)
{
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(k);
    for (double& x : w)
        x = e(rng) + floor;
    return Dist::from_weights(std::move(w));
}

inline finitekelly::TripartiteDist random_tensor(std::mt19937_64& rng, std::size_t kx, std::size_t ky, std::size_t kz)
{
    return finitekelly::TripartiteDist({kx, ky, kz}, random_dist(rng, kx * ky * kz).vec());
}

inline const Dist& p73()
{
    static const Dist p({0.7, 0.3});
    return p;
}

inline const Dist& unif2()
{
    static const Dist u({0.5, 0.5});
    return u;
}

/// Best D(Q||q_b) over simplex-grid points Q with D(Q||p) <= d.
inline double grid_best_reward(const Dist& p, const Dist& q_b, double d, std::size_t steps)
{
    double best = -1.0;
    finitekelly::opt::for_each_simplex_point(p.size(), steps, false, [&](const std::vector<double>& w) {
        const Dist q = Dist::from_weights(w);
        if (finitekelly::kl_divergence(q, p) <= d)
            best = std::max(best, finitekelly::kl_divergence(q, q_b));
    });
    return best;
}

/// Least D(Q||p) over simplex-grid points Q with D(Q||q_b) >= k.
inline double grid_least_risk(const Dist& p, const Dist& q_b, double k, std::size_t steps)
{
    double best = finitekelly::kInf;
    finitekelly::opt::for_each_simplex_point(p.size(), steps, false, [&](const std::vector<double>& w) {
        const Dist q = Dist::from_weights(w);
        if (finitekelly::kl_divergence(q, q_b) >= k)
            best = std::min(best, finitekelly::kl_divergence(q, p));
    });
    return best;
}

} // namespace fk_test
