#pragma once

// Small derivative-free minimizers for infima over probability simplices.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "finitekelly/dist.hpp"

namespace finitekelly::opt {

struct MinimizeResult {
    std::vector<double> x;
    double value = kInf;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead on R^d with the standard coefficients (1, 2, 0.5, 0.5).
inline MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                  double initial_step = 0.5, double ftol = 1e-14, int max_iter = 5000)
{
    const std::size_t d = x0.size();
    MinimizeResult res;
    if (d == 0) {
        res.x = x0;
        res.value = f(x0);
        res.converged = true;
        return res;
    }
    std::vector<std::vector<double>> pts(d + 1, x0);
    for (std::size_t i = 0; i < d; ++i)
        pts[i + 1][i] += initial_step;
    std::vector<double> vals(d + 1);
    for (std::size_t i = 0; i <= d; ++i)
        vals[i] = f(pts[i]);

    std::vector<std::size_t> order(d + 1);
    int it = 0;
    for (; it < max_iter; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];
        const double spread = std::abs(vals[worst] - vals[best]);
        double size = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                size = std::max(size, std::abs(pts[i][j] - pts[best][j]));
        if (spread <= ftol * (1.0 + std::abs(vals[best])) && size < 1e-9) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < d; ++j)
                    centroid[j] += pts[i][j] / static_cast<double>(d);
        auto along = [&](double t) {
            std::vector<double> y(d);
            for (std::size_t j = 0; j < d; ++j)
                y[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
            return y;
        };
        auto xr = along(-1.0);
        const double fr = f(xr);
        if (fr < vals[best]) {
            auto xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = std::move(xe);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(xr);
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = std::move(xr);
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = std::move(xc);
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best)
                continue;
            for (std::size_t j = 0; j < d; ++j)
                pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            vals[i] = f(pts[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    res.x = pts[best];
    res.value = vals[best];
    res.iterations = it;
    return res;
}

/// Softmax map from k-1 free logits (last logit pinned at 0) to the open simplex.
inline Dist simplex_from_logits(const std::vector<double>& logits)
{
    std::vector<double> w(logits.size() + 1, 0.0);
    std::copy(logits.begin(), logits.end(), w.begin());
    const double hi = *std::max_element(w.begin(), w.end());
    for (double& v : w)
        v = std::exp(v - hi);
    return Dist::from_weights(std::move(w));
}

inline std::vector<double> logits_from_simplex(const Dist& q, double floor = 1e-300)
{
    std::vector<double> out(q.size() - 1);
    const double last = std::log(std::max(q[q.size() - 1], floor));
    for (std::size_t i = 0; i + 1 < q.size(); ++i)
        out[i] = std::log(std::max(q[i], floor)) - last;
    return out;
}

/// Calls fn on every point of the simplex grid with coordinates that are
/// multiples of 1/steps. With `interior` set, every coordinate is at least
/// 1/steps.
template <class Fn>
void for_each_simplex_point(std::size_t k, std::size_t steps, bool interior, Fn&& fn)
{
    std::vector<std::size_t> counts(k, 0);
    const std::size_t lo = interior ? 1 : 0;
    if (interior && steps < k)
        return;
    std::vector<double> probs(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t remaining) {
        if (pos + 1 == k) {
            if (remaining < lo)
                return;
            counts[pos] = remaining;
            for (std::size_t i = 0; i < k; ++i)
                probs[i] = static_cast<double>(counts[i]) / static_cast<double>(steps);
            fn(std::as_const(probs));
            return;
        }
        for (std::size_t c = lo; c + lo * (k - pos - 1) <= remaining; ++c) {
            counts[pos] = c;
            rec(pos + 1, remaining - c);
        }
    };
    rec(0, steps);
}

/// Number of grid points visited by for_each_simplex_point.
inline long double simplex_grid_size(std::size_t k, std::size_t steps, bool interior)
{
    // compositions of steps into k parts (each >= lo)
    const std::size_t lo = interior ? 1 : 0;
    if (steps < lo * k)
        return 0.0L;
    const std::size_t m = steps - lo * k + k - 1;
    long double acc = 1.0L;
    for (std::size_t i = 1; i <= k - 1; ++i)
        acc = acc * static_cast<long double>(m - (k - 1) + i) / static_cast<long double>(i);
    return acc;
}

} // namespace finitekelly::opt
