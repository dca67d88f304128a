#pragma once

// Finite probability mass functions and the numeric helpers shared by every
// module. All logarithms in this library are base 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace finitekelly {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSumTolerance = 1e-12;

/// Thrown when a request would exceed a configured resource cap
/// (enumeration size, grid size). The CLI maps it to exit code 2.
class ResourceCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Neumaier-compensated summation.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept
{
    CompensatedSum s;
    for (double x : xs)
        s.add(x);
    return s.value();
}

/// log2 of sum_i 2^{xs[i]}; entries equal to -inf are skipped.
inline double log2_sum_exp2(std::span<const double> xs) noexcept
{
    double hi = -kInf;
    for (double x : xs)
        hi = std::max(hi, x);
    if (hi == -kInf || hi == kInf)
        return hi;
    CompensatedSum s;
    for (double x : xs)
        if (x != -kInf)
            s.add(std::exp2(x - hi));
    return hi + std::log2(s.value());
}

inline std::string format_probs(std::span<const double> xs)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << (i ? ", " : "") << xs[i];
    os << ')';
    return os.str();
}

} // namespace detail

/// Probability mass function over the alphabet {0, ..., size()-1}.
///
/// Entries are non-negative and sum to one within kSumTolerance. Values of
/// this type are immutable once constructed.
class Dist {
public:
    Dist() = default;

    explicit Dist(std::vector<double> probs) : probs_(std::move(probs))
    {
        if (probs_.empty())
            throw std::invalid_argument("Dist: empty alphabet");
        for (double x : probs_)
            if (!std::isfinite(x) || x < 0.0)
                throw std::invalid_argument("Dist: entries must be finite and non-negative, got " +
                                            detail::format_probs(probs_));
        const double total = detail::compensated_sum(probs_);
        if (std::abs(total - 1.0) > kSumTolerance) {
            std::ostringstream os;
            os.precision(17);
            os << "Dist: entries sum to " << total << ", expected 1";
            throw std::invalid_argument(os.str());
        }
    }

    /// Normalizes non-negative weights. Throws if all weights are zero.
    static Dist from_weights(std::vector<double> weights)
    {
        for (double w : weights)
            if (!std::isfinite(w) || w < 0.0)
                throw std::invalid_argument("Dist::from_weights: weights must be finite and non-negative");
        const double total = detail::compensated_sum(weights);
        if (!(total > 0.0))
            throw std::invalid_argument("Dist::from_weights: zero total weight");
        for (double& w : weights)
            w /= total;
        return Dist(std::move(weights));
    }

    /// Normalizes log2-weights (entries may be -inf).
    static Dist from_log2_weights(std::span<const double> log_weights)
    {
        const double log_z = detail::log2_sum_exp2(log_weights);
        if (!std::isfinite(log_z))
            throw std::domain_error("Dist::from_log2_weights: normalizer is not finite");
        std::vector<double> probs(log_weights.size());
        for (std::size_t i = 0; i < probs.size(); ++i)
            probs[i] = log_weights[i] == -kInf ? 0.0 : std::exp2(log_weights[i] - log_z);
        const double total = detail::compensated_sum(probs);
        for (double& x : probs)
            x /= total;
        return Dist(std::move(probs));
    }

    static Dist uniform(std::size_t k)
    {
        if (k == 0)
            throw std::invalid_argument("Dist::uniform: empty alphabet");
        return Dist(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    static Dist point_mass(std::size_t k, std::size_t at)
    {
        if (at >= k)
            throw std::out_of_range("Dist::point_mass: index out of range");
        std::vector<double> probs(k, 0.0);
        probs[at] = 1.0;
        return Dist(std::move(probs));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }
    const std::vector<double>& vec() const noexcept { return probs_; }

    bool in_support(std::size_t i) const { return probs_.at(i) > 0.0; }

    std::vector<std::size_t> support() const
    {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < probs_.size(); ++i)
            if (probs_[i] > 0.0)
                s.push_back(i);
        return s;
    }

    double max_abs_diff(const Dist& other) const
    {
        if (other.size() != size())
            throw std::invalid_argument("Dist: alphabet size mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            m = std::max(m, std::abs(probs_[i] - other.probs_[i]));
        return m;
    }

    friend bool operator==(const Dist&, const Dist&) = default;

private:
    std::vector<double> probs_;
};

inline void require_same_alphabet(const Dist& p, const Dist& q, const char* where)
{
    if (p.size() != q.size())
        throw std::invalid_argument(std::string(where) + ": alphabet size mismatch (" +
                                    std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
}

/// A pmf over a product alphabet, stored row-major (last axis fastest).
class JointDist {
public:
    JointDist() = default;

    JointDist(std::vector<std::size_t> dims, Dist flat) : dims_(std::move(dims)), flat_(std::move(flat))
    {
        if (dims_.empty())
            throw std::invalid_argument("JointDist: no axes");
        std::size_t total = 1;
        for (std::size_t d : dims_) {
            if (d == 0)
                throw std::invalid_argument("JointDist: zero-sized axis");
            total *= d;
        }
        if (total != flat_.size())
            throw std::invalid_argument("JointDist: dims do not match number of probabilities");
    }

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }
    const Dist& flat() const noexcept { return flat_; }

    std::size_t index(std::span<const std::size_t> coords) const
    {
        if (coords.size() != dims_.size())
            throw std::invalid_argument("JointDist: wrong number of coordinates");
        std::size_t idx = 0;
        for (std::size_t a = 0; a < dims_.size(); ++a) {
            if (coords[a] >= dims_[a])
                throw std::out_of_range("JointDist: coordinate out of range");
            idx = idx * dims_[a] + coords[a];
        }
        return idx;
    }

    std::vector<std::size_t> coords(std::size_t flat_index) const
    {
        std::vector<std::size_t> c(dims_.size());
        for (std::size_t a = dims_.size(); a-- > 0;) {
            c[a] = flat_index % dims_[a];
            flat_index /= dims_[a];
        }
        return c;
    }

    double operator()(std::initializer_list<std::size_t> coords) const
    {
        return flat_[index(std::span<const std::size_t>(coords.begin(), coords.size()))];
    }

    /// Marginal onto the listed axes, kept in the listed order.
    JointDist marginal(std::span<const std::size_t> keep) const
    {
        std::vector<std::size_t> out_dims;
        for (std::size_t a : keep) {
            if (a >= dims_.size())
                throw std::out_of_range("JointDist::marginal: axis out of range");
            out_dims.push_back(dims_[a]);
        }
        std::size_t out_total = 1;
        for (std::size_t d : out_dims)
            out_total *= d;
        std::vector<detail::CompensatedSum> acc(out_total);
        for (std::size_t i = 0; i < flat_.size(); ++i) {
            const auto c = coords(i);
            std::size_t j = 0;
            for (std::size_t a = 0; a < keep.size(); ++a)
                j = j * out_dims[a] + c[keep[a]];
            acc[j].add(flat_[i]);
        }
        std::vector<double> probs(out_total);
        for (std::size_t j = 0; j < out_total; ++j)
            probs[j] = acc[j].value();
        return JointDist(std::move(out_dims), Dist::from_weights(std::move(probs)));
    }

    JointDist marginal(std::initializer_list<std::size_t> keep) const
    {
        return marginal(std::span<const std::size_t>(keep.begin(), keep.size()));
    }

    /// Product of independent factors, first factor slowest.
    static JointDist product(std::span<const Dist> factors)
    {
        std::vector<std::size_t> dims;
        std::vector<double> probs{1.0};
        for (const Dist& f : factors) {
            dims.push_back(f.size());
            std::vector<double> next;
            next.reserve(probs.size() * f.size());
            for (double a : probs)
                for (double b : f.probs())
                    next.push_back(a * b);
            probs = std::move(next);
        }
        return JointDist(std::move(dims), Dist::from_weights(std::move(probs)));
    }

private:
    std::vector<std::size_t> dims_;
    Dist flat_;
};

} // namespace finitekelly
