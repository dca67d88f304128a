#pragma once

// Method-of-types machinery: empirical types, exact type-class sizes and
// probabilities, and conditional sequence probabilities.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "finitekelly/dist.hpp"
#include "finitekelly/divergence.hpp"

namespace finitekelly {

using BigInt = boost::multiprecision::cpp_int;
using Symbol = std::size_t;
using Count = std::uint64_t;

inline constexpr std::uint64_t kDefaultTypeCap = 10'000'000;

/// Integer count vector with denominator n; the frequency distribution of a
/// length-n sequence.
class EmpiricalType {
public:
    EmpiricalType() = default;

    explicit EmpiricalType(std::vector<Count> counts) : counts_(std::move(counts))
    {
        if (counts_.empty())
            throw std::invalid_argument("EmpiricalType: empty alphabet");
        n_ = std::accumulate(counts_.begin(), counts_.end(), Count{0});
        if (n_ == 0)
            throw std::invalid_argument("EmpiricalType: counts sum to zero");
    }

    Count n() const noexcept { return n_; }
    std::size_t alphabet_size() const noexcept { return counts_.size(); }
    const std::vector<Count>& counts() const noexcept { return counts_; }
    Count operator[](std::size_t i) const { return counts_[i]; }

    Dist freq() const
    {
        std::vector<double> f(counts_.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = static_cast<double>(counts_[i]) / static_cast<double>(n_);
        return Dist::from_weights(std::move(f));
    }

    friend bool operator==(const EmpiricalType&, const EmpiricalType&) = default;
    friend auto operator<=>(const EmpiricalType& a, const EmpiricalType& b) { return a.counts_ <=> b.counts_; }

private:
    std::vector<Count> counts_;
    Count n_ = 0;
};

/// Joint type over a product alphabet, counts stored row-major.
class JointEmpiricalType {
public:
    JointEmpiricalType() = default;

    JointEmpiricalType(std::vector<std::size_t> dims, std::vector<Count> counts)
        : dims_(std::move(dims)), counts_(std::move(counts))
    {
        std::size_t total = 1;
        for (std::size_t d : dims_) {
            if (d == 0)
                throw std::invalid_argument("JointEmpiricalType: zero-sized axis");
            total *= d;
        }
        if (dims_.empty() || total != counts_.size())
            throw std::invalid_argument("JointEmpiricalType: dims do not match counts");
        n_ = std::accumulate(counts_.begin(), counts_.end(), Count{0});
        if (n_ == 0)
            throw std::invalid_argument("JointEmpiricalType: counts sum to zero");
    }

    /// Joint type of aligned sequences, one sequence per axis.
    static JointEmpiricalType of_sequences(std::span<const std::vector<Symbol>> seqs,
                                           std::vector<std::size_t> dims)
    {
        if (seqs.size() != dims.size() || seqs.empty())
            throw std::invalid_argument("JointEmpiricalType::of_sequences: one sequence per axis required");
        const std::size_t n = seqs[0].size();
        if (n == 0)
            throw std::invalid_argument("JointEmpiricalType::of_sequences: empty sequence");
        std::size_t total = 1;
        for (std::size_t d : dims)
            total *= d;
        std::vector<Count> counts(total, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t idx = 0;
            for (std::size_t a = 0; a < dims.size(); ++a) {
                if (seqs[a].size() != n)
                    throw std::invalid_argument("JointEmpiricalType::of_sequences: length mismatch");
                if (seqs[a][i] >= dims[a])
                    throw std::out_of_range("JointEmpiricalType::of_sequences: symbol out of range");
                idx = idx * dims[a] + seqs[a][i];
            }
            ++counts[idx];
        }
        return JointEmpiricalType(std::move(dims), std::move(counts));
    }

    Count n() const noexcept { return n_; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    const std::vector<Count>& counts() const noexcept { return counts_; }

    JointEmpiricalType marginal(std::span<const std::size_t> keep) const
    {
        std::vector<std::size_t> out_dims;
        for (std::size_t a : keep) {
            if (a >= dims_.size())
                throw std::out_of_range("JointEmpiricalType::marginal: axis out of range");
            out_dims.push_back(dims_[a]);
        }
        std::size_t out_total = 1;
        for (std::size_t d : out_dims)
            out_total *= d;
        std::vector<Count> out(out_total, 0);
        std::vector<std::size_t> c(dims_.size(), 0);
        for (std::size_t i = 0; i < counts_.size(); ++i) {
            std::size_t rem = i;
            for (std::size_t a = dims_.size(); a-- > 0;) {
                c[a] = rem % dims_[a];
                rem /= dims_[a];
            }
            std::size_t j = 0;
            for (std::size_t a = 0; a < keep.size(); ++a)
                j = j * out_dims[a] + c[keep[a]];
            out[j] += counts_[i];
        }
        return JointEmpiricalType(std::move(out_dims), std::move(out));
    }

    JointEmpiricalType marginal(std::initializer_list<std::size_t> keep) const
    {
        return marginal(std::span<const std::size_t>(keep.begin(), keep.size()));
    }

    /// The joint type viewed as a type over the flattened product alphabet.
    EmpiricalType flatten() const { return EmpiricalType(counts_); }

    JointDist freq() const { return JointDist(dims_, flatten().freq()); }

private:
    std::vector<std::size_t> dims_;
    std::vector<Count> counts_;
    Count n_ = 0;
};

/// Per-conditioning-symbol distribution over outcomes: rows[x] = Q(.|x).
/// Houses stake vectors and odds vectors alike.
class CondStrategy {
public:
    CondStrategy() = default;

    explicit CondStrategy(std::vector<Dist> rows) : rows_(std::move(rows))
    {
        if (rows_.empty())
            throw std::invalid_argument("CondStrategy: no rows");
        for (const Dist& r : rows_)
            if (r.size() != rows_[0].size())
                throw std::invalid_argument("CondStrategy: rows over different outcome alphabets");
    }

    /// Same row for every conditioning symbol.
    static CondStrategy constant(std::size_t given_size, const Dist& row)
    {
        return CondStrategy(std::vector<Dist>(given_size, row));
    }

    std::size_t given_size() const noexcept { return rows_.size(); }
    std::size_t out_size() const noexcept { return rows_.empty() ? 0 : rows_[0].size(); }
    const Dist& row(std::size_t given) const { return rows_.at(given); }
    const std::vector<Dist>& rows() const noexcept { return rows_; }
    double operator()(std::size_t out, std::size_t given) const { return rows_.at(given)[out]; }

    /// The joint weight W(g, o) = marginal(g) * Q(o|g), flattened row-major.
    Dist joint_with(const Dist& given_marginal) const
    {
        if (given_marginal.size() != given_size())
            throw std::invalid_argument("CondStrategy::joint_with: marginal size mismatch");
        std::vector<double> w;
        w.reserve(given_size() * out_size());
        for (std::size_t g = 0; g < given_size(); ++g)
            for (std::size_t o = 0; o < out_size(); ++o)
                w.push_back(given_marginal[g] * rows_[g][o]);
        return Dist::from_weights(std::move(w));
    }

    double max_abs_diff(const CondStrategy& other) const
    {
        if (other.given_size() != given_size())
            throw std::invalid_argument("CondStrategy: shape mismatch");
        double m = 0.0;
        for (std::size_t g = 0; g < given_size(); ++g)
            m = std::max(m, rows_[g].max_abs_diff(other.rows_[g]));
        return m;
    }

private:
    std::vector<Dist> rows_;
};

namespace detail {

inline long double binomial_ld(std::uint64_t n, std::uint64_t r)
{
    if (r > n)
        return 0.0L;
    r = std::min(r, n - r);
    long double acc = 1.0L;
    for (std::uint64_t i = 1; i <= r; ++i)
        acc = acc * static_cast<long double>(n - r + i) / static_cast<long double>(i);
    return acc;
}

/// log2 of the multinomial coefficient n! / prod counts!.
inline double log2_multinomial(std::span<const Count> counts)
{
    Count n = 0;
    double acc = 0.0;
    for (Count c : counts) {
        n += c;
        acc -= std::lgamma(static_cast<double>(c) + 1.0);
    }
    acc += std::lgamma(static_cast<double>(n) + 1.0);
    return std::max(0.0, acc / std::log(2.0));
}

inline void enumerate_rec(std::vector<Count>& cur, std::size_t pos, Count remaining, std::vector<EmpiricalType>& out)
{
    if (pos + 1 == cur.size()) {
        cur[pos] = remaining;
        out.emplace_back(cur);
        return;
    }
    for (Count c = 0; c <= remaining; ++c) {
        cur[pos] = c;
        enumerate_rec(cur, pos + 1, remaining - c, out);
    }
}

} // namespace detail

/// Number of types C(n+k-1, k-1), as a long double (may be huge).
inline long double number_of_types(std::uint64_t n, std::size_t k)
{
    return detail::binomial_ld(n + k - 1, k - 1);
}

/// All compositions of n into k non-negative parts, lexicographic on counts.
inline std::vector<EmpiricalType> enumerate_types(std::uint64_t n, std::size_t k, std::uint64_t cap = kDefaultTypeCap)
{
    if (n < 1 || k < 1)
        throw std::invalid_argument("enumerate_types: need n >= 1 and k >= 1");
    const long double count = number_of_types(n, k);
    if (count > static_cast<long double>(cap))
        throw ResourceCapError("enumerate_types: " + std::to_string(static_cast<double>(count)) +
                               " types exceed the cap of " + std::to_string(cap));
    std::vector<EmpiricalType> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<Count> cur(k, 0);
    detail::enumerate_rec(cur, 0, n, out);
    return out;
}

inline EmpiricalType type_of_sequence(std::span<const Symbol> seq, std::size_t k)
{
    if (seq.empty())
        throw std::invalid_argument("type_of_sequence: empty sequence");
    std::vector<Count> counts(k, 0);
    for (Symbol s : seq) {
        if (s >= k)
            throw std::out_of_range("type_of_sequence: symbol " + std::to_string(s) + " outside alphabet of size " +
                                    std::to_string(k));
        ++counts[s];
    }
    return EmpiricalType(std::move(counts));
}

/// Exact multinomial coefficient |type class| = n! / prod counts[x]!.
inline BigInt type_class_size(const EmpiricalType& t)
{
    // Built as a product of binomials C(c1+...+ci, ci), each exact.
    BigInt result = 1;
    Count running = 0;
    for (Count c : t.counts()) {
        BigInt binom = 1;
        for (Count i = 1; i <= c; ++i) {
            binom *= running + i;
            binom /= i;
        }
        running += c;
        result *= binom;
    }
    return result;
}

struct TypeSizeBounds {
    double lower;  ///< (n+1)^{-k} 2^{n H}
    BigInt size;   ///< exact |type class|
    double upper;  ///< 2^{n H}
    double log2_lower;
    double log2_size;
    double log2_upper;
};

/// Checks (n+1)^{-k} 2^{nH(lambda)} <= |type class| <= 2^{nH(lambda)}.
/// Throws std::logic_error if the sandwich is violated.
inline TypeSizeBounds type_size_bounds_check(const EmpiricalType& t)
{
    const double n = static_cast<double>(t.n());
    const double k = static_cast<double>(t.alphabet_size());
    const double nh = n * shannon_entropy(t.freq());
    TypeSizeBounds b;
    b.size = type_class_size(t);
    b.log2_upper = nh;
    b.log2_lower = nh - k * std::log2(n + 1.0);
    b.log2_size = detail::log2_multinomial(t.counts());
    b.upper = std::exp2(b.log2_upper);
    b.lower = std::exp2(b.log2_lower);
    // Compare in the log domain with a relative slack for rounding in H.
    const double slack = 1e-12 * std::max(1.0, nh);
    if (b.log2_lower > b.log2_size + slack || b.log2_size > b.log2_upper + slack)
        throw std::logic_error("type_size_bounds_check: sandwich bound violated");
    return b;
}

namespace detail {

inline void require_type_alphabet(const Dist& p, const EmpiricalType& t, const char* where)
{
    if (p.size() != t.alphabet_size())
        throw std::invalid_argument(std::string(where) + ": alphabet size mismatch");
}

} // namespace detail

/// log2 of the probability of one sequence of type t under i.i.d. p:
/// -n (H(lambda) + D(lambda||p)); -inf on support mismatch.
inline double sequence_log2_probability(const Dist& p, const EmpiricalType& t)
{
    detail::require_type_alphabet(p, t, "sequence_probability");
    const Dist lam = t.freq();
    const double d = kl_divergence(lam, p);
    if (d == kInf)
        return -kInf;
    return -static_cast<double>(t.n()) * (shannon_entropy(lam) + d);
}

inline double sequence_probability(const Dist& p, const EmpiricalType& t)
{
    return std::exp2(sequence_log2_probability(p, t));
}

/// Bettor's allocation to one string of type t when betting q letter-wise.
inline double string_allocation(const Dist& q, const EmpiricalType& t)
{
    return sequence_probability(q, t);
}

inline double type_class_log2_probability(const Dist& p, const EmpiricalType& t)
{
    const double seq = sequence_log2_probability(p, t);
    if (seq == -kInf)
        return -kInf;
    return detail::log2_multinomial(t.counts()) + seq;
}

/// Exact probability |type class| * P(x^n) of observing a sequence of type t.
inline double type_class_probability_exact(const Dist& p, const EmpiricalType& t)
{
    return std::exp2(type_class_log2_probability(p, t));
}

/// Large-deviation exponent -n D(lambda||p) (bits); an estimate of
/// log2 P(type class) up to sub-exponential factors, not the exact value.
inline double type_class_probability_ld(const Dist& p, const EmpiricalType& t)
{
    detail::require_type_alphabet(p, t, "type_class_probability_ld");
    const double d = kl_divergence(t.freq(), p);
    return d == kInf ? -kInf : -static_cast<double>(t.n()) * d;
}

/// log2 P(z^n | x^n) for a joint type over (X, Z) and channel P(z|x):
/// -n (H(lambda_xz) - H(lambda_x) + D(lambda_xz || lambda_x P(z|x))).
inline double conditional_sequence_log2_probability(const CondStrategy& p_cond, const JointEmpiricalType& jt)
{
    if (jt.dims().size() != 2 || jt.dims()[0] != p_cond.given_size() || jt.dims()[1] != p_cond.out_size())
        throw std::invalid_argument("conditional_sequence_probability: joint type shape does not match channel");
    const Dist lam_xz = jt.flatten().freq();
    const Dist lam_x = jt.marginal({0}).flatten().freq();
    const Dist w = p_cond.joint_with(lam_x);
    const double d = kl_divergence(lam_xz, w);
    if (d == kInf)
        return -kInf;
    return -static_cast<double>(jt.n()) * (shannon_entropy(lam_xz) - shannon_entropy(lam_x) + d);
}

inline double conditional_sequence_probability(const CondStrategy& p_cond, const JointEmpiricalType& jt)
{
    return std::exp2(conditional_sequence_log2_probability(p_cond, jt));
}

} // namespace finitekelly
