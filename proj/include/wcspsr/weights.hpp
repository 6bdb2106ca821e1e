// SPDX-License-Identifier: MIT
//
// Weight vectors over T, objective evaluation, the bound B(f) and the sets of
// (almost) active tuples.

#ifndef WCSPSR_WEIGHTS_HPP
#define WCSPSR_WEIGHTS_HPP

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "structure.hpp"
#include "tuple_set.hpp"

namespace wcspsr {

/// Minus infinity, the weight of a forbidden (hard) tuple.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Absolute tolerance for activity tests.
inline constexpr double kActivityTolerance = 1e-9;

inline bool is_neg_inf(double w) { return w == kNegInf; }

/// Extended-real weight per tuple index. Finite weights or minus infinity.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::size_t n, double value = 0.0)
        : w_(n, value)
    {
    }
    explicit WeightVector(std::vector<double> w)
        : w_(std::move(w))
    {
    }

    static WeightVector zeros(const Structure& st) { return WeightVector(st.tuple_count()); }

    std::size_t size() const { return w_.size(); }
    double operator[](TupleIndex t) const { return w_[t]; }
    double& operator[](TupleIndex t) { return w_[t]; }
    std::span<const double> values() const { return w_; }
    const std::vector<double>& vec() const { return w_; }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

private:
    std::vector<double> w_;
};

inline void check_weights(const Structure& st, const WeightVector& f)
{
    if (f.size() != st.tuple_count())
        throw ModelError("weight vector length " + std::to_string(f.size()) + " does not match |T|=" + std::to_string(st.tuple_count()));
}

/// Sum over scopes of f_S(x[S]); minus infinity propagates.
inline double evaluate(const Structure& st, const WeightVector& f, std::span<const int> x)
{
    double sum = 0.0;
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        sum += f[st.tuple_of_assignment(s, x)];
    return sum;
}

inline double scope_max(const Structure& st, const WeightVector& f, ScopeIndex s)
{
    double m = kNegInf;
    for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t)
        m = std::max(m, f[t]);
    return m;
}

inline std::vector<double> scope_maxima(const Structure& st, const WeightVector& f)
{
    std::vector<double> out(st.scope_count());
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        out[s] = scope_max(st, f, s);
    return out;
}

/// B(f) = sum of per-scope maxima.
inline double upper_bound(const Structure& st, const WeightVector& f)
{
    double b = 0.0;
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        b += scope_max(st, f, s);
    return b;
}

/// Tuples within `theta` (plus the activity tolerance) of their scope
/// maximum. Minus-infinite tuples are never included.
inline CspInstance theta_active_set(const Structure& st, const WeightVector& f, double theta,
    double tolerance = kActivityTolerance)
{
    CspInstance a(st.tuple_count());
    for (ScopeIndex s = 0; s < st.scope_count(); ++s) {
        double m = scope_max(st, f, s);
        if (is_neg_inf(m))
            continue;
        double cut = m - theta - tolerance;
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t)
            if (!is_neg_inf(f[t]) && f[t] >= cut)
                a.insert(t);
    }
    return a;
}

/// A*(f): tuples attaining their scope maximum.
inline CspInstance active_set(const Structure& st, const WeightVector& f)
{
    return theta_active_set(st, f, 0.0);
}

/// Largest absolute finite weight, at least 1.
inline double weight_magnitude(const WeightVector& f)
{
    double m = 1.0;
    for (double w : f.values())
        if (std::isfinite(w))
            m = std::max(m, std::fabs(w));
    return m;
}

/// True when every scope block holds at least one finite weight.
inline bool has_finite_weight_per_scope(const Structure& st, const WeightVector& f)
{
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        if (is_neg_inf(scope_max(st, f, s)))
            return false;
    return true;
}

} // namespace wcspsr

#endif // WCSPSR_WEIGHTS_HPP
