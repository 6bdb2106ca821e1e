// SPDX-License-Identifier: MIT
//
// Deactivating directions: construction, composition and exhaustive
// verification.
//
// A direction d is R-deactivating for a CSP A when d lies in the dual cone M*
// (<d,phi(x)> >= 0 for every assignment x), is negative on every tuple of R
// and vanishes on A - R. Its existence certifies SOL(A) = SOL(A - R); when
// A - R empties some scope block, d certifies that A is unsatisfiable.

#ifndef WCSPSR_DIRECTIONS_HPP
#define WCSPSR_DIRECTIONS_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "structure.hpp"
#include "tuple_set.hpp"
#include "weights.hpp"

namespace wcspsr {

/// Sparse finite vector over T. Stored entries are non-zero.
class Direction {
public:
    using Map = std::map<TupleIndex, double>;

    Direction() = default;

    double operator[](TupleIndex t) const
    {
        auto it = entries_.find(t);
        return it == entries_.end() ? 0.0 : it->second;
    }

    void set(TupleIndex t, double v)
    {
        if (v == 0.0)
            entries_.erase(t);
        else
            entries_[t] = v;
    }

    void add(TupleIndex t, double v) { set(t, (*this)[t] + v); }

    /// this += scale * other
    void add_scaled(const Direction& other, double scale)
    {
        if (scale == 0.0)
            return;
        for (const auto& [t, v] : other.entries_)
            add(t, scale * v);
    }

    std::size_t nnz() const { return entries_.size(); }
    bool is_zero() const { return entries_.empty(); }
    const Map& entries() const { return entries_; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    std::vector<double> to_dense(std::size_t n) const
    {
        std::vector<double> out(n, 0.0);
        for (const auto& [t, v] : entries_)
            out[t] = v;
        return out;
    }

    /// <d, phi(x)>
    double evaluate(const Structure& st, std::span<const int> x) const
    {
        double sum = 0.0;
        if (entries_.empty())
            return sum;
        for (ScopeIndex s = 0; s < st.scope_count(); ++s)
            sum += (*this)[st.tuple_of_assignment(s, x)];
        return sum;
    }

    friend bool operator==(const Direction&, const Direction&) = default;

private:
    Map entries_;
};

/// Sorted, duplicate-free list of tuple indices.
using TupleList = std::vector<TupleIndex>;

inline TupleList normalized(TupleList r)
{
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
}

inline TupleList merge(const TupleList& a, const TupleList& b)
{
    TupleList out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// A pair (R, d) with d R-deactivating for the instance it was built for.
struct DeactivatingCertificate {
    TupleList removed;
    Direction direction;
};

struct PropagationStep {
    TupleList removed;
    Direction direction;
};

/// Ordered sequence of (R_i, d^i) produced by propagation, plus the scope
/// whose block was emptied, if any. The R_i are pairwise disjoint.
class PropagationTrace {
public:
    PropagationTrace() = default;
    explicit PropagationTrace(std::size_t universe)
        : removed_(universe)
    {
    }

    /// Appends a step; throws if R is empty or intersects an earlier R_j.
    void append(PropagationStep step)
    {
        if (step.removed.empty())
            throw ModelError("propagation step with empty removal set");
        for (TupleIndex t : step.removed) {
            if (removed_.contains(t))
                throw ModelError("propagation steps must remove disjoint tuple sets");
            removed_.insert(t);
        }
        steps_.push_back(std::move(step));
    }

    std::size_t size() const { return steps_.size(); }
    bool empty() const { return steps_.empty(); }
    const PropagationStep& operator[](std::size_t i) const { return steps_[i]; }
    const std::vector<PropagationStep>& steps() const { return steps_; }
    const TupleSet& all_removed() const { return removed_; }

    std::optional<ScopeIndex> wiped_scope;

private:
    std::vector<PropagationStep> steps_;
    TupleSet removed_;
};

/// Number of scopes whose block meets R.
inline std::size_t touched_scope_count(const Structure& st, const TupleList& r)
{
    std::set<ScopeIndex> scopes;
    for (TupleIndex t : r)
        scopes.insert(st.scope_of(t));
    return scopes.size();
}

/// The generic construction: -1 on R, delta on T - A, 0 on A - R, where delta
/// is the number of scopes touched by R. Valid whenever SOL(A) = SOL(A - R).
inline DeactivatingCertificate generic_direction(const Structure& st, const CspInstance& a, TupleList r)
{
    r = normalized(std::move(r));
    if (r.empty())
        throw ModelError("generic_direction: empty removal set");
    for (TupleIndex t : r)
        if (!a.contains(t))
            throw ModelError("generic_direction: removal set is not contained in the instance");
    const double delta = static_cast<double>(touched_scope_count(st, r));
    DeactivatingCertificate cert;
    for (TupleIndex t : r)
        cert.direction.set(t, -1.0);
    for (TupleIndex t = 0; t < st.tuple_count(); ++t)
        if (!a.contains(t))
            cert.direction.set(t, delta);
    cert.removed = std::move(r);
    return cert;
}

/// Same construction with A replaced by T - P: -1 on R, delta on the
/// forbidden-tuple witness set P.
inline Direction witness_direction(const Structure& st, const TupleList& r, const TupleList& witnesses)
{
    const double delta = static_cast<double>(touched_scope_count(st, r));
    Direction d;
    for (TupleIndex t : witnesses)
        d.set(t, delta);
    for (TupleIndex t : r)
        d.set(t, -1.0);
    return d;
}

namespace detail {

inline int require_position(const Structure& st, ScopeIndex s, int var)
{
    int pos = st.position_in_scope(s, var);
    if (pos < 0)
        throw ModelError("variable " + std::to_string(var) + " is not in scope " + std::to_string(s));
    return pos;
}

inline TupleIndex require_unary(const Structure& st, int var, int value)
{
    auto u = st.unary_scope(var);
    if (!u)
        throw ModelError("variable " + std::to_string(var) + " has no unary scope");
    return st.block_begin(*u) + static_cast<std::size_t>(value);
}

} // namespace detail

/// Reparametrization moving weight from the tuples {(S,l) : l_i = k} onto the
/// unary tuple ({i},k): -1 on the former, +1 on the latter. Lies in M-perp.
inline Direction ac_support_vector(const Structure& st, ScopeIndex s, int var, int value)
{
    int pos = detail::require_position(st, s, var);
    TupleIndex unary = detail::require_unary(st, var, value);
    Direction d;
    for (TupleIndex t : st.tuples_with_value(s, static_cast<std::size_t>(pos), value))
        d.set(t, -1.0);
    d.set(unary, 1.0);
    return d;
}

/// Certificate for forbidding the live tuples {(S,l) : l_i = k} of A once the
/// unary tuple ({i},k) is forbidden.
inline DeactivatingCertificate ac_support_direction(const Structure& st, const CspInstance& a, ScopeIndex s, int var, int value)
{
    int pos = detail::require_position(st, s, var);
    DeactivatingCertificate cert;
    cert.direction = ac_support_vector(st, s, var, value);
    for (TupleIndex t : st.tuples_with_value(s, static_cast<std::size_t>(pos), value))
        if (a.contains(t))
            cert.removed.push_back(t);
    return cert;
}

/// Reparametrization for forbidding an unsupported unary tuple ({i},k): -1 on
/// ({i},k), +1 on every (S,l) with l_i = k. Lies in M-perp.
inline Direction ac_unary_vector(const Structure& st, ScopeIndex s, int var, int value)
{
    Direction d = ac_support_vector(st, s, var, value);
    Direction neg;
    neg.add_scaled(d, -1.0);
    return neg;
}

/// Combines dA (R-deactivating for A) and dB (R'-deactivating for A - R) into
/// an (R u R')-deactivating direction for A: dB + delta * dA.
inline Direction compose_pair(const Direction& d_a, const TupleList& r, const Direction& d_b)
{
    double delta = 0.0;
    bool needed = false;
    for (TupleIndex t : r) {
        double vb = d_b[t];
        if (vb > -1.0) {
            double va = d_a[t];
            if (!(va < 0.0))
                throw ModelError("compose_pair: first direction must be negative on its removal set");
            double c = (-1.0 - vb) / va;
            delta = needed ? std::max(delta, c) : c;
            needed = true;
        }
    }
    Direction out = d_b;
    if (needed)
        out.add_scaled(d_a, delta);
    return out;
}

/// I = {i : R_i meets T_S}.
inline std::vector<std::size_t> chosen_indices(const Structure& st, const PropagationTrace& trace, ScopeIndex s)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (std::any_of(trace[i].removed.begin(), trace[i].removed.end(), [&](TupleIndex t) { return st.scope_of(t) == s; }))
            out.push_back(i);
    if (out.empty())
        throw ModelError("chosen_indices: no propagation step removed a tuple of scope " + std::to_string(s));
    return out;
}

/// Folds the trace backwards from max I, absorbing step i whenever i is in I
/// or the running direction is non-zero on R_i. Returns (Q, d*) with d*
/// Q-deactivating for the instance the trace started from.
inline DeactivatingCertificate compose_trace(const PropagationTrace& trace, const std::vector<std::size_t>& chosen)
{
    if (chosen.empty())
        throw ModelError("compose_trace: empty index set");
    std::vector<bool> in_chosen(trace.size(), false);
    for (std::size_t i : chosen) {
        if (i >= trace.size())
            throw ModelError("compose_trace: index out of range");
        in_chosen[i] = true;
    }
    std::size_t i = *std::max_element(chosen.begin(), chosen.end());
    DeactivatingCertificate out { trace[i].removed, trace[i].direction };
    while (i > 0) {
        --i;
        const auto& step = trace[i];
        bool touches = std::any_of(step.removed.begin(), step.removed.end(), [&](TupleIndex t) { return out.direction[t] != 0.0; });
        if (in_chosen[i] || touches) {
            out.direction = compose_pair(step.direction, step.removed, out.direction);
            out.removed = merge(out.removed, step.removed);
        }
    }
    return out;
}

/// Result of an exhaustive certificate check.
struct CertificateCheck {
    bool negative_on_removed = true;
    bool zero_on_rest = true;
    bool in_dual_cone = true;
    bool removed_in_instance = true;
    double min_objective = kPosInf;

    bool ok() const { return negative_on_removed && zero_on_rest && in_dual_cone && removed_in_instance; }
};

inline CertificateCheck check_certificate(const Structure& st, const CspInstance& a, const DeactivatingCertificate& cert,
    double tolerance = 1e-9, std::size_t cap = kDefaultScaleCap)
{
    CertificateCheck res;
    TupleSet r(st.tuple_count());
    for (TupleIndex t : cert.removed) {
        r.insert(t);
        if (!a.contains(t))
            res.removed_in_instance = false;
        if (!(cert.direction[t] < 0.0))
            res.negative_on_removed = false;
    }
    if (cert.removed.empty())
        res.negative_on_removed = false;
    for (const auto& [t, v] : cert.direction)
        if (a.contains(t) && !r.contains(t))
            res.zero_on_rest = false;
    for_each_assignment(st, [&](const Assignment& x) {
        double val = cert.direction.evaluate(st, x);
        res.min_objective = std::min(res.min_objective, val);
        if (val < -tolerance)
            res.in_dual_cone = false;
    }, cap);
    return res;
}

/// Definition check: d < 0 on R, d = 0 on A - R, <d,phi(x)> >= 0 for all x.
inline bool verify_certificate(const Structure& st, const CspInstance& a, const DeactivatingCertificate& cert,
    std::size_t cap = kDefaultScaleCap)
{
    return check_certificate(st, a, cert, 1e-9, cap).ok();
}

} // namespace wcspsr

#endif // WCSPSR_DIRECTIONS_HPP
