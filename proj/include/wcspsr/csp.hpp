// SPDX-License-Identifier: MIT
//
// Crisp CSP kernel: exhaustive solution enumeration, restrictions, the
// minimal CSP of an assignment set and the positive-consistency closure.

#ifndef WCSPSR_CSP_HPP
#define WCSPSR_CSP_HPP

#include <algorithm>
#include <functional>
#include <vector>

#include "structure.hpp"
#include "tuple_set.hpp"

namespace wcspsr {

/// Explicit set of assignments, kept in lexicographic order.
using SolutionSet = std::vector<Assignment>;

namespace detail {

// Depth-first enumeration in lexicographic order. A scope is checked as soon
// as its last variable is fixed.
template <typename Visit>
void enumerate_solutions(const Structure& st, const CspInstance& a, Visit&& visit, std::size_t cap)
{
    check_scale(st, cap);
    const std::size_t n = st.variable_count();
    std::vector<std::vector<ScopeIndex>> closing(n);
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        closing[static_cast<std::size_t>(st.scope(s).back())].push_back(s);

    Assignment x(n, 0);
    bool stop = false;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            stop = !visit(static_cast<const Assignment&>(x));
            return;
        }
        for (int v = 0; v < st.domain_size(static_cast<int>(i)) && !stop; ++v) {
            x[i] = v;
            bool ok = true;
            for (ScopeIndex s : closing[i])
                if (!a.contains(st.tuple_of_assignment(s, x))) {
                    ok = false;
                    break;
                }
            if (ok)
                rec(i + 1);
        }
        x[i] = 0;
    };
    rec(0);
}

} // namespace detail

/// SOL(A): every assignment using only allowed tuples.
inline SolutionSet solutions(const Structure& st, const CspInstance& a, std::size_t cap = kDefaultScaleCap)
{
    SolutionSet out;
    detail::enumerate_solutions(st, a, [&](const Assignment& x) {
        out.push_back(x);
        return true;
    }, cap);
    return out;
}

inline bool is_satisfiable(const Structure& st, const CspInstance& a, std::size_t cap = kDefaultScaleCap)
{
    bool found = false;
    detail::enumerate_solutions(st, a, [&](const Assignment&) {
        found = true;
        return false;
    }, cap);
    return found;
}

inline bool is_solution(const Structure& st, const CspInstance& a, std::span<const int> x)
{
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        if (!a.contains(st.tuple_of_assignment(s, x)))
            return false;
    return true;
}

/// A|_{x_i=k}: forbids every unary tuple ({i},k') with k' != k.
inline CspInstance restrict_csp(const Structure& st, const CspInstance& a, int var, int value)
{
    auto u = st.unary_scope(var);
    if (!u)
        throw ModelError("restrict_csp: variable " + std::to_string(var) + " has no unary scope");
    if (value < 0 || value >= st.domain_size(var))
        throw ModelError("restrict_csp: value out of range");
    CspInstance out = a;
    for (int k = 0; k < st.domain_size(var); ++k)
        if (k != value)
            out.erase(st.block_begin(*u) + static_cast<std::size_t>(k));
    return out;
}

/// A_min(X) = {(S,k) : exists x in X with x[S] = k}.
inline CspInstance minimal_csp(const Structure& st, const SolutionSet& xs)
{
    CspInstance out(st.tuple_count());
    for (const auto& x : xs) {
        if (!st.valid_assignment(x))
            throw ModelError("minimal_csp: invalid assignment");
        for (ScopeIndex s = 0; s < st.scope_count(); ++s)
            out.insert(st.tuple_of_assignment(s, x));
    }
    return out;
}

/// Smallest CSP with the same solution set as `a`.
inline CspInstance positive_consistency_closure(const Structure& st, const CspInstance& a, std::size_t cap = kDefaultScaleCap)
{
    return minimal_csp(st, solutions(st, a, cap));
}

/// X1 subset of X2, both sorted.
inline bool solution_subset(const SolutionSet& x1, const SolutionSet& x2)
{
    return std::includes(x2.begin(), x2.end(), x1.begin(), x1.end());
}

} // namespace wcspsr

#endif // WCSPSR_CSP_HPP
