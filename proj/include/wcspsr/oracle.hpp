// SPDX-License-Identifier: MIT
//
// Exhaustive ground truth for small instances. Every function enumerates
// D^V and throws ScaleError beyond the configured cap.

#ifndef WCSPSR_ORACLE_HPP
#define WCSPSR_ORACLE_HPP

#include <cmath>
#include <vector>

#include "csp.hpp"
#include "directions.hpp"
#include "structure.hpp"
#include "weights.hpp"

namespace wcspsr {

/// Absolute tolerance for comparing objective values.
inline constexpr double kOracleTolerance = 1e-9;

struct OptimumResult {
    double value = kNegInf;
    SolutionSet argmax;
};

inline bool approx_equal(double a, double b, double tol = kOracleTolerance)
{
    if (std::isinf(a) || std::isinf(b))
        return a == b;
    return std::fabs(a - b) <= tol;
}

inline OptimumResult brute_force_optimum(const Structure& st, const WeightVector& g, std::size_t cap = kDefaultScaleCap)
{
    check_weights(st, g);
    OptimumResult res;
    for_each_assignment(st, [&](const Assignment& x) { res.value = std::max(res.value, evaluate(st, g, x)); }, cap);
    for_each_assignment(st, [&](const Assignment& x) {
        if (approx_equal(evaluate(st, g, x), res.value))
            res.argmax.push_back(x);
    }, cap);
    return res;
}

/// Largest objective value strictly below the optimum (minus infinity when
/// every assignment is optimal).
inline double second_best_value(const Structure& st, const WeightVector& g, double best, std::size_t cap = kDefaultScaleCap)
{
    double second = kNegInf;
    for_each_assignment(st, [&](const Assignment& x) {
        double v = evaluate(st, g, x);
        if (!approx_equal(v, best) && v < best)
            second = std::max(second, v);
    }, cap);
    return second;
}

/// Largest |<f,phi(x)> - <g,phi(x)>| over all x (infinite when exactly one
/// side is minus infinity).
inline double max_objective_difference(const Structure& st, const WeightVector& f, const WeightVector& g, std::size_t cap = kDefaultScaleCap)
{
    check_weights(st, f);
    check_weights(st, g);
    double worst = 0.0;
    for_each_assignment(st, [&](const Assignment& x) {
        double a = evaluate(st, f, x), b = evaluate(st, g, x);
        if (a == b)
            return;
        worst = std::max(worst, std::isinf(a) || std::isinf(b) ? kPosInf : std::fabs(a - b));
    }, cap);
    return worst;
}

/// <f,phi(x)> = <g,phi(x)> for all x.
inline bool is_reparametrization(const Structure& st, const WeightVector& f, const WeightVector& g, std::size_t cap = kDefaultScaleCap)
{
    return max_objective_difference(st, f, g, cap) <= kOracleTolerance;
}

/// <f,phi(x)> >= <g,phi(x)> for all x.
inline bool is_superreparametrization(const Structure& st, const WeightVector& f, const WeightVector& g, std::size_t cap = kDefaultScaleCap)
{
    check_weights(st, f);
    check_weights(st, g);
    bool ok = true;
    for_each_assignment(st, [&](const Assignment& x) {
        double a = evaluate(st, f, x), b = evaluate(st, g, x);
        if (!(a >= b - kOracleTolerance) && a != b)
            ok = false;
        return ok;
    }, cap);
    return ok;
}

/// d in M*: <d,phi(x)> >= 0 for all x.
inline bool in_dual_cone(const Structure& st, const Direction& d, std::size_t cap = kDefaultScaleCap)
{
    bool ok = true;
    for_each_assignment(st, [&](const Assignment& x) {
        ok = d.evaluate(st, x) >= -kOracleTolerance;
        return ok;
    }, cap);
    return ok;
}

/// d in M-perp: <d,phi(x)> = 0 for all x.
inline bool in_orthogonal_space(const Structure& st, const Direction& d, std::size_t cap = kDefaultScaleCap)
{
    bool ok = true;
    for_each_assignment(st, [&](const Assignment& x) {
        ok = std::fabs(d.evaluate(st, x)) <= kOracleTolerance;
        return ok;
    }, cap);
    return ok;
}

/// For a super-reparametrization f of g: some solution of the active CSP of f
/// keeps the objective of g, equivalently B(f) equals the optimum of g.
inline bool check_optimality(const Structure& st, const WeightVector& f, const WeightVector& g, std::size_t cap = kDefaultScaleCap)
{
    const CspInstance act = active_set(st, f);
    bool found = false;
    detail::enumerate_solutions(st, act, [&](const Assignment& x) {
        found = approx_equal(evaluate(st, f, x), evaluate(st, g, x));
        return !found;
    }, cap);
    return found;
}

/// Optimal super-reparametrization whose active CSP is A: F1/|C| on A and
/// F2/|C| elsewhere, with F1 and F2 the best and second-best objective values
/// of g. Requires OPT(g) to be contained in SOL(A).
inline WeightVector optimal_superrepar_from_csp(const Structure& st, const WeightVector& g, const CspInstance& a,
    std::size_t cap = kDefaultScaleCap)
{
    check_weights(st, g);
    OptimumResult opt = brute_force_optimum(st, g, cap);
    if (!std::isfinite(opt.value))
        throw ModelError("optimal_superrepar_from_csp: optimum must be finite");
    for (const Assignment& x : opt.argmax)
        if (!is_solution(st, a, x))
            throw ModelError("optimal_superrepar_from_csp: an optimal assignment is not a solution of the CSP");
    const double scopes = static_cast<double>(st.scope_count());
    const double f1 = opt.value / scopes;
    const double f2 = second_best_value(st, g, opt.value, cap) / scopes;
    WeightVector f(st.tuple_count());
    for (TupleIndex t = 0; t < st.tuple_count(); ++t)
        f[t] = a.contains(t) ? f1 : f2;
    return f;
}

/// Super-reparametrization of g with prescribed active CSP A:
/// f_t = B(g)/|C| + [t in A]. A needs a tuple in every scope.
inline WeightVector superrepar_with_active_set(const Structure& st, const WeightVector& g, const CspInstance& a)
{
    check_weights(st, g);
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        if (!a.intersects_scope(st, s))
            throw ModelError("superrepar_with_active_set: every scope needs an active tuple");
    const double base = upper_bound(st, g) / static_cast<double>(st.scope_count());
    WeightVector f(st.tuple_count());
    for (TupleIndex t = 0; t < st.tuple_count(); ++t)
        f[t] = base + (a.contains(t) ? 1.0 : 0.0);
    return f;
}

} // namespace wcspsr

#endif // WCSPSR_ORACLE_HPP
