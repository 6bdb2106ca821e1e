// SPDX-License-Identifier: MIT
//
// Constraint propagation on crisp CSP instances with certificate recording.
// Every removal comes with a direction that is deactivating for the live
// instance at the time of removal.

#ifndef WCSPSR_PROPAGATE_HPP
#define WCSPSR_PROPAGATE_HPP

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "csp.hpp"
#include "directions.hpp"
#include "structure.hpp"
#include "tuple_set.hpp"
#include "weights.hpp"

namespace wcspsr {

enum class PropagatorMode { AC, SAC, CC };

/// A cycle is a vertex sequence v0 v1 ... v_{m-1}; consecutive vertices and
/// (v_{m-1}, v0) are joined by binary scopes.
using Cycle = std::vector<int>;

struct PropagatorConfig {
    PropagatorMode mode = PropagatorMode::AC;
    std::vector<Cycle> cycles;
};

struct PropagationResult {
    PropagationTrace trace;
    CspInstance closure;
    std::optional<ScopeIndex> wiped_scope() const { return trace.wiped_scope; }
};

/// One removal with its direction and the set P of already forbidden tuples
/// that justified it.
struct Removal {
    TupleList removed;
    Direction direction;
    TupleList witnesses;
};

namespace detail {

class AcEngine {
public:
    AcEngine(const Structure& st, CspInstance live, bool build_directions, bool record_causes)
        : st_(st)
        , live_(std::move(live))
        , build_directions_(build_directions)
        , record_causes_(record_causes)
    {
        queued_.resize(st.scope_count());
        for (ScopeIndex s = 0; s < st.scope_count(); ++s)
            queued_[s].assign(st.arity(s), 0);
        if (record_causes_)
            causes_.resize(st.tuple_count());
    }

    const CspInstance& live() const { return live_; }
    std::optional<ScopeIndex> wiped() const { return wiped_; }
    const std::vector<TupleList>& causes() const { return causes_; }

    void enqueue_all()
    {
        for (ScopeIndex s = 0; s < st_.scope_count(); ++s)
            for (std::size_t p = 0; p < st_.arity(s); ++p)
                enqueue(s, p);
    }

    void enqueue_var(int var)
    {
        for (ScopeIndex s : st_.scopes_of(var))
            enqueue(s, static_cast<std::size_t>(st_.position_in_scope(s, var)));
    }

    /// Forbids a unary tuple decided outside the engine and schedules the
    /// affected arcs.
    void forbid_unary(TupleIndex t)
    {
        live_.erase(t);
        ScopeIndex u = st_.scope_of(t);
        enqueue_var(st_.scope(u)[0]);
        check_wipe(u);
    }

    /// Performs the next AC removal, or returns nullopt at the fixpoint.
    std::optional<Removal> step()
    {
        while (!queue_.empty() && !wiped_) {
            auto [s, p] = queue_.front();
            if (auto r = inspect(s, p))
                return r;
            queue_.pop_front();
            queued_[s][p] = 0;
        }
        return std::nullopt;
    }

    /// Runs to the fixpoint or the first wipe-out, appending to `trace` when
    /// given. Returns true on wipe-out.
    bool run(PropagationTrace* trace)
    {
        while (auto r = step()) {
            if (trace)
                trace->append(PropagationStep { std::move(r->removed), std::move(r->direction) });
            if (wiped_)
                return true;
        }
        return wiped_.has_value();
    }

    void check_wipe(ScopeIndex s)
    {
        if (!wiped_ && !live_.intersects_scope(st_, s))
            wiped_ = s;
    }

private:
    void enqueue(ScopeIndex s, std::size_t p)
    {
        if (st_.arity(s) < 2)
            return;
        int var = st_.scope(s)[p];
        if (!st_.unary_scope(var))
            return;
        if (!queued_[s][p]) {
            queued_[s][p] = 1;
            queue_.emplace_back(s, p);
        }
    }

    std::optional<Removal> inspect(ScopeIndex s, std::size_t p)
    {
        const int var = st_.scope(s)[p];
        const TupleIndex ubegin = st_.block_begin(*st_.unary_scope(var));
        const int dom = st_.domain_size(var);

        // Unsupported unary tuples first.
        for (int k = 0; k < dom; ++k) {
            TupleIndex tu = ubegin + static_cast<std::size_t>(k);
            if (!live_.contains(tu))
                continue;
            auto group = st_.tuples_with_value(s, p, k);
            if (std::any_of(group.begin(), group.end(), [&](TupleIndex t) { return live_.contains(t); }))
                continue;
            Removal r;
            r.removed = { tu };
            r.witnesses = group;
            if (build_directions_)
                r.direction = ac_unary_vector(st_, s, var, k);
            live_.erase(tu);
            if (record_causes_)
                causes_[tu] = group;
            enqueue_var(var);
            check_wipe(st_.scope_of(tu));
            return r;
        }

        // Scope tuples over forbidden unary values.
        for (int k = 0; k < dom; ++k) {
            TupleIndex tu = ubegin + static_cast<std::size_t>(k);
            if (live_.contains(tu))
                continue;
            TupleList alive;
            for (TupleIndex t : st_.tuples_with_value(s, p, k))
                if (live_.contains(t))
                    alive.push_back(t);
            if (alive.empty())
                continue;
            Removal r;
            r.witnesses = { tu };
            if (build_directions_)
                r.direction = ac_support_vector(st_, s, var, k);
            for (TupleIndex t : alive) {
                live_.erase(t);
                if (record_causes_)
                    causes_[t] = { tu };
            }
            r.removed = std::move(alive);
            for (std::size_t q = 0; q < st_.arity(s); ++q)
                if (q != p)
                    enqueue(s, q);
            check_wipe(s);
            return r;
        }
        return std::nullopt;
    }

    const Structure& st_;
    CspInstance live_;
    bool build_directions_;
    bool record_causes_;
    std::deque<std::pair<ScopeIndex, std::size_t>> queue_;
    std::vector<std::vector<std::uint8_t>> queued_;
    std::vector<TupleList> causes_;
    std::optional<ScopeIndex> wiped_;
};

inline void require_unaries(const Structure& st, const char* who)
{
    if (!st.has_all_unary())
        throw ModelError(std::string(who) + ": every variable needs a unary scope");
}

inline void require_binary(const Structure& st, const char* who)
{
    if (!st.is_binary())
        throw ModelError(std::string(who) + ": structure must be binary");
}

inline Removal singleton_removal(const Structure& st, TupleIndex tu, TupleList witnesses)
{
    Removal r;
    r.removed = { tu };
    r.witnesses = normalized(std::move(witnesses));
    r.direction = witness_direction(st, r.removed, r.witnesses);
    return r;
}

/// Tuple of the binary scope s assigning value a to var_a and b to var_b.
inline TupleIndex edge_tuple(const Structure& st, ScopeIndex s, int var_a, int a, int b)
{
    int vals[2];
    if (st.scope(s)[0] == var_a) {
        vals[0] = a;
        vals[1] = b;
    } else {
        vals[0] = b;
        vals[1] = a;
    }
    return st.tuple_index(s, std::span<const int>(vals, 2));
}

inline ScopeIndex require_edge(const Structure& st, int u, int v)
{
    int vars[2] = { std::min(u, v), std::max(u, v) };
    auto s = st.find_scope(std::span<const int>(vars, 2));
    if (!s)
        throw ModelError("cycle uses a pair of variables without a binary scope");
    return *s;
}

} // namespace detail

/// One AC removal on A, scanning arcs in declaration order. For a unary
/// removal the direction is -1 on ({i},k) and +1 on its (forbidden) support
/// group; for a pair removal it is -1 on the group and +1 on ({i},k). Both
/// lie in M-perp.
inline std::optional<Removal> ac_step(const Structure& st, const CspInstance& a)
{
    detail::AcEngine eng(st, a, true, false);
    eng.enqueue_all();
    return eng.step();
}

/// First unary tuple ({i},k) of A (variables then values ascending) whose
/// restriction has an empty AC closure. The witness set P is recovered by
/// walking removal causes back from the wiped scope.
inline std::optional<Removal> sac_step(const Structure& st, const CspInstance& a)
{
    detail::require_unaries(st, "sac_step");
    for (int var = 0; var < static_cast<int>(st.variable_count()); ++var) {
        const ScopeIndex u = *st.unary_scope(var);
        for (int k = 0; k < st.domain_size(var); ++k) {
            const TupleIndex tu = st.block_begin(u) + static_cast<std::size_t>(k);
            if (!a.contains(tu))
                continue;
            detail::AcEngine inner(st, restrict_csp(st, a, var, k), false, true);
            inner.enqueue_all();
            if (!inner.run(nullptr))
                continue;

            const ScopeIndex wiped = *inner.wiped();
            auto is_restriction = [&](TupleIndex t) { return st.scope_of(t) == u && t != tu; };
            std::vector<std::uint8_t> seen(st.tuple_count(), 0);
            std::deque<TupleIndex> frontier;
            for (TupleIndex t = st.block_begin(wiped); t < st.block_end(wiped); ++t) {
                seen[t] = 1;
                frontier.push_back(t);
            }
            TupleList witnesses;
            while (!frontier.empty()) {
                TupleIndex t = frontier.front();
                frontier.pop_front();
                if (!a.contains(t)) {
                    witnesses.push_back(t);
                    continue;
                }
                if (is_restriction(t))
                    continue;
                for (TupleIndex c : inner.causes()[t])
                    if (!seen[c]) {
                        seen[c] = 1;
                        frontier.push_back(c);
                    }
            }
            return detail::singleton_removal(st, tu, std::move(witnesses));
        }
    }
    return std::nullopt;
}

/// First unary tuple ({i},k) of A and cycle through i such that no
/// assignment of the cycle extending x_i = k uses only allowed tuples.
inline std::optional<Removal> cc_step(const Structure& st, const CspInstance& a, const std::vector<Cycle>& cycles)
{
    detail::require_binary(st, "cc_step");
    detail::require_unaries(st, "cc_step");
    for (int var = 0; var < static_cast<int>(st.variable_count()); ++var) {
        const ScopeIndex u = *st.unary_scope(var);
        for (int k = 0; k < st.domain_size(var); ++k) {
            const TupleIndex tu = st.block_begin(u) + static_cast<std::size_t>(k);
            if (!a.contains(tu))
                continue;
            for (const Cycle& cyc : cycles) {
                auto at = std::find(cyc.begin(), cyc.end(), var);
                if (at == cyc.end() || cyc.size() < 3)
                    continue;
                Cycle c(at, cyc.end());
                c.insert(c.end(), cyc.begin(), at);
                const std::size_t m = c.size();

                std::vector<ScopeIndex> edges(m);
                for (std::size_t j = 0; j < m; ++j)
                    edges[j] = detail::require_edge(st, c[j], c[(j + 1) % m]);

                std::vector<std::uint8_t> reach(static_cast<std::size_t>(st.domain_size(var)), 0);
                reach[static_cast<std::size_t>(k)] = 1;
                for (std::size_t j = 1; j < m; ++j) {
                    const int prev = c[j - 1], cur = c[j];
                    const TupleIndex ub = st.block_begin(*st.unary_scope(cur));
                    std::vector<std::uint8_t> next(static_cast<std::size_t>(st.domain_size(cur)), 0);
                    for (int b = 0; b < st.domain_size(cur); ++b) {
                        if (!a.contains(ub + static_cast<std::size_t>(b)))
                            continue;
                        for (int av = 0; av < st.domain_size(prev) && !next[static_cast<std::size_t>(b)]; ++av)
                            if (reach[static_cast<std::size_t>(av)] && a.contains(detail::edge_tuple(st, edges[j - 1], prev, av, b)))
                                next[static_cast<std::size_t>(b)] = 1;
                    }
                    reach = std::move(next);
                }
                bool closed = false;
                const int last = c[m - 1];
                for (int b = 0; b < st.domain_size(last) && !closed; ++b)
                    if (reach[static_cast<std::size_t>(b)] && a.contains(detail::edge_tuple(st, edges[m - 1], last, b, k)))
                        closed = true;
                if (closed)
                    continue;

                TupleList witnesses;
                for (std::size_t j = 1; j < m; ++j) {
                    ScopeIndex us = *st.unary_scope(c[j]);
                    for (TupleIndex t = st.block_begin(us); t < st.block_end(us); ++t)
                        if (!a.contains(t))
                            witnesses.push_back(t);
                }
                for (std::size_t j = 0; j < m; ++j) {
                    ScopeIndex e = edges[j];
                    bool at_var = (j == 0 || j == m - 1);
                    int pos = st.position_in_scope(e, var);
                    for (TupleIndex t = st.block_begin(e); t < st.block_end(e); ++t) {
                        if (a.contains(t))
                            continue;
                        if (at_var && pos >= 0 && st.tuple_value(t, static_cast<std::size_t>(pos)) != k)
                            continue;
                        witnesses.push_back(t);
                    }
                }
                return detail::singleton_removal(st, tu, std::move(witnesses));
            }
        }
    }
    return std::nullopt;
}

/// Runs AC, and in SAC or CC mode alternates a single stronger removal with a
/// return to the AC fixpoint. Stops at the first emptied scope block.
inline PropagationResult propagate(const Structure& st, const CspInstance& a, const PropagatorConfig& cfg)
{
    if (cfg.mode == PropagatorMode::CC && cfg.cycles.empty())
        throw ModelError("propagate: cycle consistency needs a non-empty cycle list");
    PropagationResult res;
    res.trace = PropagationTrace(st.tuple_count());
    detail::AcEngine eng(st, a, true, false);
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        eng.check_wipe(s);
    eng.enqueue_all();
    while (true) {
        if (eng.run(&res.trace))
            break;
        if (cfg.mode == PropagatorMode::AC)
            break;
        auto r = cfg.mode == PropagatorMode::SAC ? sac_step(st, eng.live()) : cc_step(st, eng.live(), cfg.cycles);
        if (!r)
            break;
        TupleIndex tu = r->removed.front();
        res.trace.append(PropagationStep { std::move(r->removed), std::move(r->direction) });
        eng.forbid_unary(tu);
        if (eng.wiped())
            break;
    }
    res.trace.wiped_scope = eng.wiped();
    res.closure = eng.live();
    return res;
}

/// Rotates a cycle to start at its smallest vertex, oriented so that the
/// second vertex is smaller than the last.
inline Cycle canonical_cycle(Cycle c)
{
    if (c.empty())
        return c;
    std::rotate(c.begin(), std::min_element(c.begin(), c.end()), c.end());
    if (c.size() > 2 && c[1] > c.back())
        std::reverse(c.begin() + 1, c.end());
    return c;
}

/// Cycles of the graph whose edges are the binary scopes: all 3- and
/// 4-cycles for average degree at most 5, all triangles up to 10, otherwise
/// (or when nothing was found) the fundamental cycles of a BFS spanning
/// forest.
inline std::vector<Cycle> select_cycles(const Structure& st)
{
    detail::require_binary(st, "select_cycles");
    const int n = static_cast<int>(st.variable_count());
    std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
    std::size_t edge_count = 0;
    for (ScopeIndex s = 0; s < st.scope_count(); ++s) {
        if (st.arity(s) != 2)
            continue;
        int u = st.scope(s)[0], v = st.scope(s)[1];
        adj[static_cast<std::size_t>(u)].insert(v);
        adj[static_cast<std::size_t>(v)].insert(u);
        ++edge_count;
    }
    std::vector<Cycle> out;
    if (n == 0 || edge_count == 0)
        return out;
    auto has = [&](int u, int v) { return adj[static_cast<std::size_t>(u)].count(v) > 0; };
    const double avg = 2.0 * static_cast<double>(edge_count) / static_cast<double>(n);

    if (avg <= 10.0) {
        for (int a = 0; a < n; ++a)
            for (int b : adj[static_cast<std::size_t>(a)])
                if (b > a)
                    for (int c : adj[static_cast<std::size_t>(b)])
                        if (c > b && has(a, c))
                            out.push_back({ a, b, c });
    }
    if (avg <= 5.0) {
        for (int v0 = 0; v0 < n; ++v0)
            for (int v1 : adj[static_cast<std::size_t>(v0)]) {
                if (v1 <= v0)
                    continue;
                for (int v2 : adj[static_cast<std::size_t>(v1)]) {
                    if (v2 <= v0 || v2 == v1)
                        continue;
                    for (int v3 : adj[static_cast<std::size_t>(v2)])
                        if (v3 > v1 && v3 != v2 && has(v3, v0))
                            out.push_back({ v0, v1, v2, v3 });
                }
            }
    }
    if (!out.empty())
        return out;

    std::vector<int> parent(static_cast<std::size_t>(n), -1), depth(static_cast<std::size_t>(n), -1);
    std::set<std::pair<int, int>> tree;
    for (int root = 0; root < n; ++root) {
        if (depth[static_cast<std::size_t>(root)] >= 0)
            continue;
        depth[static_cast<std::size_t>(root)] = 0;
        std::deque<int> q { root };
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (depth[static_cast<std::size_t>(v)] < 0) {
                    depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
                    parent[static_cast<std::size_t>(v)] = u;
                    tree.emplace(std::min(u, v), std::max(u, v));
                    q.push_back(v);
                }
        }
    }
    for (int u = 0; u < n; ++u)
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (v <= u || tree.count({ u, v }))
                continue;
            std::vector<int> left { u }, right { v };
            int a = u, b = v;
            while (a != b) {
                if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)]) {
                    a = parent[static_cast<std::size_t>(a)];
                    left.push_back(a);
                } else {
                    b = parent[static_cast<std::size_t>(b)];
                    right.push_back(b);
                }
            }
            right.pop_back();
            Cycle c = left;
            c.insert(c.end(), right.rbegin(), right.rend());
            out.push_back(canonical_cycle(std::move(c)));
        }
    return out;
}

struct EdacViolation {
    int condition = 0;
    int variable = -1;
    int value = -1;
    int neighbour = -1;
    std::string message;
};

struct EdacReport {
    bool consistent = true;
    std::vector<EdacViolation> violations;
};

/// Existential directional arc consistency of the active tuples of f with
/// respect to `order` (a permutation of the variables, earliest first).
inline EdacReport edac_check(const Structure& st, const WeightVector& f, const std::vector<int>& order)
{
    detail::require_binary(st, "edac_check");
    detail::require_unaries(st, "edac_check");
    check_weights(st, f);
    const std::size_t n = st.variable_count();
    if (order.size() != n)
        throw ModelError("edac_check: order must list every variable once");
    std::vector<int> rank(n, -1);
    for (std::size_t r = 0; r < n; ++r) {
        int v = order[r];
        if (v < 0 || static_cast<std::size_t>(v) >= n || rank[static_cast<std::size_t>(v)] >= 0)
            throw ModelError("edac_check: order must list every variable once");
        rank[static_cast<std::size_t>(v)] = static_cast<int>(r);
    }
    const CspInstance act = active_set(st, f);
    auto unary = [&](int var, int k) { return st.block_begin(*st.unary_scope(var)) + static_cast<std::size_t>(k); };
    auto supported = [&](int i, int k, ScopeIndex s, int j, bool full) {
        for (int l = 0; l < st.domain_size(j); ++l)
            if (act.contains(detail::edge_tuple(st, s, i, k, l)) && (!full || act.contains(unary(j, l))))
                return true;
        return false;
    };
    auto name = [&](int var, int k) { return st.describe(unary(var, k)); };

    EdacReport rep;
    auto add = [&](int cond, int i, int k, int j, std::string msg) {
        rep.consistent = false;
        rep.violations.push_back(EdacViolation { cond, i, k, j, std::move(msg) });
    };
    for (int i = 0; i < static_cast<int>(n); ++i) {
        bool any_full = false;
        for (int k = 0; k < st.domain_size(i); ++k) {
            bool all_full = act.contains(unary(i, k));
            for (ScopeIndex s : st.scopes_of(i)) {
                if (st.arity(s) != 2)
                    continue;
                int j = st.scope(s)[0] == i ? st.scope(s)[1] : st.scope(s)[0];
                bool full = supported(i, k, s, j, true);
                all_full = all_full && full;
                if (rank[static_cast<std::size_t>(i)] < rank[static_cast<std::size_t>(j)] && !full)
                    add(1, i, k, j, name(i, k) + " is not fully supported by variable " + std::to_string(j));
                if (rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(i)] && !supported(i, k, s, j, false))
                    add(2, i, k, j, name(i, k) + " is not simply supported by variable " + std::to_string(j));
            }
            any_full = any_full || all_full;
        }
        if (!any_full)
            add(3, i, -1, -1, "variable " + std::to_string(i) + " has no active value fully supported by all neighbours");
    }
    return rep;
}

inline EdacReport edac_check(const Structure& st, const WeightVector& f)
{
    std::vector<int> order(st.variable_count());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    return edac_check(st, f, order);
}

} // namespace wcspsr

#endif // WCSPSR_PROPAGATE_HPP
