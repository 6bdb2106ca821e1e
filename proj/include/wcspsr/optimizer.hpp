// SPDX-License-Identifier: MIT
//
// Iterative upper-bound minimisation by super-reparametrizations.
//
// Each iteration propagates on the (theta-)active tuples of f. When a scope is
// wiped out, the trace is composed into one deactivating direction d* and f is
// moved along d* with the step of the line search below, which strictly
// lowers B(f) while keeping f a super-reparametrization of the input.

#ifndef WCSPSR_OPTIMIZER_HPP
#define WCSPSR_OPTIMIZER_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "directions.hpp"
#include "propagate.hpp"
#include "weights.hpp"

namespace wcspsr {

enum class SolverMode { VAC, VSAC_SR, VCC_SR };

inline const char* to_string(SolverMode m)
{
    switch (m) {
    case SolverMode::VAC:
        return "vac";
    case SolverMode::VSAC_SR:
        return "vsac-sr";
    case SolverMode::VCC_SR:
        return "vcc-sr";
    }
    return "?";
}

struct LineSearchResult {
    double beta = kPosInf;
    double gamma = kPosInf;
    double alpha() const { return std::min(beta, gamma); }
};

/// Scopes S whose tuples in A all lie in R.
inline std::vector<ScopeIndex> wiped_scopes(const Structure& st, const CspInstance& a, const TupleList& removed)
{
    TupleSet r = TupleSet::of(st, removed);
    std::vector<ScopeIndex> out;
    for (ScopeIndex s = 0; s < st.scope_count(); ++s) {
        bool wiped = true;
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s) && wiped; ++t)
            if (a.contains(t) && !r.contains(t))
                wiped = false;
        if (wiped)
            out.push_back(s);
    }
    return out;
}

/// beta bounds the step before a tuple with positive direction reaches the
/// maximum of its scope; gamma bounds it before, in a wiped scope, a tuple
/// outside R overtakes a tuple of R. Empty minimands give +infinity.
inline LineSearchResult line_search(const Structure& st, const WeightVector& f, const DeactivatingCertificate& cert, const CspInstance& a)
{
    check_weights(st, f);
    LineSearchResult res;
    for (const auto& [t, d] : cert.direction) {
        if (d <= 0.0)
            continue;
        double m = scope_max(st, f, st.scope_of(t));
        res.beta = std::min(res.beta, (m - f[t]) / d);
    }
    TupleSet r = TupleSet::of(st, cert.removed);
    for (ScopeIndex s : wiped_scopes(st, a, cert.removed)) {
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t) {
            if (!r.contains(t))
                continue;
            const double dt = cert.direction[t];
            for (TupleIndex u = st.block_begin(s); u < st.block_end(s); ++u) {
                if (r.contains(u))
                    continue;
                const double du = cert.direction[u];
                if (du > dt)
                    res.gamma = std::min(res.gamma, (f[t] - f[u]) / (du - dt));
            }
        }
    }
    return res;
}

/// f + alpha d; minus-infinite entries stay minus infinity.
inline WeightVector apply_step(const Structure& st, const WeightVector& f, const Direction& d, double alpha)
{
    check_weights(st, f);
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ModelError("apply_step: step size must be finite and positive");
    WeightVector out = f;
    for (const auto& [t, v] : d)
        if (!is_neg_inf(out[t]))
            out[t] += alpha * v;
    return out;
}

/// Everything known about one improving step, passed to observers.
struct StepRecord {
    double theta = 0.0;
    const WeightVector* before = nullptr;
    const WeightVector* after = nullptr;
    const CspInstance* active = nullptr;
    const PropagationResult* propagation = nullptr;
    const DeactivatingCertificate* certificate = nullptr;
    LineSearchResult step;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct SolverConfig {
    SolverMode mode = SolverMode::VAC;
    std::optional<double> theta_init; // computed from the instance when empty
    double theta_factor = 10.0;
    double theta_min = 1e-6;
    int stall_window = 20;
    double stall_epsilon = 1e-15;
    long max_iterations = 1000000;
    double time_limit_s = 0.0; // 0 disables the limit
    // Activity tolerance of the last phase, relative to the largest weight.
    double final_tolerance = 1e-12;
    long final_phase_iterations = 1000;
    bool vac_prepass = true; // singleton and cycle modes only
    std::vector<Cycle> cycles; // cycle mode only; selected automatically when empty
    StepObserver observer;

    void validate() const
    {
        if (!(theta_factor > 1.0))
            throw ModelError("theta factor must exceed 1");
        if (!(theta_min > 0.0))
            throw ModelError("theta minimum must be positive");
        if (stall_window < 1)
            throw ModelError("stall window must be at least 1");
        if (final_phase_iterations < 0)
            throw ModelError("final phase iteration budget must be non-negative");
        if (!(final_tolerance >= 0.0))
            throw ModelError("final activity tolerance must be non-negative");
        if (theta_init && !(*theta_init >= 0.0))
            throw ModelError("theta initial value must be non-negative");
    }
};

enum class ImproveStatus { Improved, Fixpoint, Unbounded };

struct ImproveOutcome {
    ImproveStatus status = ImproveStatus::Fixpoint;
    WeightVector weights;
    DeactivatingCertificate certificate;
    LineSearchResult step;
};

inline PropagatorConfig propagator_for(const Structure& st, SolverMode mode, const std::vector<Cycle>& cycles)
{
    PropagatorConfig pc;
    switch (mode) {
    case SolverMode::VAC:
        pc.mode = PropagatorMode::AC;
        break;
    case SolverMode::VSAC_SR:
        pc.mode = PropagatorMode::SAC;
        break;
    case SolverMode::VCC_SR:
        pc.cycles = cycles.empty() ? select_cycles(st) : cycles;
        pc.mode = pc.cycles.empty() ? PropagatorMode::AC : PropagatorMode::CC;
        break;
    }
    return pc;
}

/// One iteration on the theta-active tuples of f.
inline ImproveOutcome improve_once(const Structure& st, const WeightVector& f, const PropagatorConfig& pc, double theta = 0.0,
    const StepObserver& observer = {}, double tolerance = kActivityTolerance)
{
    check_weights(st, f);
    ImproveOutcome out;
    if (!has_finite_weight_per_scope(st, f)) {
        out.status = ImproveStatus::Unbounded;
        out.weights = f;
        return out;
    }
    const CspInstance a = theta_active_set(st, f, theta, tolerance);
    PropagationResult prop = propagate(st, a, pc);
    if (!prop.wiped_scope()) {
        out.status = ImproveStatus::Fixpoint;
        out.weights = f;
        return out;
    }
    out.certificate = compose_trace(prop.trace, chosen_indices(st, prop.trace, *prop.wiped_scope()));
    out.step = line_search(st, f, out.certificate, a);
    const double alpha = out.step.alpha();
    if (std::isinf(alpha)) {
        out.status = ImproveStatus::Unbounded;
        out.weights = f;
        return out;
    }
    out.status = ImproveStatus::Improved;
    out.weights = apply_step(st, f, out.certificate.direction, alpha);
    if (observer) {
        StepRecord rec;
        rec.theta = theta;
        rec.before = &f;
        rec.after = &out.weights;
        rec.active = &a;
        rec.propagation = &prop;
        rec.certificate = &out.certificate;
        rec.step = out.step;
        observer(rec);
    }
    return out;
}

inline std::optional<WeightVector> improve_once(const Structure& st, const WeightVector& f, SolverMode mode, double theta = 0.0)
{
    auto res = improve_once(st, f, propagator_for(st, mode, {}), theta);
    if (res.status == ImproveStatus::Unbounded)
        throw std::domain_error("improve_once: unbounded step, the instance is infeasible");
    if (res.status == ImproveStatus::Fixpoint)
        return std::nullopt;
    return res.weights;
}

/// Range of the lowest-index binary scope plus range of the unary weights of
/// the lowest-index variable, over finite weights.
inline double auto_theta(const Structure& st, const WeightVector& g)
{
    auto range = [&](ScopeIndex s) {
        double lo = kPosInf, hi = kNegInf;
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t)
            if (std::isfinite(g[t])) {
                lo = std::min(lo, g[t]);
                hi = std::max(hi, g[t]);
            }
        return hi >= lo ? hi - lo : 0.0;
    };
    double theta = 0.0;
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        if (st.arity(s) == 2) {
            theta += range(s);
            break;
        }
    if (st.variable_count() > 0)
        if (auto u = st.unary_scope(0))
            theta += range(*u);
    return theta;
}

enum class Termination { Converged, Infeasible, IterationLimit, TimeLimit };

inline const char* to_string(Termination t)
{
    switch (t) {
    case Termination::Converged:
        return "converged";
    case Termination::Infeasible:
        return "infeasible";
    case Termination::IterationLimit:
        return "iteration-limit";
    case Termination::TimeLimit:
        return "time-limit";
    }
    return "?";
}

struct IterationLog {
    long iteration = 0;
    double bound = 0.0;
    double theta = 0.0;
    double alpha = 0.0;
    std::size_t certificate_nnz = 0;
    double elapsed_s = 0.0;
};

struct SolverReport {
    double bound = kPosInf;
    WeightVector weights;
    std::vector<IterationLog> log;
    Termination termination = Termination::Converged;
    long iterations = 0;
    long prepass_iterations = 0; // leading log entries produced by the arc consistency stage

    bool partial() const { return termination == Termination::IterationLimit || termination == Termination::TimeLimit; }
};

namespace detail {

using Clock = std::chrono::steady_clock;

/// Capacity-scaled loop continuing from rep.weights. Theta starts at the
/// configured or automatic value and is divided by theta_factor at every
/// fixpoint and on stalls until it drops to theta_min; a last phase then runs
/// on the active tuples with a tighter activity tolerance.
inline void scaled_loop(const Structure& st, const PropagatorConfig& pc, const SolverConfig& cfg, SolverReport& rep, Clock::time_point start)
{
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
    double theta = cfg.theta_init.value_or(auto_theta(st, rep.weights));
    bool final_phase = !(theta > cfg.theta_min);
    if (final_phase)
        theta = 0.0;
    std::vector<double> phase_bounds { rep.bound };

    auto next_phase = [&]() {
        if (final_phase)
            return false;
        theta /= cfg.theta_factor;
        if (!(theta > cfg.theta_min)) {
            theta = 0.0;
            final_phase = true;
        }
        phase_bounds.assign(1, rep.bound);
        return true;
    };

    rep.termination = Termination::Converged;
    while (true) {
        if (rep.iterations >= cfg.max_iterations) {
            rep.termination = Termination::IterationLimit;
            return;
        }
        if (cfg.time_limit_s > 0.0 && elapsed() >= cfg.time_limit_s) {
            rep.termination = Termination::TimeLimit;
            return;
        }
        const double tol = final_phase ? cfg.final_tolerance * weight_magnitude(rep.weights) : kActivityTolerance;
        ImproveOutcome step = improve_once(st, rep.weights, pc, theta, cfg.observer, tol);
        if (step.status == ImproveStatus::Unbounded) {
            rep.bound = kNegInf;
            rep.termination = Termination::Infeasible;
            return;
        }
        bool advanced = false;
        if (step.status == ImproveStatus::Improved) {
            const double nb = upper_bound(st, step.weights);
            if (nb < rep.bound) {
                rep.weights = std::move(step.weights);
                rep.bound = nb;
                ++rep.iterations;
                rep.log.push_back(IterationLog { rep.iterations, nb, theta, step.step.alpha(), step.certificate.direction.nnz(), elapsed() });
                phase_bounds.push_back(nb);
                advanced = true;
            }
        }
        if (advanced) {
            const std::size_t w = static_cast<std::size_t>(cfg.stall_window);
            // Exact-tie propagation can creep towards its fixpoint for a very
            // long time, so the last phase also has an iteration budget.
            const bool budget_spent = final_phase && static_cast<long>(phase_bounds.size()) > cfg.final_phase_iterations;
            if (budget_spent || (phase_bounds.size() > w && phase_bounds[phase_bounds.size() - 1 - w] - phase_bounds.back() < cfg.stall_epsilon)) {
                if (!next_phase())
                    return;
            }
            continue;
        }
        // Fixpoint at this theta, or a step that failed to lower the bound in
        // floating point.
        if (!next_phase())
            return;
    }
}

} // namespace detail

/// Runs the scaled loop for the configured mode. The singleton and cycle
/// modes first bring the weights to a virtual arc consistent state by
/// reparametrization, sharing the iteration and time budgets.
inline SolverReport solve(const Structure& st, const WeightVector& g, const SolverConfig& cfg)
{
    cfg.validate();
    check_weights(st, g);
    const auto start = detail::Clock::now();
    SolverReport rep;
    rep.weights = g;
    rep.bound = upper_bound(st, g);
    if (!has_finite_weight_per_scope(st, g)) {
        rep.bound = kNegInf;
        rep.termination = Termination::Infeasible;
        return rep;
    }
    if (cfg.vac_prepass && cfg.mode != SolverMode::VAC) {
        detail::scaled_loop(st, propagator_for(st, SolverMode::VAC, {}), cfg, rep, start);
        rep.prepass_iterations = rep.iterations;
        if (rep.termination != Termination::Converged)
            return rep;
    }
    detail::scaled_loop(st, propagator_for(st, cfg.mode, cfg.cycles), cfg, rep, start);
    return rep;
}

/// Virtual arc consistency by reparametrization only.
inline WeightVector vac_prepass(const Structure& st, const WeightVector& g, SolverConfig cfg = {})
{
    cfg.mode = SolverMode::VAC;
    return solve(st, g, cfg).weights;
}

} // namespace wcspsr

#endif // WCSPSR_OPTIMIZER_HPP
