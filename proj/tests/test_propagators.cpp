// SPDX-License-Identifier: MIT

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace wcspsr;
using namespace wcspsr::testing;

namespace {

// Checks every step of a trace against the live instance it was made for.
void expect_trace_sound(const Structure& st, const CspInstance& a0, const PropagationResult& res)
{
    CspInstance live = a0;
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
        DeactivatingCertificate c { res.trace[i].removed, res.trace[i].direction };
        EXPECT_TRUE(verify_certificate(st, live, c)) << "step " << i;
        live = live - TupleSet::of(st, c.removed);
    }
    EXPECT_EQ(live, res.closure);
    EXPECT_EQ(solutions(st, a0), solutions(st, res.closure));
    if (auto s = res.wiped_scope()) {
        EXPECT_FALSE(res.closure.intersects_scope(st, *s));
        auto cert = compose_trace(res.trace, chosen_indices(st, res.trace, *s));
        EXPECT_TRUE(verify_certificate(st, a0, cert));
        TupleSet q = TupleSet::of(st, cert.removed);
        EXPECT_TRUE((a0 - q).count_in_scope(st, *s) == 0);
    }
}

// Four variables on a cycle 0-1-2-3-0 with equalities on three edges and an
// inequality on the last: no assignment satisfies the cycle.
struct ParityCycle {
    Structure st;
    CspInstance a;
};

ParityCycle parity_cycle()
{
    Structure st({ 2, 2, 2, 2 }, { { 0 }, { 1 }, { 2 }, { 3 }, { 0, 1 }, { 1, 2 }, { 2, 3 }, { 0, 3 } });
    CspInstance a = CspInstance::all(st);
    for (auto vars : std::vector<std::vector<int>> { { 0, 1 }, { 1, 2 }, { 2, 3 } }) {
        a.erase(st.tuple_index(*st.find_scope(vars), std::vector<int> { 0, 1 }));
        a.erase(st.tuple_index(*st.find_scope(vars), std::vector<int> { 1, 0 }));
    }
    a.erase(st.tuple_index(*st.find_scope(std::vector<int> { 0, 3 }), std::vector<int> { 0, 0 }));
    a.erase(st.tuple_index(*st.find_scope(std::vector<int> { 0, 3 }), std::vector<int> { 1, 1 }));
    return { st, a };
}

Structure complete_graph(int n)
{
    std::vector<std::vector<int>> scopes;
    for (int v = 0; v < n; ++v)
        scopes.push_back({ v });
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            scopes.push_back({ a, b });
    return Structure(std::vector<int>(static_cast<std::size_t>(n), 2), scopes);
}

bool is_graph_cycle(const Structure& st, const Cycle& c)
{
    if (c.size() < 3 || std::set<int>(c.begin(), c.end()).size() != c.size())
        return false;
    for (std::size_t j = 0; j < c.size(); ++j) {
        std::vector<int> e { std::min(c[j], c[(j + 1) % c.size()]), std::max(c[j], c[(j + 1) % c.size()]) };
        if (!st.find_scope(e))
            return false;
    }
    return true;
}

} // namespace

TEST(AcStep, UnsupportedUnaryValueIsRemovedWithReparametrization)
{
    Structure st = pair_structure();
    CspInstance a = CspInstance::all(st);
    a.erase(4); // (a,a)
    a.erase(5); // (a,b)
    auto r = ac_step(st, a);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->removed, (TupleList { 0 }));
    EXPECT_EQ(r->witnesses, (TupleList { 4, 5 }));
    EXPECT_TRUE(in_orthogonal_space(st, r->direction));
    EXPECT_TRUE(verify_certificate(st, a, { r->removed, r->direction }));
}

TEST(AcStep, PairTuplesOverForbiddenValueUsePairSupportVector)
{
    Structure st = pair_structure();
    CspInstance a = CspInstance::all(st);
    a.erase(3); // ({1},b)
    auto r = ac_step(st, a);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->removed, (TupleList { 5, 7 }));
    EXPECT_EQ(r->direction.to_dense(st.tuple_count()), (std::vector<double> { 0, 0, 0, 1, 0, -1, 0, -1 }));
    EXPECT_TRUE(in_orthogonal_space(st, r->direction));
}

TEST(AcStep, ArcConsistentInstanceHasNoStep)
{
    Structure st = triangle_structure();
    EXPECT_FALSE(ac_step(st, CspInstance::all(st)));
    auto res = propagate(st, CspInstance::all(st), {});
    EXPECT_TRUE(res.trace.empty());
    EXPECT_FALSE(res.wiped_scope());
}

TEST(Propagate, WalkthroughArcConsistencyRemovalOrder)
{
    Structure st = triangle_structure();
    const CspInstance a = active_set(st, walk_f2());
    auto res = propagate(st, a, {});
    std::vector<TupleList> expect = {
        { tri(st, { 0, 1 }, { 0, 0 }) },
        { tri(st, { 1 }, { 0 }) },
        { tri(st, { 1, 2 }, { 0, 0 }) },
        { tri(st, { 2 }, { 0 }) },
        { tri(st, { 0, 2 }, { 0, 1 }) },
        { tri(st, { 2 }, { 1 }) },
    };
    ASSERT_EQ(res.trace.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        EXPECT_EQ(res.trace[i].removed, expect[i]) << "step " << i;
    ASSERT_TRUE(res.wiped_scope());
    EXPECT_EQ(*res.wiped_scope(), *st.unary_scope(2));
    for (const auto& step : res.trace.steps())
        EXPECT_TRUE(in_orthogonal_space(st, step.direction));
    expect_trace_sound(st, a, res);
}

TEST(SacStep, WalkthroughWitnessSet)
{
    Structure st = triangle_structure();
    const CspInstance a = active_set(st, walk_f3());
    ASSERT_FALSE(ac_step(st, a));
    auto r = sac_step(st, a);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->removed, (TupleList { tri(st, { 0 }, { 0 }) }));
    TupleList p = normalized({ tri(st, { 0, 2 }, { 0, 0 }), tri(st, { 1, 2 }, { 0, 1 }), tri(st, { 0, 1 }, { 0, 1 }) });
    EXPECT_EQ(r->witnesses, p);
    std::vector<double> expect(st.tuple_count(), 0.0);
    expect[tri(st, { 0 }, { 0 })] = -1.0;
    for (TupleIndex t : p)
        expect[t] = 1.0;
    EXPECT_EQ(r->direction.to_dense(st.tuple_count()), expect);
    EXPECT_TRUE(verify_certificate(st, a, { r->removed, r->direction }));
}

TEST(SacStep, ConsistentInstanceHasNoStep)
{
    Structure st = triangle_structure();
    EXPECT_FALSE(sac_step(st, CspInstance::all(st)));
}

TEST(SacStep, SatisfiableButNotSingletonConsistent)
{
    // On the active CSP of f4, x0=b forces x1=b and then x2=b, clashing with
    // the pair {0,2}. The CSP still has the solution (a,a,a).
    Structure st = triangle_structure();
    const CspInstance a = active_set(st, walk_f4());
    auto r = sac_step(st, a);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->removed, (TupleList { tri(st, { 0 }, { 1 }) }));
    EXPECT_TRUE(verify_certificate(st, a, { r->removed, r->direction }));
    PropagatorConfig cfg;
    cfg.mode = PropagatorMode::SAC;
    EXPECT_FALSE(propagate(st, a, cfg).wiped_scope());
}

TEST(Propagate, SingletonModeWipesOutWalkthroughActiveCsp)
{
    Structure st = triangle_structure();
    const CspInstance a = active_set(st, walk_f3());
    PropagatorConfig cfg;
    cfg.mode = PropagatorMode::SAC;
    auto res = propagate(st, a, cfg);
    ASSERT_TRUE(res.wiped_scope());
    expect_trace_sound(st, a, res);
}

TEST(CcStep, FullyAllowedTriangleIsConsistent)
{
    Structure st = triangle_structure();
    EXPECT_FALSE(cc_step(st, CspInstance::all(st), select_cycles(st)));
}

TEST(CcStep, InconsistentFourCycle)
{
    auto [st, a] = parity_cycle();
    ASSERT_FALSE(ac_step(st, a));
    auto cycles = select_cycles(st);
    ASSERT_EQ(cycles, (std::vector<Cycle> { { 0, 1, 2, 3 } }));
    auto r = cc_step(st, a, cycles);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->removed, (TupleList { 0 }));
    EXPECT_TRUE(verify_certificate(st, a, { r->removed, r->direction }));
    // Edge tuples at variable 0 only enter with value a.
    for (TupleIndex t : r->witnesses) {
        ScopeIndex s = st.scope_of(t);
        int pos = st.position_in_scope(s, 0);
        if (pos >= 0) {
            EXPECT_EQ(st.tuple_value(t, static_cast<std::size_t>(pos)), 0);
        }
    }

    PropagatorConfig cfg { PropagatorMode::CC, cycles };
    auto res = propagate(st, a, cfg);
    ASSERT_TRUE(res.wiped_scope());
    expect_trace_sound(st, a, res);
}

TEST(CcStep, RejectsNonBinaryStructure)
{
    Structure st({ 2, 2, 2 }, { { 0 }, { 1 }, { 2 }, { 0, 1, 2 } });
    EXPECT_THROW(cc_step(st, CspInstance::all(st), {}), ModelError);
    EXPECT_THROW(select_cycles(st), ModelError);
    PropagatorConfig cfg { PropagatorMode::CC, {} };
    EXPECT_THROW(propagate(triangle_structure(), CspInstance::all(triangle_structure()), cfg), ModelError);
}

TEST(SelectCycles, CompleteGraphOnFiveVertices)
{
    auto cycles = select_cycles(complete_graph(5));
    std::size_t tri_count = 0, quad_count = 0;
    std::set<Cycle> unique;
    for (const auto& c : cycles) {
        EXPECT_TRUE(is_graph_cycle(complete_graph(5), c));
        EXPECT_EQ(canonical_cycle(c), c);
        unique.insert(c);
        tri_count += c.size() == 3;
        quad_count += c.size() == 4;
    }
    EXPECT_EQ(tri_count, 10u);
    EXPECT_EQ(quad_count, 15u);
    EXPECT_EQ(unique.size(), cycles.size());
}

TEST(SelectCycles, MediumDensityGivesTrianglesOnly)
{
    // K8 has average degree 7.
    auto cycles = select_cycles(complete_graph(8));
    EXPECT_EQ(cycles.size(), 56u);
    for (const auto& c : cycles)
        EXPECT_EQ(c.size(), 3u);
}

TEST(SelectCycles, DenseGraphUsesFundamentalCycles)
{
    // K12 has average degree 11: 66 edges, 12 vertices.
    Structure st = complete_graph(12);
    auto cycles = select_cycles(st);
    EXPECT_EQ(cycles.size(), 66u - 12u + 1u);
    for (const auto& c : cycles)
        EXPECT_TRUE(is_graph_cycle(st, c));
}

TEST(SelectCycles, TreeAndEmptyGraphs)
{
    EXPECT_TRUE(select_cycles(Structure({ 2, 2 }, { { 0 }, { 1 } })).empty());
    EXPECT_TRUE(select_cycles(Structure({ 2, 2, 2 }, { { 0, 1 }, { 1, 2 } })).empty());
}

TEST(SelectCycles, SparseGraphWithoutShortCyclesFallsBack)
{
    // A single 6-cycle.
    std::vector<std::vector<int>> scopes;
    for (int v = 0; v < 6; ++v)
        scopes.push_back({ std::min(v, (v + 1) % 6), std::max(v, (v + 1) % 6) });
    std::sort(scopes.begin(), scopes.end());
    Structure st(std::vector<int>(6, 2), scopes);
    auto cycles = select_cycles(st);
    ASSERT_EQ(cycles.size(), 1u);
    EXPECT_EQ(cycles[0], (Cycle { 0, 1, 2, 3, 4, 5 }));
}

TEST(Edac, WalkthroughInitialWeightsViolateFullSupport)
{
    Structure st = triangle_structure();
    EdacReport rep = edac_check(st, walk_f1());
    EXPECT_FALSE(rep.consistent);
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.message == "({0},b) is not fully supported by variable 1") {
            found = true;
            EXPECT_EQ(v.condition, 1);
        }
    EXPECT_TRUE(found);
}

TEST(Edac, WalkthroughShiftedWeightsAreConsistent)
{
    EdacReport rep = edac_check(triangle_structure(), walk_f2());
    EXPECT_TRUE(rep.consistent);
    EXPECT_TRUE(rep.violations.empty());
}

TEST(Edac, ConstantWeightsAreConsistent)
{
    Structure st = triangle_structure();
    EXPECT_TRUE(edac_check(st, WeightVector(st.tuple_count(), 2.5)).consistent);
    EXPECT_THROW(edac_check(st, WeightVector(st.tuple_count()), { 0, 0, 1 }), ModelError);
}

class RandomPropagation : public ::testing::TestWithParam<PropagatorMode> {};

TEST_P(RandomPropagation, EveryStepIsCertified)
{
    std::mt19937_64 rng(41 + static_cast<int>(GetParam()));
    RandomOptions opt;
    opt.ternary_probability = GetParam() == PropagatorMode::CC ? 0.0 : 0.3;
    int wiped = 0;
    for (int rep = 0; rep < 150; ++rep) {
        auto inst = random_instance(rng, opt);
        const Structure& st = inst.structure;
        CspInstance a = random_csp(rng, st, 0.65);
        PropagatorConfig cfg { GetParam(), {} };
        if (GetParam() == PropagatorMode::CC) {
            cfg.cycles = select_cycles(st);
            if (cfg.cycles.empty())
                continue;
        }
        auto res = propagate(st, a, cfg);
        expect_trace_sound(st, a, res);
        wiped += res.wiped_scope().has_value();
        if (res.wiped_scope()) {
            EXPECT_FALSE(is_satisfiable(st, a));
        }
    }
    EXPECT_GT(wiped, 5);
}

INSTANTIATE_TEST_SUITE_P(Modes, RandomPropagation, ::testing::Values(PropagatorMode::AC, PropagatorMode::SAC, PropagatorMode::CC));
