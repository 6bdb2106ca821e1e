// SPDX-License-Identifier: MIT

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace wcspsr;
using namespace wcspsr::testing;

namespace {

// Independent enumeration: filter all assignments.
SolutionSet naive_solutions(const Structure& st, const CspInstance& a)
{
    SolutionSet out;
    for_each_assignment(st, [&](const Assignment& x) {
        if (is_solution(st, a, x))
            out.push_back(x);
    });
    return out;
}

} // namespace

TEST(CspKernel, FullInstanceHasAllAssignments)
{
    Structure st = triangle_structure();
    EXPECT_EQ(solutions(st, CspInstance::all(st)).size(), 8u);
    EXPECT_TRUE(is_satisfiable(st, CspInstance::all(st)));
}

TEST(CspKernel, EmptyScopeMeansUnsatisfiable)
{
    Structure st = triangle_structure();
    CspInstance a = CspInstance::all(st);
    a.erase(0);
    a.erase(1);
    EXPECT_FALSE(is_satisfiable(st, a));
    EXPECT_TRUE(solutions(st, a).empty());
}

TEST(CspKernel, SolutionsMatchNaiveFilter)
{
    std::mt19937_64 rng(17);
    RandomOptions opt;
    opt.ternary_probability = 0.3;
    for (int rep = 0; rep < 100; ++rep) {
        auto inst = random_instance(rng, opt);
        CspInstance a = random_csp(rng, inst.structure, 0.7);
        SolutionSet got = solutions(inst.structure, a);
        EXPECT_EQ(got, naive_solutions(inst.structure, a));
        EXPECT_EQ(is_satisfiable(inst.structure, a), !got.empty());
    }
}

TEST(CspKernel, RestrictionKeepsOnlyOneValue)
{
    Structure st = triangle_structure();
    CspInstance r = restrict_csp(st, CspInstance::all(st), 1, 0);
    SolutionSet sol = solutions(st, r);
    ASSERT_EQ(sol.size(), 4u);
    for (const auto& x : sol)
        EXPECT_EQ(x[1], 0);
    EXPECT_THROW(restrict_csp(st, r, 1, 2), ModelError);
    Structure no_unary({ 2, 2 }, { { 0, 1 } });
    EXPECT_THROW(restrict_csp(no_unary, CspInstance::all(no_unary), 0, 0), ModelError);
}

TEST(CspKernel, MinimalCspOfSingleAssignment)
{
    Structure st = triangle_structure();
    CspInstance a = minimal_csp(st, { { 0, 0, 0 } });
    EXPECT_EQ(a.size(), st.scope_count());
    EXPECT_EQ(solutions(st, a), (SolutionSet { { 0, 0, 0 } }));
    EXPECT_TRUE(minimal_csp(st, {}).empty());
}

TEST(CspKernel, ClosureIsSmallestWithSameSolutions)
{
    std::mt19937_64 rng(23);
    RandomOptions opt;
    opt.ternary_probability = 0.3;
    for (int rep = 0; rep < 100; ++rep) {
        auto inst = random_instance(rng, opt);
        const Structure& st = inst.structure;
        CspInstance a = random_csp(rng, st, 0.75);
        CspInstance c = positive_consistency_closure(st, a);
        EXPECT_TRUE(c.subset_of(a));
        EXPECT_EQ(solutions(st, c), solutions(st, a));
        // Removing any tuple of the closure loses a solution.
        for (TupleIndex t : c.members()) {
            CspInstance smaller = c;
            smaller.erase(t);
            EXPECT_LT(solutions(st, smaller).size(), solutions(st, c).size());
        }
    }
}

TEST(CspKernel, MinimalCspAndSolutionsFormGaloisConnection)
{
    // Every CSP over two binary variables against every assignment set.
    Structure st = pair_structure();
    std::vector<Assignment> all;
    for_each_assignment(st, [&](const Assignment& x) { all.push_back(x); });
    for (unsigned amask = 0; amask < (1u << st.tuple_count()); ++amask) {
        CspInstance a(st.tuple_count());
        for (TupleIndex t = 0; t < st.tuple_count(); ++t)
            if (amask >> t & 1u)
                a.insert(t);
        SolutionSet sol = solutions(st, a);
        for (unsigned xmask = 0; xmask < (1u << all.size()); ++xmask) {
            SolutionSet xs;
            for (std::size_t i = 0; i < all.size(); ++i)
                if (xmask >> i & 1u)
                    xs.push_back(all[i]);
            EXPECT_EQ(minimal_csp(st, xs).subset_of(a), solution_subset(xs, sol));
        }
    }
}
