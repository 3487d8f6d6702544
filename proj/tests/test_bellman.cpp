#include <gtest/gtest.h>

#include <cmath>

#include <omp.h>

#include "mtgl/bellman.hpp"
#include "mtgl/ops.hpp"
#include "mtgl/rng.hpp"

namespace mtgl {
namespace {

const std::vector<double> kRGrid{1, 2, 3, 4, 5, 6, 7, 8};

// E Sf / E f* straight from the tree, independent of the recursive evaluation.
double tree_ratio(const Martingale& f) {
    int N = f.t().depth();
    return square_function(f).expectation(N) / maximal(f).expectation(N);
}

TEST(Bellman, FunctionValues) {
    EXPECT_DOUBLE_EQ(bellman_U({0.5, 2.0, 1.0}), -0.25);
    EXPECT_DOUBLE_EQ(bellman_U({0.0, 4.0, 0.0}), 4.0);
    EXPECT_DOUBLE_EQ(bellman_U({1.0, 0.0, 2.0}, 2.0), -2.5);
    EXPECT_THROW(bellman_U({2.0, 0.0, 1.0}), std::invalid_argument);
    EXPECT_DOUBLE_EQ(bellman_V(0.0, 4.0, 1.0), -1.0);
}

TEST(Bellman, ConcavityResidualByHand) {
    // The maximum is unchanged, so the step is exact.
    EXPECT_NEAR(concavity_residual(0.5, 0.2, 1.0, 1.0), 0.0, 1e-15);
    // x + h = 1.5 raises the maximum: residual 7/12.
    EXPECT_NEAR(concavity_residual(0.5, 1.0, 1.0, 1.0), 7.0 / 12.0, 1e-14);
}

TEST(Concavity, HoldsOnStandardGridAtThree) {
    omp_set_num_threads(4);
    auto grid = ConcavityGrid::standard();
    EXPECT_EQ(grid.size(), 100293u);
    auto scan = concavity_check(grid);
    EXPECT_EQ(scan.points, grid.size());
    EXPECT_GE(scan.min_residual, -1e-12);
    EXPECT_EQ(scan.negative, 0u);
    EXPECT_FALSE(scan.counterexample);
}

TEST(Concavity, FailsBelowThree) {
    omp_set_num_threads(4);
    auto scan = concavity_check(ConcavityGrid::standard(), 2.9);
    ASSERT_TRUE(scan.counterexample);
    EXPECT_LT(scan.min_residual, -0.1);
    const auto& c = *scan.counterexample;
    EXPECT_NEAR(concavity_residual(c.x, c.h, c.y, c.m, 2.9), c.residual, 1e-15);
    auto j = c.to_json();
    for (const char* k : {"gamma", "x", "h", "y", "m", "residual"}) EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Concavity, SerialMatchesParallel) {
    omp_set_num_threads(4);
    auto grid = ConcavityGrid::standard();
    auto a = concavity_check(grid, 2.9, 1e-12, Exec::Serial);
    auto b = concavity_check(grid, 2.9, 1e-12, Exec::Parallel);
    EXPECT_EQ(a.min_residual, b.min_residual);
    EXPECT_EQ(a.negative, b.negative);
    EXPECT_EQ(a.argmin.to_json().dump(), b.argmin.to_json().dump());
}

TEST(Pathwise, HandExampleAndZeroPath) {
    std::vector<double> p{0.0, 1.0, -1.0};
    auto r = pathwise_sharp_check(p);
    EXPECT_DOUBLE_EQ(r.lhs, 5.0);
    EXPECT_DOUBLE_EQ(r.rhs, 7.0);
    std::vector<double> z{0.0, 0.0, 0.0};
    auto rz = pathwise_sharp_check(z);
    EXPECT_EQ(rz.lhs, 0.0);
    EXPECT_EQ(rz.rhs, 0.0);
    EXPECT_THROW(pathwise_sharp_check(std::vector<double>{}), std::invalid_argument);
}

TEST(Pathwise, HoldsOnRandomPaths) {
    Rng rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> p(1 + rng.below(20));
        p[0] = trial % 3 == 0 ? 0.0 : rng.normal();
        for (std::size_t k = 1; k < p.size(); ++k) p[k] = p[k - 1] + (rng.coin() ? rng.normal() : 0.0);
        auto r = pathwise_sharp_check(p);
        EXPECT_LE(r.lhs, r.rhs * (1.0 + 1e-12) + 1e-12);
    }
}

TEST(SharpDavis, BellmanExpectationNeverIncreases) {
    CorpusSpec spec;
    spec.trials = 200;
    Corpus c(spec);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LE(bellman_step_increase(c.member(i)), 1e-9);
}

TEST(SharpDavis, NoViolationsOnMixedCorpus) {
    omp_set_num_threads(4);
    CorpusSpec spec;
    spec.trials = 500;
    auto rep = sharp_davis_check(Corpus(spec));
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_DOUBLE_EQ(rep.constant_used, std::sqrt(3.0));
    EXPECT_LE(rep.measurements["Sf_over_fstar"].get<double>(), std::sqrt(3.0) + 1e-9);
}

TEST(Extremal, TreeIsMartingaleAndMatchesRecursion) {
    for (int depth : {1, 2, 3, 5})
        for (double r : {1.0, 3.0, 8.0}) {
            auto f = extremal_tree(depth, r);
            auto rec = extremal_search(depth, {r});
            EXPECT_NEAR(tree_ratio(f), rec.best_ratio, 1e-12) << depth << " " << r;
        }
}

TEST(Extremal, DepthTwoClosedForm) {
    for (double r : kRGrid) {
        double want = (r * std::sqrt(2.0) + std::sqrt(1.0 + r * r)) / (2.0 * r + 1.0);
        EXPECT_NEAR(extremal_search(2, {r}).best_ratio, want, 1e-14);
    }
}

TEST(Extremal, FrozenValuesAndMonotoneInDepth) {
    const std::vector<std::pair<int, double>> frozen{
        {1, 1.0}, {2, 1.13976272042843}, {3, 1.305875594135269}, {8, 1.407164656808851}, {12, 1.413770113643563}};
    for (auto [d, v] : frozen) EXPECT_NEAR(extremal_search(d, kRGrid).best_ratio, v, 1e-12) << d;
    double prev = 0.0;
    for (int d = 1; d <= kMaxExtremalDepth; ++d) {
        double v = extremal_search(d, kRGrid).best_ratio;
        EXPECT_GE(v, prev - 1e-15);
        EXPECT_LE(v, std::sqrt(3.0));
        prev = v;
    }
    EXPECT_THROW(extremal_search(0, kRGrid), std::invalid_argument);
    EXPECT_THROW(extremal_search(kMaxExtremalDepth + 1, kRGrid), std::invalid_argument);
    EXPECT_THROW(extremal_tree(2, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace mtgl
