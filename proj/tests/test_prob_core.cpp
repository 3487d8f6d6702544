#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mtgl/generators.hpp"
#include "mtgl/norms.hpp"
#include "mtgl/rng.hpp"
#include "mtgl/serialize.hpp"
#include "mtgl/tree.hpp"
#include "mtgl/variation.hpp"

namespace mtgl {
namespace {

TEST(FiltrationTree, BreadthFirstLayout) {
    // Root with 3 children; the middle child has 2 children, the others 1.
    FiltrationTree t(2, {3, 1, 2, 1}, {0.2, 0.1, 0.3, 0.4});
    EXPECT_EQ(t.node_count(), 8u);
    EXPECT_EQ(t.level_size(1), 3u);
    EXPECT_EQ(t.leaf_count(), 4u);
    EXPECT_EQ(t.first_child(2), 5u);
    EXPECT_EQ(t.parent(6), 2u);
    EXPECT_NEAR(t.prob(2), 0.4, 1e-15);
    EXPECT_NEAR(t.prob(0), 1.0, 1e-15);
    EXPECT_EQ(t.ancestor(7, 1), 3u);
    auto p = t.path(2);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0], 0u);
    EXPECT_EQ(p[1], 2u);
    EXPECT_EQ(p[2], 6u);
}

TEST(FiltrationTree, RejectsBadShapes) {
    EXPECT_THROW(FiltrationTree(1, {2}, {0.5}), std::invalid_argument);
    EXPECT_THROW(FiltrationTree(1, {2, 1}, {0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(FiltrationTree(1, {2}, {0.7, 0.7}), std::invalid_argument);
    EXPECT_THROW(FiltrationTree(-1, {}, {1.0}), std::invalid_argument);
}

TEST(ConditionalExpectation, TowerProperty) {
    Rng rng(7);
    auto tree = random_tree(5, 3, rng);
    std::vector<double> leaf(tree->leaf_count());
    for (auto& x : leaf) x = rng.normal();
    auto f = backprop(tree, leaf);
    for (int n = 0; n <= tree->depth(); ++n) {
        auto ce = conditional_expectation(*tree, leaf, n);
        for (std::size_t v = tree->level_begin(n); v < tree->level_end(n); ++v)
            EXPECT_NEAR(ce[v - tree->level_begin(n)], f[v], 1e-12);
        EXPECT_NEAR(f.expectation(n), f[0], 1e-12);
    }
    EXPECT_TRUE(f.is_martingale());
}

TEST(Martingale, RejectsBrokenAveraging) {
    auto tree = FiltrationTree::uniform(1, 2);
    EXPECT_THROW(Martingale(tree, {10.0, 0.0, 0.0}), std::invalid_argument);
    EXPECT_NO_THROW(Martingale(tree, {1.0, 2.0, 0.0}));
}

TEST(Generators, AllProduceMartingales) {
    for (int d = 0; d <= 7; ++d)
        for (std::uint64_t s = 0; s < 20; ++s)
            for (int k = 0; k < 5; ++k) {
                EXPECT_NO_THROW(gen_leaf_backprop(static_cast<Dist>(k), d, s));
                EXPECT_NO_THROW(gen_increment(d, s, static_cast<Dist>(k), 2));
            }
    EXPECT_TRUE(gen_family(8, 4, 3).is_martingale());
    EXPECT_TRUE(gen_log_weight(8).is_martingale());
}

TEST(Generators, DoublingValues) {
    auto f = gen_doubling(4);
    const auto& t = f.t();
    for (int n = 0; n <= 4; ++n) {
        EXPECT_EQ(f[t.level_begin(n)], std::ldexp(1.0, n));
        for (std::size_t v = t.level_begin(n) + 1; v < t.level_end(n); ++v) EXPECT_EQ(f[v], 0.0);
    }
}

TEST(Generators, ScaledWalkHasUnitQuadraticVariation) {
    auto f = gen_scaled_walk(10);
    auto leaf = f.leaf_values();
    std::vector<double> probs;
    for (std::size_t l = 0; l < f.t().leaf_count(); ++l) probs.push_back(f.t().leaf_prob(l));
    EXPECT_NEAR(moment(leaf, probs, 2.0), 1.0, 1e-12);
}

TEST(Generators, DeterministicBySeed) {
    auto a = gen_leaf_backprop(Dist::Gaussian, 6, 42);
    auto b = gen_leaf_backprop(Dist::Gaussian, 6, 42);
    auto c = gen_leaf_backprop(Dist::Gaussian, 6, 43);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_NE(a.values(), c.values());
}

TEST(Rng, SplitStreamsAreReproducible) {
    Rng a(1), b(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
    Rng s1 = Rng(5).split(3), s2 = Rng(5).split(3), s3 = Rng(5).split(4);
    EXPECT_EQ(s1.next(), s2.next());
    EXPECT_NE(Rng(5).split(3).next(), s3.next());
    Rng u(9);
    for (int i = 0; i < 1000; ++i) {
        double x = u.uniform();
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        int k = u.below(7);
        EXPECT_GE(k, 0);
        EXPECT_LT(k, 7);
    }
}

TEST(StoppingRule, HittingTimeAndOptionalSampling) {
    auto f = gen_walk(6);
    auto tau = hitting_time(f, [](double x) { return std::abs(x) >= 2.0; });
    auto capped = tau.min(StoppingRule::constant(f.tree(), 6));
    EXPECT_TRUE(capped.bounded());
    for (std::size_t l = 0; l < f.t().leaf_count(); ++l) {
        int t = capped.tau(l);
        auto path = f.path_values(l);
        if (t < 6) EXPECT_GE(std::abs(path[t]), 2.0);
        for (int k = 0; k < t; ++k) EXPECT_LT(std::abs(path[k]), 2.0);
    }
    auto stopped = stop_process(f, capped);
    EXPECT_TRUE(stopped.is_martingale());
    EXPECT_TRUE(optional_sampling_check(f, StoppingRule::constant(f.tree(), 2), capped.max(StoppingRule::constant(f.tree(), 2))));
}

TEST(Norms, LpAndRatio) {
    std::vector<double> x{1.0, -2.0, 3.0}, p{0.5, 0.25, 0.25};
    EXPECT_NEAR(expectation(x, p), 0.5 - 0.5 + 0.75, 1e-15);
    EXPECT_NEAR(lp_norm(x, p, 2.0), std::sqrt(0.5 + 1.0 + 2.25), 1e-14);
    EXPECT_EQ(lp_norm(x, p, kInf), 3.0);
    EXPECT_NEAR(bound_ratio(1.0, 2.0), 0.5, 1e-9);
    EXPECT_EQ(bound_ratio(0.0, 0.0), 0.0);
    EXPECT_FALSE(violates(1.0 + 1e-10));
    EXPECT_TRUE(violates(1.0 + 1e-8));
}

TEST(Norms, LevelScanCoversEveryBreakpoint) {
    std::vector<double> x{0.0, 1.0, 1.0, 3.0};
    auto levels = level_scan(x);
    // lambda below the smallest positive value, both sides of 1 and 3, midpoint 2.
    ASSERT_EQ(levels.size(), 6u);
    EXPECT_EQ(levels.front().lambda, 0.5);
    std::vector<double> w{0.25, 0.25, 0.25, 0.25};
    TailSums sums(x, {w});
    EXPECT_NEAR(sums.tail({1.0, true}, 0), 0.75, 1e-15);
    EXPECT_NEAR(sums.tail({1.0, false}, 0), 0.25, 1e-15);
    EXPECT_NEAR(sums.head({1.0, false}, 0), 0.75, 1e-15);
}

TEST(Serialize, RoundTripIsBitIdentical) {
    auto f = gen_leaf_backprop(Dist::Lognormal, 5, 11);
    TreeBundle b{f.tree(), {{"f", f}}};
    auto text = to_json(b).dump();
    auto back = bundle_from_json(nlohmann::json::parse(text));
    const auto& g = back.processes.at("f");
    EXPECT_EQ(g.values(), f.values());
    EXPECT_EQ(back.tree->leaf_probs(), f.t().leaf_probs());
    EXPECT_EQ(to_json(back).dump(), text);
}

TEST(Serialize, RejectsMalformedBundles) {
    nlohmann::json j = {{"depth", 1}, {"leaf_probs", {0.5, 0.5}}, {"processes", {{"f", {0.0, 1.0}}}}};
    EXPECT_ANY_THROW(bundle_from_json(j));
}

}  // namespace
}  // namespace mtgl
