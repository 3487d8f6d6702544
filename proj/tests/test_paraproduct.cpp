#include <gtest/gtest.h>

#include <cmath>

#include "mtgl/checks.hpp"
#include "mtgl/generators.hpp"
#include "mtgl/paraproduct.hpp"

namespace mtgl {
namespace {

TEST(Paraproduct, ZeroIntegrandGivesZero) {
    auto g = gen_leaf_backprop(Dist::Gaussian, 4, 1);
    TwoParamProcess zero(g.tree(), std::vector<double>(TwoParamProcess::storage_size(g.t()), 0.0));
    for (std::size_t l = 0; l < g.t().leaf_count(); ++l) EXPECT_EQ(paraproduct(zero, g, l, 0, 4), 0.0);
}

TEST(Paraproduct, DiscreteIntegralOfFAgainstItself) {
    auto f = gen_leaf_backprop(Dist::Uniform, 6, 4);
    for (std::size_t l = 0; l < f.t().leaf_count(); ++l) {
        auto p = f.path_values(l);
        double qv = 0.0;
        for (std::size_t j = 1; j < p.size(); ++j) qv += (p[j] - p[j - 1]) * (p[j] - p[j - 1]);
        double n = static_cast<double>(p.size() - 1);
        double expect = 0.5 * (p.back() * p.back() - p[0] * p[0] - qv) - p[0] * (p.back() - p[0]);
        EXPECT_NEAR(paraproduct_deltaf(f, f, l, 0, static_cast<int>(n)), expect, 1e-12);
    }
}

TEST(Paraproduct, DeltaFormMatchesTwoParameterForm) {
    auto f = gen_leaf_backprop(Dist::Gaussian, 5, 8);
    auto F = TwoParamProcess::delta(f);
    for (std::size_t l = 0; l < f.t().leaf_count(); ++l)
        for (int s = 0; s <= 5; ++s)
            for (int t = s; t <= 5; ++t)
                EXPECT_NEAR(paraproduct(F, f, l, s, t), paraproduct_deltaf(f, f, l, s, t), 1e-13);
}

TEST(Paraproduct, ChenRelationOnPathMatrix) {
    Rng rng(12);
    std::vector<double> f(9), g(9);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = rng.normal();
        g[i] = rng.normal();
    }
    auto pi = paraproduct_matrix(f, g);
    for (std::size_t s = 0; s < 9; ++s)
        for (std::size_t t = s; t < 9; ++t)
            for (std::size_t u = t; u < 9; ++u)
                EXPECT_NEAR(pi(s, u) - pi(s, t) - pi(t, u), (f[t] - f[s]) * (g[u] - g[t]), 1e-12);
}

TEST(Paraproduct, ProcessIsMartingaleInT) {
    auto f = gen_leaf_backprop(Dist::Exponential, 5, 2);
    auto F = TwoParamProcess::delta(f);
    for (int s = 0; s < 5; ++s) EXPECT_TRUE(paraproduct_process(F, f, s).is_martingale(1e-9));
}

TEST(Paraproduct, ChainBoundHolds) {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> f(12), g(12);
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = rng.normal();
            g[i] = rng.normal();
        }
        auto cb = paraproduct_chain_bound(paraproduct_matrix(f, g), 3.0, 2.0);
        EXPECT_LE(cb.lhs, cb.rhs * (1.0 + 1e-9) + 1e-12);
    }
}

TEST(ParaproductCheck, RunsOnFamiliesWithFiniteRatios) {
    CorpusSpec spec;
    spec.generator = "family";
    spec.family = 2;
    spec.depth = 4;
    spec.branching = 2;
    spec.trials = 40;
    auto rep = check_paraproduct(Corpus(spec), 2.0, 2.0, 2.0, 2.0);
    EXPECT_EQ(rep.violations, 0u);
    for (const auto& [k, v] : rep.measurements.items()) EXPECT_TRUE(v.is_number()) << k;
    EXPECT_THROW(check_paraproduct(Corpus(spec), 2.0, 2.0, 1.5, 1.5), std::invalid_argument);
}

TEST(VectorValuedCheck, FubiniCaseWithinDoobConstant) {
    CorpusSpec spec;
    spec.generator = "family";
    spec.family = 4;
    spec.depth = 4;
    spec.branching = 2;
    spec.trials = 60;
    auto rep = check_vector_valued(Corpus(spec), 2.0, 2.0, 2.0);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_LE(rep.measurements["fubini_ratio"].get<double>(), 1.0 + 1e-9);
    auto big = check_vector_valued(Corpus(CorpusSpec::from_json({{"family", 8}, {"trials", 30}}, spec)), 3.0, 1.5, 2.0);
    EXPECT_TRUE(std::isfinite(big.measurements["vector_maximal_ratio"].get<double>()));
}

TEST(VectorValuedCheck, SingleMemberReducesToScalar) {
    CorpusSpec spec;
    spec.generator = "family";
    spec.family = 1;
    spec.depth = 5;
    spec.trials = 40;
    auto rep = check_vector_valued(Corpus(spec), 2.0, 3.0, 2.0);
    EXPECT_EQ(rep.violations, 0u);
}

}  // namespace
}  // namespace mtgl
