#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "mtgl/ito.hpp"

namespace mtgl {
namespace {

// Grid-by-grid form of the defining sum, written independently of ito_sum.
double ito_oracle(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi, std::size_t p,
                  std::size_t t, std::size_t t2) {
    double base = f(p, pi.floor_index(p, t)), sum = 0.0;
    for (std::size_t k = t; k < t2; ++k) {
        std::size_t a = pi.floor_index(p, k);
        if (a > t) sum += (f(p, a) - base) * (g(p, k + 1) - g(p, k));
    }
    return sum;
}

GridCadlagPath walk(std::size_t N) { return GridCadlagPath::scaled_walk(N, 0, 1); }

GridCadlagPath square_minus_time(const GridCadlagPath& g) {
    double dt = g.T() / static_cast<double>(g.N());
    return GridCadlagPath::adapted(g, [dt](std::span<const double> h) {
        return h.back() * h.back() - dt * static_cast<double>(h.size() - 1);
    });
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(GridPath, WalkIsEnumeratedForSmallN) {
    auto g = walk(6);
    EXPECT_EQ(g.paths(), 64u);
    EXPECT_FALSE(g.sampled());
    ASSERT_TRUE(g.tree());
    double total = 0.0;
    for (std::size_t p = 0; p < g.paths(); ++p) total += g.weight(p);
    EXPECT_NEAR(total, 1.0, 1e-15);
    auto big = GridCadlagPath::scaled_walk(64, 100, 3);
    EXPECT_TRUE(big.sampled());
    EXPECT_EQ(big.paths(), 100u);
}

TEST(Partition, FloorTimeAndMembership) {
    AdaptedGridPartition pi(8, {{0, 3, 5, 8}});
    auto f = GridCadlagPath(1.0, 8, std::vector<double>(9, 0.0), {1.0}, false);
    EXPECT_DOUBLE_EQ(floor_time(0.0, pi, f, 0), 0.0);
    EXPECT_DOUBLE_EQ(floor_time(0.3, pi, f, 0), 0.0);
    EXPECT_DOUBLE_EQ(floor_time(0.375, pi, f, 0), 0.375);
    EXPECT_DOUBLE_EQ(floor_time(0.6, pi, f, 0), 0.375);
    EXPECT_DOUBLE_EQ(floor_time(0.7, pi, f, 0), 0.625);
    EXPECT_DOUBLE_EQ(floor_time(1.0, pi, f, 0), 1.0);
    EXPECT_TRUE(pi.contains(0, 5));
    EXPECT_FALSE(pi.contains(0, 4));
    EXPECT_THROW(AdaptedGridPartition(8, {{0, 5, 3, 8}}), std::invalid_argument);
    EXPECT_THROW(AdaptedGridPartition(8, {{1, 8}}), std::invalid_argument);
}

TEST(Partition, RefineAndUnite) {
    AdaptedGridPartition pi(8, {{0, 3, 8}});
    auto r = pi.refine(2);
    EXPECT_EQ(r.points(0), (std::vector<std::size_t>{0, 2, 3, 4, 6, 8}));
    EXPECT_TRUE(pi.subset_of(r));
    EXPECT_FALSE(r.subset_of(pi));
    auto u = pi.unite(AdaptedGridPartition(8, {{0, 5, 8}}));
    EXPECT_EQ(u.points(0), (std::vector<std::size_t>{0, 3, 5, 8}));
    // Levels finer than the grid saturate at the full grid.
    EXPECT_EQ(pi.refine(5).points(0).size(), 9u);
    EXPECT_THROW(AdaptedGridPartition(12, {{0, 12}}).refine(3), std::invalid_argument);
}

TEST(Partition, OscillationStopsOnThreshold) {
    GridCadlagPath f(1.0, 6, {0.0, 0.1, 0.3, 0.2, -0.1, -0.05, 0.0}, {1.0}, false);
    auto pi = AdaptedGridPartition::epsilon_oscillation(f, 0.25);
    EXPECT_EQ(pi.points(0), (std::vector<std::size_t>{0, 2, 4, 6}));
}

TEST(ItoSum, ConstantIntegrandOrIntegratorGivesZero) {
    auto g = walk(6);
    auto c = GridCadlagPath::constant(g, 2.5);
    auto pi = AdaptedGridPartition::grid(6, g.paths());
    for (std::size_t p = 0; p < g.paths(); p += 7) {
        EXPECT_EQ(ito_sum(c, g, pi, p, 0, 6), 0.0);
        EXPECT_EQ(ito_sum(g, c, pi, p, 0, 6), 0.0);
    }
}

TEST(ItoSum, MatchesGridOracleAndMatrix) {
    auto g = walk(8);
    auto f = square_minus_time(g);
    auto pi = AdaptedGridPartition::epsilon_oscillation(f, 0.3);
    for (std::size_t p = 0; p < g.paths(); p += 13) {
        auto m = ito_matrix(f, g, pi, p);
        for (std::size_t t = 0; t <= 8; ++t)
            for (std::size_t t2 = t; t2 <= 8; ++t2) {
                double want = ito_oracle(f, g, pi, p, t, t2);
                EXPECT_NEAR(ito_sum(f, g, pi, p, t, t2), want, 1e-13);
                EXPECT_NEAR(m(t, t2), want, 1e-13);
            }
    }
    EXPECT_THROW(ito_sum(f, g, pi, 0, 5, 3), std::invalid_argument);
}

TEST(ItoSum, EndpointsPartitionHasNoInteriorBlocks) {
    auto g = walk(6);
    auto pi = AdaptedGridPartition::endpoints(6, g.paths());
    for (std::size_t p = 0; p < g.paths(); ++p) EXPECT_EQ(ito_sum(g, g, pi, p, 0, 6), 0.0);
}

TEST(ItoSum, FullGridIsLeftPointRiemannSum) {
    auto g = walk(6);
    auto pi = AdaptedGridPartition::grid(6, g.paths());
    for (std::size_t p = 0; p < g.paths(); ++p) {
        double want = 0.0;
        for (std::size_t k = 0; k < 6; ++k) want += (g(p, k) - g(p, 0)) * (g(p, k + 1) - g(p, k));
        EXPECT_NEAR(ito_sum(g, g, pi, p, 0, 6), want, 1e-14);
    }
}

TEST(Discretize, GridIsIdentityAndEndpointsFreezeStart) {
    auto g = walk(5);
    auto same = discretize(g, AdaptedGridPartition::grid(5, g.paths()));
    auto frozen = discretize(g, AdaptedGridPartition::endpoints(5, g.paths()));
    for (std::size_t p = 0; p < g.paths(); ++p)
        for (std::size_t k = 0; k <= 5; ++k) {
            EXPECT_EQ(same(p, k), g(p, k));
            EXPECT_EQ(frozen(p, k), k == 5 ? g(p, 5) : g(p, 0));
        }
}

TEST(Covariation, WalkHasUnitQuadraticVariation) {
    for (std::size_t N : {4u, 8u, 12u}) {
        auto g = walk(N);
        auto pi = AdaptedGridPartition::grid(N, g.paths());
        for (std::size_t p = 0; p < g.paths(); p += 17) EXPECT_NEAR(covariation_sum(g, g, pi, p, 0, N), 1.0, 1e-14);
    }
}

TEST(Covariation, RampAndAdditivity) {
    const std::size_t N = 10;
    const double h = 0.3;
    std::vector<double> v(N + 1);
    for (std::size_t k = 0; k <= N; ++k) v[k] = h * static_cast<double>(k);
    GridCadlagPath ramp(1.0, N, v, {1.0}, false);
    auto grid = AdaptedGridPartition::grid(N, 1);
    EXPECT_NEAR(covariation_sum(ramp, ramp, grid, 0, 0, N), N * h * h, 1e-12);
    AdaptedGridPartition pi(N, {{0, 2, 3, 7, 10}});
    for (std::size_t a : {0u, 2u, 3u})
        for (std::size_t b : {3u, 7u})
            for (std::size_t c : {7u, 10u})
                EXPECT_NEAR(covariation_sum(ramp, ramp, pi, 0, a, c),
                            covariation_sum(ramp, ramp, pi, 0, a, b) + covariation_sum(ramp, ramp, pi, 0, b, c), 1e-12);
}

TEST(Identities, ResidualsVanish) {
    omp_set_num_threads(4);
    auto g = walk(10);
    auto f = square_minus_time(g);
    auto pi = AdaptedGridPartition::epsilon_oscillation(f, 0.4);
    auto tau = pi.refine(1);
    auto res = ito_identity_residuals(f, g, pi, tau, 64);
    EXPECT_LE(res.chen, 1e-12);
    EXPECT_LE(res.integration_by_parts, 1e-12);
    EXPECT_LE(res.coarsening, 1e-12);
    auto serial = ito_identity_residuals(f, g, pi, tau, 64, Exec::Serial);
    EXPECT_EQ(serial.to_json().dump(), res.to_json().dump());
    EXPECT_THROW(ito_identity_residuals(f, g, tau, pi, 4), std::invalid_argument);
}

TEST(Martingale, ConditionalOrthogonalityOnGrid) {
    auto g = walk(8);
    auto grid = AdaptedGridPartition::grid(8, g.paths());
    EXPECT_LE(orthogonality_residual(g, grid, 0, 8), 1e-10);
    EXPECT_LE(orthogonality_residual(g, grid, 3, 7), 1e-10);
    auto f = square_minus_time(g);
    EXPECT_LE(orthogonality_residual(f, grid, 2, 6), 1e-10);
    auto sampled = GridCadlagPath::scaled_walk(32, 10, 1);
    EXPECT_THROW(orthogonality_residual(sampled, AdaptedGridPartition::grid(32, 10), 0, 4), std::invalid_argument);
}

TEST(Martingale, ItoSumIsMartingaleInUpperTime) {
    auto g = walk(8);
    auto f = square_minus_time(g);
    auto pi = AdaptedGridPartition::epsilon_oscillation(f, 0.3);
    for (std::size_t s : {0u, 2u, 5u}) EXPECT_LE(ito_martingale_residual(f, g, pi, s), 1e-12);
}

TEST(Refinement, ConstantsGiveZeroDistances) {
    auto g = walk(8);
    auto c = GridCadlagPath::constant(g, 1.0);
    auto d = refine_converge(c, g, AdaptedGridPartition::endpoints(8, g.paths()), 0, 4);
    ASSERT_EQ(d.cauchy.size(), 3u);
    for (double x : d.cauchy) EXPECT_EQ(x, 0.0);
    for (double x : d.discretization) EXPECT_EQ(x, 0.0);
    EXPECT_TRUE(d.cauchy_nonincreasing);
}

TEST(Refinement, WalkDemoDistancesDecay) {
    omp_set_num_threads(4);
    auto g = GridCadlagPath::scaled_walk(256, 128, 1);
    auto pi = AdaptedGridPartition::epsilon_oscillation(g, 0.25);
    auto d = refine_converge(g, g, pi, 5, 4);
    EXPECT_EQ(d.levels, (std::vector<int>{5, 6, 7, 8}));
    EXPECT_TRUE(d.cauchy_nonincreasing) << d.to_json().dump();
    EXPECT_TRUE(d.discretization_nonincreasing) << d.to_json().dump();
    EXPECT_EQ(d.discretization.back(), 0.0);
    RefineOptions serial;
    serial.exec = Exec::Serial;
    EXPECT_EQ(refine_converge(g, g, pi, 5, 4, serial).to_json().dump(), d.to_json().dump());
}

TEST(BoundCheck, ConstantSideHasZeroLhs) {
    auto g = walk(8);
    auto c = GridCadlagPath::constant(g, 3.0);
    auto pi = AdaptedGridPartition::grid(8, g.paths());
    EXPECT_EQ(ito_bound_check(c, g, pi, {}).measurements["lhs"].get<double>(), 0.0);
    EXPECT_EQ(ito_bound_check(g, c, pi, {}).measurements["lhs"].get<double>(), 0.0);
    auto rep = ito_bound_check(g, g, pi, {});
    double ratio = rep.measurements["ratio"].get<double>();
    EXPECT_TRUE(std::isfinite(ratio));
    EXPECT_GT(ratio, 0.0);
    ItoExponents bad;
    bad.r = 0.5;
    EXPECT_THROW(ito_bound_check(g, g, pi, bad), std::invalid_argument);
}

TEST(Csv, PathAndPartitionRows) {
    auto dir = std::filesystem::temp_directory_path() / "mtgl_ito_csv";
    std::filesystem::create_directories(dir);
    GridCadlagPath f(2.0, 4, {0.0, 1.0, 0.5, 0.25, 2.0}, {1.0}, false);
    write_path_csv((dir / "f.csv").string(), f, 0);
    EXPECT_EQ(slurp(dir / "f.csv"), "t,value\n0,0\n0.5,1\n1,0.5\n1.5,0.25\n2,2\n");
    write_partition_csv((dir / "pi.csv").string(), AdaptedGridPartition(4, {{0, 1, 4}, {0, 4}}), 2.0);
    EXPECT_EQ(slurp(dir / "pi.csv"), "path_id,j,tau_j\n0,0,0\n0,1,0.5\n0,2,2\n1,0,0\n1,1,2\n");
}

}  // namespace
}  // namespace mtgl
