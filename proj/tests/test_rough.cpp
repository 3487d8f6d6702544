#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>

#include "mtgl/rng.hpp"
#include "mtgl/rough.hpp"

namespace mtgl {
namespace {

SampledPath random_walk_path(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    auto times = uniform_grid(1.0, n);
    std::vector<double> v(times.size() * d, 0.0);
    for (std::size_t i = 1; i < times.size(); ++i)
        for (std::size_t k = 0; k < d; ++k)
            v[i * d + k] = v[(i - 1) * d + k] + scale * (rng.coin() ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
    return {times, v, d};
}

// Fractional-looking path: increments |h|^H with random signs at several scales.
SampledPath holder_path(std::size_t n, std::uint64_t seed, double hurst) {
    Rng rng(seed);
    auto times = uniform_grid(1.0, n);
    std::vector<double> v(times.size(), 0.0);
    for (std::size_t level = 1; level <= n; level *= 2) {
        double amp = std::pow(1.0 / static_cast<double>(level), hurst);
        std::size_t block = n / level;
        for (std::size_t b = 0; b < level; ++b) {
            double sgn = rng.coin() ? 1.0 : -1.0;
            for (std::size_t i = 0; i <= block; ++i)
                v[b * block + i] += sgn * amp * (static_cast<double>(i) / block - 0.5) * (i == block ? 0.0 : 1.0);
        }
    }
    return {times, v, 1};
}

TEST(TwoParam, VariationExamples) {
    auto times = uniform_grid(2.0, 8);
    TwoParamField add(times.size(), 1);
    for (std::size_t s = 0; s < times.size(); ++s)
        for (std::size_t t = s; t < times.size(); ++t) add.at(s, t)[0] = times[t] - times[s];
    EXPECT_NEAR(add.variation(1.0), 2.0, 1e-12);
    TwoParamField zero(5, 2);
    EXPECT_EQ(zero.variation(2.0), 0.0);
}

TEST(TwoParam, VariationMatchesExhaustiveChains) {
    Rng rng(4);
    TwoParamField xi(6, 1);
    for (std::size_t s = 0; s < 6; ++s)
        for (std::size_t t = s + 1; t < 6; ++t) xi.at(s, t)[0] = rng.normal();
    double best = 0.0;
    for (unsigned mask = 0; mask < 64; ++mask) {
        double sum = 0.0;
        int prev = -1;
        for (int i = 0; i < 6; ++i) {
            if (!(mask >> i & 1)) continue;
            if (prev >= 0) sum += std::pow(std::abs(xi.at(prev, i)[0]), 1.5);
            prev = i;
        }
        best = std::max(best, sum);
    }
    EXPECT_NEAR(xi.variation(1.5), std::pow(best, 1.0 / 1.5), 1e-12);
}

TEST(Sewing, AdditiveGermIsExact) {
    auto times = uniform_grid(1.0, 64);
    LinearTimeControl omega(times);
    auto germ = [&](std::size_t s, std::size_t t) { return std::vector<double>{std::sin(times[t]) - std::sin(times[s])}; };
    auto res = sew(germ, omega, 1.5);
    EXPECT_NEAR(res.value[0], std::sin(1.0), 1e-14);
}

TEST(Sewing, ConstantValue) {
    EXPECT_NEAR(sewing_constant(2.0), 4.0 * M_PI * M_PI / 6.0, 1e-9);
    EXPECT_THROW(sewing_constant(1.0), std::invalid_argument);
}

TEST(Young, IdentityAgainstIdentityIsOneHalf) {
    auto times = uniform_grid(1.0, 4096);
    auto id = SampledPath::from_function(times, [](double t) { return t; });
    auto y = young_integral(id, id, 1.5);
    EXPECT_NEAR(y.total.value[0], 0.5, 1e-6);
    EXPECT_LE(0.5, y.total.error_bound);
    EXPECT_LE(y.total.max_error, y.total.error_bound);
}

TEST(Young, ConstantIntegrandGivesIncrement) {
    auto g = holder_path(256, 3, 0.7);
    auto one = SampledPath::from_function(g.times(), [](double) { return 1.0; });
    auto y = young_integral(one, g, 1.6);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(y.integral(i), g(i) - g(0), 1e-12);
}

TEST(Young, StepIntegrandMatchesRiemannStieltjes) {
    auto times = uniform_grid(1.0, 128);
    auto g = SampledPath::from_function(times, [](double t) { return t * t; });
    auto a = SampledPath::from_function(times, [](double t) { return t < 0.5 ? 1.0 : -2.0; }, Interp::Constant);
    auto y = young_integral(a, g, 1.5);
    double oracle = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) oracle += a(i) * (g(i + 1) - g(i));
    EXPECT_NEAR(y.integral(times.size() - 1), oracle, 1e-12);
}

TEST(Young, AprioriBoundOnRandomPaths) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto a = holder_path(128, 2 * s, 0.7), g = holder_path(128, 2 * s + 1, 0.7);
        SewOptions opt;
        opt.strict = false;
        auto y = young_integral(a, g, 1.6, opt);
        EXPECT_LE(y.total.max_error, y.total.error_bound * (1.0 + 1e-9)) << s;
    }
}

TEST(ControlPartition, Examples) {
    auto times = uniform_grid(1.0, 64);
    LinearTimeControl omega(times);
    auto p = control_partition(omega, 0.25);
    EXPECT_GE(p.points.size(), 4u);
    EXPECT_LE(p.points.size(), 6u);
    EXPECT_LE(p.max_block, 0.25 + 1e-12);
    EXPECT_EQ(control_partition(omega, 2.0).points.size(), 2u);
    SumControl with_atom({std::make_shared<LinearTimeControl>(times), std::make_shared<AtomControl>(65, 20, 1.0)});
    auto q = control_partition(with_atom, 0.25);
    EXPECT_NE(std::find(q.points.begin(), q.points.end(), 20u), q.points.end());
}

TEST(Lift, ChenResidualAndLinearPath) {
    omp_set_num_threads(4);
    auto x = random_walk_path(256, 2, 9);
    auto rx = lift(x);
    EXPECT_LE(rx.chen_residual(), 1e-12);
    auto times = uniform_grid(1.0, 64);
    auto line = lift(SampledPath::from_function(times, [](double t) { return t; }));
    for (std::size_t s = 0; s < times.size(); s += 7)
        for (std::size_t t = s; t < times.size(); t += 5)
            EXPECT_NEAR(line.xx().at(s, t)[0], 0.5 * (times[t] - times[s]) * (times[t] - times[s]), 1e-14);
}

TEST(Lift, SymmetricPartOfWalkArea) {
    auto x = random_walk_path(64, 2, 5);
    SampledPath step(x.times(), x.values(), 2, Interp::Constant);
    auto rx = lift(step);
    std::size_t n = x.size() - 1;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            double sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) sq += (x(i + 1, a) - x(i, a)) * (x(i + 1, b) - x(i, b));
            double lhs = rx.xx().at(0, n)[a * 2 + b] + rx.xx().at(0, n)[b * 2 + a];
            EXPECT_NEAR(lhs, (x(n, a) - x(0, a)) * (x(n, b) - x(0, b)) - sq, 1e-12);
        }
}

TEST(RoughPath, RejectsChenViolation) {
    auto x = random_walk_path(16, 1, 2);
    TwoParamField zero(x.size(), 1);
    EXPECT_THROW(RoughPath(x, zero), std::invalid_argument);
    EXPECT_THROW(lift(x, 3.5), std::invalid_argument);
}

TEST(RoughIntegral, IntegratingTheDriverGivesTheArea) {
    const std::size_t d = 2, e = d * d;
    auto x = random_walk_path(64, d, 17);
    auto rx = lift(x);
    std::size_t n = x.size();
    std::vector<double> y(n * e * d, 0.0), yp(n * e * d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t c = 0; c < d; ++c) {
                std::size_t row = a * d + c;
                y[i * e * d + row * d + c] = x(i, a) - x(0, a);
                yp[i * e * d * d + (row * d + c) * d + a] = 1.0;
            }
    ControlledPath cp(SampledPath(x.times(), y, e * d), SampledPath(x.times(), yp, e * d * d), d);
    auto res = rough_integral(cp, rx);
    for (std::size_t k = 0; k < e; ++k) {
        EXPECT_NEAR(res.path.y()(n - 1, k), rx.xx().at(0, n - 1)[k], 1e-12);
        EXPECT_NEAR(res.total.value[k], rx.xx().at(0, n - 1)[k], 1e-12);
    }
    EXPECT_LE(res.remainder_ratio, 1.0 + 1e-9);
}

TEST(RoughIntegral, ConstantIntegrand) {
    auto x = random_walk_path(32, 1, 3);
    auto rx = lift(x);
    std::size_t n = x.size();
    ControlledPath cp(SampledPath(x.times(), std::vector<double>(n, 2.5)), SampledPath(x.times(), std::vector<double>(n, 0.0)), 1);
    auto res = rough_integral(cp, rx);
    EXPECT_NEAR(res.path.y()(n - 1), 2.5 * (x(n - 1) - x(0)), 1e-12);
}

TEST(RoughIntegral, SmoothTimeIntegral) {
    auto times = uniform_grid(1.0, 256);
    auto rx = lift(SampledPath::from_function(times, [](double t) { return t; }));
    auto y = SampledPath::from_function(times, [](double t) { return t; });
    auto yp = SampledPath::from_function(times, [](double) { return 1.0; });
    auto res = rough_integral(ControlledPath(y, yp, 1), rx);
    EXPECT_NEAR(res.total.value[0], 0.5, 1e-6);
}

TEST(Compose, IdentityConstantAndSquare) {
    auto times = uniform_grid(1.0, 64);
    auto rx = lift(SampledPath::from_function(times, [](double t) { return std::sin(3.0 * t); }));
    auto y = SampledPath::from_function(times, [](double t) { return std::sin(3.0 * t); });
    auto yp = SampledPath::from_function(times, [](double) { return 1.0; });
    ControlledPath cp(y, yp, 1);
    auto id = compose(SmoothFunction::identity(1, 2.0), cp, rx);
    for (std::size_t i = 0; i < times.size(); ++i) {
        EXPECT_NEAR(id.path.y()(i), y(i), 1e-15);
        EXPECT_NEAR(id.path.yp()(i), 1.0, 1e-15);
    }
    auto c = compose(SmoothFunction::constant({4.0}, 1), cp, rx);
    EXPECT_EQ(c.path.y()(10), 4.0);
    EXPECT_EQ(c.path.remainder(rx.x()).variation(1.0), 0.0);
    auto sq = compose(SmoothFunction::square(1.5), cp, rx);
    EXPECT_LE(sq.phi_prime_ratio, 1.0 + 1e-9);
    EXPECT_LE(sq.remainder_ratio, 1.0 + 1e-9);
    EXPECT_TRUE(SmoothFunction::square(1.5).validate(1.5, 200, 1).empty());
}

TEST(ControlledPath, ImplicitBound) {
    auto x = random_walk_path(64, 1, 8);
    auto rx = lift(x);
    auto yp = SampledPath::from_function(x.times(), [](double t) { return std::cos(t); });
    std::vector<double> yv(x.size());
    yv[0] = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) yv[i] = yv[i - 1] + yp(i - 1) * (x(i) - x(i - 1));
    ControlledPath cp(SampledPath(x.times(), yv), yp, 1);
    EXPECT_LE(implicit_bound_ratio(cp, rx), 1.0 + 1e-9);
}

TEST(DriverIo, CsvRoundTrip) {
    auto x = random_walk_path(16, 2, 1);
    auto dir = ::testing::TempDir();
    write_driver_csv(dir + "drv.csv", x);
    auto back = read_driver_csv(dir + "drv.csv");
    EXPECT_EQ(back.values(), x.values());
    EXPECT_EQ(back.times(), x.times());
    EXPECT_EQ(back.interp(), Interp::Linear);
    auto rx = lift(x);
    write_area_csv(dir + "area.csv", rx);
    RoughPath again(back, read_area_csv(dir + "area.csv", back));
    EXPECT_LE(again.chen_residual(), 1e-12);
}

}  // namespace
}  // namespace mtgl
