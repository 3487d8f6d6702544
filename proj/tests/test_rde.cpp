#include <gtest/gtest.h>

#include <cmath>

#include "mtgl/rough.hpp"

namespace mtgl {
namespace {

RoughPath line(double T, std::size_t n) {
    return lift(SampledPath::from_function(uniform_grid(T, n), [](double t) { return t; }));
}

double sup_error(const RdeSolution& sol, const std::function<double(double)>& oracle) {
    double err = 0.0;
    const auto& y = sol.path.y();
    for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(y(i) - oracle(y.time(i))));
    return err;
}

TEST(Rde, ConstantVectorFieldIsOneStep) {
    auto x = line(0.5, 32);
    std::vector<double> y0{2.0};
    auto sol = rde_solve(SmoothFunction::constant({3.0}, 1), x, y0);
    EXPECT_LT(sup_error(sol, [](double t) { return 2.0 + 3.0 * t; }), 1e-14);
    // Each piece reaches the fixed point after one Picard step.
    for (const auto& m : sol.diag.metrics) {
        ASSERT_LE(m.size(), 2u);
        EXPECT_EQ(m.back(), 0.0);
    }
}

TEST(Rde, LinearFieldMatchesExponential) {
    auto x = line(0.3, 256);
    std::vector<double> y0{1.0};
    auto sol = rde_solve(SmoothFunction::linear({1.0}, 1, 1, 3.0), x, y0);
    EXPECT_LE(sup_error(sol, [](double t) { return std::exp(t); }), 1e-4);
    EXPECT_TRUE(sol.diag.contraction_ok);
    EXPECT_TRUE(sol.diag.in_solution_space);
    for (const auto& m : sol.diag.metrics)
        for (std::size_t k = 1; k < m.size(); ++k)
            if (m[k - 1] > 0.0) EXPECT_LT(m[k], m[k - 1]);
}

TEST(Rde, CoarsePiecewiseLinearDriver) {
    auto x = line(0.3, 16);
    std::vector<double> y0{1.0};
    auto sol = rde_solve(SmoothFunction::linear({1.0}, 1, 1, 3.0), x, y0);
    EXPECT_LE(sup_error(sol, [](double t) { return std::exp(t); }), 1e-3);
}

TEST(Rde, SquareFieldMatchesClosedForm) {
    auto x = line(0.25, 256);
    std::vector<double> y0{1.0};
    auto sol = rde_solve(SmoothFunction::square(3.0), x, y0);
    EXPECT_LE(sup_error(sol, [](double t) { return 1.0 / (1.0 - t); }), 1e-4);
}

TEST(Rde, DiagnosticsJson) {
    auto x = line(0.3, 64);
    std::vector<double> y0{1.0};
    auto j = rde_solve(SmoothFunction::linear({1.0}, 1, 1, 3.0), x, y0).diag.to_json();
    for (const char* k : {"iterations", "final_metric", "subdivisions", "error_bound", "eps", "contraction_ok",
                          "in_solution_space", "metrics"})
        EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Rde, RejectsBadShapes) {
    auto x = line(0.3, 16);
    std::vector<double> y0{1.0, 2.0};
    EXPECT_THROW(rde_solve(SmoothFunction::linear({1.0}, 1, 1, 3.0), x, y0), std::invalid_argument);
}

TEST(Stability, IdenticalInputsGiveZero) {
    auto x = line(0.3, 64);
    std::vector<double> y0{1.0};
    auto rec = rde_stability(SmoothFunction::linear({1.0}, 1, 1, 3.0), x, x, y0, y0);
    EXPECT_EQ(rec.ratio, 0.0);
}

TEST(Stability, RatioSettlesUnderHalving) {
    auto x = line(0.3, 64);
    auto phi = SmoothFunction::linear({1.0}, 1, 1, 3.0);
    std::vector<double> y0{1.0};
    std::vector<double> ratios;
    for (double h = 1e-3; h > 1e-4; h /= 2.0) {
        std::vector<double> y1{1.0 + h};
        ratios.push_back(rde_stability(phi, x, x, y0, y1).ratio);
    }
    for (std::size_t k = 1; k < ratios.size(); ++k) EXPECT_NEAR(ratios[k], ratios[k - 1], 1e-3 * ratios[0]);
}

TEST(Stability, ScaledDriverIsFinite) {
    auto times = uniform_grid(0.3, 64);
    auto x = lift(SampledPath::from_function(times, [](double t) { return t; }));
    auto x2 = lift(SampledPath::from_function(times, [](double t) { return 1.001 * t; }));
    std::vector<double> y0{1.0};
    auto rec = rde_stability(SmoothFunction::linear({1.0}, 1, 1, 3.0), x, x2, y0, y0);
    EXPECT_TRUE(std::isfinite(rec.ratio));
    EXPECT_GT(rec.ratio, 0.0);
}

}  // namespace
}  // namespace mtgl
