#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "mtgl/checks.hpp"
#include "mtgl/tree.hpp"

namespace mtgl {

inline constexpr double kBellmanGamma = 3.0;
inline constexpr int kMaxExtremalDepth = 12;

// Point of the domain |x| <= m, y >= 0.
struct BellmanPoint {
    double x = 0.0, y = 0.0, m = 0.0;
};

// U(x, y, m) = y - (x^2 + (gamma - 1) m^2) / m; U(0, y, 0) = y.
double bellman_U(const BellmanPoint& p, double gamma = kBellmanGamma);
// V(x, t, z) = sqrt(t) - gamma z.
double bellman_V(double x, double t, double z, double gamma = kBellmanGamma);

// RHS - LHS of the one-step inequality
// U(x+h, y + h^2/(|x+h| v m), |x+h| v m) <= U(x, y, m) - 2 x h / m.
double concavity_residual(double x, double h, double y, double m, double gamma = kBellmanGamma);

struct ConcavityGrid {
    std::vector<double> xs, hs, ys;
    double m = 1.0;
    // x in [-1, 1] (101 points), h in [-20, 20] (331 points), y in {0, 1, 10}.
    static ConcavityGrid standard();
    std::size_t size() const { return xs.size() * hs.size() * ys.size(); }
};

struct ConcavityCounterexample {
    double gamma, x, h, y, m, residual;
    nlohmann::json to_json() const;
};

struct ConcavityScan {
    double min_residual = 0.0;
    ConcavityCounterexample argmin{};
    std::size_t points = 0;
    std::size_t negative = 0;  // residuals below -tol
    std::optional<ConcavityCounterexample> counterexample;
};

ConcavityScan concavity_check(const ConcavityGrid& grid, double gamma = kBellmanGamma, double tol = 1e-12,
                              Exec exec = Exec::Parallel);

struct PathwiseSharp {
    double lhs = 0.0;  // 3|f_0| + sum_{n=1}^N |df_n|^2 / f*_n
    double rhs = 0.0;  // 2 f*_N + |f_N|^2 / f*_N - sum_{n=0}^{N-1} 2 f_n df_{n+1} / f*_n
};

// 0/0 terms (f*_n = 0) contribute 0.
PathwiseSharp pathwise_sharp_check(std::span<const double> path);

// Largest E U_{n+1} - E U_n along the tree (U at (f_n, S~_n, f*_n)); <= 0 up to rounding.
double bellman_step_increase(const TreeProcess& f, double gamma = kBellmanGamma);

// E Sf <= sqrt(3) E f* per tree, with the expectation form of the sharp
// inequality and the pathwise inequality on every leaf.
CheckReport sharp_davis_check(const Corpus& corpus, const CheckOptions& opt = {});

struct ExtremalResult {
    double best_ratio = 0.0;
    double best_r = 0.0;
    std::vector<double> ratios;  // per r in the grid
};

// Tree of the two-point construction: from 0 a fair +-z step (z = f*, or 1
// at the start), from |x| = f* the step -x w.p. r/(r+1) or r x w.p. 1/(r+1).
Martingale extremal_tree(int depth, double r);
// Recursive E Sf / E f* for extremal_tree(depth, r), maximized over the grid.
ExtremalResult extremal_search(int depth, const std::vector<double>& r_grid);

}  // namespace mtgl
