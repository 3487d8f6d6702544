#include "mtgl/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/ops.hpp"

namespace mtgl {

namespace {

TreeProcess scalar_member(const Corpus& c, std::size_t i) {
    auto m = c.member(i);
    return m.dim() == 1 ? m : m.component(0);
}

// a / b with 0/0 = 0.
double ratio0(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

void extremal_eval(double x, double s2, double z, double p, int steps, double r, double& es, double& ez) {
    if (steps == 0) {
        es += p * std::sqrt(s2);
        ez += p * z;
        return;
    }
    if (x == 0.0) {
        double a = z > 0.0 ? z : 1.0;
        for (double d : {a, -a}) extremal_eval(d, s2 + d * d, std::max(z, a), 0.5 * p, steps - 1, r, es, ez);
        return;
    }
    double down = -x, up = r * x;
    extremal_eval(0.0, s2 + down * down, z, p * r / (r + 1.0), steps - 1, r, es, ez);
    extremal_eval(x + up, s2 + up * up, std::max(z, std::abs(x + up)), p / (r + 1.0), steps - 1, r, es, ez);
}

}  // namespace

double bellman_U(const BellmanPoint& p, double gamma) {
    if (p.m < 0.0 || std::abs(p.x) > p.m) throw std::invalid_argument("Bellman point needs |x| <= m");
    if (p.m == 0.0) return p.y;
    return p.y - (p.x * p.x + (gamma - 1.0) * p.m * p.m) / p.m;
}

double bellman_V(double, double t, double z, double gamma) { return std::sqrt(t) - gamma * z; }

double concavity_residual(double x, double h, double y, double m, double gamma) {
    if (!(m > 0.0) || std::abs(x) > m) throw std::invalid_argument("concavity step needs m > 0 and |x| <= m");
    double m2 = std::max(std::abs(x + h), m);
    double lhs = bellman_U({x + h, y + h * h / m2, m2}, gamma);
    double rhs = bellman_U({x, y, m}, gamma) - 2.0 * x * h / m;
    return rhs - lhs;
}

ConcavityGrid ConcavityGrid::standard() {
    ConcavityGrid g;
    for (int i = 0; i <= 100; ++i) g.xs.push_back(-1.0 + 0.02 * i);
    for (int i = 0; i <= 330; ++i) g.hs.push_back(-20.0 + 40.0 * i / 330.0);
    g.ys = {0.0, 1.0, 10.0};
    return g;
}

nlohmann::json ConcavityCounterexample::to_json() const {
    return {{"gamma", gamma}, {"x", x}, {"h", h}, {"y", y}, {"m", m}, {"residual", residual}};
}

ConcavityScan concavity_check(const ConcavityGrid& grid, double gamma, double tol, Exec exec) {
    std::size_t nx = grid.xs.size(), nh = grid.hs.size(), ny = grid.ys.size();
    std::vector<double> res(grid.size());
    for_each_index(nx, exec, [&](std::size_t i) {
        for (std::size_t j = 0; j < nh; ++j)
            for (std::size_t k = 0; k < ny; ++k)
                res[(i * nh + j) * ny + k] =
                    concavity_residual(grid.xs[i] * grid.m, grid.hs[j], grid.ys[k], grid.m, gamma);
    });
    ConcavityScan scan;
    scan.points = res.size();
    scan.min_residual = kInf;
    for (std::size_t idx = 0; idx < res.size(); ++idx) {
        std::size_t k = idx % ny, j = (idx / ny) % nh, i = idx / (ny * nh);
        ConcavityCounterexample c{gamma, grid.xs[i] * grid.m, grid.hs[j], grid.ys[k], grid.m, res[idx]};
        if (res[idx] < scan.min_residual) {
            scan.min_residual = res[idx];
            scan.argmin = c;
        }
        if (res[idx] < -tol) ++scan.negative;
    }
    if (scan.negative > 0) scan.counterexample = scan.argmin;
    return scan;
}

PathwiseSharp pathwise_sharp_check(std::span<const double> f) {
    if (f.empty()) throw std::invalid_argument("path must contain f_0");
    PathwiseSharp out;
    std::size_t N = f.size() - 1;
    std::vector<double> star(f.size());
    star[0] = std::abs(f[0]);
    for (std::size_t n = 1; n <= N; ++n) star[n] = std::max(star[n - 1], std::abs(f[n]));
    out.lhs = 3.0 * std::abs(f[0]);
    for (std::size_t n = 1; n <= N; ++n) {
        double d = f[n] - f[n - 1];
        out.lhs += ratio0(d * d, star[n]);
    }
    out.rhs = 2.0 * star[N] + ratio0(f[N] * f[N], star[N]);
    for (std::size_t n = 0; n < N; ++n) out.rhs -= ratio0(2.0 * f[n] * (f[n + 1] - f[n]), star[n]);
    return out;
}

double bellman_step_increase(const TreeProcess& f, double gamma) {
    const auto& tr = f.t();
    int N = tr.depth();
    std::vector<double> eu(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::size_t leaf = 0; leaf < tr.leaf_count(); ++leaf) {
        auto path = f.path_values(leaf);
        double p = tr.leaf_prob(leaf), star = std::abs(path[0]), s = 3.0 * std::abs(path[0]);
        eu[0] += p * bellman_U({path[0], s, star}, gamma);
        for (int n = 1; n <= N; ++n) {
            double d = path[n] - path[n - 1];
            star = std::max(star, std::abs(path[n]));
            s += ratio0(d * d, star);
            eu[n] += p * bellman_U({path[n], s, star}, gamma);
        }
    }
    double worst = -kInf;
    for (int n = 0; n < N; ++n) worst = std::max(worst, eu[n + 1] - eu[n]);
    return N == 0 ? 0.0 : worst;
}

CheckReport sharp_davis_check(const Corpus& corpus, const CheckOptions& opt) {
    const double root3 = std::sqrt(3.0);
    auto trial = [&](std::size_t i) {
        auto f = scalar_member(corpus, i);
        const auto& tr = f.t();
        double es = 0.0, ef = 0.0, e_lhs = 0.0, e_rhs = 0.0, pathwise = 0.0;
        for (std::size_t leaf = 0; leaf < tr.leaf_count(); ++leaf) {
            auto path = f.path_values(leaf);
            double p = tr.leaf_prob(leaf), s2 = 0.0, star = 0.0;
            for (std::size_t n = 0; n < path.size(); ++n) {
                star = std::max(star, std::abs(path[n]));
                if (n > 0) s2 += (path[n] - path[n - 1]) * (path[n] - path[n - 1]);
            }
            es += p * std::sqrt(s2);
            ef += p * star;
            auto pw = pathwise_sharp_check(path);
            e_lhs += p * pw.lhs;
            e_rhs += p * (2.0 * star + ratio0(path.back() * path.back(), star));
            pathwise = std::max(pathwise, bound_ratio(pw.lhs, pw.rhs));
        }
        double davis = bound_ratio(es, root3 * ef);
        double quot = bound_ratio(e_lhs, e_rhs);
        double step = bellman_step_increase(f) / (1.0 + ef);
        return TrialOutcome{std::max({davis, quot, pathwise}), true, {ratio0(es, ef), quot, pathwise, step}};
    };
    return run_check("sharp_davis", nlohmann::json::object(), corpus,
                     {"Sf_over_fstar", "sharp_S_ratio", "pathwise_ratio", "bellman_step_increase"}, root3, opt,
                     trial);
}

Martingale extremal_tree(int depth, double r) {
    if (depth < 1 || depth > kMaxExtremalDepth) throw std::invalid_argument("extremal depth must lie in [1, 12]");
    if (!(r > 0.0)) throw std::invalid_argument("extremal parameter r must be positive");
    // Uniform binary shape: node i of level n has children 2i, 2i+1 of level n+1.
    std::vector<std::vector<double>> x(depth + 1), z(depth + 1), p(depth + 1);
    x[0] = {0.0};
    z[0] = {0.0};
    p[0] = {1.0};
    for (int n = 0; n < depth; ++n) {
        for (std::size_t i = 0; i < x[n].size(); ++i) {
            double xv = x[n][i], zv = z[n][i], pv = p[n][i];
            double c0, c1, q0;
            if (xv == 0.0) {
                double a = zv > 0.0 ? zv : 1.0;
                c0 = a;
                c1 = -a;
                q0 = 0.5;
            } else {
                c0 = 0.0;
                c1 = xv + r * xv;
                q0 = r / (r + 1.0);
            }
            x[n + 1].push_back(c0);
            z[n + 1].push_back(std::max(zv, std::abs(c0)));
            p[n + 1].push_back(pv * q0);
            x[n + 1].push_back(c1);
            z[n + 1].push_back(std::max(zv, std::abs(c1)));
            p[n + 1].push_back(pv * (1.0 - q0));
        }
    }
    std::size_t internal = (std::size_t{1} << depth) - 1;
    auto tree = std::make_shared<const FiltrationTree>(depth, std::vector<int>(internal, 2), p[depth]);
    std::vector<double> values;
    for (const auto& level : x) values.insert(values.end(), level.begin(), level.end());
    return Martingale(tree, std::move(values));
}

ExtremalResult extremal_search(int depth, const std::vector<double>& r_grid) {
    if (depth < 1 || depth > kMaxExtremalDepth) throw std::invalid_argument("extremal depth must lie in [1, 12]");
    if (r_grid.empty()) throw std::invalid_argument("extremal search needs a nonempty r grid");
    ExtremalResult res;
    for (double r : r_grid) {
        if (!(r > 0.0)) throw std::invalid_argument("extremal parameter r must be positive");
        double es = 0.0, ez = 0.0;
        extremal_eval(0.0, 0.0, 0.0, 1.0, depth, r, es, ez);
        double ratio = es / ez;
        res.ratios.push_back(ratio);
        if (ratio > res.best_ratio) {
            res.best_ratio = ratio;
            res.best_r = r;
        }
    }
    return res;
}

}  // namespace mtgl
