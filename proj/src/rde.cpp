#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/rough.hpp"

namespace mtgl {

namespace {

struct Iterate {
    SampledPath y, yp;
};

double lipschitz_weight(const SmoothFunction& phi, double A) { return 2.0 * (phi.norms.d_sup + A * phi.norms.d_lip); }

// Split [0, n-1] into blocks where ||X||_r + ||XX||_{r/2} < eps.
void subdivide(const RoughPath& x, std::size_t b, std::size_t e, double eps, std::vector<std::size_t>& cuts) {
    RoughPath piece = x.restrict(b, e);
    if (piece.x_norm() + piece.xx_norm() < eps) {
        cuts.push_back(e);
        return;
    }
    if (e == b + 1)
        throw std::runtime_error("driver has a jump above the smallness threshold in a single grid step");
    // Left-anchored chain DP gives (V^r X on [b, m])^r for every m at once.
    double r = x.r(), half = std::pow(0.5 * piece.x_norm(), r);
    const auto& px = x.x();
    std::vector<double> best(e - b + 1, 0.0);
    double running = 0.0;
    std::size_t m = e - 1;
    for (std::size_t j = b + 1; j < e; ++j) {
        for (std::size_t i = b; i < j; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < px.dim(); ++k) acc += (px(j, k) - px(i, k)) * (px(j, k) - px(i, k));
            best[j - b] = std::max(best[j - b], best[i - b] + pow_abs(std::sqrt(acc), r));
        }
        running = std::max(running, best[j - b]);
        if (running >= half) {
            m = j;
            break;
        }
    }
    subdivide(x, b, m, eps, cuts);
    subdivide(x, m, e, eps, cuts);
}

}  // namespace

nlohmann::json RdeDiagnostics::to_json() const {
    return {{"iterations", iterations},   {"final_metric", final_metric},
            {"subdivisions", subdivisions}, {"error_bound", error_bound},
            {"eps", eps},                 {"contraction_ok", contraction_ok},
            {"in_solution_space", in_solution_space}, {"metrics", metrics}};
}

RdeSolution rde_solve(const SmoothFunction& phi, const RoughPath& x, std::span<const double> y0, const RdeConfig& cfg) {
    std::size_t e = y0.size(), d = x.dim(), n = x.size();
    if (e == 0 || phi.in_dim != e || phi.out_dim != e * d)
        throw std::invalid_argument("vector field must map R^e to linear maps R^d -> R^e");
    if (!(cfg.A > 0.0) || !(cfg.tol > 0.0) || cfg.max_iter < 1) throw std::invalid_argument("invalid solver config");
    const auto& nm = phi.norms;
    double A = cfg.A;
    double c_phi = std::max({1.0, nm.sup, nm.lip, nm.d_sup, nm.d_lip});
    RdeDiagnostics diag;
    diag.eps = cfg.eps > 0.0 ? cfg.eps : 0.5 / (c_phi * (1.0 + A + A * A));
    double r = x.r();
    double weight = lipschitz_weight(phi, A);

    std::vector<std::size_t> cuts{0};
    if (n > 1) subdivide(x, 0, n - 1, diag.eps, cuts);
    diag.subdivisions = static_cast<int>(cuts.size()) - 1;

    std::vector<double> y_all(n * e), yp_all(n * e * d);
    std::vector<double> start(y0.begin(), y0.end());
    if (n == 1) {
        std::copy(start.begin(), start.end(), y_all.begin());
        auto f = phi.value(start);
        std::copy(f.begin(), f.end(), yp_all.begin());
    }
    SewOptions quiet{false, false, 0, 1};

    for (std::size_t p = 1; p < cuts.size(); ++p) {
        std::size_t b = cuts[p - 1], end = cuts[p], len = end - b + 1;
        RoughPath xp = x.restrict(b, end);
        const auto& times = xp.x().times();
        std::vector<double> yv(len * e), ypv(len * e * d, 0.0);
        for (std::size_t t = 0; t < len; ++t) std::copy(start.begin(), start.end(), yv.begin() + t * e);
        Iterate cur{SampledPath(times, yv, e, xp.x().interp()), SampledPath(times, ypv, e * d, xp.x().interp())};

        std::vector<double> metrics;
        double prev = kInf, bound = 0.0;
        int rising = 0;
        bool prev_inside = false;
        for (int it = 1;; ++it) {
            if (it > cfg.max_iter) throw std::runtime_error("Picard iteration exceeded max_iter");
            ControlledPath cp(cur.y, cur.yp, d);
            auto comp = compose(phi, cp, xp);
            auto integ = rough_integral(comp.path, xp, quiet, false);
            bound = integ.remainder_rhs;
            std::vector<double> nv = integ.path.y().values();
            for (std::size_t t = 0; t < len; ++t)
                for (std::size_t i = 0; i < e; ++i) nv[t * e + i] += start[i];
            Iterate next{SampledPath(times, std::move(nv), e, xp.x().interp()), comp.path.y()};

            // Contraction metric between successive iterates.
            auto dr = difference(ControlledPath(next.y, next.yp, d).remainder(xp.x()), cp.remainder(xp.x()));
            double metric = std::max({dr.variation(r / 2.0), difference(next.yp, cur.yp).variation(r),
                                      weight * difference(next.y, cur.y).variation(r)});
            metrics.push_back(metric);

            auto nn = ControlledPath(next.y, next.yp, d).norms(xp);
            double slack = 1.0 + 1e-9;
            bool inside = nn.yp_r <= A * slack && nn.rem <= A * A * slack &&
                          (nm.lip == 0.0 || nn.y_r <= A / nm.lip * slack) && nn.yp_sup <= nm.sup * slack + 1e-12;
            if (!inside) diag.in_solution_space = false;
            if (prev_inside && inside && !(metric < prev)) diag.contraction_ok = false;
            rising = metric >= prev ? rising + 1 : 0;
            if (rising >= 3)
                throw std::runtime_error("Picard metric failed to decrease for 3 iterations; smallness violated");
            prev = metric;
            prev_inside = inside;
            cur = std::move(next);
            ++diag.iterations;
            if (metric < cfg.tol) break;
        }
        diag.final_metric = prev;
        diag.error_bound = std::max(diag.error_bound, bound);
        diag.metrics.push_back(std::move(metrics));

        for (std::size_t t = 0; t < len; ++t) {
            for (std::size_t i = 0; i < e; ++i) y_all[(b + t) * e + i] = cur.y(t, i);
            for (std::size_t k = 0; k < e * d; ++k) yp_all[(b + t) * e * d + k] = cur.yp(t, k);
        }
        for (std::size_t i = 0; i < e; ++i) start[i] = cur.y(len - 1, i);
    }

    const auto& times = x.x().times();
    return {ControlledPath(SampledPath(times, std::move(y_all), e, x.x().interp()),
                           SampledPath(times, std::move(yp_all), e * d, x.x().interp()), d),
            std::move(diag)};
}

StabilityRecord rde_stability(const SmoothFunction& phi, const RoughPath& x, const RoughPath& x2,
                              std::span<const double> y0, std::span<const double> y0_2, const RdeConfig& cfg) {
    if (x.x().times() != x2.x().times() || x.dim() != x2.dim() || y0.size() != y0_2.size())
        throw std::invalid_argument("stability inputs must share grid and dimensions");
    auto a = rde_solve(phi, x, y0, cfg);
    auto b = rde_solve(phi, x2, y0_2, cfg);
    double r = x.r();
    StabilityRecord rec;
    auto dr = difference(a.path.remainder(x.x()), b.path.remainder(x2.x()));
    rec.numerator = std::max({dr.variation(r / 2.0), difference(a.path.yp(), b.path.yp()).variation(r),
                              difference(a.path.y(), b.path.y()).variation(r)});
    double dy = 0.0;
    for (std::size_t i = 0; i < y0.size(); ++i) dy += (y0[i] - y0_2[i]) * (y0[i] - y0_2[i]);
    rec.denominator = std::max({difference(x.x(), x2.x()).variation(r), difference(x.xx(), x2.xx()).variation(r / 2.0),
                                std::sqrt(dy)});
    rec.ratio = rec.numerator == 0.0 && rec.denominator == 0.0 ? 0.0 : rec.numerator / rec.denominator;
    return rec;
}

}  // namespace mtgl
