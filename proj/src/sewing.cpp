#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/norms.hpp"
#include "mtgl/rng.hpp"
#include "mtgl/rough.hpp"

namespace mtgl {

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double dot_diff(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (b[i] - a[i]) * (c[i] - b[i]);
    return s;
}

std::vector<std::size_t> stride_points(std::size_t last, std::size_t stride) {
    std::vector<std::size_t> p;
    for (std::size_t t = 0; t < last; t += stride) p.push_back(t);
    p.push_back(last);
    return p;
}

}  // namespace

double sewing_constant(double theta) {
    if (!(theta > 1.0)) throw std::invalid_argument("sewing needs theta > 1");
    // Partial sum plus an Euler-Maclaurin tail for the zeta series.
    const int k_max = 2000;
    double s = 0.0;
    for (int k = k_max - 1; k >= 1; --k) s += std::pow(static_cast<double>(k), -theta);
    double K = k_max;
    s += std::pow(K, 1.0 - theta) / (theta - 1.0) + 0.5 * std::pow(K, -theta) +
         theta / 12.0 * std::pow(K, -theta - 1.0);
    return std::pow(2.0, theta) * s;
}

std::vector<double> riemann_path(const Germ& xi, std::size_t n, std::size_t m) {
    std::vector<double> out(n * m, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto step = xi(i, i + 1);
        if (step.size() != m) throw std::invalid_argument("germ dimension mismatch");
        for (std::size_t k = 0; k < m; ++k) out[(i + 1) * m + k] = out[i * m + k] + step[k];
    }
    return out;
}

SewResult sew(const Germ& xi, const Control& omega, double theta, const SewOptions& opt) {
    const double c = sewing_constant(theta);
    std::size_t n = omega.size();
    if (n < 1) throw std::invalid_argument("sewing needs a nonempty grid");
    std::size_t last = n - 1;
    SewResult res;
    res.germ = xi(0, last);
    std::size_t m = res.germ.size();

    std::size_t top = 1;
    while (top < last) top *= 2;
    for (std::size_t s = top; s >= 1; s /= 2) {
        auto pts = stride_points(last, s);
        std::vector<double> sum(m, 0.0);
        for (std::size_t j = 1; j < pts.size(); ++j) {
            auto v = xi(pts[j - 1], pts[j]);
            for (std::size_t k = 0; k < m; ++k) sum[k] += v[k];
        }
        res.levels.push_back(std::move(sum));
        res.strides.push_back(s);
        if (s == 1) break;
    }
    res.finest = res.levels.back();

    double w0 = omega(0, last);
    res.error_bound = c * std::pow(w0, theta);

    // Refinement stability between consecutive levels.
    for (std::size_t l = 1; l < res.levels.size(); ++l) {
        auto pts = stride_points(last, res.strides[l - 1]);
        double wmax = 0.0;
        for (std::size_t j = 1; j < pts.size(); ++j) wmax = std::max(wmax, omega(pts[j - 1], pts[j]));
        double allowed = c * w0 * std::pow(wmax, theta - 1.0);
        res.refinement_ratio =
            std::max(res.refinement_ratio, bound_ratio(euclid(res.levels[l], res.levels[l - 1]), allowed));
    }

    // Hypothesis |delta Xi(s,t,u)| <= omega(s,u)^theta on sampled triples of moderate span.
    if (n >= 3 && opt.hypothesis_samples > 0) {
        Rng rng(opt.seed, 11);
        const std::size_t span = 128;
        for (std::size_t k = 0; k < opt.hypothesis_samples; ++k) {
            std::size_t s = static_cast<std::size_t>(rng.below(static_cast<int>(last)));
            std::size_t u = s + 1 + static_cast<std::size_t>(rng.below(static_cast<int>(std::min(span, last - s))));
            std::size_t t = s + static_cast<std::size_t>(rng.below(static_cast<int>(u - s + 1)));
            auto a = xi(s, u), b = xi(s, t), d = xi(t, u);
            double e = 0.0;
            for (std::size_t q = 0; q < m; ++q) e += (a[q] - b[q] - d[q]) * (a[q] - b[q] - d[q]);
            res.hypothesis_ratio = std::max(res.hypothesis_ratio, bound_ratio(std::sqrt(e), std::pow(omega(s, u), theta)));
        }
    }
    res.cauchy = !violates(res.refinement_ratio) && !violates(res.hypothesis_ratio);
    if (!res.cauchy && opt.strict)
        throw std::runtime_error("sewing: dyadic refinements are not Cauchy under the given control");

    res.value = res.finest;
    std::size_t L = res.levels.size();
    if (opt.extrapolate && L >= 4) {
        const auto &x0 = res.levels[L - 4], &x1 = res.levels[L - 3], &x2 = res.levels[L - 2], &x3 = res.levels[L - 1];
        double d1 = euclid(x1, x0), d2 = euclid(x2, x1), d3 = euclid(x3, x2);
        if (d1 > 0.0 && d2 > 0.0 && d3 > 0.0) {
            double q1 = d2 / d1, q2 = d3 / d2;
            bool geometric = q1 <= 0.75 && q2 <= 0.75 && std::abs(q1 - q2) <= 0.1 * std::max(q1, q2) &&
                             dot_diff(x1, x2, x3) > 0.0 && dot_diff(x0, x1, x2) > 0.0;
            if (geometric) {
                // Aitken step per component on the last three levels.
                for (std::size_t k = 0; k < m; ++k) {
                    double a = x3[k] - x2[k], b = x2[k] - x1[k];
                    if (a != b && a != 0.0) res.value[k] = x3[k] - a * a / (a - b);
                }
                res.extrapolated = true;
            }
        }
    }

    for (const auto& lv : res.levels) res.max_error = std::max(res.max_error, euclid(lv, res.germ));
    res.max_error = std::max(res.max_error, euclid(res.value, res.germ));
    return res;
}

YoungResult young_integral(const SampledPath& a, const SampledPath& g, double r, const SewOptions& opt) {
    if (!(r > 0.0 && r < 2.0)) throw std::invalid_argument("Young integration needs r in (0, 2)");
    if (a.times() != g.times()) throw std::invalid_argument("integrand and integrator live on different grids");
    std::size_t d = g.dim();
    if (a.dim() % d != 0) throw std::invalid_argument("integrand dimension must be a multiple of the integrator's");
    std::size_t k = a.dim() / d;
    Germ xi = [&](std::size_t s, std::size_t t) {
        std::vector<double> out(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t b = 0; b < d; ++b) out[i] += a(s, i * d + b) * (g(t, b) - g(s, b));
        return out;
    };
    SumControl omega({std::make_shared<PathVariationControl>(a, r), std::make_shared<PathVariationControl>(g, r)});
    YoungResult res{SampledPath(g.times(), riemann_path(xi, g.size(), k), k, g.interp()), {}};
    res.total = sew(xi, omega, 2.0 / r, opt);
    return res;
}

}  // namespace mtgl
