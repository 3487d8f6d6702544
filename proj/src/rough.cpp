#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/norms.hpp"
#include "mtgl/rng.hpp"
#include "mtgl/rough.hpp"

namespace mtgl {

namespace {

double frob(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double chen_defect(const SampledPath& x, const TwoParamField& xx, std::size_t s, std::size_t t, std::size_t u) {
    std::size_t d = x.dim();
    auto su = xx.at(s, u), st = xx.at(s, t), tu = xx.at(t, u);
    double e = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
            double cross = (x(t, a) - x(s, a)) * (x(u, b) - x(t, b));
            double r = su[a * d + b] - st[a * d + b] - tu[a * d + b] - cross;
            e += r * r;
        }
    return std::sqrt(e);
}

double max_chen_defect(const SampledPath& x, const TwoParamField& xx) {
    std::size_t n = x.size();
    double worst = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : worst)
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = s + 1; t < n; ++t)
            for (std::size_t u = t + 1; u < n; ++u) worst = std::max(worst, chen_defect(x, xx, s, t, u));
    return worst;
}

// Field of Y_t - Y_s - Y'_s dX_{s,t}.
TwoParamField remainder_field(const SampledPath& y, const SampledPath& yp, const SampledPath& x) {
    std::size_t n = y.size(), e = y.dim(), d = x.dim();
    TwoParamField r(n, e);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = s; t < n; ++t) {
            auto out = r.at(s, t);
            for (std::size_t i = 0; i < e; ++i) {
                double v = y(t, i) - y(s, i);
                for (std::size_t a = 0; a < d; ++a) v -= yp(s, i * d + a) * (x(t, a) - x(s, a));
                out[i] = v;
            }
        }
    return r;
}

std::vector<double> field_table(const TwoParamField& f, double rho) {
    return chain_power_table(f.n(), [&](std::size_t s, std::size_t t) { return f.norm(s, t); }, rho);
}

std::vector<double> path_table(const SampledPath& p, double rho) {
    return chain_power_table(
        p.size(), [&](std::size_t s, std::size_t t) {
            double acc = 0.0;
            for (std::size_t k = 0; k < p.dim(); ++k) acc += (p(t, k) - p(s, k)) * (p(t, k) - p(s, k));
            return std::sqrt(acc);
        },
        rho);
}

std::vector<double> mat_mul(const std::vector<double>& m, std::span<const double> y, std::size_t in, std::size_t out) {
    std::vector<double> r(out, 0.0);
    for (std::size_t i = 0; i < out; ++i)
        for (std::size_t j = 0; j < in; ++j) r[i] += m[i * in + j] * y[j];
    return r;
}

}  // namespace

RoughPath::RoughPath(SampledPath x, TwoParamField xx, double r, Trusted)
    : x_(std::move(x)), xx_(std::move(xx)), r_(r) {}

RoughPath::RoughPath(SampledPath x, TwoParamField xx, double r) : x_(std::move(x)), xx_(std::move(xx)), r_(r) {
    if (!(r >= 2.0 && r < 3.0)) throw std::invalid_argument("rough path exponent must lie in [2, 3)");
    std::size_t d = x_.dim();
    if (xx_.n() != x_.size() || xx_.m() != d * d)
        throw std::invalid_argument("second level does not match the path's grid and dimension");
    double scale = 1.0;
    for (std::size_t s = 0; s < x_.size(); ++s) {
        scale = std::max(scale, xx_.norm(0, s));
        scale = std::max(scale, frob(x_.point(s)) * frob(x_.point(s)));
    }
    if (max_chen_defect(x_, xx_) > 1e-9 * scale) throw std::invalid_argument("second level violates Chen's relation");
}

double RoughPath::x_norm() const { return x_.variation(r_); }
double RoughPath::xx_norm() const { return xx_.variation(r_ / 2.0); }
double RoughPath::chen_residual() const { return max_chen_defect(x_, xx_); }

RoughPath RoughPath::restrict(std::size_t begin, std::size_t end) const {
    return RoughPath(x_.restrict(begin, end), xx_.restrict(begin, end), r_, Trusted{});
}

RoughPath lift(const SampledPath& x, double r) {
    std::size_t n = x.size(), d = x.dim();
    TwoParamField xx(n, d * d);
    double half = x.interp() == Interp::Linear ? 0.5 : 0.0;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s; t + 1 < n; ++t) {
            auto prev = xx.at(s, t);
            auto next = xx.at(s, t + 1);
            for (std::size_t a = 0; a < d; ++a) {
                double lead = x(t, a) - x(s, a) + half * (x(t + 1, a) - x(t, a));
                for (std::size_t b = 0; b < d; ++b)
                    next[a * d + b] = prev[a * d + b] + lead * (x(t + 1, b) - x(t, b));
            }
        }
    }
    return RoughPath(x, std::move(xx), r);
}

ControlledPath::ControlledPath(SampledPath y, SampledPath yp, std::size_t d) : y_(std::move(y)), yp_(std::move(yp)), d_(d) {
    if (y_.times() != yp_.times()) throw std::invalid_argument("path and derivative live on different grids");
    if (yp_.dim() != y_.dim() * d_) throw std::invalid_argument("derivative must have dim(Y) * d components");
}

TwoParamField ControlledPath::remainder(const SampledPath& x) const {
    if (x.times() != y_.times() || x.dim() != d_) throw std::invalid_argument("driver does not match controlled path");
    return remainder_field(y_, yp_, x);
}

ControlledPath::Norms ControlledPath::norms(const RoughPath& x) const {
    Norms n;
    n.y_r = y_.variation(x.r());
    n.yp_r = yp_.variation(x.r());
    n.yp_sup = yp_.sup_norm();
    n.rem = remainder(x.x()).variation(x.r() / 2.0);
    return n;
}

double implicit_bound_ratio(const ControlledPath& y, const RoughPath& x) {
    auto n = y.norms(x);
    return bound_ratio(n.y_r, n.yp_sup * x.x_norm() + n.rem);
}

SmoothFunction SmoothFunction::linear(std::vector<double> m, std::size_t in, std::size_t out, double box) {
    if (m.size() != in * out) throw std::invalid_argument("matrix shape does not match dimensions");
    SmoothFunction f;
    f.in_dim = in;
    f.out_dim = out;
    double fr = frob(m);
    f.norms.sup = fr * box * std::sqrt(static_cast<double>(in));
    f.norms.lip = fr;
    f.norms.d_sup = fr;
    f.value = [m, in, out](std::span<const double> y) { return mat_mul(m, y, in, out); };
    f.jacobian = [m](std::span<const double>) { return m; };
    return f;
}

SmoothFunction SmoothFunction::constant(std::vector<double> c, std::size_t in) {
    SmoothFunction f;
    f.in_dim = in;
    f.out_dim = c.size();
    f.norms.sup = frob(c);
    std::size_t out = c.size();
    f.value = [c](std::span<const double>) { return c; };
    f.jacobian = [in, out](std::span<const double>) { return std::vector<double>(in * out, 0.0); };
    return f;
}

SmoothFunction SmoothFunction::identity(std::size_t dim, double box) {
    std::vector<double> m(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] = 1.0;
    return linear(std::move(m), dim, dim, box);
}

SmoothFunction SmoothFunction::square(double box) {
    SmoothFunction f;
    f.norms = {box * box, 2.0 * box, 2.0 * box, 2.0, 2.0, 0.0};
    f.value = [](std::span<const double> y) { return std::vector<double>{y[0] * y[0]}; };
    f.jacobian = [](std::span<const double> y) { return std::vector<double>{2.0 * y[0]}; };
    return f;
}

std::vector<std::string> SmoothFunction::validate(double box, std::size_t samples, std::uint64_t seed) const {
    Rng rng(seed, 13);
    double sup = 0.0, lip = 0.0, d_sup = 0.0, d_lip = 0.0;
    auto draw = [&] {
        std::vector<double> y(in_dim);
        for (auto& v : y) v = rng.uniform(-box, box);
        return y;
    };
    for (std::size_t k = 0; k < samples; ++k) {
        auto y = draw(), z = draw();
        auto fy = value(y), fz = value(z), jy = jacobian(y), jz = jacobian(z);
        std::vector<double> dy(in_dim), df(out_dim), dj(jy.size());
        for (std::size_t i = 0; i < in_dim; ++i) dy[i] = y[i] - z[i];
        for (std::size_t i = 0; i < out_dim; ++i) df[i] = fy[i] - fz[i];
        for (std::size_t i = 0; i < jy.size(); ++i) dj[i] = jy[i] - jz[i];
        double gap = frob(dy);
        sup = std::max(sup, frob(fy));
        d_sup = std::max(d_sup, frob(jy));
        if (gap > 0.0) {
            lip = std::max(lip, frob(df) / gap);
            d_lip = std::max(d_lip, frob(dj) / gap);
        }
    }
    std::vector<std::string> warn;
    auto check = [&](const char* name, double seen, double declared) {
        if (seen > declared * (1.0 + 1e-9) + 1e-12)
            warn.push_back(std::string(name) + ": sampled " + std::to_string(seen) + " exceeds declared " +
                           std::to_string(declared));
    };
    check("sup", sup, norms.sup);
    check("lip", lip, norms.lip);
    check("d_sup", d_sup, norms.d_sup);
    check("d_lip", d_lip, norms.d_lip);
    return warn;
}

CompositionResult compose(const SmoothFunction& phi, const ControlledPath& y, const RoughPath& x) {
    std::size_t e = y.dim(), d = y.d(), out = phi.out_dim, n = y.y().size();
    if (phi.in_dim != e) throw std::invalid_argument("function input dimension does not match the path");
    std::vector<double> v(n * out), vp(n * out * d, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        auto pt = y.y().point(t);
        auto fv = phi.value(pt);
        auto jac = phi.jacobian(pt);
        std::copy(fv.begin(), fv.end(), v.begin() + static_cast<std::ptrdiff_t>(t * out));
        for (std::size_t i = 0; i < out; ++i)
            for (std::size_t a = 0; a < d; ++a) {
                double acc = 0.0;
                for (std::size_t k = 0; k < e; ++k) acc += jac[i * e + k] * y.yp()(t, k * d + a);
                vp[(t * out + i) * d + a] = acc;
            }
    }
    const auto& times = y.y().times();
    ControlledPath fy(SampledPath(times, std::move(v), out, y.y().interp()),
                      SampledPath(times, std::move(vp), out * d, y.y().interp()), d);
    auto ny = y.norms(x);
    const auto& nm = phi.norms;
    CompositionResult res{fy, 0.0, 0.0};
    res.phi_prime_ratio = bound_ratio(fy.yp().variation(x.r()), nm.d_sup * ny.yp_r + nm.d_lip * ny.y_r * ny.yp_sup);
    res.remainder_ratio = bound_ratio(fy.remainder(x.x()).variation(x.r() / 2.0),
                                      nm.d_sup * ny.rem + 0.5 * nm.d_lip * ny.y_r * ny.y_r);
    return res;
}

RoughIntegralResult rough_integral(const ControlledPath& y, const RoughPath& x, const SewOptions& opt, bool sew_total) {
    std::size_t d = x.dim(), n = x.size();
    if (y.d() != d || y.dim() % d != 0) throw std::invalid_argument("integrand must take values in maps on R^d");
    if (y.y().times() != x.x().times()) throw std::invalid_argument("integrand and driver live on different grids");
    std::size_t e = y.dim() / d;
    const auto& Y = y.y();
    const auto& Yp = y.yp();
    const auto& X = x.x();
    const auto& XX = x.xx();
    Germ xi = [&](std::size_t s, std::size_t t) {
        std::vector<double> out(e, 0.0);
        auto m = XX.at(s, t);
        for (std::size_t i = 0; i < e; ++i) {
            double v = 0.0;
            for (std::size_t b = 0; b < d; ++b) {
                v += Y(s, i * d + b) * (X(t, b) - X(s, b));
                for (std::size_t a = 0; a < d; ++a) v += Yp(s, (i * d + b) * d + a) * m[a * d + b];
            }
            out[i] = v;
        }
        return out;
    };
    SampledPath z(X.times(), riemann_path(xi, n, e), e, Y.interp());
    RoughIntegralResult res{ControlledPath(z, Y, d), {}, 0.0, 0.0, 0.0};

    double r = x.r(), theta = 3.0 / r;
    TwoParamField ry = y.remainder(X);
    double ry_n = ry.variation(r / 2.0), yp_r = Yp.variation(r), yp_sup = Yp.sup_norm();
    double x_n = x.x_norm(), xx_n = x.xx_norm();
    res.remainder_norm = res.path.remainder(X).variation(r / 2.0);
    double k = sewing_constant(theta) * std::pow(2.0, theta - 1.0);
    res.remainder_rhs = k * (ry_n * x_n + yp_r * xx_n) + yp_sup * xx_n;
    res.remainder_ratio = bound_ratio(res.remainder_norm, res.remainder_rhs);

    if (sew_total) {
        // omega = w_R^{2/3} w_X^{1/3} + w_{Y'}^{1/3} w_XX^{2/3} dominates |delta Xi|^{r/3}.
        auto wr = field_table(ry, r / 2.0), wxx = field_table(XX, r / 2.0);
        auto wx = path_table(X, r), wyp = path_table(Yp, r);
        FunctionControl omega(n, [=](std::size_t s, std::size_t t) {
            std::size_t i = s * n + t;
            return std::cbrt(wr[i] * wr[i] * wx[i]) + std::cbrt(wyp[i] * wxx[i] * wxx[i]);
        });
        res.total = sew(xi, omega, theta, opt);
    }
    return res;
}

}  // namespace mtgl
