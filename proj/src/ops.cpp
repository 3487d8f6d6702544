#include "mtgl/ops.hpp"

#include <algorithm>
#include <cmath>

namespace mtgl {

namespace {

void require_scalar(const TreeProcess& f) {
    if (f.dim() != 1) throw std::invalid_argument("operation expects a scalar process");
}

}  // namespace

TreeProcess maximal(const TreeProcess& f) {
    require_scalar(f);
    const auto& tr = f.t();
    std::vector<double> out(tr.node_count());
    out[0] = std::abs(f[0]);
    for (std::size_t v = 1; v < out.size(); ++v) out[v] = std::max(out[tr.parent(v)], std::abs(f[v]));
    return {f.tree(), std::move(out)};
}

TreeProcess square_function(const TreeProcess& f) {
    require_scalar(f);
    const auto& tr = f.t();
    std::vector<double> sq(tr.node_count(), 0.0), out(tr.node_count(), 0.0);
    for (std::size_t v = 1; v < sq.size(); ++v) {
        double d = f[v] - f[tr.parent(v)];
        sq[v] = sq[tr.parent(v)] + d * d;
        out[v] = std::sqrt(sq[v]);
    }
    return {f.tree(), std::move(out)};
}

TreeProcess predictable_square(const TreeProcess& f) {
    require_scalar(f);
    const auto& tr = f.t();
    std::vector<double> sq(tr.node_count(), 0.0), out(tr.node_count(), 0.0);
    for (std::size_t a = 0; a < tr.level_begin(tr.depth()); ++a) {
        double cv = 0.0;
        std::size_t c0 = tr.first_child(a);
        for (int i = 0; i < tr.child_count(a); ++i) {
            double d = f[c0 + i] - f[a];
            cv += tr.prob(c0 + i) * d * d;
        }
        cv /= tr.prob(a);
        for (int i = 0; i < tr.child_count(a); ++i) {
            sq[c0 + i] = sq[a] + cv;
            out[c0 + i] = std::sqrt(sq[c0 + i]);
        }
    }
    return {f.tree(), std::move(out)};
}

TreeProcess max_increment(const TreeProcess& f) {
    require_scalar(f);
    const auto& tr = f.t();
    std::vector<double> out(tr.node_count(), 0.0);
    for (std::size_t v = 1; v < out.size(); ++v)
        out[v] = std::max(out[tr.parent(v)], std::abs(f[v] - f[tr.parent(v)]));
    return {f.tree(), std::move(out)};
}

DavisParts davis_decompose(const TreeProcess& f) {
    require_scalar(f);
    const auto& tr = f.t();
    std::size_t n = tr.node_count();
    auto mdf = max_increment(f);
    std::vector<double> pred(n, 0.0), bv(n, 0.0), g(n, 0.0), h(n, 0.0);
    bv[0] = f[0];
    h[0] = f[0];
    for (std::size_t a = 0; a < tr.level_begin(tr.depth()); ++a) {
        std::size_t c0 = tr.first_child(a);
        int b = tr.child_count(a);
        double eg = 0.0, eh = 0.0;
        std::vector<double> dg(b), dh(b);
        for (int i = 0; i < b; ++i) {
            double df = f[c0 + i] - f[a];
            dg[i] = df == 0.0 ? 0.0 : std::min(1.0, mdf[a] / std::abs(df)) * df;
            dh[i] = df - dg[i];
            double q = tr.prob(c0 + i) / tr.prob(a);
            eg += q * dg[i];
            eh += q * dh[i];
        }
        for (int i = 0; i < b; ++i) {
            std::size_t c = c0 + i;
            g[c] = g[a] + dg[i];
            h[c] = h[a] + dh[i];
            pred[c] = pred[a] + (dg[i] - eg);
            bv[c] = bv[a] + (dh[i] - eh);
        }
    }
    return {TreeProcess(f.tree(), std::move(pred)), TreeProcess(f.tree(), std::move(bv)),
            TreeProcess(f.tree(), std::move(g)), TreeProcess(f.tree(), std::move(h)), std::move(mdf)};
}

std::vector<double> running_oscillation(std::span<const double> path) {
    std::vector<double> m(path.size(), 0.0);
    if (path.empty()) return m;
    double lo = path[0], hi = path[0];
    for (std::size_t t = 0; t < path.size(); ++t) {
        lo = std::min(lo, path[t]);
        hi = std::max(hi, path[t]);
        m[t] = hi - lo;
    }
    return m;
}

namespace {

std::vector<std::size_t> lepingle_partition_with(std::span<const double> path, const std::vector<double>& osc, int m) {
    std::vector<std::size_t> tau{0};
    for (std::size_t t = 1; t < path.size(); ++t) {
        double thr = std::ldexp(osc[t], -m);
        if (osc[t] > 0.0 && std::abs(path[t] - path[tau.back()]) >= thr) tau.push_back(t);
    }
    return tau;
}

double smallest_nonzero_gap(std::span<const double> path) {
    std::vector<double> sorted(path.begin(), path.end());
    std::sort(sorted.begin(), sorted.end());
    double best = kInf;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double d = sorted[i] - sorted[i - 1];
        if (d > 0.0) best = std::min(best, d);
    }
    return best;
}

}  // namespace

std::vector<std::size_t> lepingle_partition(std::span<const double> path, int m) {
    if (m < 0) throw std::invalid_argument("partition parameter m must be >= 0");
    return lepingle_partition_with(path, running_oscillation(path), m);
}

PathwiseBound lepingle_pathwise_bound(std::span<const double> path, double r) {
    if (!(r > 2.0)) throw std::invalid_argument("pathwise bound needs r > 2");
    PathwiseBound out;
    if (path.empty()) return out;
    double v = variation(path, r).value;
    out.lhs = v * v;
    auto osc = running_oscillation(path);
    double m_inf = osc.back();
    if (m_inf == 0.0) return out;
    // Every witness pair has distance >= the smallest nonzero gap d_min and
    // picks m with 2^{-m} M >= d/4, so buckets with 2^{-m} M_inf < d_min/4 are empty.
    double d_min = smallest_nonzero_gap(path);
    double sum = 0.0;
    for (int m = 2; std::ldexp(m_inf, -m) >= d_min / 4.0; ++m) {
        auto tau = lepingle_partition_with(path, osc, m);
        double s2 = 0.0;
        for (std::size_t j = 1; j < tau.size(); ++j) {
            double d = path[tau[j]] - path[tau[j - 1]];
            s2 += d * d;
        }
        sum += std::pow(2.0, -(m - 2) * (r - 2.0)) * s2;
        out.m_max = m;
    }
    out.rhs = 64.0 * sum;
    return out;
}

double comparable_jump_ratio(std::span<const double> path, double r) {
    auto w = variation(path, r).witness;
    auto osc = running_oscillation(path);
    double worst = 0.0;
    for (std::size_t l = 1; l < w.size(); ++l) {
        std::size_t t0 = w[l - 1], t1 = w[l];
        double d = std::abs(path[t1] - path[t0]);
        if (d == 0.0) continue;
        int m = 2;
        while (!(std::ldexp(osc[t1], -m) * 2.0 < d && d <= std::ldexp(osc[t1], -m) * 4.0) && m < 2100) ++m;
        auto tau = lepingle_partition_with(path, osc, m);
        std::size_t j = 0;
        while (j + 1 < tau.size() && tau[j + 1] <= t1) ++j;
        if (!(tau[j] > t0) || j == 0) return kInf;
        worst = std::max(worst, d / (8.0 * std::abs(path[tau[j]] - path[tau[j - 1]])));
    }
    return worst;
}


std::vector<WeightedLevel> weighted_maximal_data(const TreeProcess& f, std::span<const double> w_leaf, int n) {
    const auto& tr = f.t();
    if (n < 0 || n > tr.depth()) throw std::out_of_range("level out of range");
    for (double w : w_leaf)
        if (!(w > 0.0)) throw std::invalid_argument("weight must be positive");
    auto w = backprop(f.tree(), w_leaf);
    auto mw = maximal(w);
    auto mf = maximal(f);
    std::size_t b = tr.level_begin(n), k = tr.level_size(n);
    std::vector<double> x(k), wp(k), fmw(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t v = b + i;
        x[i] = mf[v];
        wp[i] = w[v] * tr.prob(v);
        fmw[i] = f[v] * mw[v] * tr.prob(v);
    }
    TailSums sums(x, {wp, fmw});
    std::vector<WeightedLevel> out;
    for (const auto& l : level_scan(x)) out.push_back({l.lambda, l.inclusive, l.lambda * sums.tail(l, 0), sums.tail(l, 1)});
    return out;
}

}  // namespace mtgl
