#include "mtgl/paraproduct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtgl {

TwoParamArray difference(const TwoParamArray& a, const TwoParamArray& b) {
    if (a.n != b.n) throw std::invalid_argument("two-parameter arrays differ in size");
    TwoParamArray out(a.n);
    for (std::size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] - b.a[i];
    return out;
}

std::size_t TwoParamProcess::storage_size(const FiltrationTree& tree) {
    std::size_t total = 0;
    for (std::size_t v = 0; v < tree.node_count(); ++v) total += static_cast<std::size_t>(tree.level(v)) + 1;
    return total;
}

TwoParamProcess::TwoParamProcess(TreePtr tree, std::vector<double> values)
    : tree_(std::move(tree)), values_(std::move(values)) {
    if (values_.size() != storage_size(*tree_)) throw std::invalid_argument("two-parameter process size mismatch");
    offset_.resize(tree_->node_count());
    std::size_t off = 0;
    for (std::size_t v = 0; v < offset_.size(); ++v) {
        offset_[v] = off;
        off += static_cast<std::size_t>(tree_->level(v)) + 1;
    }
}

TwoParamProcess TwoParamProcess::delta(const TreeProcess& f) {
    const auto& tr = f.t();
    std::vector<double> vals;
    vals.reserve(storage_size(tr));
    std::vector<double> anc;
    for (std::size_t v = 0; v < tr.node_count(); ++v) {
        int lv = tr.level(v);
        anc.assign(static_cast<std::size_t>(lv) + 1, 0.0);
        for (std::size_t u = v;; u = tr.parent(u)) {
            anc[static_cast<std::size_t>(tr.level(u))] = f[u];
            if (tr.level(u) == 0) break;
        }
        for (int s = 0; s <= lv; ++s) vals.push_back(f[v] - anc[static_cast<std::size_t>(s)]);
    }
    return {f.tree(), std::move(vals)};
}

double paraproduct(const TwoParamProcess& f, const TreeProcess& g, std::size_t leaf, int s, int t) {
    if (s < 0 || s > t || t > g.t().depth()) throw std::invalid_argument("paraproduct needs 0 <= s <= t <= depth");
    auto p = g.t().path(leaf);
    double sum = 0.0;
    for (int j = s + 1; j <= t; ++j) sum += f(p[j - 1], s) * (g[p[j]] - g[p[j - 1]]);
    return sum;
}

double paraproduct_deltaf(const TreeProcess& f, const TreeProcess& g, std::size_t leaf, int s, int t) {
    if (s < 0 || s > t || t > g.t().depth()) throw std::invalid_argument("paraproduct needs 0 <= s <= t <= depth");
    auto p = g.t().path(leaf);
    double sum = 0.0;
    for (int j = s + 1; j <= t; ++j) sum += (f[p[j - 1]] - f[p[s]]) * (g[p[j]] - g[p[j - 1]]);
    return sum;
}

TwoParamArray paraproduct_matrix(const TwoParamProcess& f, const TreeProcess& g, std::size_t leaf) {
    auto p = g.t().path(leaf);
    TwoParamArray pi(p.size());
    for (std::size_t s = 0; s < p.size(); ++s) {
        double sum = 0.0;
        for (std::size_t j = s + 1; j < p.size(); ++j) {
            sum += f(p[j - 1], static_cast<int>(s)) * (g[p[j]] - g[p[j - 1]]);
            pi(s, j) = sum;
        }
    }
    return pi;
}

TwoParamArray paraproduct_matrix(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size()) throw std::invalid_argument("paraproduct paths differ in length");
    TwoParamArray pi(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) {
        double sum = 0.0;
        for (std::size_t j = s + 1; j < f.size(); ++j) {
            sum += (f[j - 1] - f[s]) * (g[j] - g[j - 1]);
            pi(s, j) = sum;
        }
    }
    return pi;
}

TreeProcess paraproduct_process(const TwoParamProcess& f, const TreeProcess& g, int s) {
    const auto& tr = g.t();
    if (s < 0 || s > tr.depth()) throw std::invalid_argument("paraproduct start level out of range");
    std::vector<double> out(tr.node_count(), 0.0);
    for (std::size_t v = 1; v < out.size(); ++v) {
        if (tr.level(v) <= s) continue;
        std::size_t a = tr.parent(v);
        out[v] = out[a] + f(a, s) * (g[v] - g[a]);
    }
    return {g.tree(), std::move(out)};
}

std::vector<double> running_pi_star(const TwoParamArray& pi) {
    std::vector<double> star(pi.n, 0.0);
    for (std::size_t t = 1; t < pi.n; ++t) {
        double m = star[t - 1];
        for (std::size_t a = 0; a < t; ++a) m = std::max(m, std::abs(pi(a, t)));
        star[t] = m;
    }
    return star;
}

namespace {

std::vector<std::size_t> partition_with(const TwoParamArray& pi, const std::vector<double>& star, int m) {
    std::vector<std::size_t> tau{0};
    for (std::size_t t = 1; t < pi.n; ++t) {
        double sup = 0.0;
        for (std::size_t tp = tau.back(); tp < t; ++tp) sup = std::max(sup, std::abs(pi(tp, t)));
        if (sup > std::ldexp(star[t], -m - 1)) tau.push_back(t);
    }
    return tau;
}

}  // namespace

std::vector<std::size_t> paraproduct_partition(const TwoParamArray& pi, int m) {
    if (m < 0) throw std::invalid_argument("partition parameter m must be >= 0");
    return partition_with(pi, running_pi_star(pi), m);
}

ChainBound paraproduct_chain_bound(const TwoParamArray& pi, double r, double rho) {
    if (!(rho > 0.0 && rho < r)) throw std::invalid_argument("chain bound needs 0 < rho < r");
    ChainBound out;
    out.lhs = std::pow(two_param_variation(pi, r), r);
    auto star = running_pi_star(pi);
    double total = star.empty() ? 0.0 : star.back();
    if (total == 0.0) return out;
    double pi_min = kInf;
    for (std::size_t s = 0; s < pi.n; ++s)
        for (std::size_t t = s + 1; t < pi.n; ++t)
            if (pi(s, t) != 0.0) pi_min = std::min(pi_min, std::abs(pi(s, t)));
    double sum = 0.0;
    // Bucket m is nonempty only if pi_min <= 2^{-m} Pi*.
    for (int m = 0; std::ldexp(total, -m) >= pi_min; ++m) {
        auto tau = partition_with(pi, star, m);
        double inner = 0.0;
        for (std::size_t j = 1; j < tau.size(); ++j) {
            double sup = 0.0;
            for (std::size_t t = tau[j - 1]; t < tau[j]; ++t) sup = std::max(sup, std::abs(pi(t, tau[j])));
            inner += std::pow(sup, rho);
        }
        sum += std::pow(std::ldexp(total, -m), r - rho) * inner;
        out.m_max = m;
    }
    out.rhs = std::pow(total, r) / (1.0 - std::pow(2.0, -r)) + std::pow(2.0, rho) * sum;
    return out;
}

int paraproduct_bucket(const TwoParamArray& pi, std::size_t u, std::size_t v) {
    double x = std::abs(pi(u, v));
    if (x == 0.0) return -1;
    double star = running_pi_star(pi)[v];
    int m = 0;
    while (!(std::ldexp(star, -m - 1) < x && x <= std::ldexp(star, -m))) ++m;
    return m;
}

}  // namespace mtgl
