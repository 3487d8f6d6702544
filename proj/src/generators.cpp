#include "mtgl/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mtgl {

namespace {

void check_depth(int depth) {
    if (depth < 0 || depth > kMaxTreeDepth) throw std::invalid_argument("generator depth exceeds the guard of 24");
}

// Gauss-Legendre, 5 nodes on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

double interval_mean(const std::function<double(double)>& f, double a, double b) {
    double s = 0.0, mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) s += kGlWeights[i] * f(mid + half * kGlNodes[i]);
    return 0.5 * s;
}

}  // namespace

Dist parse_dist(const std::string& name) {
    if (name == "uniform") return Dist::Uniform;
    if (name == "gaussian") return Dist::Gaussian;
    if (name == "rademacher") return Dist::Rademacher;
    if (name == "exponential") return Dist::Exponential;
    if (name == "lognormal") return Dist::Lognormal;
    throw std::invalid_argument("unknown distribution: " + name);
}

std::string dist_name(Dist d) {
    switch (d) {
        case Dist::Uniform: return "uniform";
        case Dist::Gaussian: return "gaussian";
        case Dist::Rademacher: return "rademacher";
        case Dist::Exponential: return "exponential";
        case Dist::Lognormal: return "lognormal";
    }
    return "uniform";
}

double draw(Dist d, Rng& rng) {
    switch (d) {
        case Dist::Uniform: return rng.uniform(-1.0, 1.0);
        case Dist::Gaussian: return rng.normal();
        case Dist::Rademacher: return rng.coin() ? 1.0 : -1.0;
        case Dist::Exponential: return rng.exponential();
        case Dist::Lognormal: return std::exp(rng.normal());
    }
    return 0.0;
}

TreePtr random_tree(int depth, int max_branching, Rng& rng) {
    check_depth(depth);
    if (max_branching < 2) throw std::invalid_argument("max_branching must be >= 2");
    std::vector<int> counts;
    std::vector<double> probs{1.0};
    for (int n = 0; n < depth; ++n) {
        std::vector<double> next;
        for (double p : probs) {
            int b = 2 + rng.below(max_branching - 1);
            counts.push_back(b);
            std::vector<double> w(b);
            double total = 0.0;
            for (auto& x : w) total += (x = 0.2 + rng.uniform());
            for (double x : w) next.push_back(p * x / total);
        }
        probs = std::move(next);
    }
    double total = 0.0;
    for (double p : probs) total += p;
    for (auto& p : probs) p /= total;
    return std::make_shared<const FiltrationTree>(depth, std::move(counts), std::move(probs));
}

Martingale gen_leaf_backprop(Dist dist, int depth, std::uint64_t seed, int max_branching) {
    Rng rng(seed, 1);
    auto tree = random_tree(depth, max_branching, rng);
    std::vector<double> leaves(tree->leaf_count());
    for (auto& x : leaves) x = draw(dist, rng);
    return Martingale(backprop(tree, leaves));
}

Martingale gen_increment(int depth, std::uint64_t seed, Dist dist, int max_branching) {
    Rng rng(seed, 2);
    auto tree = random_tree(depth, max_branching, rng);
    const auto& tr = *tree;
    std::vector<double> v(tr.node_count(), 0.0);
    for (std::size_t a = 0; a < tr.level_begin(tr.depth()); ++a) {
        std::size_t c0 = tr.first_child(a);
        int b = tr.child_count(a);
        double scale = 0.25 + rng.uniform();
        double mean = 0.0, spread = 0.0;
        for (int i = 0; i < b; ++i) {
            v[c0 + i] = scale * draw(dist, rng);
            mean += v[c0 + i] * tr.prob(c0 + i) / tr.prob(a);
        }
        for (int i = 0; i < b; ++i) spread = std::max(spread, std::abs(v[c0 + i] - mean));
        // Identical draws give a flat step; keep it exactly flat.
        bool flat = spread <= 1e-12 * scale;
        for (int i = 0; i < b; ++i) v[c0 + i] = v[a] + (flat ? 0.0 : v[c0 + i] - mean);
    }
    return Martingale(TreeProcess(tree, std::move(v)));
}

Martingale gen_dyadic_of_function(const std::function<double(double)>& f, int depth) {
    check_depth(depth);
    auto tree = FiltrationTree::uniform(depth, 2);
    std::size_t n = tree->leaf_count();
    std::vector<double> leaves(n);
    double h = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) leaves[k] = interval_mean(f, k * h, (k + 1) * h);
    return Martingale(backprop(tree, leaves));
}

Martingale gen_walk(int depth, double step) {
    check_depth(depth);
    auto tree = FiltrationTree::uniform(depth, 2);
    std::vector<double> v(tree->node_count(), 0.0);
    for (std::size_t c = 1; c < v.size(); ++c) {
        std::size_t a = tree->parent(c);
        v[c] = v[a] + (c == tree->first_child(a) ? step : -step);
    }
    return Martingale(TreeProcess(tree, std::move(v)));
}

Martingale gen_scaled_walk(int n) {
    if (n < 1) throw std::invalid_argument("scaled walk needs at least one step");
    return gen_walk(n, 1.0 / std::sqrt(static_cast<double>(n)));
}

Martingale gen_doubling(int depth) {
    check_depth(depth);
    auto tree = FiltrationTree::uniform(depth, 2);
    std::vector<double> v(tree->node_count(), 0.0);
    for (int n = 0; n <= depth; ++n) v[tree->level_begin(n)] = std::ldexp(1.0, n);
    return Martingale(TreeProcess(tree, std::move(v)));
}

Martingale gen_log_weight(int depth) {
    check_depth(depth);
    auto tree = FiltrationTree::uniform(depth, 2);
    std::size_t n = tree->leaf_count();
    std::vector<double> leaves(n);
    double partial = 0.0;
    for (int j = 1; j <= depth; ++j) partial += 1.0 / (static_cast<double>(j) * j);
    double tail = std::numbers::pi * std::numbers::pi / 6.0 - partial;
    leaves[0] = std::ldexp(tail, depth - 1);
    for (std::size_t k = 1; k < n; ++k) {
        int lg = 0;
        while ((k >> (lg + 1)) != 0) ++lg;
        int m = depth - 1 - lg;
        leaves[k] = std::ldexp(1.0, m) / ((m + 1.0) * (m + 1.0));
    }
    return Martingale(backprop(tree, leaves));
}

Martingale gen_family(int k, int depth, std::uint64_t seed, int max_branching) {
    if (k < 1 || static_cast<std::size_t>(k) > kMaxFamily) throw std::invalid_argument("family size must lie in [1, 64]");
    Rng rng(seed, 3);
    auto tree = random_tree(depth, max_branching, rng);
    std::vector<double> all(tree->node_count() * static_cast<std::size_t>(k));
    std::vector<double> leaves(tree->leaf_count());
    for (int j = 0; j < k; ++j) {
        Dist d = static_cast<Dist>(j % 5);
        for (auto& x : leaves) x = draw(d, rng);
        auto p = backprop(tree, leaves);
        for (std::size_t v = 0; v < tree->node_count(); ++v) all[v * k + j] = p[v];
    }
    return Martingale(TreeProcess(tree, std::move(all), static_cast<std::size_t>(k)));
}

}  // namespace mtgl
