#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mtgl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct VariationResult {
    double value = 0.0;
    std::vector<std::size_t> witness;  // maximizing increasing index chain
};

inline double pow_abs(double x, double r) {
    x = std::abs(x);
    if (r == 2.0) return x * x;
    return r == 1.0 ? x : std::pow(x, r);
}

// sup over chains u_0 < ... < u_L of (sum_l cost(u_{l-1}, u_l)^r)^{1/r}, by the
// O(n^2) recurrence best[j] = max(0, max_{i<j} best[i] + cost(i,j)^r).
// r = infinity gives max_{i<j} cost(i,j).
template <class Cost>
VariationResult chain_variation(std::size_t n, Cost&& cost, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("variation exponent must be positive");
    VariationResult res;
    if (n < 2) {
        if (n == 1) res.witness = {0};
        return res;
    }
    if (std::isinf(r)) {
        double best = 0.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t j = 1; j < n; ++j)
            for (std::size_t i = 0; i < j; ++i) {
                double c = std::abs(cost(i, j));
                if (c > best) { best = c; bi = i; bj = j; }
            }
        res.value = best;
        res.witness = best > 0.0 ? std::vector<std::size_t>{bi, bj} : std::vector<std::size_t>{0};
        return res;
    }
    std::vector<double> best(n, 0.0);
    std::vector<std::size_t> pred(n, n);
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            double cand = best[i] + pow_abs(cost(i, j), r);
            if (cand > best[j]) { best[j] = cand; pred[j] = i; }
        }
    }
    std::size_t arg = 0;
    for (std::size_t j = 1; j < n; ++j)
        if (best[j] > best[arg]) arg = j;
    res.value = std::pow(best[arg], 1.0 / r);
    for (std::size_t j = arg; j != n; j = pred[j]) res.witness.push_back(j);
    std::reverse(res.witness.begin(), res.witness.end());
    return res;
}

VariationResult variation(std::span<const double> path, double r);
// Path of d-vectors stored row-major (n rows); Euclidean increments.
VariationResult variation(std::span<const double> path, std::size_t d, double r);
double max_oscillation(std::span<const double> path);

}  // namespace mtgl
