#pragma once

#include <cstddef>
#include <vector>

#include "mtgl/variation.hpp"

namespace mtgl {

// Dense upper-triangular array Xi(s, t), s <= t, on n grid points.
struct TwoParamArray {
    std::size_t n = 0;
    std::vector<double> a;

    TwoParamArray() = default;
    explicit TwoParamArray(std::size_t n_) : n(n_), a(n_ * n_, 0.0) {}
    double& operator()(std::size_t s, std::size_t t) { return a[s * n + t]; }
    double operator()(std::size_t s, std::size_t t) const { return a[s * n + t]; }
};

// sup over chains of (sum_l |Xi(u_{l-1}, u_l)|^rho)^{1/rho}.
inline VariationResult two_param_variation_full(const TwoParamArray& xi, double rho) {
    return chain_variation(xi.n, [&](std::size_t i, std::size_t j) { return xi(i, j); }, rho);
}

inline double two_param_variation(const TwoParamArray& xi, double rho) {
    return two_param_variation_full(xi, rho).value;
}

TwoParamArray difference(const TwoParamArray& a, const TwoParamArray& b);

}  // namespace mtgl
