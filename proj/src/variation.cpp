#include "mtgl/variation.hpp"

#include <algorithm>

namespace mtgl {

VariationResult variation(std::span<const double> path, double r) {
    return chain_variation(path.size(), [&](std::size_t i, std::size_t j) { return path[i] - path[j]; }, r);
}

VariationResult variation(std::span<const double> path, std::size_t d, double r) {
    if (d == 0 || path.size() % d != 0) throw std::invalid_argument("path size is not a multiple of the dimension");
    std::size_t n = path.size() / d;
    return chain_variation(
        n,
        [&](std::size_t i, std::size_t j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                double x = path[i * d + k] - path[j * d + k];
                s += x * x;
            }
            return std::sqrt(s);
        },
        r);
}

double max_oscillation(std::span<const double> path) {
    if (path.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(path.begin(), path.end());
    return *hi - *lo;
}

}  // namespace mtgl
