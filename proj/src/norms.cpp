#include "mtgl/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mtgl {

double expectation(std::span<const double> x, std::span<const double> prob) {
    if (x.size() != prob.size()) throw std::invalid_argument("values and probabilities differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += prob[i] * x[i];
    return s;
}

double moment(std::span<const double> x, std::span<const double> prob, double p) {
    if (x.size() != prob.size()) throw std::invalid_argument("values and probabilities differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double a = std::abs(x[i]);
        s += prob[i] * (p == 1.0 ? a : p == 2.0 ? a * a : std::pow(a, p));
    }
    return s;
}

double lp_norm(std::span<const double> x, std::span<const double> prob, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("norm exponent must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (prob[i] > 0.0) m = std::max(m, std::abs(x[i]));
        return m;
    }
    double s = moment(x, prob, p);
    return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

double bound_ratio(double lhs, double rhs) { return lhs / (rhs + kAbsTol); }

std::vector<Level> level_scan(std::span<const double> x) {
    std::vector<double> v;
    for (double a : x)
        if (a > 0.0) v.push_back(a);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<Level> out;
    if (v.empty()) return out;
    out.push_back({v.front() / 2.0, false});
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back({v[i], true});
        out.push_back({v[i], false});
        if (i + 1 < v.size()) out.push_back({0.5 * (v[i] + v[i + 1]), false});
    }
    return out;
}


TailSums::TailSums(std::span<const double> x, const std::vector<std::span<const double>>& weights) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    sorted_.resize(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) sorted_[i] = x[idx[i]];
    prefix_.resize(weights.size());
    for (std::size_t c = 0; c < weights.size(); ++c) {
        if (weights[c].size() != x.size()) throw std::invalid_argument("weight column size mismatch");
        prefix_[c].assign(x.size() + 1, 0.0);
        for (std::size_t i = 0; i < idx.size(); ++i) prefix_[c][i + 1] = prefix_[c][i] + weights[c][idx[i]];
    }
}

std::size_t TailSums::split(const Level& level) const {
    auto it = level.inclusive ? std::lower_bound(sorted_.begin(), sorted_.end(), level.lambda)
                              : std::upper_bound(sorted_.begin(), sorted_.end(), level.lambda);
    return static_cast<std::size_t>(it - sorted_.begin());
}

double TailSums::tail(const Level& level, std::size_t column) const {
    const auto& p = prefix_[column];
    return p.back() - p[split(level)];
}

double TailSums::head(const Level& level, std::size_t column) const { return prefix_[column][split(level)]; }

}  // namespace mtgl
