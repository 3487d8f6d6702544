#pragma once

#include <span>
#include <vector>

namespace mtgl {

inline constexpr double kRatioTol = 1e-9;  // relative slack on ratio assertions
inline constexpr double kAbsTol = 1e-10;   // absolute slack folded into the denominator

double expectation(std::span<const double> x, std::span<const double> prob);
// (E|x|^p)^{1/p}; p = inf is the max over atoms, p < 1 the quasi-norm.
double lp_norm(std::span<const double> x, std::span<const double> prob, double p);
double moment(std::span<const double> x, std::span<const double> prob, double p);  // E|x|^p

// lhs / (rhs + kAbsTol); never clipped.
double bound_ratio(double lhs, double rhs);
inline bool violates(double ratio) { return ratio > 1.0 + kRatioTol; }

// A lambda level with the set {X > lambda} (inclusive = false) or its
// left-limit {X >= lambda} (inclusive = true).
struct Level {
    double lambda;
    bool inclusive;
};

// Every piecewise-constant-in-lambda quantity built from {X > lambda} takes
// all of its values (including one-sided limits) on this finite set.
std::vector<Level> level_scan(std::span<const double> x);
inline bool exceeds(double x, const Level& l) { return l.inclusive ? x >= l.lambda : x > l.lambda; }


// Sums of weight columns over superlevel sets {x > lambda} / {x >= lambda},
// answered in O(log n) after an O(n log n) sort.
class TailSums {
public:
    TailSums(std::span<const double> x, const std::vector<std::span<const double>>& weights);
    double tail(const Level& level, std::size_t column) const;
    // Sum over the complement {x <= lambda} (strict level) or {x < lambda} (inclusive).
    double head(const Level& level, std::size_t column) const;

private:
    std::size_t split(const Level& level) const;
    std::vector<double> sorted_;
    std::vector<std::vector<double>> prefix_;  // prefix_[c][i] = sum of the first i weights
};

}  // namespace mtgl
