#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "mtgl/rng.hpp"
#include "mtgl/tree.hpp"

namespace mtgl {

enum class Dist { Uniform, Gaussian, Rademacher, Exponential, Lognormal };

Dist parse_dist(const std::string& name);
std::string dist_name(Dist d);
double draw(Dist d, Rng& rng);

// Random shape: every internal node has 2..max_branching children with
// conditional probabilities bounded away from zero.
TreePtr random_tree(int depth, int max_branching, Rng& rng);

Martingale gen_leaf_backprop(Dist dist, int depth, std::uint64_t seed, int max_branching = 3);
Martingale gen_increment(int depth, std::uint64_t seed, Dist dist = Dist::Gaussian, int max_branching = 3);
Martingale gen_dyadic_of_function(const std::function<double(double)>& f, int depth);
Martingale gen_scaled_walk(int n);
Martingale gen_walk(int depth, double step = 1.0);
Martingale gen_doubling(int depth);
Martingale gen_log_weight(int depth);

// K martingales on one shared random tree (stored as a dim-K process).
Martingale gen_family(int k, int depth, std::uint64_t seed, int max_branching = 2);

}  // namespace mtgl
