#pragma once

#include <span>
#include <vector>

#include "mtgl/norms.hpp"
#include "mtgl/tree.hpp"
#include "mtgl/variation.hpp"

namespace mtgl {

// Mf_n = max_{k<=n} |f_k| per path.
TreeProcess maximal(const TreeProcess& f);
// Sf_n = (sum_{1<=k<=n} |df_k|^2)^{1/2}; the root value is 0.
TreeProcess square_function(const TreeProcess& f);
// sf_n = (sum_{1<=k<=n} E_{k-1}|df_k|^2)^{1/2}.
TreeProcess predictable_square(const TreeProcess& f);
// Mdf_n = max_{1<=k<=n} |df_k|, with Mdf_0 = 0.
TreeProcess max_increment(const TreeProcess& f);

struct DavisParts {
    TreeProcess f_pred;
    TreeProcess f_bv;
    TreeProcess g;  // g_0 = 0, dg_n = min(1, Mdf_{n-1}/|df_n|) df_n
    TreeProcess h;  // h = f - g
    TreeProcess mdf;
};

DavisParts davis_decompose(const TreeProcess& f);

// Stopping indices tau_0 = 0 < tau_1 < ... along one path (finite ones only).
std::vector<std::size_t> lepingle_partition(std::span<const double> path, int m);

struct PathwiseBound {
    double lhs = 0.0;
    double rhs = 0.0;
    int m_max = 1;  // last m included in the sum (sum is empty when m_max < 2)
};

// lhs = V^r(f)^2, rhs = 64 sum_{m>=2} 2^{-(m-2)(r-2)} S_(m)^2.
PathwiseBound lepingle_pathwise_bound(std::span<const double> path, double r);

// Largest d/(8 |f_{tau_{j-1}} - f_{tau_j}|) over the witness pairs of the
// r-variation, with the window 2 < d/(2^{-m}M_t) <= 4 choosing m.  A value
// <= 1 means every pair is dominated; +inf means no stopping time fell in (t', t].
double comparable_jump_ratio(std::span<const double> path, double r);

// Running oscillation M_t = max_{t''<=t'<=t} |f_t' - f_t''|.
std::vector<double> running_oscillation(std::span<const double> path);

struct WeightedLevel {
    double lambda = 0.0;
    bool inclusive = false;
    double lhs = 0.0;  // lambda * w{Mf_n > lambda}
    double rhs = 0.0;  // int_{Mf_n > lambda} f_n Mw_n
};

// Both sides of the weighted weak maximal inequality at every lambda level of
// Mf_n, for f >= 0 adapted and a positive leaf weight w (w_k = E_k w).
std::vector<WeightedLevel> weighted_maximal_data(const TreeProcess& f, std::span<const double> w_leaf, int n);

}  // namespace mtgl
