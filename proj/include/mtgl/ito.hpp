#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtgl/checks.hpp"
#include "mtgl/parallel.hpp"
#include "mtgl/tree.hpp"
#include "mtgl/two_param.hpp"

namespace mtgl {

inline constexpr std::size_t kMaxItoGrid = 4096;
inline constexpr std::size_t kMaxEnumeratedPaths = std::size_t{1} << 20;

// Right-continuous step paths on t_k = k T / N, one row of N + 1 values per
// path.  Paths carry probability weights; tree-backed ensembles enumerate the
// leaves of a filtration whose level k is grid time t_k, sampled ones are
// Monte Carlo draws with equal weights.
class GridCadlagPath {
public:
    GridCadlagPath(double T, std::size_t N, std::vector<double> values, std::vector<double> weights, bool sampled,
                   TreePtr tree = nullptr);

    // Leaves of f's tree as paths; Monte Carlo over leaves beyond kMaxEnumeratedPaths.
    static GridCadlagPath from_tree(const TreeProcess& f, double T = 1.0, std::size_t samples = 4096,
                                    std::uint64_t seed = 1);
    // +-1/sqrt(N) walk, enumerated when 2^N <= kMaxEnumeratedPaths.
    static GridCadlagPath scaled_walk(std::size_t N, std::size_t samples, std::uint64_t seed, double T = 1.0);
    // f_k = fn(g_0, ..., g_k) on every path of g.
    static GridCadlagPath adapted(const GridCadlagPath& g, const std::function<double(std::span<const double>)>& fn);
    static GridCadlagPath constant(const GridCadlagPath& like, double c);

    std::size_t paths() const { return weights_.size(); }
    std::size_t N() const { return n_; }
    double T() const { return T_; }
    double time(std::size_t k) const { return T_ * static_cast<double>(k) / static_cast<double>(n_); }
    double operator()(std::size_t p, std::size_t k) const { return values_[p * (n_ + 1) + k]; }
    std::span<const double> path(std::size_t p) const { return {values_.data() + p * (n_ + 1), n_ + 1}; }
    double weight(std::size_t p) const { return weights_[p]; }
    double value_at(std::size_t p, double t) const;
    bool sampled() const { return sampled_; }
    const TreePtr& tree() const { return tree_; }
    bool same_ensemble(const GridCadlagPath& o) const;

private:
    double T_;
    std::size_t n_;
    std::vector<double> values_;
    std::vector<double> weights_;
    bool sampled_;
    TreePtr tree_;
};

// Per-path increasing grid indices 0 = pi_0 < pi_1 < ... < pi_last = N.
class AdaptedGridPartition {
public:
    AdaptedGridPartition(std::size_t N, std::vector<std::vector<std::size_t>> points);

    static AdaptedGridPartition endpoints(std::size_t N, std::size_t paths);
    static AdaptedGridPartition grid(std::size_t N, std::size_t paths, std::size_t stride = 1);
    // pi_{j+1} = first k > pi_j with |f_k - f_{pi_j}| >= eps, closed off at N.
    static AdaptedGridPartition epsilon_oscillation(const GridCadlagPath& f, double eps);

    std::size_t N() const { return n_; }
    std::size_t paths() const { return points_.size(); }
    const std::vector<std::size_t>& points(std::size_t p) const { return points_[p]; }
    std::size_t floor_index(std::size_t p, std::size_t k) const;
    bool contains(std::size_t p, std::size_t k) const;

    AdaptedGridPartition unite(const AdaptedGridPartition& o) const;
    // pi with the deterministic grid of spacing 2^{-n} T added.
    AdaptedGridPartition refine(int n) const;
    bool subset_of(const AdaptedGridPartition& o) const;
    // pi_j as stopping rules on a tree whose leaves are the ensemble paths;
    // throws when a partition point is not decided by the path prefix.
    std::vector<StoppingRule> stopping_rules(const TreePtr& tree) const;

private:
    std::size_t n_;
    std::vector<std::vector<std::size_t>> points_;
};

// floor(t, pi) on path p as a grid time.
double floor_time(double t, const AdaptedGridPartition& pi, const GridCadlagPath& f, std::size_t p);

// Pi^pi(f,g)_{t,t'} on path p, by the defining sum over t < pi_j < t'.
double ito_sum(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi, std::size_t p,
               std::size_t t, std::size_t t2);
// All pairs t <= t' at once, O(N^2).
TwoParamArray ito_matrix(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                         std::size_t p);
// f^{(pi)}_t = f_{floor(t, pi)}.
GridCadlagPath discretize(const GridCadlagPath& f, const AdaptedGridPartition& pi);
// [f,g]^pi_{t,t'}: products of block increments over floor(t) <= pi_j < floor(t').
double covariation_sum(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                       std::size_t p, std::size_t t, std::size_t t2);

struct IdentityResiduals {
    double chen = 0.0;                  // Pi_{t,t''} - Pi_{t,t'} - Pi_{t',t''} - df^(pi)_{t,t'} dg_{t',t''}
    double integration_by_parts = 0.0;  // product rule with the covariation sum
    double coarsening = 0.0;            // Pi^pi(f,g) - Pi^tau(f^(pi), g), pi inside tau
    nlohmann::json to_json() const;
};

// Max absolute residuals over all grid pairs/triples of the first max_paths paths.
IdentityResiduals ito_identity_residuals(const GridCadlagPath& f, const GridCadlagPath& g,
                                         const AdaptedGridPartition& pi, const AdaptedGridPartition& tau,
                                         std::size_t max_paths, Exec exec = Exec::Parallel);

// Tree-backed ensembles only: max over F_t atoms of |E_t [f,f]^pi_{t,t'} - E_t |df_{t,t'}|^2|,
// for t, t' contained in pi on every path.
double orthogonality_residual(const GridCadlagPath& f, const AdaptedGridPartition& pi, std::size_t t, std::size_t t2);
// Tree-backed ensembles only: max |E_{t'} Pi_{s,t'+1} - Pi_{s,t'}| over t' >= s.
double ito_martingale_residual(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                               std::size_t s);

struct RefineOptions {
    double r = 3.0;        // variation exponent of the two-parameter distances
    double p_tilde = kInf;  // exponent for the discretization error
    double q = 2.0;
    double rel_tol = 1e-9;  // slack for the nonincreasing checks
    Exec exec = Exec::Parallel;
};

struct RefinementDiagnostics {
    std::vector<int> levels;
    std::vector<double> cauchy;          // ||V^r (Pi^{pi(n)} - Pi^{pi(n+1)})||_q
    std::vector<double> discretization;  // ||V^{p~} (f - f^{(pi(n))})||_q
    bool cauchy_nonincreasing = true;
    bool discretization_nonincreasing = true;
    bool sampled = false;
    nlohmann::json to_json() const;
};

// Levels first_level .. first_level + count - 1 of pi(n) = pi u 2^{-n} grid.
RefinementDiagnostics refine_converge(const GridCadlagPath& f, const GridCadlagPath& g,
                                      const AdaptedGridPartition& base, int first_level, int count,
                                      const RefineOptions& opt = {});

struct ItoExponents {
    double r = 3.0, p1 = 2.5, q0 = 2.0, q1 = 2.0;
};

// ||V^r Pi^pi(f,g)||_q against ||V^{p1} f^(pi)||_{q1} ||V^inf g||_{q0}; the ratio is measured, not asserted.
CheckReport ito_bound_check(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                            const ItoExponents& e, Exec exec = Exec::Parallel);

// "t,value" rows for path p.
void write_path_csv(const std::string& file, const GridCadlagPath& f, std::size_t p);
// "path_id,j,tau_j" rows with tau_j as grid times.
void write_partition_csv(const std::string& file, const AdaptedGridPartition& pi, double T);

}  // namespace mtgl
