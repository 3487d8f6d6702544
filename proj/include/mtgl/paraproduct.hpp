#pragma once

#include <span>
#include <vector>

#include "mtgl/tree.hpp"
#include "mtgl/two_param.hpp"

namespace mtgl {

// Adapted two-parameter process: F(v, s) = F_{s, level(v)} for s <= level(v).
class TwoParamProcess {
public:
    TwoParamProcess(TreePtr tree, std::vector<double> values);
    static TwoParamProcess delta(const TreeProcess& f);  // F_{s,j} = f_j - f_s

    const TreePtr& tree() const { return tree_; }
    double operator()(std::size_t v, int s) const { return values_[offset_[v] + static_cast<std::size_t>(s)]; }
    static std::size_t storage_size(const FiltrationTree& tree);

private:
    TreePtr tree_;
    std::vector<std::size_t> offset_;
    std::vector<double> values_;
};

// Pi(F, g)_{s,t} = sum_{s<j<=t} F_{s,j-1} dg_j along the path of a leaf.
double paraproduct(const TwoParamProcess& f, const TreeProcess& g, std::size_t leaf, int s, int t);
double paraproduct_deltaf(const TreeProcess& f, const TreeProcess& g, std::size_t leaf, int s, int t);
// All (s, t) pairs along one leaf path.
TwoParamArray paraproduct_matrix(const TwoParamProcess& f, const TreeProcess& g, std::size_t leaf);
// Path-level Pi(delta f, g) for plain sequences.
TwoParamArray paraproduct_matrix(std::span<const double> f, std::span<const double> g);
// t -> Pi_{s,t} as a node process (zero at levels <= s).
TreeProcess paraproduct_process(const TwoParamProcess& f, const TreeProcess& g, int s);

// Pi*_t = max_{0<=a<b<=t} |Pi_{a,b}|.
std::vector<double> running_pi_star(const TwoParamArray& pi);
std::vector<std::size_t> paraproduct_partition(const TwoParamArray& pi, int m);

struct ChainBound {
    double lhs = 0.0;  // sup over chains of sum |Pi|^r
    double rhs = 0.0;
    int m_max = -1;
};

ChainBound paraproduct_chain_bound(const TwoParamArray& pi, double r, double rho = 2.0);

// Bucket m with 2^{-m-1} Pi*_v < |Pi_{u,v}| <= 2^{-m} Pi*_v; -1 when Pi_{u,v} = 0.
int paraproduct_bucket(const TwoParamArray& pi, std::size_t u, std::size_t v);

}  // namespace mtgl
