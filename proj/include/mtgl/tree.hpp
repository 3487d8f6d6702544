#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace mtgl {

inline constexpr int kMaxTreeDepth = 24;
inline constexpr std::size_t kMaxFamily = 64;
inline constexpr int kNever = std::numeric_limits<int>::max();  // tau = infinity

// Finite filtration: level-n nodes are the atoms of F_n.  Nodes are indexed
// in breadth-first order; children of a node are contiguous.
class FiltrationTree {
public:
    // child_counts holds one entry per node of levels 0..depth-1, in BFS order.
    FiltrationTree(int depth, std::vector<int> child_counts, std::vector<double> leaf_probs);

    static std::shared_ptr<const FiltrationTree> uniform(int depth, int branching);

    int depth() const { return depth_; }
    std::size_t node_count() const { return parent_.size(); }
    std::size_t leaf_count() const { return level_start_[depth_ + 1] - level_start_[depth_]; }
    std::size_t level_begin(int n) const { return level_start_[n]; }
    std::size_t level_end(int n) const { return level_start_[n + 1]; }
    std::size_t level_size(int n) const { return level_end(n) - level_begin(n); }
    std::size_t leaf_node(std::size_t leaf) const { return level_start_[depth_] + leaf; }

    int level(std::size_t v) const { return level_[v]; }
    std::size_t parent(std::size_t v) const { return parent_[v]; }
    std::size_t first_child(std::size_t v) const { return first_child_[v]; }
    int child_count(std::size_t v) const { return child_count_[v]; }
    double prob(std::size_t v) const { return prob_[v]; }
    double leaf_prob(std::size_t leaf) const { return prob_[leaf_node(leaf)]; }
    std::size_t ancestor(std::size_t v, int n) const;

    // Node ids along the root-to-leaf path, indexed by level.
    std::vector<std::size_t> path(std::size_t leaf) const;
    std::vector<double> leaf_probs() const;
    std::vector<int> child_counts() const;

private:
    int depth_;
    std::vector<std::size_t> level_start_;
    std::vector<int> level_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> first_child_;
    std::vector<int> child_count_;
    std::vector<double> prob_;
};

using TreePtr = std::shared_ptr<const FiltrationTree>;

// Adapted process: dim values per node (dim = 1 for scalar processes).
class TreeProcess {
public:
    TreeProcess() = default;
    TreeProcess(TreePtr tree, std::vector<double> values, std::size_t dim = 1);

    const TreePtr& tree() const { return tree_; }
    const FiltrationTree& t() const { return *tree_; }
    std::size_t dim() const { return dim_; }
    double operator[](std::size_t v) const { return values_[v * dim_]; }
    double at(std::size_t v, std::size_t k) const { return values_[v * dim_ + k]; }
    const std::vector<double>& values() const { return values_; }

    // Scalar component k of a vector-valued process.
    TreeProcess component(std::size_t k) const;
    std::vector<double> leaf_values() const;
    std::vector<double> path_values(std::size_t leaf) const;
    double expectation(int n) const;
    bool is_martingale(double rel_tol = 1e-10) const;
    bool is_submartingale(double tol = 1e-10) const;

private:
    TreePtr tree_;
    std::vector<double> values_;
    std::size_t dim_ = 1;
};

// TreeProcess whose averaging property was verified at construction.
class Martingale : public TreeProcess {
public:
    Martingale() = default;
    explicit Martingale(TreeProcess p, double rel_tol = 1e-10);
    Martingale(TreePtr tree, std::vector<double> values, std::size_t dim = 1);
};

// tau(leaf) = level of the first marked node on the root-to-leaf path.
class StoppingRule {
public:
    StoppingRule(TreePtr tree, std::vector<char> marks);

    static StoppingRule constant(TreePtr tree, int n);
    static StoppingRule never(TreePtr tree);

    const TreePtr& tree() const { return tree_; }
    bool marked(std::size_t v) const { return marks_[v] != 0; }
    // Level at which the path through v stopped, if at or above v; kNever otherwise.
    int stopped_level(std::size_t v) const { return stop_level_[v]; }
    bool stopped_by(std::size_t v) const { return stop_level_[v] != kNever; }
    int tau(std::size_t leaf) const;
    bool bounded() const;

    StoppingRule min(const StoppingRule& other) const;
    StoppingRule max(const StoppingRule& other) const;

private:
    TreePtr tree_;
    std::vector<char> marks_;
    std::vector<int> stop_level_;
};

// Level-n node values of E(f | F_n) for a leaf function f.
std::vector<double> conditional_expectation(const FiltrationTree& tree, std::span<const double> leaf_f, int n);
// Node-wise E(f | F_level(v)).
TreeProcess backprop(const TreePtr& tree, std::span<const double> leaf_f);

StoppingRule hitting_time(const TreeProcess& f, const std::function<bool(double)>& in_b);
Martingale stop_process(const Martingale& f, const StoppingRule& tau);
TreeProcess stop_process(const TreeProcess& f, const StoppingRule& tau);
// Leaf function f_tau; tau must be bounded.
std::vector<double> sample_at(const TreeProcess& f, const StoppingRule& tau);
bool optional_sampling_check(const Martingale& f, const StoppingRule& sigma, const StoppingRule& tau,
                             double tol = 1e-10);

}  // namespace mtgl
