#include "mtgl/tree.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mtgl {

FiltrationTree::FiltrationTree(int depth, std::vector<int> child_counts, std::vector<double> leaf_probs)
    : depth_(depth) {
    if (depth < 0 || depth > kMaxTreeDepth)
        throw std::invalid_argument("tree depth must lie in [0, " + std::to_string(kMaxTreeDepth) + "]");
    level_start_.assign(depth + 2, 0);
    level_start_[1] = 1;
    std::size_t next = 1;
    for (int n = 0; n < depth; ++n) {
        for (std::size_t v = level_start_[n]; v < level_start_[n + 1]; ++v) {
            if (v >= child_counts.size())
                throw std::invalid_argument("child_counts too short for the declared depth");
            if (child_counts[v] < 1) throw std::invalid_argument("internal node without children");
            next += static_cast<std::size_t>(child_counts[v]);
        }
        level_start_[n + 2] = next;
    }
    if (child_counts.size() != level_start_[depth])
        throw std::invalid_argument("child_counts length does not match the internal node count");

    std::size_t count = level_start_[depth + 1];
    level_.assign(count, 0);
    parent_.assign(count, 0);
    first_child_.assign(count, count);
    child_count_.assign(count, 0);
    std::size_t c = 1;
    for (int n = 0; n < depth; ++n) {
        for (std::size_t v = level_start_[n]; v < level_start_[n + 1]; ++v) {
            first_child_[v] = c;
            child_count_[v] = child_counts[v];
            for (int i = 0; i < child_counts[v]; ++i, ++c) {
                parent_[c] = v;
                level_[c] = n + 1;
            }
        }
    }

    if (leaf_probs.size() != leaf_count())
        throw std::invalid_argument("leaf_probs length does not match the leaf count");
    prob_.assign(count, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < leaf_probs.size(); ++i) {
        if (!(leaf_probs[i] > 0.0)) throw std::invalid_argument("leaf probabilities must be positive");
        prob_[leaf_node(i)] = leaf_probs[i];
        total += leaf_probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("leaf probabilities must sum to 1");
    for (std::size_t v = count - 1; v > 0 && level_[v] > 0; --v) prob_[parent_[v]] += prob_[v];
}

std::shared_ptr<const FiltrationTree> FiltrationTree::uniform(int depth, int branching) {
    if (branching < 1) throw std::invalid_argument("branching must be >= 1");
    if (depth < 0 || depth > kMaxTreeDepth) throw std::invalid_argument("tree depth out of range");
    std::size_t internal = 0, width = 1;
    for (int n = 0; n < depth; ++n) {
        internal += width;
        width *= static_cast<std::size_t>(branching);
    }
    std::vector<double> probs(width, 1.0 / static_cast<double>(width));
    return std::make_shared<const FiltrationTree>(depth, std::vector<int>(internal, branching), std::move(probs));
}

std::size_t FiltrationTree::ancestor(std::size_t v, int n) const {
    while (level_[v] > n) v = parent_[v];
    return v;
}

std::vector<std::size_t> FiltrationTree::path(std::size_t leaf) const {
    std::vector<std::size_t> p(depth_ + 1);
    std::size_t v = leaf_node(leaf);
    for (int n = depth_; n >= 0; --n) {
        p[n] = v;
        v = parent_[v];
    }
    return p;
}

std::vector<double> FiltrationTree::leaf_probs() const {
    return {prob_.begin() + static_cast<std::ptrdiff_t>(level_start_[depth_]), prob_.end()};
}

std::vector<int> FiltrationTree::child_counts() const {
    return {child_count_.begin(), child_count_.begin() + static_cast<std::ptrdiff_t>(level_start_[depth_])};
}

TreeProcess::TreeProcess(TreePtr tree, std::vector<double> values, std::size_t dim)
    : tree_(std::move(tree)), values_(std::move(values)), dim_(dim) {
    if (!tree_) throw std::invalid_argument("process without a tree");
    if (dim_ < 1 || dim_ > kMaxFamily) throw std::invalid_argument("process dimension must lie in [1, 64]");
    if (values_.size() != tree_->node_count() * dim_)
        throw std::invalid_argument("process value count does not match the tree");
}

TreeProcess TreeProcess::component(std::size_t k) const {
    std::vector<double> v(t().node_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i, k);
    return {tree_, std::move(v)};
}

std::vector<double> TreeProcess::leaf_values() const {
    std::vector<double> out(t().leaf_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[t().leaf_node(i)];
    return out;
}

std::vector<double> TreeProcess::path_values(std::size_t leaf) const {
    auto p = t().path(leaf);
    std::vector<double> out(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) out[n] = (*this)[p[n]];
    return out;
}

double TreeProcess::expectation(int n) const {
    double s = 0.0;
    for (std::size_t v = t().level_begin(n); v < t().level_end(n); ++v) s += t().prob(v) * (*this)[v];
    return s;
}

bool TreeProcess::is_martingale(double rel_tol) const {
    const auto& tr = t();
    // Cancellation leaves rounding of the size of the operands, so the scale
    // never drops below prob(a) * max |f|.
    double peak = 0.0;
    for (double x : values_) peak = std::max(peak, std::abs(x));
    for (std::size_t k = 0; k < dim_; ++k) {
        for (std::size_t a = 0; a < tr.level_begin(tr.depth()); ++a) {
            double lhs = at(a, k) * tr.prob(a);
            double rhs = 0.0, scale = std::abs(lhs) + peak * tr.prob(a);
            for (int i = 0; i < tr.child_count(a); ++i) {
                std::size_t c = tr.first_child(a) + static_cast<std::size_t>(i);
                rhs += at(c, k) * tr.prob(c);
                scale += std::abs(at(c, k)) * tr.prob(c);
            }
            if (std::abs(lhs - rhs) > rel_tol * scale) return false;
        }
    }
    return true;
}

bool TreeProcess::is_submartingale(double tol) const {
    const auto& tr = t();
    // Cancellation leaves rounding of the size of the operands, so the scale
    // never drops below prob(a) * max |f|.
    double peak = 0.0;
    for (double x : values_) peak = std::max(peak, std::abs(x));
    for (std::size_t k = 0; k < dim_; ++k) {
        for (std::size_t a = 0; a < tr.level_begin(tr.depth()); ++a) {
            double lhs = at(a, k) * tr.prob(a);
            double rhs = 0.0, scale = std::abs(lhs) + peak * tr.prob(a);
            for (int i = 0; i < tr.child_count(a); ++i) {
                std::size_t c = tr.first_child(a) + static_cast<std::size_t>(i);
                rhs += at(c, k) * tr.prob(c);
                scale += std::abs(at(c, k)) * tr.prob(c);
            }
            if (lhs > rhs + tol * scale) return false;
        }
    }
    return true;
}

Martingale::Martingale(TreeProcess p, double rel_tol) : TreeProcess(std::move(p)) {
    if (!is_martingale(rel_tol)) throw std::invalid_argument("process violates the martingale averaging property");
}

Martingale::Martingale(TreePtr tree, std::vector<double> values, std::size_t dim)
    : Martingale(TreeProcess(std::move(tree), std::move(values), dim)) {}

StoppingRule::StoppingRule(TreePtr tree, std::vector<char> marks) : tree_(std::move(tree)), marks_(std::move(marks)) {
    if (!tree_) throw std::invalid_argument("stopping rule without a tree");
    if (marks_.size() != tree_->node_count()) throw std::invalid_argument("mark count does not match the tree");
    stop_level_.assign(marks_.size(), kNever);
    for (std::size_t v = 0; v < marks_.size(); ++v) {
        int inherited = v == 0 ? kNever : stop_level_[tree_->parent(v)];
        stop_level_[v] = inherited != kNever ? inherited : (marks_[v] ? tree_->level(v) : kNever);
    }
}

StoppingRule StoppingRule::constant(TreePtr tree, int n) {
    std::vector<char> m(tree->node_count(), 0);
    if (n >= 0 && n <= tree->depth())
        for (std::size_t v = tree->level_begin(n); v < tree->level_end(n); ++v) m[v] = 1;
    return {std::move(tree), std::move(m)};
}

StoppingRule StoppingRule::never(TreePtr tree) {
    std::vector<char> m(tree->node_count(), 0);
    return {std::move(tree), std::move(m)};
}

int StoppingRule::tau(std::size_t leaf) const { return stop_level_[tree_->leaf_node(leaf)]; }

bool StoppingRule::bounded() const {
    for (std::size_t i = 0; i < tree_->leaf_count(); ++i)
        if (tau(i) == kNever) return false;
    return true;
}

StoppingRule StoppingRule::min(const StoppingRule& other) const {
    if (tree_ != other.tree_) throw std::invalid_argument("stopping rules live on different trees");
    std::vector<char> m(marks_.size());
    for (std::size_t v = 0; v < m.size(); ++v) m[v] = marks_[v] || other.marks_[v];
    return {tree_, std::move(m)};
}

StoppingRule StoppingRule::max(const StoppingRule& other) const {
    if (tree_ != other.tree_) throw std::invalid_argument("stopping rules live on different trees");
    std::vector<char> m(marks_.size());
    for (std::size_t v = 0; v < m.size(); ++v) m[v] = stopped_by(v) && other.stopped_by(v);
    return {tree_, std::move(m)};
}

TreeProcess backprop(const TreePtr& tree, std::span<const double> leaf_f) {
    const auto& tr = *tree;
    if (leaf_f.size() != tr.leaf_count()) throw std::invalid_argument("leaf function size mismatch");
    std::vector<double> acc(tr.node_count(), 0.0);
    for (std::size_t i = 0; i < leaf_f.size(); ++i) acc[tr.leaf_node(i)] = leaf_f[i] * tr.leaf_prob(i);
    for (std::size_t v = tr.node_count() - 1; v > 0; --v) acc[tr.parent(v)] += acc[v];
    for (std::size_t v = 0; v < acc.size(); ++v) acc[v] /= tr.prob(v);
    for (std::size_t i = 0; i < leaf_f.size(); ++i) acc[tr.leaf_node(i)] = leaf_f[i];
    return {tree, std::move(acc)};
}

std::vector<double> conditional_expectation(const FiltrationTree& tree, std::span<const double> leaf_f, int n) {
    if (n < 0 || n > tree.depth()) throw std::out_of_range("conditional expectation level out of range");
    if (leaf_f.size() != tree.leaf_count()) throw std::invalid_argument("leaf function size mismatch");
    std::vector<double> acc(tree.node_count(), 0.0);
    for (std::size_t i = 0; i < leaf_f.size(); ++i) acc[tree.leaf_node(i)] = leaf_f[i] * tree.leaf_prob(i);
    for (std::size_t v = tree.node_count() - 1; v >= tree.level_end(n); --v) acc[tree.parent(v)] += acc[v];
    std::vector<double> out(tree.level_size(n));
    for (std::size_t v = tree.level_begin(n); v < tree.level_end(n); ++v)
        out[v - tree.level_begin(n)] = n == tree.depth() ? leaf_f[v - tree.level_begin(n)] : acc[v] / tree.prob(v);
    return out;
}

StoppingRule hitting_time(const TreeProcess& f, const std::function<bool(double)>& in_b) {
    std::vector<char> m(f.t().node_count());
    for (std::size_t v = 0; v < m.size(); ++v) m[v] = in_b(f[v]) ? 1 : 0;
    return {f.tree(), std::move(m)};
}

TreeProcess stop_process(const TreeProcess& f, const StoppingRule& tau) {
    if (f.tree() != tau.tree()) throw std::invalid_argument("process and stopping rule live on different trees");
    const auto& tr = f.t();
    std::vector<double> out(f.values().size());
    for (std::size_t v = 0; v < tr.node_count(); ++v) {
        std::size_t src = tau.stopped_by(v) ? tr.ancestor(v, tau.stopped_level(v)) : v;
        for (std::size_t k = 0; k < f.dim(); ++k) out[v * f.dim() + k] = f.at(src, k);
    }
    return {f.tree(), std::move(out), f.dim()};
}

Martingale stop_process(const Martingale& f, const StoppingRule& tau) {
    return Martingale(stop_process(static_cast<const TreeProcess&>(f), tau));
}

std::vector<double> sample_at(const TreeProcess& f, const StoppingRule& tau) {
    const auto& tr = f.t();
    std::vector<double> out(tr.leaf_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        int s = tau.tau(i);
        if (s == kNever) throw std::invalid_argument("sampling at an unbounded stopping time");
        out[i] = f[tr.ancestor(tr.leaf_node(i), s)];
    }
    return out;
}

bool optional_sampling_check(const Martingale& f, const StoppingRule& sigma, const StoppingRule& tau, double tol) {
    if (!tau.bounded()) throw std::invalid_argument("optional sampling needs a bounded tau");
    const auto& tr = f.t();
    auto lhs = sample_at(f, sigma.min(tau));
    auto f_tau = sample_at(f, tau);
    auto cond = backprop(f.tree(), f_tau);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        int s = sigma.tau(i);
        double rhs = s == kNever ? f_tau[i] : cond[tr.ancestor(tr.leaf_node(i), s)];
        if (std::abs(lhs[i] - rhs) > tol * std::max(1.0, std::abs(rhs))) return false;
    }
    return true;
}

}  // namespace mtgl
