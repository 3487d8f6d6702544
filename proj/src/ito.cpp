#include "mtgl/ito.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mtgl/generators.hpp"
#include "mtgl/rng.hpp"
#include "mtgl/serialize.hpp"
#include "mtgl/variation.hpp"

namespace mtgl {

namespace {

void check_grid(std::size_t N) {
    if (N == 0 || N > kMaxItoGrid) throw std::invalid_argument("Ito grid size must lie in [1, 4096]");
}

double lq(const std::vector<double>& x, const GridCadlagPath& f, double q) {
    if (std::isinf(q)) return *std::max_element(x.begin(), x.end());
    double s = 0.0, w = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
        s += f.weight(p) * std::pow(std::abs(x[p]), q);
        w += f.weight(p);
    }
    return std::pow(s / w, 1.0 / q);
}

void require_pair(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi) {
    if (!f.same_ensemble(g)) throw std::invalid_argument("integrand and integrator must share the path ensemble");
    if (pi.N() != f.N() || pi.paths() != f.paths()) throw std::invalid_argument("partition does not match the paths");
}

std::vector<double> path_copy(const GridCadlagPath& f, std::size_t p) {
    auto s = f.path(p);
    return {s.begin(), s.end()};
}

// Cumulative block covariation at each grid index along path p, taken at floor(k).
std::vector<double> covariation_prefix(const GridCadlagPath& f, const GridCadlagPath& g,
                                       const AdaptedGridPartition& pi, std::size_t p) {
    const auto& pts = pi.points(p);
    std::vector<double> at_point(pts.size(), 0.0);
    for (std::size_t j = 1; j < pts.size(); ++j)
        at_point[j] = at_point[j - 1] + (f(p, pts[j]) - f(p, pts[j - 1])) * (g(p, pts[j]) - g(p, pts[j - 1]));
    std::vector<double> out(f.N() + 1);
    std::size_t j = 0;
    for (std::size_t k = 0; k <= f.N(); ++k) {
        while (j + 1 < pts.size() && pts[j + 1] <= k) ++j;
        out[k] = at_point[j];
    }
    return out;
}

}  // namespace

GridCadlagPath::GridCadlagPath(double T, std::size_t N, std::vector<double> values, std::vector<double> weights,
                               bool sampled, TreePtr tree)
    : T_(T), n_(N), values_(std::move(values)), weights_(std::move(weights)), sampled_(sampled), tree_(std::move(tree)) {
    check_grid(N);
    if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (weights_.empty() || values_.size() != weights_.size() * (N + 1))
        throw std::invalid_argument("path values do not match N + 1 per path");
    if (tree_ && (tree_->depth() != static_cast<int>(N) || tree_->leaf_count() != weights_.size()))
        throw std::invalid_argument("tree does not match the enumerated paths");
}

GridCadlagPath GridCadlagPath::from_tree(const TreeProcess& f, double T, std::size_t samples, std::uint64_t seed) {
    const auto& tree = f.t();
    std::size_t N = static_cast<std::size_t>(tree.depth());
    std::vector<double> values, weights;
    if (tree.leaf_count() <= kMaxEnumeratedPaths) {
        for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
            auto pv = f.path_values(leaf);
            values.insert(values.end(), pv.begin(), pv.end());
            weights.push_back(tree.leaf_prob(leaf));
        }
        return {T, N, std::move(values), std::move(weights), false, f.tree()};
    }
    if (samples == 0) throw std::invalid_argument("sampling needs at least one path");
    Rng rng(seed, 17);
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t v = 0;
        values.push_back(f[v]);
        for (std::size_t k = 0; k < N; ++k) {
            double u = rng.uniform() * tree.prob(v), acc = 0.0;
            std::size_t c = tree.first_child(v), last = c + static_cast<std::size_t>(tree.child_count(v)) - 1;
            for (; c < last; ++c) {
                acc += tree.prob(c);
                if (u < acc) break;
            }
            v = c;
            values.push_back(f[v]);
        }
        weights.push_back(1.0 / static_cast<double>(samples));
    }
    return {T, N, std::move(values), std::move(weights), true};
}

GridCadlagPath GridCadlagPath::scaled_walk(std::size_t N, std::size_t samples, std::uint64_t seed, double T) {
    check_grid(N);
    if (N <= 20) return from_tree(gen_scaled_walk(static_cast<int>(N)), T);
    if (samples == 0) throw std::invalid_argument("sampling needs at least one path");
    double step = 1.0 / std::sqrt(static_cast<double>(N));
    Rng rng(seed, 19);
    std::vector<double> values;
    values.reserve(samples * (N + 1));
    for (std::size_t s = 0; s < samples; ++s) {
        double x = 0.0;
        values.push_back(x);
        for (std::size_t k = 0; k < N; ++k) {
            x += rng.coin() ? step : -step;
            values.push_back(x);
        }
    }
    return {T, N, std::move(values), std::vector<double>(samples, 1.0 / static_cast<double>(samples)), true};
}

GridCadlagPath GridCadlagPath::adapted(const GridCadlagPath& g,
                                       const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> values;
    values.reserve(g.values_.size());
    for (std::size_t p = 0; p < g.paths(); ++p) {
        auto path = g.path(p);
        for (std::size_t k = 0; k <= g.N(); ++k) values.push_back(fn(path.first(k + 1)));
    }
    return {g.T_, g.n_, std::move(values), g.weights_, g.sampled_, g.tree_};
}

GridCadlagPath GridCadlagPath::constant(const GridCadlagPath& like, double c) {
    return {like.T_, like.n_, std::vector<double>(like.values_.size(), c), like.weights_, like.sampled_, like.tree_};
}

double GridCadlagPath::value_at(std::size_t p, double t) const {
    if (t <= 0.0) return (*this)(p, 0);
    auto k = static_cast<std::size_t>(std::floor(t / T_ * static_cast<double>(n_)));
    return (*this)(p, std::min(k, n_));
}

bool GridCadlagPath::same_ensemble(const GridCadlagPath& o) const {
    return n_ == o.n_ && T_ == o.T_ && weights_ == o.weights_ && tree_ == o.tree_ && sampled_ == o.sampled_;
}

AdaptedGridPartition::AdaptedGridPartition(std::size_t N, std::vector<std::vector<std::size_t>> points)
    : n_(N), points_(std::move(points)) {
    check_grid(N);
    if (points_.empty()) throw std::invalid_argument("partition needs at least one path");
    for (const auto& pts : points_) {
        if (pts.empty() || pts.front() != 0 || pts.back() != N)
            throw std::invalid_argument("partition must start at 0 and end at N");
        for (std::size_t j = 1; j < pts.size(); ++j)
            if (pts[j] <= pts[j - 1]) throw std::invalid_argument("partition must be strictly increasing");
    }
}

AdaptedGridPartition AdaptedGridPartition::endpoints(std::size_t N, std::size_t paths) {
    return {N, std::vector<std::vector<std::size_t>>(paths, {0, N})};
}

AdaptedGridPartition AdaptedGridPartition::grid(std::size_t N, std::size_t paths, std::size_t stride) {
    if (stride == 0) throw std::invalid_argument("grid stride must be positive");
    std::vector<std::size_t> pts;
    for (std::size_t k = 0; k < N; k += stride) pts.push_back(k);
    pts.push_back(N);
    return {N, std::vector<std::vector<std::size_t>>(paths, pts)};
}

AdaptedGridPartition AdaptedGridPartition::epsilon_oscillation(const GridCadlagPath& f, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("oscillation threshold must be positive");
    std::vector<std::vector<std::size_t>> all(f.paths());
    for (std::size_t p = 0; p < f.paths(); ++p) {
        auto& pts = all[p];
        pts.push_back(0);
        for (std::size_t k = 1; k < f.N(); ++k)
            if (std::abs(f(p, k) - f(p, pts.back())) >= eps) pts.push_back(k);
        pts.push_back(f.N());
    }
    return {f.N(), std::move(all)};
}

std::size_t AdaptedGridPartition::floor_index(std::size_t p, std::size_t k) const {
    const auto& pts = points_[p];
    return *(std::upper_bound(pts.begin(), pts.end(), k) - 1);
}

bool AdaptedGridPartition::contains(std::size_t p, std::size_t k) const {
    return std::binary_search(points_[p].begin(), points_[p].end(), k);
}

AdaptedGridPartition AdaptedGridPartition::unite(const AdaptedGridPartition& o) const {
    if (o.n_ != n_ || o.paths() != paths()) throw std::invalid_argument("partitions live on different ensembles");
    std::vector<std::vector<std::size_t>> all(paths());
    for (std::size_t p = 0; p < paths(); ++p)
        std::set_union(points_[p].begin(), points_[p].end(), o.points_[p].begin(), o.points_[p].end(),
                       std::back_inserter(all[p]));
    return {n_, std::move(all)};
}

AdaptedGridPartition AdaptedGridPartition::refine(int n) const {
    if (n < 0 || n > 30) throw std::invalid_argument("refinement level out of range");
    std::size_t cells = std::size_t{1} << n;
    std::size_t stride = 1;
    if (cells < n_) {
        if (n_ % cells != 0) throw std::invalid_argument("grid size is not divisible by 2^n");
        stride = n_ / cells;
    }
    return unite(grid(n_, paths(), stride));
}

bool AdaptedGridPartition::subset_of(const AdaptedGridPartition& o) const {
    if (o.n_ != n_ || o.paths() != paths()) return false;
    for (std::size_t p = 0; p < paths(); ++p)
        if (!std::includes(o.points_[p].begin(), o.points_[p].end(), points_[p].begin(), points_[p].end()))
            return false;
    return true;
}

std::vector<StoppingRule> AdaptedGridPartition::stopping_rules(const TreePtr& tree) const {
    if (!tree || tree->leaf_count() != paths() || tree->depth() != static_cast<int>(n_))
        throw std::invalid_argument("tree does not match the partition's paths");
    std::size_t count = 0;
    for (const auto& pts : points_) count = std::max(count, pts.size());
    std::vector<StoppingRule> rules;
    for (std::size_t j = 0; j < count; ++j) {
        std::vector<char> marks(tree->node_count(), 0);
        for (std::size_t p = 0; p < paths(); ++p)
            if (j < points_[p].size())
                marks[tree->ancestor(tree->leaf_node(p), static_cast<int>(points_[p][j]))] = 1;
        StoppingRule rule(tree, std::move(marks));
        for (std::size_t p = 0; p < paths(); ++p) {
            int want = j < points_[p].size() ? static_cast<int>(points_[p][j]) : kNever;
            if (rule.tau(p) != want)
                throw std::invalid_argument("partition point is not a stopping time of the tree filtration");
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

double floor_time(double t, const AdaptedGridPartition& pi, const GridCadlagPath& f, std::size_t p) {
    if (t < 0.0) throw std::invalid_argument("floor_time needs t >= 0");
    auto k = static_cast<std::size_t>(std::floor(t / f.T() * static_cast<double>(f.N())));
    return f.time(pi.floor_index(p, std::min(k, f.N())));
}

double ito_sum(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi, std::size_t p,
               std::size_t t, std::size_t t2) {
    if (t > t2 || t2 > f.N()) throw std::invalid_argument("ito_sum needs t <= t' <= N");
    const auto& pts = pi.points(p);
    std::size_t a = pi.floor_index(p, t);
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        if (pts[j] <= t || pts[j] >= t2) continue;
        std::size_t next = std::min(pts[j + 1], t2);
        sum += (f(p, pts[j]) - f(p, a)) * (g(p, next) - g(p, pts[j]));
    }
    return sum;
}

TwoParamArray ito_matrix(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                         std::size_t p) {
    std::size_t N = f.N();
    TwoParamArray m(N + 1);
    std::vector<std::size_t> fl(N + 1);
    for (std::size_t k = 0; k <= N; ++k) fl[k] = pi.floor_index(p, k);
    for (std::size_t t = 0; t <= N; ++t) {
        double fa = f(p, fl[t]), acc = 0.0;
        // Stepping t' by one adds the open block's term when that block starts after t.
        for (std::size_t k = t; k < N; ++k) {
            if (fl[k] > t) acc += (f(p, fl[k]) - fa) * (g(p, k + 1) - g(p, k));
            m(t, k + 1) = acc;
        }
    }
    return m;
}

GridCadlagPath discretize(const GridCadlagPath& f, const AdaptedGridPartition& pi) {
    if (pi.N() != f.N() || pi.paths() != f.paths()) throw std::invalid_argument("partition does not match the paths");
    std::vector<double> values;
    values.reserve(f.paths() * (f.N() + 1));
    for (std::size_t p = 0; p < f.paths(); ++p)
        for (std::size_t k = 0; k <= f.N(); ++k) values.push_back(f(p, pi.floor_index(p, k)));
    std::vector<double> w(f.paths());
    for (std::size_t p = 0; p < f.paths(); ++p) w[p] = f.weight(p);
    return {f.T(), f.N(), std::move(values), std::move(w), f.sampled(), f.tree()};
}

double covariation_sum(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                       std::size_t p, std::size_t t, std::size_t t2) {
    if (t > t2 || t2 > f.N()) throw std::invalid_argument("covariation_sum needs t <= t' <= N");
    std::size_t a = pi.floor_index(p, t), b = pi.floor_index(p, t2);
    const auto& pts = pi.points(p);
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
        if (pts[j] >= a && pts[j] < b) sum += (f(p, pts[j + 1]) - f(p, pts[j])) * (g(p, pts[j + 1]) - g(p, pts[j]));
    return sum;
}

nlohmann::json IdentityResiduals::to_json() const {
    return {{"chen", chen}, {"integration_by_parts", integration_by_parts}, {"coarsening", coarsening}};
}

IdentityResiduals ito_identity_residuals(const GridCadlagPath& f, const GridCadlagPath& g,
                                         const AdaptedGridPartition& pi, const AdaptedGridPartition& tau,
                                         std::size_t max_paths, Exec exec) {
    require_pair(f, g, pi);
    if (!pi.subset_of(tau)) throw std::invalid_argument("coarsening identity needs pi inside tau");
    std::size_t P = std::min(max_paths, f.paths()), N = f.N();
    GridCadlagPath fpi = discretize(f, pi);
    std::vector<IdentityResiduals> per(P);
    for_each_index(P, exec, [&](std::size_t p) {
        auto& res = per[p];
        auto fg = ito_matrix(f, g, pi, p);
        auto gf = ito_matrix(g, f, pi, p);
        auto coarse = ito_matrix(fpi, g, tau, p);
        auto cov = covariation_prefix(f, g, pi, p);
        for (std::size_t t = 0; t <= N; ++t) {
            std::size_t a = pi.floor_index(p, t);
            for (std::size_t t2 = t; t2 <= N; ++t2) {
                std::size_t b = pi.floor_index(p, t2);
                res.coarsening = std::max(res.coarsening, std::abs(fg(t, t2) - coarse(t, t2)));
                double pfg = b > t ? fg(t, b) : 0.0, pgf = b > t ? gf(t, b) : 0.0;
                double lhs = (f(p, b) - f(p, a)) * (g(p, b) - g(p, a)) - pfg - pgf;
                res.integration_by_parts = std::max(res.integration_by_parts, std::abs(lhs - (cov[t2] - cov[t])));
                double df = f(p, b) - f(p, a);
                for (std::size_t t3 = t2; t3 <= N; ++t3) {
                    double r = fg(t, t3) - fg(t, t2) - fg(t2, t3) - df * (g(p, t3) - g(p, t2));
                    res.chen = std::max(res.chen, std::abs(r));
                }
            }
        }
    });
    IdentityResiduals out;
    for (const auto& r : per) {
        out.chen = std::max(out.chen, r.chen);
        out.integration_by_parts = std::max(out.integration_by_parts, r.integration_by_parts);
        out.coarsening = std::max(out.coarsening, r.coarsening);
    }
    return out;
}

double orthogonality_residual(const GridCadlagPath& f, const AdaptedGridPartition& pi, std::size_t t, std::size_t t2) {
    if (!f.tree()) throw std::invalid_argument("conditional expectations need a tree-backed ensemble");
    if (t > t2 || t2 > f.N()) throw std::invalid_argument("orthogonality check needs t <= t' <= N");
    const auto& tree = *f.tree();
    std::map<std::size_t, std::array<double, 3>> atoms;
    for (std::size_t p = 0; p < f.paths(); ++p) {
        if (!pi.contains(p, t) || !pi.contains(p, t2))
            throw std::invalid_argument("partition must contain t and t' on every path");
        double cov = covariation_sum(f, f, pi, p, t, t2);
        double d = f(p, t2) - f(p, t);
        auto& acc = atoms[tree.ancestor(tree.leaf_node(p), static_cast<int>(t))];
        acc[0] += f.weight(p) * cov;
        acc[1] += f.weight(p) * d * d;
        acc[2] += f.weight(p);
    }
    double worst = 0.0;
    for (const auto& [node, acc] : atoms) worst = std::max(worst, std::abs(acc[0] - acc[1]) / acc[2]);
    return worst;
}

double ito_martingale_residual(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                               std::size_t s) {
    require_pair(f, g, pi);
    if (!f.tree()) throw std::invalid_argument("conditional expectations need a tree-backed ensemble");
    const auto& tree = *f.tree();
    double worst = 0.0;
    for (std::size_t k = s; k < f.N(); ++k) {
        std::map<std::size_t, std::array<double, 2>> atoms;
        for (std::size_t p = 0; p < f.paths(); ++p) {
            double inc = ito_sum(f, g, pi, p, s, k + 1) - ito_sum(f, g, pi, p, s, k);
            auto& acc = atoms[tree.ancestor(tree.leaf_node(p), static_cast<int>(k))];
            acc[0] += f.weight(p) * inc;
            acc[1] += f.weight(p);
        }
        for (const auto& [node, acc] : atoms) worst = std::max(worst, std::abs(acc[0]) / acc[1]);
    }
    return worst;
}

nlohmann::json RefinementDiagnostics::to_json() const {
    return {{"levels", levels},
            {"cauchy", cauchy},
            {"discretization", discretization},
            {"cauchy_nonincreasing", cauchy_nonincreasing},
            {"discretization_nonincreasing", discretization_nonincreasing},
            {"sampled", sampled}};
}

RefinementDiagnostics refine_converge(const GridCadlagPath& f, const GridCadlagPath& g,
                                      const AdaptedGridPartition& base, int first_level, int count,
                                      const RefineOptions& opt) {
    require_pair(f, g, base);
    if (count < 1) throw std::invalid_argument("refinement needs at least one level");
    RefinementDiagnostics diag;
    diag.sampled = f.sampled();
    std::vector<AdaptedGridPartition> parts;
    for (int n = first_level; n < first_level + count; ++n) {
        diag.levels.push_back(n);
        parts.push_back(base.refine(n));
    }
    std::size_t P = f.paths(), L = parts.size();
    std::vector<std::vector<double>> cauchy(L > 1 ? L - 1 : 0, std::vector<double>(P)),
        disc(L, std::vector<double>(P));
    for_each_index(P, opt.exec, [&](std::size_t p) {
        TwoParamArray prev;
        auto fp = path_copy(f, p);
        for (std::size_t l = 0; l < L; ++l) {
            auto cur = ito_matrix(f, g, parts[l], p);
            if (l > 0) cauchy[l - 1][p] = two_param_variation(difference(prev, cur), opt.r);
            std::vector<double> err(fp.size());
            for (std::size_t k = 0; k < fp.size(); ++k) err[k] = fp[k] - fp[parts[l].floor_index(p, k)];
            disc[l][p] = variation(err, opt.p_tilde).value;
            prev = std::move(cur);
        }
    });
    for (const auto& c : cauchy) diag.cauchy.push_back(lq(c, f, opt.q));
    for (const auto& d : disc) diag.discretization.push_back(lq(d, f, opt.q));
    auto monotone = [&](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[i - 1] * (1.0 + opt.rel_tol) + 1e-15) return false;
        return true;
    };
    diag.cauchy_nonincreasing = monotone(diag.cauchy);
    diag.discretization_nonincreasing = monotone(diag.discretization);
    return diag;
}

CheckReport ito_bound_check(const GridCadlagPath& f, const GridCadlagPath& g, const AdaptedGridPartition& pi,
                            const ItoExponents& e, Exec exec) {
    require_pair(f, g, pi);
    if (!(e.r > 0.0 && e.p1 > 0.0 && e.q0 >= 1.0 && e.q1 > 0.0))
        throw std::invalid_argument("exponents out of range");
    if (!(1.0 / e.r < 1.0 / e.p1 + 0.5)) throw std::invalid_argument("exponents need 1/r < 1/p1 + 1/2");
    double q = 1.0 / (1.0 / e.q0 + 1.0 / e.q1);
    std::size_t P = f.paths();
    std::vector<double> lhs(P), fv(P), gv(P);
    GridCadlagPath fpi = discretize(f, pi);
    for_each_index(P, exec, [&](std::size_t p) {
        lhs[p] = two_param_variation(ito_matrix(f, g, pi, p), e.r);
        fv[p] = variation(fpi.path(p), e.p1).value;
        gv[p] = max_oscillation(g.path(p));
    });
    CheckReport rep;
    rep.check = "ito_bound";
    rep.params = {{"r", e.r}, {"p1", e.p1}, {"q0", e.q0}, {"q1", e.q1}};
    rep.trials = P;
    double l = lq(lhs, f, q), r = lq(fv, f, e.q1) * lq(gv, f, e.q0);
    rep.measurements = {{"lhs", l}, {"rhs", r}, {"ratio", l == 0.0 && r == 0.0 ? 0.0 : l / r}, {"sampled", f.sampled()}};
    return rep;
}

void write_path_csv(const std::string& file, const GridCadlagPath& f, std::size_t p) {
    std::ostringstream out;
    out.precision(17);
    out << "t,value\n";
    for (std::size_t k = 0; k <= f.N(); ++k) out << f.time(k) << "," << f(p, k) << "\n";
    write_file_atomic(file, out.str());
}

void write_partition_csv(const std::string& file, const AdaptedGridPartition& pi, double T) {
    std::ostringstream out;
    out.precision(17);
    out << "path_id,j,tau_j\n";
    for (std::size_t p = 0; p < pi.paths(); ++p)
        for (std::size_t j = 0; j < pi.points(p).size(); ++j)
            out << p << "," << j << "," << T * static_cast<double>(pi.points(p)[j]) / static_cast<double>(pi.N())
                << "\n";
    write_file_atomic(file, out.str());
}

}  // namespace mtgl
