#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/rng.hpp"
#include "mtgl/rough.hpp"

namespace mtgl {

Interp parse_interp(const std::string& name) {
    if (name == "linear") return Interp::Linear;
    if (name == "constant") return Interp::Constant;
    throw std::invalid_argument("unknown interpolation: " + name);
}

std::string interp_name(Interp i) { return i == Interp::Linear ? "linear" : "constant"; }

std::vector<double> uniform_grid(double T, std::size_t n) {
    if (!(T > 0.0) || n == 0) throw std::invalid_argument("grid needs T > 0 and at least one interval");
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(n);
    t[n] = T;
    return t;
}

SampledPath::SampledPath(std::vector<double> times, std::vector<double> values, std::size_t dim, Interp interp)
    : times_(std::move(times)), values_(std::move(values)), dim_(dim), interp_(interp) {
    if (times_.empty()) throw std::invalid_argument("path needs at least one grid time");
    if (dim_ == 0 || values_.size() != times_.size() * dim_)
        throw std::invalid_argument("path values do not match grid size times dimension");
    if (times_.front() != 0.0) throw std::invalid_argument("path grid must start at 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("path grid must be strictly increasing");
}

SampledPath SampledPath::from_function(const std::vector<double>& times, const std::function<double(double)>& f,
                                       Interp interp) {
    std::vector<double> v(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) v[i] = f(times[i]);
    return {times, std::move(v), 1, interp};
}

double SampledPath::value_at(double t, std::size_t k) const {
    if (t <= 0.0) return (*this)(0, k);
    if (t >= horizon()) return (*this)(size() - 1, k);
    std::size_t i = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
    if (interp_ == Interp::Constant || times_[i] == t) return (*this)(i, k);
    double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
    return (1.0 - w) * (*this)(i, k) + w * (*this)(i + 1, k);
}

SampledPath SampledPath::resample(const std::vector<double>& times) const {
    std::vector<double> v;
    v.reserve(times.size() * dim_);
    for (double t : times)
        for (std::size_t k = 0; k < dim_; ++k) v.push_back(value_at(t, k));
    return {times, std::move(v), dim_, interp_};
}

SampledPath SampledPath::restrict(std::size_t begin, std::size_t end) const {
    if (begin > end || end >= size()) throw std::out_of_range("path restriction out of range");
    std::vector<double> t, v;
    for (std::size_t i = begin; i <= end; ++i) {
        t.push_back(times_[i] - times_[begin]);
        for (std::size_t k = 0; k < dim_; ++k) v.push_back((*this)(i, k));
    }
    return {std::move(t), std::move(v), dim_, interp_};
}

double SampledPath::variation(double r) const { return mtgl::variation(values_, dim_, r).value; }

double SampledPath::sup_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        double s = 0.0;
        for (double x : point(i)) s += x * x;
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

SampledPath difference(const SampledPath& a, const SampledPath& b) {
    if (a.times() != b.times() || a.dim() != b.dim()) throw std::invalid_argument("paths live on different grids");
    std::vector<double> v(a.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
    return {a.times(), std::move(v), a.dim(), a.interp()};
}

TwoParamField::TwoParamField(std::size_t n, std::size_t m) : n_(n), m_(m), data_(n * n * m, 0.0) {
    if (n > kMaxRoughGrid + 1) throw std::invalid_argument("two-parameter field exceeds the rough-layer grid guard");
}

double TwoParamField::norm(std::size_t s, std::size_t t) const {
    double acc = 0.0;
    for (double x : at(s, t)) acc += x * x;
    return std::sqrt(acc);
}

double TwoParamField::variation(double rho) const {
    return chain_variation(n_, [&](std::size_t i, std::size_t j) { return norm(i, j); }, rho).value;
}

TwoParamField TwoParamField::restrict(std::size_t begin, std::size_t end) const {
    if (begin > end || end >= n_) throw std::out_of_range("field restriction out of range");
    TwoParamField out(end - begin + 1, m_);
    for (std::size_t s = begin; s <= end; ++s)
        for (std::size_t t = s; t <= end; ++t) std::copy_n(at(s, t).begin(), m_, out.at(s - begin, t - begin).begin());
    return out;
}

TwoParamField difference(const TwoParamField& a, const TwoParamField& b) {
    if (a.n_ != b.n_ || a.m_ != b.m_) throw std::invalid_argument("fields differ in shape");
    TwoParamField out(a.n_, a.m_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) out.data_[i] = a.data_[i] - b.data_[i];
    return out;
}

PathVariationControl::PathVariationControl(const SampledPath& path, double r)
    : values_(path.values()), n_(path.size()), dim_(path.dim()), r_(r), cadlag_(path.interp() == Interp::Constant) {
    if (!(r > 0.0)) throw std::invalid_argument("control exponent must be positive");
    if (n_ > kMaxRoughGrid + 1) return;
    table_ = chain_power_table(
        n_,
        [&](std::size_t i, std::size_t j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < dim_; ++k) {
                double x = values_[j * dim_ + k] - values_[i * dim_ + k];
                acc += x * x;
            }
            return std::sqrt(acc);
        },
        r_);
}

std::vector<double> chain_power_table(std::size_t n, const std::function<double(std::size_t, std::size_t)>& cost,
                                      double rho) {
    std::vector<double> table(n * n, 0.0);
    // Rows are independent; each row is a left-anchored chain DP.
#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> best(n, 0.0);
        double running = 0.0;
        for (std::size_t j = s + 1; j < n; ++j) {
            double b = 0.0;
            for (std::size_t i = s; i < j; ++i) b = std::max(b, best[i] + pow_abs(cost(i, j), rho));
            best[j] = b;
            running = std::max(running, b);
            table[s * n + j] = running;
        }
    }
    return table;
}

double PathVariationControl::compute(std::size_t s, std::size_t t) const {
    std::span<const double> seg(values_.data() + s * dim_, (t - s + 1) * dim_);
    return pow_abs(mtgl::variation(seg, dim_, r_).value, r_);
}

double PathVariationControl::operator()(std::size_t s, std::size_t t) const {
    if (s >= t) return 0.0;
    return table_.empty() ? compute(s, t) : table_[s * n_ + t];
}

double PathVariationControl::open_right(std::size_t s, std::size_t t) const {
    // A cadlag step path is constant on [t-1, t), so omega(s, t-) = omega(s, t-1).
    if (!cadlag_) return (*this)(s, t);
    return t > s ? (*this)(s, t - 1) : 0.0;
}

SumControl::SumControl(std::vector<ControlPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("sum of controls needs at least one part");
    for (const auto& p : parts_)
        if (p->size() != parts_.front()->size()) throw std::invalid_argument("controls live on different grids");
}

double SumControl::operator()(std::size_t s, std::size_t t) const {
    double v = 0.0;
    for (const auto& p : parts_) v += (*p)(s, t);
    return v;
}

double SumControl::open_left(std::size_t s, std::size_t t) const {
    double v = 0.0;
    for (const auto& p : parts_) v += p->open_left(s, t);
    return v;
}

double SumControl::open_right(std::size_t s, std::size_t t) const {
    double v = 0.0;
    for (const auto& p : parts_) v += p->open_right(s, t);
    return v;
}

double SumControl::right_limit(std::size_t s) const {
    double v = 0.0;
    for (const auto& p : parts_) v += p->right_limit(s);
    return v;
}

double superadditivity_defect(const Control& omega, std::size_t samples, std::uint64_t seed) {
    std::size_t n = omega.size();
    if (n < 3) return 0.0;
    Rng rng(seed, 7);
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        std::size_t a[3];
        for (auto& x : a) x = static_cast<std::size_t>(rng.below(static_cast<int>(n)));
        std::sort(a, a + 3);
        worst = std::max(worst, omega(a[0], a[1]) + omega(a[1], a[2]) - omega(a[0], a[2]));
    }
    return worst;
}

ControlPartition control_partition(const Control& omega, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("partition threshold must be positive");
    std::size_t last = omega.size() - 1;
    ControlPartition out;
    out.points.push_back(0);
    while (out.points.back() < last) {
        std::size_t p = out.points.back(), q = p + 1;
        if (omega.right_limit(p) < eps) {
            // Case 1: reach as far as omega(p, .) stays below eps.
            for (std::size_t t = p + 1; t <= last && omega(p, t) < eps; ++t) q = t;
        } else {
            // Case 2: the mass sits at p itself; skip past it.
            for (std::size_t t = p + 1; t <= last && omega.open_left(p, t) <= eps; ++t) q = t;
        }
        out.points.push_back(q);
        if (out.points.size() > omega.size()) throw std::logic_error("control partition did not terminate");
    }
    for (std::size_t j = 1; j < out.points.size(); ++j) {
        std::size_t a = out.points[j - 1], b = out.points[j];
        out.max_block = std::max(out.max_block, std::min(omega.open_left(a, b), omega.open_right(a, b)));
    }
    return out;
}

}  // namespace mtgl
