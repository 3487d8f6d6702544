#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtgl/variation.hpp"

namespace mtgl {

inline constexpr std::size_t kMaxRoughGrid = 512;  // grid intervals allowed for two-parameter DP norms
inline constexpr double kDefaultRoughR = 2.5;

enum class Interp { Constant, Linear };

Interp parse_interp(const std::string& name);
std::string interp_name(Interp i);

// t_k = k T / n for k = 0..n.
std::vector<double> uniform_grid(double T, std::size_t n);

// Path sampled on a grid starting at 0.  Values are row-major (one row of
// dim entries per grid time); between grid times the path is either
// right-continuous piecewise constant or piecewise linear.
class SampledPath {
public:
    SampledPath() = default;
    SampledPath(std::vector<double> times, std::vector<double> values, std::size_t dim = 1,
                Interp interp = Interp::Linear);
    static SampledPath from_function(const std::vector<double>& times, const std::function<double(double)>& f,
                                     Interp interp = Interp::Linear);

    std::size_t size() const { return times_.size(); }
    std::size_t dim() const { return dim_; }
    Interp interp() const { return interp_; }
    double time(std::size_t i) const { return times_[i]; }
    double horizon() const { return times_.back(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    double operator()(std::size_t i, std::size_t k = 0) const { return values_[i * dim_ + k]; }
    std::span<const double> point(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

    // Value at an arbitrary time in [0, T] under the interpolation rule.
    double value_at(double t, std::size_t k = 0) const;
    SampledPath resample(const std::vector<double>& times) const;
    // Grid points begin..end (inclusive), shifted to start at time 0.
    SampledPath restrict(std::size_t begin, std::size_t end) const;
    double variation(double r) const;  // Euclidean r-variation over grid times
    double sup_norm() const;            // max Euclidean norm of a row

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::size_t dim_ = 1;
    Interp interp_ = Interp::Linear;
};

SampledPath difference(const SampledPath& a, const SampledPath& b);

// Vector-valued two-parameter array Xi(s, t), s <= t, on n grid points.
class TwoParamField {
public:
    TwoParamField() = default;
    TwoParamField(std::size_t n, std::size_t m);

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    std::span<double> at(std::size_t s, std::size_t t) { return {data_.data() + (s * n_ + t) * m_, m_}; }
    std::span<const double> at(std::size_t s, std::size_t t) const {
        return {data_.data() + (s * n_ + t) * m_, m_};
    }
    double norm(std::size_t s, std::size_t t) const;  // Euclidean (Frobenius) norm of one entry
    // sup over grid chains of (sum |Xi(u_{l-1}, u_l)|^rho)^{1/rho}.
    double variation(double rho) const;
    TwoParamField restrict(std::size_t begin, std::size_t end) const;

    friend TwoParamField difference(const TwoParamField& a, const TwoParamField& b);

private:
    std::size_t n_ = 0, m_ = 0;
    std::vector<double> data_;
};

// Superadditive omega on grid index pairs, with the one-sided limits needed
// by the small-partition construction.
class Control {
public:
    virtual ~Control() = default;
    virtual std::size_t size() const = 0;
    virtual double operator()(std::size_t s, std::size_t t) const = 0;
    virtual double open_left(std::size_t s, std::size_t t) const { return (*this)(s, t); }   // omega(s+, t)
    virtual double open_right(std::size_t s, std::size_t t) const { return (*this)(s, t); }  // omega(s, t-)
    virtual double right_limit(std::size_t) const { return 0.0; }                              // omega(s, s+)
};

using ControlPtr = std::shared_ptr<const Control>;

class LinearTimeControl : public Control {
public:
    explicit LinearTimeControl(std::vector<double> times) : times_(std::move(times)) {}
    std::size_t size() const override { return times_.size(); }
    double operator()(std::size_t s, std::size_t t) const override { return times_[t] - times_[s]; }

private:
    std::vector<double> times_;
};

// omega(s, t) = (V^r X on [s, t])^r; memoized for grids up to kMaxRoughGrid.
class PathVariationControl : public Control {
public:
    PathVariationControl(const SampledPath& path, double r);
    std::size_t size() const override { return n_; }
    double operator()(std::size_t s, std::size_t t) const override;
    double open_right(std::size_t s, std::size_t t) const override;

private:
    std::vector<double> values_;
    std::size_t n_, dim_;
    double r_;
    bool cadlag_;
    std::vector<double> table_;  // empty when evaluated on demand
    double compute(std::size_t s, std::size_t t) const;
};

// Point mass just after grid time `at`: omega(s, t) = mass when s <= at < t.
class AtomControl : public Control {
public:
    AtomControl(std::size_t n, std::size_t at, double mass) : n_(n), at_(at), mass_(mass) {}
    std::size_t size() const override { return n_; }
    double operator()(std::size_t s, std::size_t t) const override { return s <= at_ && at_ < t ? mass_ : 0.0; }
    double open_left(std::size_t s, std::size_t t) const override { return s < at_ && at_ < t ? mass_ : 0.0; }
    double right_limit(std::size_t s) const override { return s == at_ ? mass_ : 0.0; }

private:
    std::size_t n_, at_;
    double mass_;
};

class SumControl : public Control {
public:
    explicit SumControl(std::vector<ControlPtr> parts);
    std::size_t size() const override { return parts_.front()->size(); }
    double operator()(std::size_t s, std::size_t t) const override;
    double open_left(std::size_t s, std::size_t t) const override;
    double open_right(std::size_t s, std::size_t t) const override;
    double right_limit(std::size_t s) const override;

private:
    std::vector<ControlPtr> parts_;
};

class FunctionControl : public Control {
public:
    FunctionControl(std::size_t n, std::function<double(std::size_t, std::size_t)> f) : n_(n), f_(std::move(f)) {}
    std::size_t size() const override { return n_; }
    double operator()(std::size_t s, std::size_t t) const override { return f_(s, t); }

private:
    std::size_t n_;
    std::function<double(std::size_t, std::size_t)> f_;
};

// max of omega(s,t) + omega(t,u) - omega(s,u) over random grid triples.
double superadditivity_defect(const Control& omega, std::size_t samples, std::uint64_t seed);

struct ControlPartition {
    std::vector<std::size_t> points;
    double max_block = 0.0;  // max_j min(omega(p_{j-1}+, p_j), omega(p_{j-1}, p_j-))
};

// Greedy two-case construction on the grid.
ControlPartition control_partition(const Control& omega, double eps);

// Sewing of a vector-valued germ over dyadic refinements of the grid.
using Germ = std::function<std::vector<double>(std::size_t, std::size_t)>;

struct SewOptions {
    bool strict = true;       // throw when the refinement sequence is not Cauchy
    bool extrapolate = true;  // Aitken step on geometrically contracting levels
    std::size_t hypothesis_samples = 200;
    std::uint64_t seed = 1;
};

struct SewResult {
    std::vector<double> value;   // extrapolated limit when valid, otherwise the finest sum
    std::vector<double> finest;  // sum over the full grid
    std::vector<double> germ;    // Xi(0, T)
    std::vector<std::vector<double>> levels;  // coarsest to finest
    std::vector<std::size_t> strides;
    bool extrapolated = false;
    bool cauchy = true;
    double error_bound = 0.0;       // sum_k (2/k)^theta omega(0,T)^theta
    double max_error = 0.0;         // max over levels and value of |I - Xi(0,T)|
    double hypothesis_ratio = 0.0;  // max |delta Xi| / omega^theta over sampled triples
    double refinement_ratio = 0.0;  // max |I^pi - I^pi'| / (C omega(0,T) max_j omega_j^{theta-1})
};

// sum_{k>=1} (2/k)^theta for theta > 1.
double sewing_constant(double theta);
SewResult sew(const Germ& xi, const Control& omega, double theta, const SewOptions& opt = {});
// Cumulative finest-grid sums t -> sum_{i<t} Xi(i, i+1).
std::vector<double> riemann_path(const Germ& xi, std::size_t n, std::size_t m);

struct YoungResult {
    SampledPath integral;  // t -> int_0^t a dg on the grid
    SewResult total;
};

// a has dim k * g.dim() (a linear map applied to dg); requires r < 2.
YoungResult young_integral(const SampledPath& a, const SampledPath& g, double r, const SewOptions& opt = {});

class RoughPath {
public:
    // Validates shape and Chen's relation to 1e-9 relative.
    RoughPath(SampledPath x, TwoParamField xx, double r = kDefaultRoughR);

    const SampledPath& x() const { return x_; }
    const TwoParamField& xx() const { return xx_; }
    double r() const { return r_; }
    std::size_t size() const { return x_.size(); }
    std::size_t dim() const { return x_.dim(); }
    double x_norm() const;   // V^r X
    double xx_norm() const;  // V^{r/2} XX
    double chen_residual() const;
    RoughPath restrict(std::size_t begin, std::size_t end) const;

private:
    struct Trusted {};
    RoughPath(SampledPath x, TwoParamField xx, double r, Trusted);
    SampledPath x_;
    TwoParamField xx_;
    double r_;
};

// XX(s,t) = sum_{s<=u_i<t} (X_{u_i} - X_s) (x) dX_i, plus dX_i (x) dX_i / 2 per cell for linear paths.
RoughPath lift(const SampledPath& x, double r = kDefaultRoughR);

// (Y, Y') with Y' a path of linear maps R^d -> R^e stored row-major (e x d).
class ControlledPath {
public:
    ControlledPath(SampledPath y, SampledPath yp, std::size_t d);

    const SampledPath& y() const { return y_; }
    const SampledPath& yp() const { return yp_; }
    std::size_t dim() const { return y_.dim(); }
    std::size_t d() const { return d_; }
    // R_{s,t} = dY_{s,t} - Y'_s dX_{s,t}.
    TwoParamField remainder(const SampledPath& x) const;

    struct Norms {
        double y_r = 0.0, yp_r = 0.0, yp_sup = 0.0, rem = 0.0;
    };
    Norms norms(const RoughPath& x) const;

private:
    SampledPath y_, yp_;
    std::size_t d_;
};

// ||Y||_r / (||Y'||_sup ||X||_r + ||R||_{r/2}).
double implicit_bound_ratio(const ControlledPath& y, const RoughPath& x);

struct SmoothNorms {
    double sup = 0.0, lip = 0.0, d_sup = 0.0, d_lip = 0.0, d2_sup = 0.0, d2_lip = 0.0;
};

// phi: R^in -> R^out with Jacobian (out x in, row-major) and declared norms.
struct SmoothFunction {
    std::size_t in_dim = 1, out_dim = 1;
    std::function<std::vector<double>(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> jacobian;
    SmoothNorms norms;

    // y -> M y with norms declared on the box |y_i| <= box.
    static SmoothFunction linear(std::vector<double> m, std::size_t in, std::size_t out, double box);
    static SmoothFunction constant(std::vector<double> c, std::size_t in);
    static SmoothFunction identity(std::size_t dim, double box);
    // Scalar y -> y^2 on [-box, box].
    static SmoothFunction square(double box);

    // Advisory: sampled finite-difference checks of sup, lip, d_sup and d_lip on the box.
    std::vector<std::string> validate(double box, std::size_t samples, std::uint64_t seed) const;
};

struct CompositionResult {
    ControlledPath path;
    double phi_prime_ratio = 0.0;  // ||Dphi(Y)Y'||_r against its bound
    double remainder_ratio = 0.0;  // ||R^{phi(Y)}||_{r/2} against its bound
};

CompositionResult compose(const SmoothFunction& phi, const ControlledPath& y, const RoughPath& x);

struct RoughIntegralResult {
    ControlledPath path;  // Z = int Y dX, Z' = Y
    SewResult total;
    double remainder_norm = 0.0;  // ||R^Z||_{r/2}
    double remainder_rhs = 0.0;   // constant-weighted three-term bound
    double remainder_ratio = 0.0;
};

// y has dim e * d (linear maps R^d -> R^e); y' has dim e * d * d.  With
// sew_total = false only the path and remainder quantities are computed.
RoughIntegralResult rough_integral(const ControlledPath& y, const RoughPath& x, const SewOptions& opt = {},
                                   bool sew_total = true);

// table[s * n + t] = sup over chains in [s, t] of sum cost(u_{l-1}, u_l)^rho.
std::vector<double> chain_power_table(std::size_t n, const std::function<double(std::size_t, std::size_t)>& cost,
                                      double rho);

struct RdeConfig {
    double eps = 0.0;  // smallness threshold; 0 picks the closed-form default
    double A = 1.0;
    double tol = 1e-10;
    int max_iter = 200;
};

struct RdeDiagnostics {
    int iterations = 0;
    double final_metric = 0.0;
    int subdivisions = 0;
    double error_bound = 0.0;
    double eps = 0.0;
    bool contraction_ok = true;      // metric strictly decreasing inside the solution set
    bool in_solution_space = true;   // every iterate after the first lies in the solution set
    std::vector<std::vector<double>> metrics;  // per subinterval

    nlohmann::json to_json() const;
};

struct RdeSolution {
    ControlledPath path;
    RdeDiagnostics diag;
};

// phi maps R^e to linear maps R^d -> R^e (out_dim = e * d).
RdeSolution rde_solve(const SmoothFunction& phi, const RoughPath& x, std::span<const double> y0,
                      const RdeConfig& cfg = {});

struct StabilityRecord {
    double numerator = 0.0;    // max(||dR||_{r/2}, ||dY'||_r, ||dY||_r)
    double denominator = 0.0;  // max(||dX||_r, ||dXX||_{r/2}, |dy0|)
    double ratio = 0.0;        // 0/0 = 0
};

StabilityRecord rde_stability(const SmoothFunction& phi, const RoughPath& x, const RoughPath& x2,
                              std::span<const double> y0, std::span<const double> y0_2, const RdeConfig& cfg = {});

// Driver files: CSV "t, x_1..x_d" with "# interpolation: linear|constant";
// optional second-level CSV "s, t, m_11..m_dd" on grid times.
SampledPath read_driver_csv(const std::string& path);
void write_driver_csv(const std::string& path, const SampledPath& x);
TwoParamField read_area_csv(const std::string& path, const SampledPath& x);
void write_area_csv(const std::string& path, const RoughPath& x);

}  // namespace mtgl
