#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "mtgl/checks.hpp"
#include "mtgl/ops.hpp"

namespace mtgl {

namespace {

TreeProcess scalar_member(const Corpus& c, std::size_t i) {
    auto m = c.member(i);
    return m.dim() == 1 ? m : m.component(0);
}

// Leaf values of Z = sum z_k, W = sum E_{k-1} z_k and Mz = max z_k for a
// random nonnegative adapted sequence z on the tree.
struct PositiveSums {
    std::vector<double> z_sum, w_sum, z_max, probs;
};

PositiveSums positive_sums(const TreeProcess& base, Rng& rng) {
    const auto& tr = base.t();
    std::size_t n = tr.node_count();
    std::vector<double> z(n, 0.0), zs(n, 0.0), ws(n, 0.0), zm(n, 0.0);
    int kind = rng.below(3);
    for (std::size_t v = 1; v < n; ++v) {
        double inc = std::abs(base[v] - base[tr.parent(v)]);
        switch (kind) {
            case 0: z[v] = inc; break;
            case 1: z[v] = rng.exponential(); break;
            default: z[v] = rng.uniform() < 0.5 ? 0.0 : rng.exponential() * (1.0 + inc); break;
        }
    }
    for (std::size_t a = 0; a < tr.level_begin(tr.depth()); ++a) {
        double ez = 0.0;
        std::size_t c0 = tr.first_child(a);
        for (int i = 0; i < tr.child_count(a); ++i) ez += tr.prob(c0 + i) * z[c0 + i];
        ez /= tr.prob(a);
        for (int i = 0; i < tr.child_count(a); ++i) {
            std::size_t c = c0 + i;
            zs[c] = zs[a] + z[c];
            ws[c] = ws[a] + ez;
            zm[c] = std::max(zm[a], z[c]);
        }
    }
    PositiveSums out;
    for (std::size_t l = 0; l < tr.leaf_count(); ++l) {
        std::size_t v = tr.leaf_node(l);
        out.z_sum.push_back(zs[v]);
        out.w_sum.push_back(ws[v]);
        out.z_max.push_back(zm[v]);
        out.probs.push_back(tr.leaf_prob(l));
    }
    return out;
}

std::vector<double> times(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

// max over lambda of E((W - lambda) 1_{W>lambda}) / E(Z 1_{W>lambda}), as a ratio.
double garsia_neveu_hypothesis(const std::vector<double>& w, const std::vector<double>& z, const std::vector<double>& p) {
    auto pw = times(p, w), pz = times(p, z);
    TailSums sums(w, {p, pw, pz});
    auto levels = level_scan(w);
    levels.push_back({0.0, false});
    double worst = 0.0;
    for (const auto& l : levels) {
        double lhs = sums.tail(l, 1) - l.lambda * sums.tail(l, 0);
        worst = std::max(worst, bound_ratio(lhs, sums.tail(l, 2)));
    }
    return worst;
}

// max over lambda of E(Z ^ lambda) / (C E(W ^ lambda)).
double truncation_hypothesis(const std::vector<double>& z, const std::vector<double>& w, const std::vector<double>& p,
                             double c) {
    auto pz = times(p, z), pw = times(p, w);
    TailSums sz(z, {p, pz}), sw(w, {p, pw});
    std::vector<double> pts(z);
    pts.insert(pts.end(), w.begin(), w.end());
    double worst = 0.0;
    for (const auto& l : level_scan(pts)) {
        if (l.inclusive) continue;  // both sides are continuous in lambda
        double ez = sz.head(l, 1) + l.lambda * sz.tail(l, 0);
        double ew = sw.head(l, 1) + l.lambda * sw.tail(l, 0);
        worst = std::max(worst, bound_ratio(ez, c * ew));
    }
    return worst;
}

// Smallest epsilon with mu{g > beta l, f <= delta l} <= epsilon mu{g > l} for all l > 0.
double good_lambda_epsilon(const std::vector<double>& f, const std::vector<double>& g, const std::vector<double>& p,
                           double beta, double delta) {
    std::vector<double> br;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] > 0.0) {
            br.push_back(g[i] / beta);
            br.push_back(g[i]);
        }
        if (f[i] > 0.0) br.push_back(f[i] / delta);
    }
    if (br.empty()) return 0.0;
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    br.push_back(br.front() / 2.0);  // all quantities are right-continuous, piecewise constant in lambda
    double eps = 0.0;
    for (double lam : br) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] > lam) den += p[i];
            if (g[i] > beta * lam && f[i] <= delta * lam) num += p[i];
        }
        if (den > 0.0) eps = std::max(eps, num / den);
    }
    return eps;
}

}  // namespace

CheckReport check_garsia_neveu(const Corpus& corpus, double p, const CheckOptions& opt) {
    if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("Garsia-Neveu check needs p in [1, inf)");
    auto trial = [&](std::size_t i) {
        auto base = scalar_member(corpus, i);
        auto rng = corpus.trial_rng(i);
        auto s = positive_sums(base, rng);
        std::vector<double> w = s.w_sum, z = s.z_sum;
        int mode = static_cast<int>(i % 3);
        if (mode == 1) {
            for (std::size_t l = 0; l < z.size(); ++l) z[l] = w[l] + 0.5 * rng.exponential();
        } else if (mode == 2) {
            for (std::size_t l = 0; l < z.size(); ++l) z[l] = w[l] * rng.uniform(0.3, 1.2);
        }
        double hyp = garsia_neveu_hypothesis(w, z, s.probs);
        if (violates(hyp)) return TrialOutcome{0.0, false, {}};
        double ratio = bound_ratio(lp_norm(w, s.probs, p), p * lp_norm(z, s.probs, p));
        return TrialOutcome{ratio, true, {ratio, hyp}};
    };
    return run_check("garsia_neveu", {{"p", p}}, corpus, {"ratio", "hypothesis_ratio"}, p, opt, trial);
}

CheckReport check_sum_of_ek(const Corpus& corpus, double p, const CheckOptions& opt) {
    if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("sum-of-E_k check needs p in [1, inf)");
    double c = std::pow(p, p);
    auto trial = [&](std::size_t i) {
        auto rng = corpus.trial_rng(i);
        auto s = positive_sums(scalar_member(corpus, i), rng);
        double ratio = bound_ratio(moment(s.w_sum, s.probs, p), c * moment(s.z_sum, s.probs, p));
        return TrialOutcome{ratio, true, {ratio}};
    };
    return run_check("sum_of_ek", {{"p", p}}, corpus, {"ratio"}, c, opt, trial);
}

CheckReport check_truncation(const Corpus& corpus, double p, const CheckOptions& opt) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("truncation check needs p in (0, 1]");
    const double c = 2.0;
    auto trial = [&](std::size_t i) {
        auto rng = corpus.trial_rng(i);
        auto s = positive_sums(scalar_member(corpus, i), rng);
        std::vector<double> z = s.z_sum, w = s.w_sum;
        if (i % 2 == 1)
            for (std::size_t l = 0; l < z.size(); ++l) z[l] = w[l] * rng.uniform(0.2, 4.0);
        double hyp = truncation_hypothesis(z, w, s.probs, c);
        if (violates(hyp)) return TrialOutcome{0.0, false, {}};
        double ratio = bound_ratio(moment(z, s.probs, p), c * moment(w, s.probs, p));
        return TrialOutcome{ratio, true, {ratio, hyp}};
    };
    return run_check("truncation", {{"p", p}, {"C", c}}, corpus, {"ratio", "hypothesis_ratio"}, c, opt, trial);
}

CheckReport check_good_lambda(const Corpus& corpus, double p, double beta, double delta, const CheckOptions& opt) {
    if (!(p > 0.0) || !(beta > 1.0) || !(delta > 0.0))
        throw std::invalid_argument("good-lambda check needs p > 0, beta > 1, delta > 0");
    auto trial = [&](std::size_t i) {
        auto rng = corpus.trial_rng(i);
        auto s = positive_sums(scalar_member(corpus, i), rng);
        std::vector<double> f(s.z_sum.size()), g = s.z_sum;
        for (std::size_t l = 0; l < f.size(); ++l) f[l] = std::max(s.w_sum[l], s.z_max[l]);
        if (i % 2 == 1)
            for (std::size_t l = 0; l < g.size(); ++l) g[l] = f[l] * rng.uniform(0.5, 3.0);
        double eps = good_lambda_epsilon(f, g, s.probs, beta, delta);
        if (!(std::pow(beta, p) * eps < 1.0)) return TrialOutcome{0.0, false, {}};
        double c = std::pow(delta, -p) / (std::pow(beta, -p) - eps);
        double ratio = bound_ratio(moment(g, s.probs, p), c * moment(f, s.probs, p));
        return TrialOutcome{ratio, true, {ratio, eps, c}};
    };
    return run_check("good_lambda", {{"p", p}, {"beta", beta}, {"delta", delta}}, corpus,
                     {"ratio", "epsilon", "constant"}, std::pow(delta, -p) / std::pow(beta, -p), opt, trial);
}

CheckReport check_s_vs_S(const Corpus& corpus, double p, const CheckOptions& opt) {
    if (!(p >= 2.0) || std::isinf(p)) throw std::invalid_argument("s vs S check needs p in [2, inf)");
    double c = std::sqrt(p / 2.0);
    auto trial = [&](std::size_t i) {
        auto f = centered(scalar_member(corpus, i));
        int n = f.t().depth();
        auto probs = level_probs(f.t(), n);
        double ratio = bound_ratio(lp_norm(level_values(predictable_square(f), n), probs, p),
                                   c * lp_norm(level_values(square_function(f), n), probs, p));
        return TrialOutcome{ratio, true, {ratio}};
    };
    return run_check("s_vs_S", {{"p", p}}, corpus, {"ratio"}, c, opt, trial);
}

CheckReport check_M_vs_s(const Corpus& corpus, double p, const CheckOptions& opt) {
    if (!(p > 0.0 && p <= 2.0)) throw std::invalid_argument("M vs s check needs p in (0, 2]");
    double c = std::pow(5.0, 1.0 / p);
    auto trial = [&](std::size_t i) {
        auto f = centered(scalar_member(corpus, i));
        int n = f.t().depth();
        auto probs = level_probs(f.t(), n);
        double ratio = bound_ratio(lp_norm(level_values(maximal(f), n), probs, p),
                                   c * lp_norm(level_values(predictable_square(f), n), probs, p));
        return TrialOutcome{ratio, true, {ratio}};
    };
    return run_check("M_vs_s", {{"p", p}}, corpus, {"ratio"}, c, opt, trial);
}

std::vector<CheckReport> check_aux_lemmas(const Corpus& corpus, const CheckOptions& opt) {
    CheckOptions q = opt;
    q.qualifying = true;
    std::vector<CheckReport> out;
    for (double p : {1.5, 2.0, 3.0}) out.push_back(check_garsia_neveu(corpus, p, q));
    for (double p : {1.0, 2.0, 3.0}) out.push_back(check_sum_of_ek(corpus, p, q));
    for (double p : {0.5, 1.0}) out.push_back(check_truncation(corpus, p, q));
    for (double p : {1.0, 2.0}) out.push_back(check_good_lambda(corpus, p, 2.0, 0.25, q));
    for (double p : {2.0, 4.0}) out.push_back(check_s_vs_S(corpus, p, q));
    for (double p : {0.5, 1.0, 2.0}) out.push_back(check_M_vs_s(corpus, p, q));
    return out;
}

CheckReport merge_reports(const std::string& name, const std::vector<CheckReport>& parts) {
    CheckReport r;
    r.check = name;
    r.params = nlohmann::json::object();
    r.params["parts"] = nlohmann::json::array();
    for (const auto& p : parts) {
        r.params["parts"].push_back({{"check", p.check}, {"params", p.params}});
        r.trials += p.trials;
        r.violations += p.violations;
        r.hypothesis_failures += p.hypothesis_failures;
        r.worst_ratio = std::max(r.worst_ratio, p.worst_ratio);
        r.runtime_ms += p.runtime_ms;
        r.seed = p.seed;
        std::string key = p.check;
        for (const auto& [k, v] : p.params.items())
            if (k != "corpus") key += "_" + k + "=" + v.dump();
        r.measurements[key] = p.worst_ratio;
    }
    return r;
}

namespace {

constexpr std::array<double, 5> kNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                          0.9061798459386640};
constexpr std::array<double, 5> kWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                            0.4786286704993665, 0.2369268850561891};

template <class F>
double integrate(F&& f, double a, double b, int panels) {
    double h = (b - a) / panels, s = 0.0;
    for (int k = 0; k < panels; ++k) {
        double mid = a + (k + 0.5) * h;
        for (std::size_t i = 0; i < kNodes.size(); ++i) s += kWeights[i] * f(mid + 0.5 * h * kNodes[i]);
    }
    return 0.5 * h * s;
}

}  // namespace

FormulaCheck layer_cake_formulas() {
    FormulaCheck out;
    for (double t : {0.3, 1.0, 2.5}) {
        double lt = std::log(t);
        for (double p : {1.5, 2.0, 3.0}) {
            // lambda = e^x turns the integral into one with exponentially decaying tails.
            double integral = integrate([&](double x) { return (t - std::exp(x)) * std::exp((p - 1.0) * x); },
                                        lt - 80.0 / (p - 1.0), lt, 4000);
            double target = std::pow(t, p);
            out.garsia_neveu_pp1 = std::max(out.garsia_neveu_pp1, std::abs(p * (p - 1.0) * integral - target) / target);
            out.garsia_neveu_p1p = std::max(out.garsia_neveu_p1p, std::abs(p * (1.0 - p) * integral - target) / target);
        }
        for (double p : {0.25, 0.5, 0.75}) {
            auto g = [&](double x) { return std::min(t, std::exp(x)) * std::exp((p - 1.0) * x); };
            double integral = integrate(g, lt - 80.0 / p, lt, 4000) + integrate(g, lt, lt + 80.0 / (1.0 - p), 4000);
            double target = std::pow(t, p);
            out.truncation_p1p = std::max(out.truncation_p1p, std::abs(p * (1.0 - p) * integral - target) / target);
        }
    }
    return out;
}

}  // namespace mtgl
