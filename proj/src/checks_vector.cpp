#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/checks.hpp"
#include "mtgl/ops.hpp"
#include "mtgl/paraproduct.hpp"

namespace mtgl {

namespace {

// l^r norm of a finite sequence; r = inf is the max.
double lr(const std::vector<double>& x, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (double v : x) s += pow_abs(v, r);
    return std::pow(s, 1.0 / r);
}

// Measured ratio: 0/0 = 0, x/0 = inf for x > 0.
double measured(double lhs, double rhs) {
    if (rhs > 0.0) return lhs / rhs;
    return lhs > 0.0 ? kInf : 0.0;
}

double harmonic(double a, double b) { return 1.0 / (1.0 / a + 1.0 / b); }

StoppingRule random_rule(const TreePtr& tree, Rng& rng) {
    std::vector<char> marks(tree->node_count());
    double p = rng.uniform(0.1, 0.5);
    for (auto& m : marks) m = rng.uniform() < p;
    return {tree, std::move(marks)};
}

}  // namespace

CheckReport check_vector_valued(const Corpus& corpus, double q, double r, double p, const CheckOptions& opt) {
    if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("vector-valued check needs q in [1, inf)");
    if (!(r >= 1.0)) throw std::invalid_argument("vector-valued check needs r >= 1");
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("vector-valued check needs p in (1, inf)");
    double pc = conjugate_exponent(p);
    auto trial = [&](std::size_t i) {
        auto x = centered(corpus.member(i));
        const auto& tr = x.t();
        std::size_t k_count = x.dim(), leaves = tr.leaf_count();
        std::vector<TreeProcess> comps;
        std::vector<TreeProcess> mf, sf;
        for (std::size_t k = 0; k < k_count; ++k) {
            comps.push_back(x.component(k));
            mf.push_back(maximal(comps.back()));
            sf.push_back(square_function(comps.back()));
        }
        std::vector<double> probs(leaves), lr_m(leaves), lr_s(leaves), lr_f(leaves), lp_m(leaves), lp_f(leaves),
            sup_m(leaves), sup_f(leaves);
        std::vector<double> mk(k_count), sk(k_count), fk(k_count);
        for (std::size_t l = 0; l < leaves; ++l) {
            std::size_t v = tr.leaf_node(l);
            probs[l] = tr.leaf_prob(l);
            for (std::size_t k = 0; k < k_count; ++k) {
                mk[k] = mf[k][v];
                sk[k] = sf[k][v];
                fk[k] = std::abs(comps[k][v]);
            }
            lr_m[l] = lr(mk, r);
            lr_s[l] = lr(sk, r);
            lr_f[l] = lr(fk, r);
            lp_m[l] = lr(mk, p);
            lp_f[l] = lr(fk, p);
            sup_m[l] = lr(mk, kInf);
            sup_f[l] = lr(fk, kInf);
        }
        double bdg_ms = measured(lp_norm(lr_m, probs, q), lp_norm(lr_s, probs, q));
        double bdg_sm = measured(lp_norm(lr_s, probs, q), lp_norm(lr_m, probs, q));
        double vmax = measured(lp_norm(lr_m, probs, p), lp_norm(lr_f, probs, p));
        // Fubini reduces the case r = p to scalar Doob; r = inf is Doob for the submartingale sup_k |f_k|.
        double fubini = bound_ratio(lp_norm(lp_m, probs, p), pc * lp_norm(lp_f, probs, p));
        double sup_case = bound_ratio(lp_norm(sup_m, probs, p), pc * lp_norm(sup_f, probs, p));

        // Weighted estimates for the first component against a random weight.
        auto rng = corpus.trial_rng(i);
        std::vector<double> w(leaves);
        for (auto& y : w) y = std::exp(rng.normal());
        auto f0 = absolute(comps[0]);
        double weak = 0.0;
        for (int n = 0; n <= tr.depth(); ++n)
            for (const auto& lv : weighted_maximal_data(f0, w, n)) weak = std::max(weak, bound_ratio(lv.lhs, lv.rhs));
        auto mw = maximal(backprop(x.tree(), w));
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t l = 0; l < leaves; ++l) {
            std::size_t v = tr.leaf_node(l);
            lhs += probs[l] * w[l] * pow_abs(mf[0][v], p);
            rhs += probs[l] * mw[v] * pow_abs(f0[v], p);
        }
        double weighted = measured(std::pow(lhs, 1.0 / p), std::pow(rhs, 1.0 / p));
        return TrialOutcome{std::max({fubini, sup_case, weak}), true,
                            {fubini, sup_case, weak, bdg_ms, bdg_sm, vmax, weighted}};
    };
    return run_check("vector_valued", {{"q", q}, {"r", r}, {"p", p}}, corpus,
                     {"fubini_ratio", "sup_case_ratio", "weighted_weak_ratio", "bdg_M_over_S", "bdg_S_over_M",
                      "vector_maximal_ratio", "weighted_lp_ratio"},
                     pc, opt, trial);
}

CheckReport check_paraproduct(const Corpus& corpus, double q0, double q1, double r0, double r1,
                              const CheckOptions& opt) {
    if (!(q0 >= 1.0) || std::isinf(q0)) throw std::invalid_argument("paraproduct check needs q0 in [1, inf)");
    if (!(q1 > 0.0)) throw std::invalid_argument("paraproduct check needs q1 > 0");
    if (!(r0 >= 1.0) || std::isinf(r0)) throw std::invalid_argument("paraproduct check needs r0 in [1, inf)");
    if (!(r1 >= 1.0)) throw std::invalid_argument("paraproduct check needs r1 >= 1");
    double q = harmonic(q0, q1), r = harmonic(r0, r1);
    if (!(r >= 1.0)) throw std::invalid_argument("paraproduct check needs 1/r0 + 1/r1 <= 1");
    // The delta-f and V^r forms need 1/2 + 1/r1 <= 1.
    const bool delta_form = r1 >= 2.0;
    const double r_delta = harmonic(2.0, r1), r_v = r_delta + 0.5;
    const double chain_r = 3.0, chain_rho = 2.0;

    std::vector<std::string> names{"chen_residual_ratio", "chain_bound_ratio", "vv_pprod_ratio"};
    if (delta_form) {
        names.push_back("delta_f_ratio");
        names.push_back("pprod_vr_ratio");
    }
    auto trial = [&](std::size_t i) {
        auto x = corpus.member(i);
        const auto& tr = x.t();
        auto rng = corpus.trial_rng(i);
        std::size_t k_count = x.dim(), leaves = tr.leaf_count();
        int n = tr.depth();
        std::vector<TreeProcess> f, g;
        for (std::size_t k = 0; k < k_count; ++k) {
            f.push_back(x.component(k));
            g.push_back(x.component((k + 1) % k_count));
        }
        auto never_after = StoppingRule::constant(x.tree(), n);
        std::vector<StoppingRule> t0, t1;
        for (std::size_t k = 0; k < k_count; ++k) {
            auto a = random_rule(x.tree(), rng).min(never_after);
            t1.push_back(a.max(random_rule(x.tree(), rng)).min(never_after));
            t0.push_back(std::move(a));
        }
        auto part = random_rule(x.tree(), rng);

        std::vector<double> probs(leaves), lhs_vv(leaves), f_vv(leaves), s_vv(leaves);
        std::vector<double> lhs_d(leaves), f_d(leaves), sg(leaves), lhs_v(leaves), f_v(leaves);
        double chen = 0.0, chain = 0.0;
        std::vector<double> a(k_count), b(k_count), c(k_count);
        for (std::size_t l = 0; l < leaves; ++l) {
            probs[l] = tr.leaf_prob(l);
            for (std::size_t k = 0; k < k_count; ++k) {
                auto fp = f[k].path_values(l), gp = g[k].path_values(l);
                auto pi = paraproduct_matrix(fp, gp);
                std::size_t s = static_cast<std::size_t>(t0[k].tau(l)), e = static_cast<std::size_t>(t1[k].tau(l));
                double sup_pi = 0.0, sup_f = 0.0, sq = 0.0;
                for (std::size_t t = s; t <= e; ++t) sup_pi = std::max(sup_pi, std::abs(pi(s, t)));
                for (std::size_t t = s; t < e; ++t) sup_f = std::max(sup_f, std::abs(fp[t] - fp[s]));
                for (std::size_t j = s + 1; j <= e; ++j) sq += (gp[j] - gp[j - 1]) * (gp[j] - gp[j - 1]);
                a[k] = sup_pi;
                b[k] = sup_f;
                c[k] = std::sqrt(sq);
                if (k != 0) continue;

                for (std::size_t s0 = 0; s0 < pi.n; ++s0)
                    for (std::size_t t = s0; t < pi.n; ++t)
                        for (std::size_t u = t; u < pi.n; ++u) {
                            double lhs = pi(s0, u) - pi(s0, t) - pi(t, u);
                            double rhs = (fp[t] - fp[s0]) * (gp[u] - gp[t]);
                            double scale = std::max({1.0, std::abs(pi(s0, u)), std::abs(pi(s0, t)), std::abs(pi(t, u)),
                                                     std::abs(rhs)});
                            chen = std::max(chen, std::abs(lhs - rhs) / (1e-12 * scale));
                        }
                auto cb = paraproduct_chain_bound(pi, chain_r, chain_rho);
                chain = std::max(chain, bound_ratio(cb.lhs, cb.rhs));

                if (delta_form) {
                    // Adapted partition from the marks on this path, closed off at N.
                    std::vector<std::size_t> pts{0};
                    auto path = tr.path(l);
                    for (int j = 1; j < n; ++j)
                        if (part.marked(path[j])) pts.push_back(j);
                    if (n > 0) pts.push_back(n);
                    std::vector<double> blk_pi, blk_f;
                    for (std::size_t j = 1; j < pts.size(); ++j) {
                        double sp = 0.0, sf = 0.0;
                        for (std::size_t u = pts[j - 1]; u <= pts[j]; ++u)
                            for (std::size_t t = u; t <= pts[j]; ++t) sp = std::max(sp, std::abs(pi(u, t)));
                        for (std::size_t t = pts[j - 1]; t < pts[j]; ++t)
                            sf = std::max(sf, std::abs(fp[t] - fp[pts[j - 1]]));
                        blk_pi.push_back(sp);
                        blk_f.push_back(sf);
                    }
                    lhs_d[l] = lr(blk_pi, r_delta);
                    f_d[l] = lr(blk_f, r1);
                    double full = 0.0;
                    for (std::size_t j = 1; j < gp.size(); ++j) full += (gp[j] - gp[j - 1]) * (gp[j] - gp[j - 1]);
                    sg[l] = std::sqrt(full);
                    lhs_v[l] = two_param_variation(pi, r_v);
                    f_v[l] = std::isinf(r1) ? max_oscillation(fp) : variation(fp, r1).value;
                }
            }
            lhs_vv[l] = lr(a, r);
            f_vv[l] = lr(b, r1);
            s_vv[l] = lr(c, r0);
        }
        double vv = measured(lp_norm(lhs_vv, probs, q), lp_norm(f_vv, probs, q1) * lp_norm(s_vv, probs, q0));
        std::vector<double> meas{chen, chain, vv};
        if (delta_form) {
            double sgn = lp_norm(sg, probs, q0);
            meas.push_back(measured(lp_norm(lhs_d, probs, q), lp_norm(f_d, probs, q1) * sgn));
            meas.push_back(measured(lp_norm(lhs_v, probs, q), lp_norm(f_v, probs, q1) * sgn));
        }
        return TrialOutcome{std::max(chen, chain), true, meas};
    };
    nlohmann::json params{{"q0", q0}, {"q1", q1}, {"r0", r0}, {"r1", std::isinf(r1) ? nlohmann::json("inf") : nlohmann::json(r1)},
                          {"chain_r", chain_r}, {"chain_rho", chain_rho}};
    return run_check("paraproduct", params, corpus, names, 1.0, opt, trial);
}

}  // namespace mtgl
