#include "mtgl/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mtgl/ops.hpp"

namespace mtgl {

namespace {

nlohmann::json number(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

double parse_number(const nlohmann::json& j) {
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        return std::nan("");
    }
    return j.get<double>();
}

double safe_div(double a, double b) { return b > 0.0 ? a / b : 0.0; }

}  // namespace

nlohmann::json CorpusSpec::to_json() const {
    return {{"generator", generator}, {"depth", depth}, {"dist", dist},   {"branching", branching},
            {"family", family},       {"trials", trials}, {"seed", seed}};
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j, const CorpusSpec& defaults) {
    CorpusSpec s = defaults;
    if (j.contains("generator")) s.generator = j["generator"].get<std::string>();
    if (j.contains("depth")) s.depth = j["depth"].get<int>();
    if (j.contains("dist")) s.dist = j["dist"].get<std::string>();
    if (j.contains("branching")) s.branching = j["branching"].get<int>();
    if (j.contains("family")) s.family = j["family"].get<int>();
    if (j.contains("trials")) s.trials = j["trials"].get<std::size_t>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (s.depth < 0 || s.depth > kMaxTreeDepth) throw std::invalid_argument("corpus depth out of range");
    if (s.branching < 2) throw std::invalid_argument("corpus branching must be >= 2");
    if (s.family < 1 || static_cast<std::size_t>(s.family) > kMaxFamily)
        throw std::invalid_argument("corpus family size must lie in [1, 64]");
    parse_dist(s.dist);
    return s;
}

Corpus::Corpus(std::vector<TreeProcess> members, std::uint64_t seed) : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("explicit corpus is empty");
    spec_.generator = "explicit";
    spec_.trials = members_.size();
    spec_.seed = seed;
}

TreeProcess Corpus::member(std::size_t i) const {
    if (!members_.empty()) return members_[i % members_.size()];
    Rng rng = Rng(spec_.seed, 100).split(i);
    std::uint64_t s = rng.next();
    const auto& g = spec_.generator;
    Dist dist = parse_dist(spec_.dist);
    if (g == "mixed") {
        int depth = spec_.depth < 1 ? 0 : 1 + rng.below(spec_.depth);
        int kind = rng.below(7);
        if (kind < 5) return gen_leaf_backprop(static_cast<Dist>(kind), depth, s, spec_.branching);
        return gen_increment(depth, s, kind == 5 ? Dist::Gaussian : Dist::Rademacher, spec_.branching);
    }
    if (g == "leaf_backprop") return gen_leaf_backprop(dist, spec_.depth, s, spec_.branching);
    if (g == "increment") return gen_increment(spec_.depth, s, dist, spec_.branching);
    if (g == "walk") return gen_increment(spec_.depth, s, dist, 2);
    if (g == "scaled_walk") return gen_scaled_walk(std::max(1, spec_.depth));
    if (g == "doubling") return gen_doubling(spec_.depth);
    if (g == "log_weight") return gen_log_weight(spec_.depth);
    if (g == "family") return gen_family(spec_.family, spec_.depth, s, spec_.branching);
    throw std::invalid_argument("unknown generator: " + g);
}

Rng Corpus::trial_rng(std::size_t i) const { return Rng(spec_.seed, 200).split(i); }

nlohmann::json CheckReport::to_json() const {
    nlohmann::json j;
    j["check"] = check;
    j["params"] = params;
    j["trials"] = trials;
    j["violations"] = violations;
    j["hypothesis_failures"] = hypothesis_failures;
    j["worst_ratio"] = number(worst_ratio);
    j["constant_used"] = number(constant_used);
    j["seed"] = seed;
    j["runtime_ms"] = runtime_ms;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : measurements.items()) m[k] = v.is_number() ? number(v.get<double>()) : v;
    j["measurements"] = m;
    return j;
}

CheckReport CheckReport::from_json(const nlohmann::json& j) {
    CheckReport r;
    r.check = j.at("check").get<std::string>();
    r.params = j.value("params", nlohmann::json::object());
    r.trials = j.at("trials").get<std::size_t>();
    r.violations = j.at("violations").get<std::size_t>();
    r.hypothesis_failures = j.at("hypothesis_failures").get<std::size_t>();
    r.worst_ratio = parse_number(j.at("worst_ratio"));
    r.constant_used = parse_number(j.at("constant_used"));
    r.seed = j.at("seed").get<std::uint64_t>();
    r.runtime_ms = j.at("runtime_ms").get<double>();
    r.measurements = j.value("measurements", nlohmann::json::object());
    return r;
}

CheckReport run_check(const std::string& name, const nlohmann::json& params, const Corpus& corpus,
                      const std::vector<std::string>& measure_names, double constant, const CheckOptions& opt,
                      const TrialFn& trial) {
    auto start = std::chrono::steady_clock::now();
    CheckReport rep;
    rep.check = name;
    rep.params = params;
    rep.params["corpus"] = corpus.spec().to_json();
    rep.constant_used = constant;
    rep.seed = corpus.spec().seed;
    std::vector<double> measures(measure_names.size(), -kInf);
    bool any = false;

    auto absorb = [&](const TrialOutcome& o) {
        if (!o.qualifies) {
            ++rep.hypothesis_failures;
            return;
        }
        ++rep.trials;
        any = true;
        rep.worst_ratio = std::max(rep.worst_ratio, o.ratio);
        if (o.ratio > 1.0 + opt.tol || std::isnan(o.ratio)) ++rep.violations;
        for (std::size_t k = 0; k < measures.size() && k < o.measures.size(); ++k)
            measures[k] = std::max(measures[k], o.measures[k]);
    };

    std::size_t target = corpus.size();
    if (!opt.qualifying) {
        std::vector<TrialOutcome> out(target);
        for_each_index(target, opt.exec, [&](std::size_t i) { out[i] = trial(i); });
        for (const auto& o : out) absorb(o);
    } else {
        // Batches keep the result a function of the attempt order only.
        std::size_t next = 0, max_attempts = 50 * std::max<std::size_t>(target, 1);
        while (rep.trials < target && next < max_attempts) {
            std::size_t batch = std::max<std::size_t>(target - rep.trials, 64);
            std::vector<TrialOutcome> out(batch);
            for_each_index(batch, opt.exec, [&](std::size_t i) { out[i] = trial(next + i); });
            for (const auto& o : out) {
                if (rep.trials >= target) break;
                absorb(o);
            }
            next += batch;
        }
    }
    for (std::size_t k = 0; k < measures.size(); ++k)
        rep.measurements[measure_names[k]] = any ? measures[k] : 0.0;
    rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

TreeProcess centered(const TreeProcess& f) {
    std::vector<double> v = f.values();
    for (std::size_t i = 0; i < f.t().node_count(); ++i)
        for (std::size_t k = 0; k < f.dim(); ++k) v[i * f.dim() + k] -= f.at(0, k);
    return {f.tree(), std::move(v), f.dim()};
}

TreeProcess absolute(const TreeProcess& f) {
    std::vector<double> v = f.values();
    for (auto& x : v) x = std::abs(x);
    return {f.tree(), std::move(v), f.dim()};
}

std::vector<double> level_values(const TreeProcess& f, int n) {
    const auto& tr = f.t();
    std::vector<double> out;
    out.reserve(tr.level_size(n));
    for (std::size_t v = tr.level_begin(n); v < tr.level_end(n); ++v) out.push_back(f[v]);
    return out;
}

std::vector<double> level_probs(const FiltrationTree& tree, int n) {
    std::vector<double> out;
    out.reserve(tree.level_size(n));
    for (std::size_t v = tree.level_begin(n); v < tree.level_end(n); ++v) out.push_back(tree.prob(v));
    return out;
}

double conjugate_exponent(double p) {
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

namespace {

TreeProcess scalar_member(const Corpus& c, std::size_t i) {
    auto m = c.member(i);
    return m.dim() == 1 ? m : m.component(0);
}

}  // namespace

CheckReport check_doob(const Corpus& corpus, double p, const CheckOptions& opt) {
    if (!(p > 1.0)) throw std::invalid_argument("Doob's strong inequality needs p > 1");
    double pc = conjugate_exponent(p);
    auto trial = [&](std::size_t i) {
        auto x = scalar_member(corpus, i);
        auto f = absolute(x);
        auto mf = maximal(x);
        const auto& tr = x.t();
        int n_max = tr.depth();
        auto probs = level_probs(tr, n_max);
        double strong = bound_ratio(lp_norm(level_values(mf, n_max), probs, p),
                                    pc * lp_norm(level_values(f, n_max), probs, p));
        double weak = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            auto pr = level_probs(tr, n);
            auto m = level_values(mf, n);
            auto fv = level_values(f, n);
            std::vector<double> pf(pr.size());
            for (std::size_t k = 0; k < pr.size(); ++k) pf[k] = pr[k] * fv[k];
            TailSums sums(m, {pr, pf});
            for (const auto& l : level_scan(m)) weak = std::max(weak, bound_ratio(l.lambda * sums.tail(l, 0), sums.tail(l, 1)));
        }
        return TrialOutcome{std::max(strong, weak), true, {strong, weak}};
    };
    return run_check("doob", {{"p", number(p)}}, corpus, {"strong_ratio", "weak_ratio"}, pc, opt, trial);
}

CheckReport check_square_weak(const Corpus& corpus, const CheckOptions& opt) {
    auto trial = [&](std::size_t i) {
        auto f = centered(scalar_member(corpus, i));
        const auto& tr = f.t();
        int n_max = tr.depth();
        auto probs = level_probs(tr, n_max);
        double l1 = lp_norm(level_values(f, n_max), probs, 1.0);
        auto s = level_values(square_function(f), n_max);
        TailSums ssum(s, {probs});
        double weak = 0.0;
        for (const auto& l : level_scan(s)) weak = std::max(weak, bound_ratio(l.lambda * ssum.tail(l, 0), 3.0 * l1));

        // Lookahead: {tau > k} at a node is {Mf <= lambda} up to that node.
        auto mf = maximal(f);
        std::vector<double> key, w;
        for (std::size_t v = 1; v < tr.node_count(); ++v) {
            double d = f[v] - f[tr.parent(v)];
            key.push_back(mf[v]);
            w.push_back(tr.prob(v) * d * d);
        }
        TailSums look(key, {w});
        double lookahead = 0.0;
        for (const auto& l : level_scan(mf.values()))
            lookahead = std::max(lookahead, bound_ratio(look.head(l, 0), 2.0 * l.lambda * l1));
        return TrialOutcome{std::max(weak, lookahead), true, {weak, lookahead}};
    };
    return run_check("square_weak", nlohmann::json::object(), corpus, {"weak_ratio", "lookahead_ratio"}, 3.0, opt,
                     trial);
}

CheckReport check_davis_decomposition(const Corpus& corpus, const CheckOptions& opt) {
    auto trial = [&](std::size_t i) {
        auto f = scalar_member(corpus, i);
        const auto& tr = f.t();
        auto parts = davis_decompose(f);
        double sum_res = 0.0, jump = 0.0, tele = 0.0;
        std::vector<double> h_var(tr.node_count(), 0.0), bv_var(tr.node_count(), 0.0);
        for (std::size_t v = 0; v < tr.node_count(); ++v) {
            double res = std::abs(f[v] - parts.f_pred[v] - parts.f_bv[v]);
            sum_res = std::max(sum_res, res / (1e-12 * std::max(1.0, std::abs(f[v]))));
            if (v == 0) continue;
            std::size_t a = tr.parent(v);
            jump = std::max(jump, bound_ratio(std::abs(parts.f_pred[v] - parts.f_pred[a]), 2.0 * parts.mdf[a]));
            h_var[v] = h_var[a] + std::abs(parts.h[v] - parts.h[a]);
            bv_var[v] = bv_var[a] + std::abs(parts.f_bv[v] - parts.f_bv[a]);
            tele = std::max(tele, std::abs(h_var[v] - parts.mdf[v]) / (1e-12 * std::max(1.0, parts.mdf[v])));
        }
        double e_bv = 0.0, e_mdf = 0.0;
        for (std::size_t l = 0; l < tr.leaf_count(); ++l) {
            e_bv += tr.leaf_prob(l) * bv_var[tr.leaf_node(l)];
            e_mdf += tr.leaf_prob(l) * parts.mdf[tr.leaf_node(l)];
        }
        double l1 = bound_ratio(e_bv, 2.0 * e_mdf);
        double mart = parts.f_pred.is_martingale() && parts.f_bv.is_martingale() ? 0.0 : kInf;
        double ratio = std::max({sum_res, jump, tele, l1, mart});
        return TrialOutcome{ratio, true, {sum_res, jump, tele, l1}};
    };
    return run_check("davis_decomposition", nlohmann::json::object(), corpus,
                     {"sum_residual_ratio", "jump_ratio", "telescoping_ratio", "bv_l1_ratio"}, 2.0, opt, trial);
}

CheckReport check_davis_bdg(const Corpus& corpus, const std::vector<double>& ps, const CheckOptions& opt) {
    const double root3 = std::sqrt(3.0);
    std::vector<std::string> names{"E_Sf_over_E_fstar", "E_Mf_over_E_Sf", "E_Sf_over_E_Mf"};
    for (double p : ps) {
        names.push_back("Lp_Mf_over_Sf_p" + nlohmann::json(p).dump());
        names.push_back("Lp_Sf_over_Mf_p" + nlohmann::json(p).dump());
    }
    auto trial = [&](std::size_t i) {
        auto f = scalar_member(corpus, i);
        const auto& tr = f.t();
        int n = tr.depth();
        auto probs = level_probs(tr, n);
        auto s = level_values(square_function(f), n);
        auto fstar = level_values(maximal(f), n);
        double es = expectation(s, probs), ef = expectation(fstar, probs);
        double sharp = bound_ratio(es, root3 * ef);
        auto g = centered(f);
        auto sg = level_values(square_function(g), n);
        auto mg = level_values(maximal(g), n);
        double esg = expectation(sg, probs), emg = expectation(mg, probs);
        std::vector<double> meas{safe_div(es, ef), safe_div(emg, esg), safe_div(esg, emg)};
        for (double p : ps) {
            double a = lp_norm(mg, probs, p), b = lp_norm(sg, probs, p);
            meas.push_back(safe_div(a, b));
            meas.push_back(safe_div(b, a));
        }
        return TrialOutcome{sharp, true, meas};
    };
    return run_check("davis_bdg", {{"p", ps}}, corpus, names, root3, opt, trial);
}

CheckReport check_optional_sampling(const Corpus& corpus, const CheckOptions& opt) {
    auto trial = [&](std::size_t i) {
        auto f = Martingale(scalar_member(corpus, i));
        auto rng = corpus.trial_rng(i);
        const auto& tr = f.t();
        std::vector<char> ms(tr.node_count()), mt(tr.node_count());
        double ps = rng.uniform(0.1, 0.6), pt = rng.uniform(0.1, 0.6);
        for (std::size_t v = 0; v < ms.size(); ++v) {
            ms[v] = rng.uniform() < ps;
            mt[v] = rng.uniform() < pt;
        }
        StoppingRule sigma(f.tree(), ms);
        StoppingRule tau = StoppingRule(f.tree(), mt).min(StoppingRule::constant(f.tree(), tr.depth()));
        bool ok = optional_sampling_check(f, sigma, tau) && optional_sampling_check(f, tau, tau) &&
                  optional_sampling_check(f, StoppingRule::constant(f.tree(), 0), tau);
        return TrialOutcome{ok ? 0.0 : kInf, true, {}};
    };
    return run_check("optional_sampling", nlohmann::json::object(), corpus, {}, 1.0, opt, trial);
}

CheckReport check_lepingle(const Corpus& corpus, double r, double p, const CheckOptions& opt) {
    if (!(r > 2.0)) throw std::invalid_argument("Lepingle check needs r > 2");
    if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("Lepingle check needs p in [1, inf)");
    auto trial = [&](std::size_t i) {
        auto f = scalar_member(corpus, i);
        const auto& tr = f.t();
        std::size_t leaves = tr.leaf_count();
        std::vector<double> vr(leaves), mf(leaves), probs(leaves);
        double pathwise = 0.0, jump = 0.0;
        for (std::size_t l = 0; l < leaves; ++l) {
            auto path = f.path_values(l);
            auto b = lepingle_pathwise_bound(path, r);
            pathwise = std::max(pathwise, bound_ratio(b.lhs, b.rhs));
            jump = std::max(jump, comparable_jump_ratio(path, r));
            vr[l] = std::sqrt(b.lhs);
            double m = 0.0;
            for (double x : path) m = std::max(m, std::abs(x));
            mf[l] = m;
            probs[l] = tr.leaf_prob(l);
        }
        double moment = safe_div(lp_norm(vr, probs, p), r / (r - 2.0) * lp_norm(mf, probs, p));
        return TrialOutcome{std::max(pathwise, jump), true, {pathwise, jump, moment}};
    };
    return run_check("lepingle", {{"r", number(r)}, {"p", number(p)}}, corpus,
                     {"pathwise_ratio", "comparable_jump_ratio", "moment_ratio"}, 8.0, opt, trial);
}

CheckReport check_weighted_doob(const Corpus& corpus, const CheckOptions& opt) {
    auto trial = [&](std::size_t i) {
        auto f = absolute(scalar_member(corpus, i));
        auto rng = corpus.trial_rng(i);
        std::vector<double> w(f.t().leaf_count());
        for (auto& x : w) x = std::exp(rng.normal());
        double worst = 0.0;
        for (int n = 0; n <= f.t().depth(); ++n)
            for (const auto& l : weighted_maximal_data(f, w, n)) worst = std::max(worst, bound_ratio(l.lhs, l.rhs));
        return TrialOutcome{worst, true, {worst}};
    };
    return run_check("weighted_doob", nlohmann::json::object(), corpus, {"weak_ratio"}, 1.0, opt, trial);
}

}  // namespace mtgl
