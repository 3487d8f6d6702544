#include "mtgl/registry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtgl/bellman.hpp"

namespace mtgl {

namespace {

double num(const nlohmann::json& p, const char* key) { return p.at(key).get<double>(); }

CorpusSpec corpus_of(std::string gen, int depth, std::size_t trials, std::string dist = "gaussian",
                     int branching = 3, int family = 1) {
    CorpusSpec c;
    c.generator = std::move(gen);
    c.depth = depth;
    c.trials = trials;
    c.dist = std::move(dist);
    c.branching = branching;
    c.family = family;
    return c;
}

CheckOptions qualifying(CheckOptions o) {
    o.qualifying = true;
    return o;
}

std::vector<CheckEntry> build() {
    using nlohmann::json;
    std::vector<CheckEntry> r;
    auto mixed = [](std::size_t trials) { return corpus_of("mixed", 8, trials); };

    r.push_back({"doob", "strong and weak maximal inequality, constant p'", {{"p", 2.0}}, mixed(10000),
                 [](const json& p, const Corpus& c, const CheckOptions& o) { return check_doob(c, num(p, "p"), o); }});
    r.push_back({"square_weak", "weak-type square function bound, constant 3", json::object(), mixed(10000),
                 [](const json&, const Corpus& c, const CheckOptions& o) { return check_square_weak(c, o); }});
    r.push_back({"davis_decomposition", "predictable / bounded-variation split", json::object(), mixed(10000),
                 [](const json&, const Corpus& c, const CheckOptions& o) { return check_davis_decomposition(c, o); }});
    r.push_back({"davis_bdg", "E Sf <= sqrt(3) E f*, BDG ratios measured", {{"p", json::array({1.0, 2.0, 4.0})}},
                 mixed(2000), [](const json& p, const Corpus& c, const CheckOptions& o) {
                     auto ps = p.at("p").get<std::vector<double>>();
                     for (double x : ps)
                         if (!(x >= 1.0) || std::isinf(x)) throw std::invalid_argument("davis_bdg needs p in [1, inf)");
                     return check_davis_bdg(c, ps, o);
                 }});
    r.push_back({"optional_sampling", "stopped martingales stay martingales", json::object(), mixed(1000),
                 [](const json&, const Corpus& c, const CheckOptions& o) { return check_optional_sampling(c, o); }});
    r.push_back({"lepingle", "pathwise r-variation domination, constant 8", {{"r", 3.0}, {"p", 1.0}},
                 corpus_of("walk", 10, 1000, "rademacher"),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_lepingle(c, num(p, "r"), num(p, "p"), o);
                 }});
    r.push_back({"weighted_doob", "weighted maximal inequality, measured", json::object(), mixed(1000),
                 [](const json&, const Corpus& c, const CheckOptions& o) { return check_weighted_doob(c, o); }});
    r.push_back({"garsia_neveu", "||W||_p <= p ||Z||_p under the layer hypothesis", {{"p", 2.0}}, mixed(1000),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_garsia_neveu(c, num(p, "p"), qualifying(o));
                 }});
    r.push_back({"sum_of_ek", "predictable projection of sums, constant p^p", {{"p", 2.0}}, mixed(1000),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_sum_of_ek(c, num(p, "p"), qualifying(o));
                 }});
    r.push_back({"truncation", "truncated concave moments, constant 2", {{"p", 0.5}}, mixed(1000),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_truncation(c, num(p, "p"), qualifying(o));
                 }});
    r.push_back({"good_lambda", "good-lambda closed-form constant", {{"p", 2.0}, {"beta", 2.0}, {"delta", 0.25}},
                 mixed(1000), [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_good_lambda(c, num(p, "p"), num(p, "beta"), num(p, "delta"), qualifying(o));
                 }});
    r.push_back({"s_vs_S", "||sf||_p <= (p/2)^(1/2) ||Sf||_p", {{"p", 2.0}}, mixed(1000),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_s_vs_S(c, num(p, "p"), qualifying(o));
                 }});
    r.push_back({"M_vs_s", "||Mf||_p <= 5^(1/p) ||sf||_p", {{"p", 1.0}}, mixed(1000),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_M_vs_s(c, num(p, "p"), qualifying(o));
                 }});
    r.push_back({"aux_lemmas", "all auxiliary lemmas at their standard exponents", json::object(), mixed(1000),
                 [](const json&, const Corpus& c, const CheckOptions& o) {
                     return merge_reports("aux_lemmas", check_aux_lemmas(c, o));
                 }});
    r.push_back({"vector_valued", "l^r-valued maximal and BDG ratios", {{"q", 3.0}, {"r", 1.5}, {"p", 2.0}},
                 corpus_of("family", 4, 1000, "gaussian", 2, 8),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_vector_valued(c, num(p, "q"), num(p, "r"), num(p, "p"), o);
                 }});
    r.push_back({"paraproduct", "paraproduct estimates on stopped families",
                 {{"q0", 2.0}, {"q1", 2.0}, {"r0", 2.0}, {"r1", 2.0}}, corpus_of("family", 5, 100, "gaussian", 2, 2),
                 [](const json& p, const Corpus& c, const CheckOptions& o) {
                     return check_paraproduct(c, num(p, "q0"), num(p, "q1"), num(p, "r0"), num(p, "r1"), o);
                 }});
    r.push_back({"sharp_davis", "sharp E Sf <= sqrt(3) E f* with the pathwise form", json::object(), mixed(10000),
                 [](const json&, const Corpus& c, const CheckOptions& o) { return sharp_davis_check(c, o); }});
    std::sort(r.begin(), r.end(), [](const CheckEntry& a, const CheckEntry& b) { return a.name < b.name; });
    return r;
}

}  // namespace

const std::vector<CheckEntry>& check_registry() {
    static const std::vector<CheckEntry> entries = build();
    return entries;
}

const CheckEntry& find_check(const std::string& name) {
    for (const auto& e : check_registry())
        if (e.name == name) return e;
    throw std::invalid_argument("unknown check: " + name);
}

nlohmann::json resolve_params(const CheckEntry& e, const nlohmann::json& params) {
    if (!params.is_null() && !params.is_object()) throw std::invalid_argument("check parameters must be an object");
    nlohmann::json out = e.defaults;
    if (params.is_null()) return out;
    for (const auto& [k, v] : params.items()) {
        if (!e.defaults.contains(k)) throw std::invalid_argument(e.name + ": unknown parameter " + k);
        const auto& d = e.defaults[k];
        bool ok = d.is_array() ? v.is_array() && std::all_of(v.begin(), v.end(), [](const auto& x) {
            return x.is_number();
        }) && !v.empty()
                               : v.is_number();
        if (!ok) throw std::invalid_argument(e.name + ": parameter " + k + " has the wrong type");
        out[k] = v;
    }
    return out;
}

void validate_params(const CheckEntry& e, const nlohmann::json& params) {
    CorpusSpec empty = e.corpus;
    empty.trials = 0;
    CheckOptions o;
    o.exec = Exec::Serial;
    e.run(resolve_params(e, params), Corpus(empty), o);
}

SuiteConfig SuiteConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("suite config must be a JSON object");
    SuiteConfig cfg;
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.out = j.value("out", std::string{});
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    if (!j.contains("checks") || !j["checks"].is_array() || j["checks"].empty())
        throw std::invalid_argument("suite config needs a nonempty \"checks\" array");
    for (const auto& item : j["checks"]) {
        SuiteItem it;
        it.check = item.is_string() ? item.get<std::string>() : item.at("check").get<std::string>();
        const auto& e = find_check(it.check);
        CorpusSpec base = e.corpus;
        base.seed = cfg.seed;
        if (item.is_object()) {
            it.params = item.value("params", nlohmann::json::object());
            it.corpus = CorpusSpec::from_json(item.value("corpus", nlohmann::json::object()), base);
        } else {
            it.corpus = base;
        }
        cfg.items.push_back(std::move(it));
    }
    return cfg;
}

nlohmann::json SuiteConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    if (!out.empty()) j["out"] = out;
    if (tol) j["tol"] = *tol;
    j["checks"] = nlohmann::json::array();
    for (const auto& it : items)
        j["checks"].push_back({{"check", it.check}, {"params", it.params}, {"corpus", it.corpus.to_json()}});
    return j;
}

void SuiteConfig::validate() const {
    if (items.empty()) throw std::invalid_argument("suite config has no checks");
    if (tol && !(*tol >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
    for (const auto& it : items) validate_params(find_check(it.check), it.params);
}

SuiteConfig default_suite(std::uint64_t seed, std::size_t trials) {
    SuiteConfig cfg;
    cfg.seed = seed;
    for (const auto& e : check_registry()) {
        SuiteItem it{e.name, nlohmann::json::object(), e.corpus};
        it.corpus.seed = seed;
        if (trials > 0) it.corpus.trials = trials;
        cfg.items.push_back(std::move(it));
    }
    return cfg;
}

std::vector<CheckReport> run_suite(const SuiteConfig& cfg, Exec exec) {
    cfg.validate();
    CheckOptions o;
    o.exec = exec;
    if (cfg.tol) o.tol = *cfg.tol;
    std::vector<CheckReport> out;
    for (const auto& it : cfg.items) {
        const auto& e = find_check(it.check);
        out.push_back(e.run(resolve_params(e, it.params), Corpus(it.corpus), o));
    }
    return out;
}

std::size_t total_violations(const std::vector<CheckReport>& reports) {
    std::size_t v = 0;
    for (const auto& r : reports) v += r.violations;
    return v;
}

nlohmann::json suite_json(const SuiteConfig& cfg, const std::vector<CheckReport>& reports) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["violations"] = total_violations(reports);
    j["reports"] = nlohmann::json::array();
    for (const auto& r : reports) j["reports"].push_back(r.to_json());
    return j;
}

}  // namespace mtgl
