#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtgl/bellman.hpp"
#include "mtgl/ito.hpp"
#include "mtgl/registry.hpp"
#include "mtgl/rough.hpp"
#include "mtgl/serialize.hpp"

namespace {

using nlohmann::json;
using namespace mtgl;

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

void emit(const std::string& out, const json& j) {
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_file_atomic(out, j.dump(2) + "\n");
}

Exec exec_of(bool serial) { return serial ? Exec::Serial : Exec::Parallel; }

// ---- gen ----------------------------------------------------------------

struct GenArgs {
    CorpusSpec spec;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
};

json bundle_of(const TreeProcess& f) {
    TreeBundle b{f.tree(), {{"f", f}}};
    return to_json(b);
}

int cmd_gen(const GenArgs& a) {
    if (!a.seed) throw UsageError("gen needs --seed");
    if (a.out.empty()) throw UsageError("gen needs --out");
    CorpusSpec spec = CorpusSpec::from_json(json::object(), a.spec);
    spec.seed = *a.seed;
    spec.trials = a.trials.value_or(1);
    if (spec.trials == 0) throw UsageError("--trials must be positive");
    Corpus corpus(spec);
    json j;
    if (spec.trials == 1) {
        j = bundle_of(corpus.member(0));
    } else {
        j = json::array();
        for (std::size_t i = 0; i < spec.trials; ++i) j.push_back(bundle_of(corpus.member(i)));
    }
    write_file_atomic(a.out, j.dump() + "\n");
    std::cout << "wrote " << spec.trials << " tree(s) to " << a.out << "\n";
    return kExitOk;
}

// ---- check --------------------------------------------------------------

TreeProcess first_process(const TreeBundle& b) {
    if (b.processes.empty()) throw std::invalid_argument("tree file has no processes");
    auto it = b.processes.find("f");
    return it != b.processes.end() ? it->second : b.processes.begin()->second;
}

Corpus load_corpus(const std::string& path, std::uint64_t seed) {
    json j = json::parse(read_file(path));
    std::vector<TreeProcess> members;
    if (j.is_array())
        for (const auto& b : j) members.push_back(first_process(bundle_from_json(b)));
    else
        members.push_back(first_process(bundle_from_json(j)));
    return Corpus(std::move(members), seed);
}

json parse_param_value(const std::string& v) {
    try {
        return json::parse(v);
    } catch (const json::exception&) {
        throw UsageError("parameter value is not a number or JSON array: " + v);
    }
}

struct CheckArgs {
    std::string name;
    std::vector<std::string> params;
    std::string corpus_file;
    CorpusSpec spec;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<int> depth;
    std::optional<double> tol;
    std::string out;
    bool serial = false;
};

int cmd_check(const CheckArgs& a) {
    const auto& entry = find_check(a.name);
    json params = json::object();
    for (const auto& kv : a.params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got " + kv);
        params[kv.substr(0, eq)] = parse_param_value(kv.substr(eq + 1));
    }
    validate_params(entry, params);
    CheckOptions opt;
    opt.exec = exec_of(a.serial);
    if (a.tol) {
        if (!(*a.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
        opt.tol = *a.tol;
    }
    std::optional<Corpus> corpus;
    if (!a.corpus_file.empty()) {
        corpus.emplace(load_corpus(a.corpus_file, a.seed.value_or(0)));
    } else {
        if (!a.seed) throw UsageError("check needs --seed for a generated corpus");
        CorpusSpec spec = entry.corpus;
        spec.seed = *a.seed;
        if (a.trials) spec.trials = *a.trials;
        if (a.depth) spec.depth = *a.depth;
        if (!a.spec.generator.empty()) spec.generator = a.spec.generator;
        corpus.emplace(CorpusSpec::from_json(json::object(), spec));
    }
    auto rep = entry.run(resolve_params(entry, params), *corpus, opt);
    emit(a.out, rep.to_json());
    std::cerr << rep.check << ": trials " << rep.trials << ", violations " << rep.violations << ", worst ratio "
              << rep.worst_ratio << "\n";
    return rep.violations == 0 ? kExitOk : kExitViolations;
}

// ---- suite --------------------------------------------------------------

struct SuiteArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<double> tol;
    std::string out;
    bool serial = false;
};

int cmd_suite(const SuiteArgs& a) {
    SuiteConfig cfg;
    if (!a.config.empty()) {
        json j;
        try {
            j = json::parse(read_file(a.config));
        } catch (const json::exception& e) {
            throw UsageError(std::string("config is not valid JSON: ") + e.what());
        }
        if (a.seed) j["seed"] = *a.seed;
        if (!j.contains("seed")) throw UsageError("suite needs a seed (config or --seed)");
        cfg = SuiteConfig::from_json(j);
        if (a.trials)
            for (auto& it : cfg.items) it.corpus.trials = *a.trials;
    } else {
        if (!a.seed) throw UsageError("suite needs --seed or --config");
        cfg = default_suite(*a.seed, a.trials.value_or(0));
    }
    if (a.tol) cfg.tol = *a.tol;
    if (!a.out.empty()) cfg.out = a.out;
    cfg.validate();
    auto reports = run_suite(cfg, exec_of(a.serial));
    for (const auto& r : reports)
        std::cerr << r.check << ": trials " << r.trials << ", violations " << r.violations << ", worst ratio "
                  << r.worst_ratio << "\n";
    emit(cfg.out, suite_json(cfg, reports));
    return total_violations(reports) == 0 ? kExitOk : kExitViolations;
}

// ---- rde ----------------------------------------------------------------

struct RdeArgs {
    std::string phi = "linear";
    std::string driver = "line";
    std::string area;
    double y0 = 1.0;
    double T = 1.0;
    double a = 1.0;
    std::size_t n = 256;
    double r = kDefaultRoughR;
    std::string out;
};

int cmd_rde(const RdeArgs& a) {
    if (!(a.T > 0.0)) throw UsageError("--T must be positive");
    if (a.n < 1 || a.n > kMaxRoughGrid) throw UsageError("--n must lie in [1, 512]");
    bool line = a.driver == "line";
    SampledPath x;
    std::optional<RoughPath> rx;
    if (line) {
        x = SampledPath::from_function(uniform_grid(a.T, a.n), [](double t) { return t; });
        rx.emplace(lift(x, a.r));
    } else {
        x = read_driver_csv(a.driver);
        if (x.dim() != 1) throw UsageError("the rde demo drives a scalar equation; driver must have one column");
        rx.emplace(a.area.empty() ? lift(x, a.r) : RoughPath(x, read_area_csv(a.area, x), a.r));
    }
    double swing = x.variation(1.0);
    std::optional<SmoothFunction> phi;
    std::function<double(double)> oracle;
    if (a.phi == "linear") {
        double box = 2.0 * std::abs(a.y0) * std::exp(std::abs(a.a) * swing) + 1.0;
        phi = SmoothFunction::linear({a.a}, 1, 1, box);
        // dY = a Y dX along any scalar driver: Y = y0 exp(a (X_t - X_0)).
        oracle = [&, x0 = x(0)](double xt) { return a.y0 * std::exp(a.a * (xt - x0)); };
    } else if (a.phi == "square") {
        double reach = std::abs(a.y0) * swing;
        if (reach >= 1.0) throw UsageError("square phi blows up: need |y0| * V^1(X) < 1");
        phi = SmoothFunction::square(2.0 * std::abs(a.y0) / (1.0 - reach) + 1.0);
        oracle = [&, x0 = x(0)](double xt) { return a.y0 / (1.0 - a.y0 * (xt - x0)); };
    } else {
        throw UsageError("--phi must be linear or square");
    }
    std::vector<double> y0{a.y0};
    auto sol = rde_solve(*phi, *rx, y0);
    double err = 0.0;
    std::string csv = "t,y,oracle\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        double o = oracle(x(i));
        err = std::max(err, std::abs(sol.path.y()(i) - o));
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x.time(i), sol.path.y()(i), o);
        csv += buf;
    }
    if (!a.out.empty()) write_file_atomic(a.out, csv);
    json j = sol.diag.to_json();
    j.erase("metrics");
    std::cout << "sup_error " << err << "\n" << j.dump() << "\n";
    return kExitOk;
}

// ---- ito ----------------------------------------------------------------

struct ItoArgs {
    std::size_t N = 256;
    std::optional<std::uint64_t> seed;
    std::size_t samples = 512;
    double eps = 0.25;
    int first_level = 5;
    int levels = 4;
    std::string out;
};

int cmd_ito(const ItoArgs& a) {
    if (!a.seed) throw UsageError("ito needs --seed");
    if (a.N < 1 || a.N > kMaxItoGrid) throw UsageError("--N must lie in [1, 4096]");
    if (!(a.eps > 0.0)) throw UsageError("--eps must be positive");
    int finest = a.first_level + a.levels - 1;
    if (a.first_level < 0 || a.levels < 2 || finest > 12 || (a.N % (std::size_t{1} << finest)) != 0)
        throw UsageError("--N must be divisible by 2^(first-level + levels - 1)");
    auto g = GridCadlagPath::scaled_walk(a.N, a.samples, *a.seed);
    // f_t = g_t^2 - t, an adapted integrand with its own oscillation.
    auto f = GridCadlagPath::adapted(g, [&](std::span<const double> p) {
        double t = static_cast<double>(p.size() - 1) / static_cast<double>(a.N);
        return p.back() * p.back() - t;
    });
    auto grid = AdaptedGridPartition::grid(a.N, g.paths());
    auto osc = AdaptedGridPartition::epsilon_oscillation(f, a.eps);
    double cov = 0.0, wsum = 0.0;
    for (std::size_t p = 0; p < g.paths(); ++p) {
        cov += g.weight(p) * covariation_sum(g, g, grid, p, 0, a.N);
        wsum += g.weight(p);
    }
    auto res = ito_identity_residuals(f, g, osc, osc.unite(grid), 64);
    auto ref = refine_converge(g, g, AdaptedGridPartition::epsilon_oscillation(g, a.eps), a.first_level, a.levels);
    json j{{"N", a.N},
           {"paths", g.paths()},
           {"sampled", g.sampled()},
           {"covariation_0T", cov / wsum},
           {"identity_residuals", res.to_json()},
           {"refinement", ref.to_json()}};
    std::cout << "covariation_0T " << cov / wsum << "\n"
              << "identity_residuals " << res.to_json().dump() << "\n"
              << "refinement " << ref.to_json().dump() << "\n";
    if (!a.out.empty()) {
        std::filesystem::create_directories(a.out);
        write_path_csv((std::filesystem::path(a.out) / "walk_path0.csv").string(), g, 0);
        write_partition_csv((std::filesystem::path(a.out) / "oscillation_partition.csv").string(), osc, g.T());
        write_file_atomic((std::filesystem::path(a.out) / "ito.json").string(), j.dump(2) + "\n");
    }
    return kExitOk;
}

// ---- bellman ------------------------------------------------------------

struct BellmanArgs {
    double gamma = kBellmanGamma;
    int depth = 8;
    std::string out;
    bool serial = false;
};

int cmd_bellman(const BellmanArgs& a) {
    if (a.depth < 1 || a.depth > kMaxExtremalDepth) throw UsageError("--depth must lie in [1, 12]");
    auto scan = concavity_check(ConcavityGrid::standard(), a.gamma, 1e-12, exec_of(a.serial));
    auto ext = extremal_search(a.depth, {1, 2, 3, 4, 5, 6, 7, 8});
    json j{{"gamma", a.gamma},
           {"grid_points", scan.points},
           {"worst_residual", scan.min_residual},
           {"worst_point", scan.argmin.to_json()},
           {"negative_points", scan.negative},
           {"extremal_depth", a.depth},
           {"best_extremal_ratio", ext.best_ratio},
           {"best_r", ext.best_r},
           {"sqrt3", std::sqrt(3.0)}};
    if (scan.counterexample) j["counterexample"] = scan.counterexample->to_json();
    std::cout << "worst_concavity_residual " << scan.min_residual << "\n"
              << "best_extremal_ratio " << ext.best_ratio << " (r = " << ext.best_r << ")\n";
    if (!a.out.empty()) write_file_atomic(a.out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_list() {
    for (const auto& e : check_registry())
        std::cout << e.name << "\t" << e.defaults.dump() << "\t" << e.summary << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Martingale inequality and rough path toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "generate a seeded corpus and write tree JSON");
    g->add_option("--generator", gen.spec.generator, "mixed|leaf_backprop|increment|walk|scaled_walk|doubling|log_weight|family");
    g->add_option("--depth", gen.spec.depth);
    g->add_option("--dist", gen.spec.dist);
    g->add_option("--branching", gen.spec.branching);
    g->add_option("--family", gen.spec.family);
    g->add_option("--trials", gen.trials, "number of trees (default 1)");
    g->add_option("--seed", gen.seed);
    g->add_option("--out", gen.out);

    CheckArgs chk;
    chk.spec.generator.clear();
    auto* c = app.add_subcommand("check", "run one registered check");
    c->add_option("name", chk.name)->required();
    c->add_option("--param", chk.params, "key=value (repeatable)");
    c->add_option("--corpus", chk.corpus_file, "tree JSON from gen instead of a generated corpus");
    c->add_option("--generator", chk.spec.generator);
    c->add_option("--seed", chk.seed);
    c->add_option("--trials", chk.trials);
    c->add_option("--depth", chk.depth);
    c->add_option("--tol", chk.tol);
    c->add_option("--out", chk.out);
    c->add_flag("--serial", chk.serial);

    SuiteArgs su;
    auto* s = app.add_subcommand("suite", "run a suite of checks");
    s->add_option("--config", su.config);
    s->add_option("--seed", su.seed);
    s->add_option("--trials", su.trials);
    s->add_option("--tol", su.tol);
    s->add_option("--out", su.out);
    s->add_flag("--serial", su.serial);

    RdeArgs rde;
    auto* r = app.add_subcommand("rde", "solve dY = phi(Y) dX and compare with the closed form");
    r->add_option("--phi", rde.phi, "linear|square");
    r->add_option("--driver", rde.driver, "line or a driver CSV");
    r->add_option("--area", rde.area, "second-level CSV for the driver");
    r->add_option("--y0", rde.y0);
    r->add_option("--T", rde.T);
    r->add_option("--a", rde.a, "coefficient of the linear phi");
    r->add_option("--n", rde.n, "grid intervals of the line driver");
    r->add_option("--r", rde.r);
    r->add_option("--out", rde.out, "solution CSV");

    ItoArgs ito;
    auto* i = app.add_subcommand("ito", "pre-limit Ito sums on the scaled walk");
    i->add_option("--N", ito.N);
    i->add_option("--depth", ito.N, "alias of --N");
    i->add_option("--seed", ito.seed);
    i->add_option("--trials", ito.samples, "Monte Carlo paths when 2^N is too large");
    i->add_option("--eps", ito.eps);
    i->add_option("--first-level", ito.first_level, "coarsest dyadic level");
    i->add_option("--levels", ito.levels);
    i->add_option("--out", ito.out, "output directory");

    BellmanArgs bel;
    auto* b = app.add_subcommand("bellman", "concavity scan and extremal search");
    b->add_option("--gamma", bel.gamma);
    b->add_option("--depth", bel.depth);
    b->add_option("--out", bel.out);
    b->add_flag("--serial", bel.serial);

    auto* l = app.add_subcommand("list-checks", "list registered checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*c) return cmd_check(chk);
        if (*s) return cmd_suite(su);
        if (*r) return cmd_rde(rde);
        if (*i) return cmd_ito(ito);
        if (*b) return cmd_bellman(bel);
        if (*l) return cmd_list();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
