#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtgl/generators.hpp"
#include "mtgl/norms.hpp"
#include "mtgl/parallel.hpp"
#include "mtgl/tree.hpp"

namespace mtgl {

// Deterministic description of a family of random processes.
// generator: mixed | leaf_backprop | increment | walk | scaled_walk | doubling |
//            log_weight | family
struct CorpusSpec {
    std::string generator = "mixed";
    int depth = 6;
    std::string dist = "gaussian";
    int branching = 3;
    int family = 1;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;

    nlohmann::json to_json() const;
    static CorpusSpec from_json(const nlohmann::json& j, const CorpusSpec& defaults);
};

class Corpus {
public:
    explicit Corpus(CorpusSpec spec) : spec_(std::move(spec)) {}
    explicit Corpus(std::vector<TreeProcess> members, std::uint64_t seed = 0);

    const CorpusSpec& spec() const { return spec_; }
    std::size_t size() const { return members_.empty() ? spec_.trials : members_.size(); }
    bool is_explicit() const { return !members_.empty(); }
    // Member i (wraps around for explicit corpora when more trials are requested).
    TreeProcess member(std::size_t i) const;
    // Trial-local generator independent of the member's own randomness.
    Rng trial_rng(std::size_t i) const;

private:
    CorpusSpec spec_;
    std::vector<TreeProcess> members_;
};

struct CheckReport {
    std::string check;
    nlohmann::json params = nlohmann::json::object();
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::size_t hypothesis_failures = 0;
    double worst_ratio = 0.0;
    double constant_used = 0.0;
    std::uint64_t seed = 0;
    double runtime_ms = 0.0;
    nlohmann::json measurements = nlohmann::json::object();

    nlohmann::json to_json() const;
    static CheckReport from_json(const nlohmann::json& j);
};

struct CheckOptions {
    Exec exec = Exec::Parallel;
    // When set, trials counts qualifying trials; attempts failing the
    // hypothesis are drawn in addition and counted separately.
    bool qualifying = false;
    // Relative slack: a trial violates when its ratio exceeds 1 + tol.
    double tol = kRatioTol;
};

// Outcome of one trial: ratio of the asserted inequality (<= 1 means it holds)
// plus measured quantities aggregated by max.
struct TrialOutcome {
    double ratio = 0.0;
    bool qualifies = true;
    std::vector<double> measures;
};

using TrialFn = std::function<TrialOutcome(std::size_t)>;

CheckReport run_check(const std::string& name, const nlohmann::json& params, const Corpus& corpus,
                      const std::vector<std::string>& measure_names, double constant, const CheckOptions& opt,
                      const TrialFn& trial);

// Centered copy f - f_0.
TreeProcess centered(const TreeProcess& f);
// |f| node-wise.
TreeProcess absolute(const TreeProcess& f);
std::vector<double> level_values(const TreeProcess& f, int n);
std::vector<double> level_probs(const FiltrationTree& tree, int n);

double conjugate_exponent(double p);

CheckReport check_doob(const Corpus& corpus, double p, const CheckOptions& opt = {});
CheckReport check_square_weak(const Corpus& corpus, const CheckOptions& opt = {});
CheckReport check_davis_decomposition(const Corpus& corpus, const CheckOptions& opt = {});
CheckReport check_davis_bdg(const Corpus& corpus, const std::vector<double>& ps, const CheckOptions& opt = {});
CheckReport check_optional_sampling(const Corpus& corpus, const CheckOptions& opt = {});
CheckReport check_lepingle(const Corpus& corpus, double r, double p, const CheckOptions& opt = {});
CheckReport check_weighted_doob(const Corpus& corpus, const CheckOptions& opt = {});

CheckReport check_garsia_neveu(const Corpus& corpus, double p, const CheckOptions& opt = {});
CheckReport check_sum_of_ek(const Corpus& corpus, double p, const CheckOptions& opt = {});
CheckReport check_truncation(const Corpus& corpus, double p, const CheckOptions& opt = {});
CheckReport check_good_lambda(const Corpus& corpus, double p, double beta, double delta, const CheckOptions& opt = {});
CheckReport check_s_vs_S(const Corpus& corpus, double p, const CheckOptions& opt = {});
CheckReport check_M_vs_s(const Corpus& corpus, double p, const CheckOptions& opt = {});
// All auxiliary lemmas at their configured exponents, one report per sub-check.
std::vector<CheckReport> check_aux_lemmas(const Corpus& corpus, const CheckOptions& opt = {});
CheckReport merge_reports(const std::string& name, const std::vector<CheckReport>& parts);

CheckReport check_vector_valued(const Corpus& corpus, double q, double r, double p, const CheckOptions& opt = {});
CheckReport check_paraproduct(const Corpus& corpus, double q0, double q1, double r0, double r1,
                              const CheckOptions& opt = {});

// Numerical checks of the two layer-cake identities used by the auxiliary
// lemmas; returns the max relative error of each formula over a grid of (t, p).
struct FormulaCheck {
    double garsia_neveu_pp1 = 0.0;   // t^p = p(p-1) int_0^t (t-l) l^{p-2} dl, p > 1
    double garsia_neveu_p1p = 0.0;   // same with p(1-p)
    double truncation_p1p = 0.0;     // t^p = p(1-p) int_0^inf (t ^ l) l^{p-2} dl, p < 1
};
FormulaCheck layer_cake_formulas();

}  // namespace mtgl
