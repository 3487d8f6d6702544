#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtgl/checks.hpp"

namespace mtgl {

using CheckRunner = std::function<CheckReport(const nlohmann::json& params, const Corpus&, const CheckOptions&)>;

struct CheckEntry {
    std::string name;
    std::string summary;
    nlohmann::json defaults;  // parameter names and default values
    CorpusSpec corpus;        // default corpus
    CheckRunner run;
};

// All checks, sorted by name.
const std::vector<CheckEntry>& check_registry();
// Throws std::invalid_argument for unknown names.
const CheckEntry& find_check(const std::string& name);

// defaults overlaid with params; unknown keys or non-numeric values throw.
nlohmann::json resolve_params(const CheckEntry& e, const nlohmann::json& params);
// Runs the check on an empty corpus so that parameter preconditions surface
// as std::invalid_argument before any trial is drawn.
void validate_params(const CheckEntry& e, const nlohmann::json& params);

struct SuiteItem {
    std::string check;
    nlohmann::json params = nlohmann::json::object();
    CorpusSpec corpus;
};

struct SuiteConfig {
    std::vector<SuiteItem> items;
    std::uint64_t seed = 1;
    std::string out;
    std::optional<double> tol;

    // {"seed": s, "out": path, "tol": x, "checks": [{"check": name, "params": {...}, "corpus": {...}}]}
    // Item corpora default to the registry entry's corpus with the global seed.
    static SuiteConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    // Every check exists and its parameters pass validate_params.
    void validate() const;
};

// One item per registered check with its defaults; trials scales every corpus
// when nonzero.
SuiteConfig default_suite(std::uint64_t seed, std::size_t trials = 0);

// Each item runs on its own corpus spec; reports keep the item order.
std::vector<CheckReport> run_suite(const SuiteConfig& cfg, Exec exec = Exec::Parallel);
std::size_t total_violations(const std::vector<CheckReport>& reports);
// {"seed", "reports": [...], "violations"}.
nlohmann::json suite_json(const SuiteConfig& cfg, const std::vector<CheckReport>& reports);

}  // namespace mtgl
