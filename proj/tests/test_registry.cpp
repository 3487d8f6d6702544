#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <omp.h>

#include "mtgl/registry.hpp"
#include "mtgl/variation.hpp"

namespace mtgl {
namespace {

nlohmann::json strip_runtime(nlohmann::json j) {
    for (auto& r : j["reports"]) r.erase("runtime_ms");
    return j;
}

TEST(Registry, NamesAreSortedAndUnique) {
    const auto& reg = check_registry();
    ASSERT_GE(reg.size(), 15u);
    std::set<std::string> names;
    for (std::size_t i = 0; i < reg.size(); ++i) {
        names.insert(reg[i].name);
        if (i > 0) EXPECT_LT(reg[i - 1].name, reg[i].name);
    }
    EXPECT_EQ(names.size(), reg.size());
    for (const char* n : {"doob", "square_weak", "davis_bdg", "garsia_neveu", "aux_lemmas", "lepingle",
                          "vector_valued", "paraproduct", "sharp_davis"})
        EXPECT_TRUE(names.count(n)) << n;
}

TEST(Registry, UnknownNamesAndParametersAreRejected) {
    EXPECT_THROW(find_check("nope"), std::invalid_argument);
    const auto& doob = find_check("doob");
    EXPECT_THROW(resolve_params(doob, {{"q", 2.0}}), std::invalid_argument);
    EXPECT_THROW(resolve_params(doob, {{"p", "two"}}), std::invalid_argument);
    EXPECT_EQ(resolve_params(doob, {{"p", 4.0}})["p"], 4.0);
    EXPECT_THROW(validate_params(doob, {{"p", 0.5}}), std::invalid_argument);
    EXPECT_NO_THROW(validate_params(doob, {{"p", 1.5}}));
    EXPECT_THROW(validate_params(find_check("lepingle"), {{"r", 2.0}}), std::invalid_argument);
    EXPECT_THROW(validate_params(find_check("davis_bdg"), {{"p", {0.5}}}), std::invalid_argument);
}

TEST(Registry, EveryDefaultValidates) {
    for (const auto& e : check_registry()) EXPECT_NO_THROW(validate_params(e, nlohmann::json::object())) << e.name;
}

TEST(SuiteConfig, ParsesAndRejectsEmpty) {
    EXPECT_THROW(SuiteConfig::from_json(nlohmann::json::object()), std::invalid_argument);
    EXPECT_THROW(SuiteConfig::from_json({{"checks", nlohmann::json::array()}}), std::invalid_argument);
    EXPECT_THROW(SuiteConfig::from_json({{"checks", {"unknown"}}}), std::invalid_argument);
    auto cfg = SuiteConfig::from_json(
        {{"seed", 9}, {"checks", {"doob", {{"check", "lepingle"}, {"params", {{"r", 4.0}}}, {"corpus", {{"trials", 7}}}}}}});
    ASSERT_EQ(cfg.items.size(), 2u);
    EXPECT_EQ(cfg.items[0].corpus.seed, 9u);
    EXPECT_EQ(cfg.items[1].corpus.trials, 7u);
    EXPECT_EQ(cfg.items[1].corpus.generator, "walk");
    auto again = SuiteConfig::from_json(cfg.to_json());
    EXPECT_EQ(again.to_json().dump(), cfg.to_json().dump());
}

TEST(SuiteConfig, InvalidParametersFailValidation) {
    auto cfg = SuiteConfig::from_json({{"checks", {{{"check", "truncation"}, {"params", {{"p", 2.0}}}}}}});
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Suite, RerunIsByteIdentical) {
    omp_set_num_threads(4);
    auto cfg = default_suite(3, 20);
    auto a = strip_runtime(suite_json(cfg, run_suite(cfg)));
    auto b = strip_runtime(suite_json(cfg, run_suite(cfg, Exec::Serial)));
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_EQ(a["violations"], 0);
}

TEST(Suite, ToleranceOverrideReachesReports) {
    auto tree = FiltrationTree::uniform(1, 2);
    TreeProcess broken(tree, {10.0, 0.0, 0.0});
    Corpus c(std::vector<TreeProcess>{broken});
    CheckOptions loose;
    loose.tol = 1e12;
    EXPECT_EQ(find_check("doob").run({{"p", 2.0}}, c, loose).violations, 0u);
    EXPECT_EQ(find_check("doob").run({{"p", 2.0}}, c, {}).violations, 1u);
}

TEST(Report, JsonRoundTripKeepsNonFiniteValues) {
    CheckReport r;
    r.check = "x";
    r.worst_ratio = kInf;
    r.constant_used = 2.0;
    r.measurements["m"] = std::nan("");
    auto j = r.to_json();
    EXPECT_EQ(j["worst_ratio"], "inf");
    EXPECT_EQ(j["measurements"]["m"], "nan");
    for (const char* k : {"check", "params", "trials", "violations", "hypothesis_failures", "worst_ratio",
                          "constant_used", "seed", "runtime_ms"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_TRUE(std::isinf(CheckReport::from_json(j).worst_ratio));
}

}  // namespace
}  // namespace mtgl
