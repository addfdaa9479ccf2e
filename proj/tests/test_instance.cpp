#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "pimsner/generate.hpp"
#include "pimsner/pimsner.h"
#include "pimsner/suites.hpp"

using namespace pimsner;

namespace {

const std::string kExamples = PIMSNER_EXAMPLES_DIR;

std::string path(const std::string& name) { return kExamples + "/" + name; }

std::vector<std::string> schema_errors(const std::string& text) {
  try {
    parse_instance_text(text);
  } catch (const SchemaError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& part) {
  for (const auto& s : v)
    if (s.find(part) != std::string::npos) return true;
  return false;
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string tmp = ::testing::TempDir() + "cli_out.txt";
  const std::string cmd = std::string(PIMSNER_VERIFY_EXE) + " " + args + " > " + tmp + " 2>&1";
  const int st = std::system(cmd.c_str());
  if (out) {
    std::ifstream is(tmp);
    std::stringstream ss;
    ss << is.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(InstanceSchema, MinimalInstanceParses) {
  Instance in = parse_instance(path("minimal.json"));
  ASSERT_EQ(in.algebras.size(), 1u);
  EXPECT_EQ(in.algebras.at("B").block_count(), 1);
  EXPECT_EQ(in.algebras.at("B").block_size(0), 1);
  EXPECT_FALSE(in.fock.has_value());
  EXPECT_EQ(in.params.tolerance, 1e-9);
  EXPECT_EQ(in.params.seed, 0u);
  EXPECT_EQ(in.params.dimension_cap, 20000);
  // no sections: every suite reports a precondition, none fails
  VerificationReport r = run_suite(in, "all");
  EXPECT_EQ(r.exit_code(), 2);
  EXPECT_EQ(r.count(CheckStatus::fail), 0u);
}

TEST(InstanceSchema, NegativeBlockSizeNamesTheField) {
  try {
    parse_instance(path("bad_block_size.json"));
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_TRUE(any_contains(e.errors(), "$.algebras.B.blocks[1]"));
  }
  EXPECT_TRUE(any_contains(schema_errors(R"({"algebras":{"B":{"blocks":[-1]}}})"), "$.algebras.B.blocks[0]"));
}

TEST(InstanceSchema, UnresolvedReferenceIsReported) {
  try {
    parse_instance(path("unresolved_reference.json"));
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_TRUE(any_contains(e.errors(), "$.bimodules.H.algebra"));
    EXPECT_TRUE(any_contains(e.errors(), "unresolved"));
  }
}

TEST(InstanceSchema, MalformedAndUnknownInput) {
  EXPECT_FALSE(schema_errors("{\"algebras\": ").empty());
  EXPECT_TRUE(any_contains(schema_errors(R"({"algebras":{"B":{"blocks":[1]}},"colour":1})"), "colour"));
  EXPECT_FALSE(schema_errors(R"({"algebras":{"B":{"blocks":"one"}}})").empty());
  EXPECT_THROW(parse_instance(path("no_such_file.json")), SchemaError);
}

TEST(InstanceSchema, ErrorsAreCollectedTogether) {
  auto errs = schema_errors(R"({"algebras":{"B":{"blocks":[0]},"C":{"blocks":[-2]}}})");
  EXPECT_TRUE(any_contains(errs, "$.algebras.B.blocks[0]"));
  EXPECT_TRUE(any_contains(errs, "$.algebras.C.blocks[0]"));
}

TEST(InstanceSchema, FullInstanceHasEverySection) {
  Instance in = parse_instance(path("full.json"));
  EXPECT_EQ(in.name, "full");
  EXPECT_EQ(in.params.truncation, 4);
  EXPECT_EQ(in.params.seed, 7u);
  EXPECT_TRUE(in.fock && in.ideal && in.factorization && in.toeplitz && in.free && in.amalg);
  EXPECT_EQ(in.crossed.size(), 1u);
  ASSERT_EQ(in.bog.size(), 1u);
  EXPECT_FALSE(in.bog[0].u.has_value());
  EXPECT_EQ(in.modules.at("H").module.dimension(), 6);
  EXPECT_EQ(in.modules.at("G").kind, "gns");
  EXPECT_EQ(in.amalg->vanishing_budget, 2);
  EXPECT_EQ(in.words.at("balanced").spec.degree(), 0);
}

TEST(InstanceSchema, GeneratedInstancesRoundTrip) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Json j = generate_instance(seed);
    EXPECT_EQ(j.dump(), generate_instance(seed).dump());
    Instance in = parse_instance_text(j.dump());
    EXPECT_EQ(in.params.seed, seed);
    EXPECT_TRUE(in.fock && in.ideal && in.factorization && in.toeplitz && in.free && in.amalg);
    EXPECT_EQ(in.bog.size(), 1u);
    EXPECT_LE(in.modules.at("H").module.dimension(), 12);
  }
  EXPECT_NE(generate_instance(1).dump(), generate_instance(2).dump());
}

TEST(Suites, RunsAreDeterministic) {
  Instance in = parse_instance_json(generate_instance(4));
  EXPECT_EQ(run_suite(in, "fock").to_json().dump(), run_suite(in, "fock").to_json().dump());
  SuiteOptions a, b;
  a.seed = 11;
  b.seed = 12;
  EXPECT_EQ(run_suite(in, "toeplitz", a).to_json().dump(), run_suite(in, "toeplitz", a).to_json().dump());
  EXPECT_NE(run_suite(in, "toeplitz", a).to_json().dump(), run_suite(in, "toeplitz", b).to_json().dump());
}

TEST(Suites, UnknownSuiteIsAPrecondition) {
  Instance in = parse_instance(path("minimal.json"));
  EXPECT_THROW(run_suite(in, "nonsense"), PreconditionError);
}

TEST(Suites, AmalgAtTruncationTwoReportsBuildW) {
  VerificationReport r = run_suite(parse_instance(path("amalg_n2.json")), "amalg");
  EXPECT_EQ(r.exit_code(), 2);
  bool found = false;
  for (const auto& c : r.checks())
    if (c.name.find("build_W") != std::string::npos && c.status == CheckStatus::precondition) found = true;
  EXPECT_TRUE(found);
  EXPECT_EQ(r.count(CheckStatus::fail), 0u);
}

TEST(Suites, TruncationOverrideReachesAmalg) {
  SuiteOptions o;
  o.truncation = 4;
  VerificationReport r = run_suite(parse_instance(path("amalg_n2.json")), "amalg", o);
  EXPECT_EQ(r.exit_code(), 0) << r.to_text();
}

TEST(Suites, BogGrowthTableReproducesTheBoundColumn) {
  VerificationReport r = run_suite(parse_instance(path("bog_grid.json")), "bog");
  const auto& d = r.data();
  int rows = 0;
  for (const char* entry : {"bog[0]", "bog[1]"})
    for (int n = 1; n <= 3; ++n) {
      const auto& t = d[entry]["n=" + std::to_string(n)];
      const int dim_v = t["dim_V"], dim_k = t["dim_K"];
      ASSERT_EQ(t["growth"].size(), 6u);
      for (const auto& row : t["growth"]) {
        const int p = row["p"];
        double expect = n;
        for (int i = 0; i < n; ++i) expect *= static_cast<double>(p) * dim_k;
        expect *= dim_v;
        EXPECT_DOUBLE_EQ(row["bound"].get<double>(), expect);
        EXPECT_DOUBLE_EQ(row["bound"].get<double>(), entropy_bound(n, p, dim_v, dim_k));
        ++rows;
      }
    }
  EXPECT_EQ(rows, 36);
  // the cyclic shift on C^3 has dim K = 1, where the level-0 summand exceeds the bound
  const auto* c = r.find("bog[1]/n=1/measured dimension within the stated bound");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, CheckStatus::fail);
  const auto* f = r.find("bog[0]/n=3/measured dimension within the stated bound");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->status, CheckStatus::pass);
}

TEST(Suites, NegativeControlsNameTheViolatedAnchor) {
  struct Case {
    const char* file;
    const char* check;
    const char* anchor;
  };
  for (const Case& k : {Case{"neg_left_action.json", "left action is a unital *-homomorphism", "b1 (b2 x)"},
                        Case{"neg_non_cp.json", "choi matrix positive semidefinite", "complete positivity"},
                        Case{"neg_nonfree.json", "nonfree_control/alternating centred moments vanish", "free"},
                        Case{"neg_bogoliubov.json", "inner products twisted by beta", "beta(<h1, h2>)"}}) {
    VerificationReport r = run_suite(parse_instance(path(k.file)), "all");
    EXPECT_EQ(r.exit_code(), 1) << k.file;
    bool found = false;
    for (const auto& c : r.checks())
      if (c.status == CheckStatus::fail && c.name.find(k.check) != std::string::npos &&
          c.anchor.find(k.anchor) != std::string::npos)
        found = true;
    EXPECT_TRUE(found) << k.file;
  }
}

TEST(Suites, ToleranceRejudgesDefaultThresholds) {
  Instance in = parse_instance(path("neg_left_action.json"));
  SuiteOptions o;
  o.tolerance = 1.0;
  VerificationReport r = run_suite(in, "fock", o);
  const auto* c = r.find("module/basis change unitary");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->threshold, 1.0);
  EXPECT_EQ(c->status, CheckStatus::pass);
  EXPECT_EQ(r.parameters()["tolerance"], 1.0);
}

TEST(CApi, LoadRunRender) {
  pimsner_instance* in = nullptr;
  ASSERT_EQ(pimsner_instance_load(path("scalar_c2.json").c_str(), &in), PIMSNER_OK);
  pimsner_options opt;
  pimsner_options_init(&opt);
  opt.truncation = 3;
  pimsner_report* rep = nullptr;
  ASSERT_EQ(pimsner_run_suite(in, "fock", &opt, &rep), PIMSNER_OK);
  EXPECT_EQ(pimsner_report_exit_code(rep), 0);
  const size_t n = pimsner_report_check_count(rep);
  ASSERT_GT(n, 0u);
  pimsner_check_info info;
  ASSERT_EQ(pimsner_report_check(rep, 0, &info), PIMSNER_OK);
  EXPECT_EQ(info.status, PIMSNER_CHECK_PASS);
  EXPECT_GT(std::string(info.anchor).size(), 0u);
  EXPECT_EQ(pimsner_report_check(rep, n, &info), PIMSNER_INVALID_ARGUMENT);
  EXPECT_NE(std::string(pimsner_last_error()).size(), 0u);

  char* text = nullptr;
  ASSERT_EQ(pimsner_report_render(rep, "json", &text), PIMSNER_OK);
  Json j = Json::parse(text);
  pimsner_string_free(text);
  EXPECT_EQ(j["parameters"]["truncation"], 3);
  EXPECT_EQ(j["checks"].size(), n);
  EXPECT_EQ(pimsner_report_render(rep, "xml", &text), PIMSNER_INVALID_ARGUMENT);
  ASSERT_EQ(pimsner_report_render(rep, "text", &text), PIMSNER_OK);
  EXPECT_NE(std::string(text).find("[pass]"), std::string::npos);
  pimsner_string_free(text);

  EXPECT_EQ(pimsner_run_suite(in, "nonsense", &opt, &rep), PIMSNER_PRECONDITION);
  pimsner_report_free(rep);
  pimsner_instance_free(in);
}

TEST(CApi, SchemaErrorsAndNullArguments) {
  pimsner_instance* in = nullptr;
  EXPECT_EQ(pimsner_instance_parse(R"({"algebras":{"B":{"blocks":[-3]}}})", &in), PIMSNER_PRECONDITION);
  EXPECT_EQ(in, nullptr);
  ASSERT_EQ(pimsner_schema_error_count(), 1u);
  EXPECT_NE(std::string(pimsner_schema_error(0)).find("$.algebras.B.blocks[0]"), std::string::npos);
  EXPECT_EQ(pimsner_schema_error(1), nullptr);
  EXPECT_EQ(pimsner_instance_parse(nullptr, &in), PIMSNER_INVALID_ARGUMENT);
  EXPECT_EQ(pimsner_instance_load("x.json", nullptr), PIMSNER_INVALID_ARGUMENT);
  EXPECT_EQ(pimsner_run_suite(nullptr, "all", nullptr, nullptr), PIMSNER_INVALID_ARGUMENT);
  EXPECT_EQ(pimsner_report_exit_code(nullptr), PIMSNER_INVALID_ARGUMENT);
  pimsner_instance_free(nullptr);
  pimsner_report_free(nullptr);
}

TEST(CApi, GenerateAndSuiteNames) {
  char* text = nullptr;
  ASSERT_EQ(pimsner_generate_instance(9, &text), PIMSNER_OK);
  pimsner_instance* in = nullptr;
  EXPECT_EQ(pimsner_instance_parse(text, &in), PIMSNER_OK);
  pimsner_string_free(text);
  pimsner_instance_free(in);
  EXPECT_EQ(std::string(pimsner_suite_names()), "fock,ideal,factorization,toeplitz,crossed,free,amalg,bog,all");
  EXPECT_STRNE(pimsner_version(), "");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("--instance " + path("scalar_c2.json") + " --suite fock"), 0);
  EXPECT_EQ(run_cli("--instance " + path("crossed_groups.json") + " --suite crossed"), 0);
  EXPECT_EQ(run_cli("--instance " + path("amalg_n2.json") + " --suite amalg"), 2);
  EXPECT_EQ(run_cli("--instance " + path("neg_non_cp.json")), 1);
  EXPECT_EQ(run_cli("--instance " + path("minimal.json")), 2);
  EXPECT_EQ(run_cli("--instance " + path("scalar_c2.json") + " --suite nonsense"), 2);
  EXPECT_EQ(run_cli("--instance " + path("scalar_c2.json") + " --suite fock --truncation 30000"), 3);
  std::string out;
  EXPECT_EQ(run_cli("--instance " + path("bad_block_size.json"), &out), 2);
  EXPECT_NE(out.find("$.algebras.B.blocks[1]"), std::string::npos);
}

TEST(Cli, JsonReportToFile) {
  const std::string file = ::testing::TempDir() + "report.json";
  std::string out;
  ASSERT_EQ(run_cli("--instance " + path("scalar_c2.json") + " --suite free --format json --seed 5 --out " + file, &out),
            0);
  EXPECT_NE(out.find("checks:"), std::string::npos);
  std::ifstream is(file);
  Json j = Json::parse(is);
  EXPECT_EQ(j["suite"], "free");
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["summary"]["fail"], 0);
}

TEST(Cli, GeneratedInstanceFile) {
  const std::string file = ::testing::TempDir() + "generated.json";
  ASSERT_EQ(run_cli("--generate-instance 3 --out " + file), 0);
  Instance in = parse_instance(file);
  EXPECT_EQ(in.name, "generated-3");
  EXPECT_EQ(run_cli("--instance " + file + " --suite crossed"), 0);
}
