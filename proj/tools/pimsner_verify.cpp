// pimsner-verify: runs verification suites on an instance file.
//
//   pimsner-verify --instance inst.json --suite all [--truncation N] [--tol X]
//                  [--seed S] [--max-word-length L] [--format text|json] [--out PATH]
//   pimsner-verify --generate-instance SEED [--out PATH]
//
// Exit codes: 0 all pass, 1 a check failed, 2 precondition or schema error,
// 3 dimension cap.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pimsner/pimsner.h"

namespace {

int write_out(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return 0;
  }
  std::ofstream os(path);
  if (!os) {
    std::cerr << "error: cannot write " << path << "\n";
    return PIMSNER_PRECONDITION;
  }
  os << text;
  return 0;
}

int report_load_error(int status) {
  std::cerr << "error: " << pimsner_last_error() << "\n";
  if (pimsner_schema_error_count() == 0) return status;
  return PIMSNER_PRECONDITION;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of Fock-space, crossed-product and free-product identities"};
  std::string instance, suite = "all", format = "text", out;
  int truncation = 0, max_len = 0;
  double tol = 0.0;
  std::uint64_t seed = 0, gen_seed = 0;
  bool list = false;

  auto* inst_opt = app.add_option("--instance", instance, "instance file (JSON)")->check(CLI::ExistingFile);
  app.add_option("--suite", suite, "suite to run")
      ->check(CLI::IsMember({"fock", "ideal", "factorization", "toeplitz", "crossed", "free", "amalg", "bog", "all"}));
  app.add_option("--truncation", truncation, "Fock truncation N (overrides the instance)")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "tolerance for default-threshold checks")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the instance)");
  app.add_option("--max-word-length", max_len, "word-length budget")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", out, "write the report (or generated instance) here instead of stdout");
  auto* gen_opt = app.add_option("--generate-instance", gen_seed, "write a seeded random instance and exit");
  app.add_flag("--list-suites", list, "print the suite names and exit");
  gen_opt->excludes(inst_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return PIMSNER_PRECONDITION;
  }

  if (list) {
    std::puts(pimsner_suite_names());
    return 0;
  }

  if (gen_opt->count() > 0) {
    char* text = nullptr;
    if (int st = pimsner_generate_instance(gen_seed, &text); st != PIMSNER_OK) {
      std::cerr << "error: " << pimsner_last_error() << "\n";
      return st;
    }
    std::string body = std::string(text) + "\n";
    pimsner_string_free(text);
    return write_out(out, body.c_str());
  }

  if (instance.empty()) {
    std::cerr << "error: --instance is required\n";
    return PIMSNER_PRECONDITION;
  }
  pimsner_instance* in = nullptr;
  if (int st = pimsner_instance_load(instance.c_str(), &in); st != PIMSNER_OK) return report_load_error(st);

  pimsner_options opt;
  pimsner_options_init(&opt);
  opt.truncation = truncation;
  opt.tolerance = tol;
  opt.max_word_length = max_len;
  if (seed_opt->count() > 0) {
    opt.has_seed = 1;
    opt.seed = seed;
  }

  pimsner_report* rep = nullptr;
  int st = pimsner_run_suite(in, suite.c_str(), &opt, &rep);
  pimsner_instance_free(in);
  if (st != PIMSNER_OK) {
    std::cerr << "error: " << pimsner_last_error() << "\n";
    return st == PIMSNER_INVALID_ARGUMENT || st == PIMSNER_INTERNAL ? PIMSNER_PRECONDITION : st;
  }

  char* text = nullptr;
  int code = pimsner_report_exit_code(rep);
  if (pimsner_report_render(rep, format.c_str(), &text) == PIMSNER_OK) {
    if (int w = write_out(out, text)) code = w;
    pimsner_string_free(text);
  }
  // with --out, keep a text summary on stdout
  if (!out.empty() && pimsner_report_render(rep, "text", &text) == PIMSNER_OK) {
    std::string t = text;
    pimsner_string_free(text);
    auto pos = t.rfind('\n', t.size() >= 2 ? t.size() - 2 : 0);
    std::fputs(pos == std::string::npos ? t.c_str() : t.c_str() + pos + 1, stdout);
  }
  pimsner_report_free(rep);
  return code;
}
