#include "pimsner/pimsner.h"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <new>
#include <string>
#include <vector>

#include "pimsner/generate.hpp"
#include "pimsner/suites.hpp"

struct pimsner_instance {
  pimsner::Instance value;
};

struct pimsner_report {
  pimsner::VerificationReport value;
};

namespace {

thread_local std::string g_error;
thread_local std::vector<std::string> g_schema;

int fail(int status, const std::string& msg) {
  g_error = msg;
  return status;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class F>
int guarded(F&& f) {
  g_error.clear();
  try {
    return f();
  } catch (const pimsner::SchemaError& e) {
    g_schema = e.errors();
    return fail(PIMSNER_PRECONDITION, e.what());
  } catch (const pimsner::PreconditionError& e) {
    return fail(PIMSNER_PRECONDITION, e.what());
  } catch (const pimsner::ResourceError& e) {
    return fail(PIMSNER_RESOURCE, e.what());
  } catch (const pimsner::StructuralError& e) {
    return fail(PIMSNER_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PIMSNER_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PIMSNER_INTERNAL, e.what());
  }
}

int load(pimsner_instance** out, const std::function<pimsner::Instance()>& parse) {
  if (!out) return fail(PIMSNER_INVALID_ARGUMENT, "null output handle");
  *out = nullptr;
  g_schema.clear();
  return guarded([&] {
    *out = new pimsner_instance{parse()};
    return PIMSNER_OK;
  });
}

}  // namespace

extern "C" {

const char* pimsner_version(void) { return "1.0.0"; }

const char* pimsner_last_error(void) { return g_error.c_str(); }

void pimsner_options_init(pimsner_options* opt) {
  if (!opt) return;
  opt->truncation = 0;
  opt->tolerance = 0.0;
  opt->has_seed = 0;
  opt->seed = 0;
  opt->max_word_length = 0;
}

int pimsner_instance_load(const char* path, pimsner_instance** out) {
  if (!path) return fail(PIMSNER_INVALID_ARGUMENT, "null path");
  return load(out, [&] { return pimsner::parse_instance(path); });
}

int pimsner_instance_parse(const char* json_text, pimsner_instance** out) {
  if (!json_text) return fail(PIMSNER_INVALID_ARGUMENT, "null text");
  return load(out, [&] { return pimsner::parse_instance_text(json_text); });
}

size_t pimsner_schema_error_count(void) { return g_schema.size(); }

const char* pimsner_schema_error(size_t i) { return i < g_schema.size() ? g_schema[i].c_str() : nullptr; }

void pimsner_instance_free(pimsner_instance* in) { delete in; }

int pimsner_generate_instance(uint64_t seed, char** json_out) {
  if (!json_out) return fail(PIMSNER_INVALID_ARGUMENT, "null output");
  *json_out = nullptr;
  return guarded([&] {
    *json_out = dup(pimsner::generate_instance(seed).dump(2));
    return PIMSNER_OK;
  });
}

const char* pimsner_suite_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : pimsner::suite_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

int pimsner_run_suite(const pimsner_instance* in, const char* suite, const pimsner_options* opt,
                      pimsner_report** out) {
  if (!in || !suite || !out) return fail(PIMSNER_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    pimsner::SuiteOptions o;
    if (opt) {
      if (opt->truncation > 0) o.truncation = opt->truncation;
      if (opt->tolerance > 0) o.tolerance = opt->tolerance;
      if (opt->has_seed) o.seed = opt->seed;
      if (opt->max_word_length > 0) o.max_word_length = opt->max_word_length;
    }
    *out = new pimsner_report{pimsner::run_suite(in->value, suite, o)};
    return PIMSNER_OK;
  });
}

int pimsner_report_exit_code(const pimsner_report* r) { return r ? r->value.exit_code() : PIMSNER_INVALID_ARGUMENT; }

size_t pimsner_report_check_count(const pimsner_report* r) { return r ? r->value.checks().size() : 0; }

int pimsner_report_check(const pimsner_report* r, size_t i, pimsner_check_info* out) {
  if (!r || !out) return fail(PIMSNER_INVALID_ARGUMENT, "null argument");
  if (i >= r->value.checks().size()) return fail(PIMSNER_INVALID_ARGUMENT, "check index out of range");
  const auto& c = r->value.checks()[i];
  out->name = c.name.c_str();
  out->anchor = c.anchor.c_str();
  out->residual = c.residual;
  out->threshold = c.threshold;
  out->status = static_cast<pimsner_check_status>(static_cast<int>(c.status));
  out->note = c.note.c_str();
  return PIMSNER_OK;
}

int pimsner_report_render(const pimsner_report* r, const char* format, char** out) {
  if (!r || !format || !out) return fail(PIMSNER_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  const std::string f = format;
  if (f != "text" && f != "json") return fail(PIMSNER_INVALID_ARGUMENT, "format must be text or json");
  return guarded([&] {
    *out = dup(f == "json" ? r->value.to_json().dump(2) + "\n" : r->value.to_text());
    return PIMSNER_OK;
  });
}

void pimsner_report_free(pimsner_report* r) { delete r; }

void pimsner_string_free(char* s) { std::free(s); }

}  // extern "C"
