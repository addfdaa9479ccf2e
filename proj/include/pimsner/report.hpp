#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pimsner {

enum class CheckStatus { pass, fail, precondition, skipped };

const char* to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  std::string anchor;  // the identity or bound being verified
  double residual = 0.0;
  double threshold = 0.0;
  CheckStatus status = CheckStatus::pass;
  std::string note;
};

/// Ordered list of named checks. Order of insertion is the report order;
/// callers that evaluate checks out of order must insert deterministically.
class VerificationReport {
 public:
  VerificationReport() = default;
  explicit VerificationReport(std::string suite) : suite_(std::move(suite)) {}

  const std::string& suite() const { return suite_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  // Passes iff residual is finite and <= threshold.
  CheckResult& check(std::string name, std::string anchor, double residual, double threshold,
                     std::string note = {});
  CheckResult& check_true(std::string name, std::string anchor, bool ok, std::string note = {});
  CheckResult& precondition(std::string name, std::string anchor, std::string note);
  CheckResult& skipped(std::string name, std::string anchor, std::string note);

  void merge(const VerificationReport& other, const std::string& prefix = {});
  // Re-judges pass/fail checks whose threshold is `from` against `to`.
  void rejudge(double from, double to);

  // Free-form parameter echo, kept in insertion order.
  nlohmann::ordered_json& parameters() { return params_; }
  const nlohmann::ordered_json& parameters() const { return params_; }
  // Structured side data (growth tables, moment tables).
  nlohmann::ordered_json& data() { return data_; }
  const nlohmann::ordered_json& data() const { return data_; }

  const std::vector<CheckResult>& checks() const { return checks_; }
  std::size_t count(CheckStatus s) const;
  bool passed() const;  // every check has status pass
  const CheckResult* find(const std::string& name) const;
  double max_residual() const;

  // 0 all pass, 1 any failure, 2 precondition, 3 resource skip.
  int exit_code() const;

  nlohmann::ordered_json to_json() const;
  std::string to_text() const;

 private:
  std::string suite_;
  std::uint64_t seed_ = 0;
  std::vector<CheckResult> checks_;
  nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json data_ = nlohmann::ordered_json::object();
};

/// Shape or compatibility violation between operands.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called outside its stated domain.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction would exceed the configured dimension cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Construction-time validation failed; carries the failing report.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, VerificationReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const VerificationReport& report() const { return report_; }

 private:
  VerificationReport report_;
};

}  // namespace pimsner
