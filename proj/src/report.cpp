#include "pimsner/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pimsner {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::precondition: return "precondition";
    case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

CheckResult& VerificationReport::check(std::string name, std::string anchor, double residual,
                                       double threshold, std::string note) {
  CheckResult r{std::move(name), std::move(anchor), residual, threshold, CheckStatus::pass, std::move(note)};
  r.status = (std::isfinite(residual) && residual <= threshold) ? CheckStatus::pass : CheckStatus::fail;
  checks_.push_back(std::move(r));
  return checks_.back();
}

CheckResult& VerificationReport::check_true(std::string name, std::string anchor, bool ok, std::string note) {
  return check(std::move(name), std::move(anchor), ok ? 0.0 : 1.0, 0.0, std::move(note));
}

CheckResult& VerificationReport::precondition(std::string name, std::string anchor, std::string note) {
  checks_.push_back({std::move(name), std::move(anchor), 0.0, 0.0, CheckStatus::precondition, std::move(note)});
  return checks_.back();
}

CheckResult& VerificationReport::skipped(std::string name, std::string anchor, std::string note) {
  checks_.push_back({std::move(name), std::move(anchor), 0.0, 0.0, CheckStatus::skipped, std::move(note)});
  return checks_.back();
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
  for (auto c : other.checks_) {
    if (!prefix.empty()) c.name = prefix + "/" + c.name;
    checks_.push_back(std::move(c));
  }
  if (!other.data_.empty()) {
    std::string key = prefix.empty() ? other.suite_ : prefix;
    if (key.empty()) key = "merged";
    data_[key] = other.data_;
  }
}

void VerificationReport::rejudge(double from, double to) {
  for (auto& c : checks_) {
    if (c.threshold != from || (c.status != CheckStatus::pass && c.status != CheckStatus::fail)) continue;
    c.threshold = to;
    c.status = std::isfinite(c.residual) && c.residual <= to ? CheckStatus::pass : CheckStatus::fail;
  }
}

std::size_t VerificationReport::count(CheckStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(checks_.begin(), checks_.end(), [s](const CheckResult& c) { return c.status == s; }));
}

bool VerificationReport::passed() const { return count(CheckStatus::pass) == checks_.size(); }

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

double VerificationReport::max_residual() const {
  double m = 0.0;
  for (const auto& c : checks_)
    if (c.status == CheckStatus::pass || c.status == CheckStatus::fail) m = std::max(m, c.residual);
  return m;
}

int VerificationReport::exit_code() const {
  if (count(CheckStatus::fail) > 0) return 1;
  if (count(CheckStatus::precondition) > 0) return 2;
  if (count(CheckStatus::skipped) > 0) return 3;
  return 0;
}

namespace {
nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}
}  // namespace

nlohmann::ordered_json VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite_;
  j["seed"] = seed_;
  j["parameters"] = params_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks_) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["anchor"] = c.anchor;
    e["residual"] = number_or_null(c.residual);
    e["threshold"] = number_or_null(c.threshold);
    e["status"] = to_string(c.status);
    if (!c.note.empty()) e["note"] = c.note;
    arr.push_back(std::move(e));
  }
  j["checks"] = std::move(arr);
  j["summary"] = {{"total", checks_.size()},
                  {"pass", count(CheckStatus::pass)},
                  {"fail", count(CheckStatus::fail)},
                  {"precondition", count(CheckStatus::precondition)},
                  {"skipped", count(CheckStatus::skipped)},
                  {"exit_code", exit_code()}};
  if (!data_.empty()) j["data"] = data_;
  return j;
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  os << "suite " << suite_ << "  seed " << seed_ << "\n";
  char buf[64];
  for (const auto& c : checks_) {
    os << "[" << to_string(c.status) << "] " << c.name;
    if (c.status == CheckStatus::pass || c.status == CheckStatus::fail) {
      std::snprintf(buf, sizeof buf, "  residual %.3e <= %.1e", c.residual, c.threshold);
      os << buf;
    }
    os << "  {" << c.anchor << "}";
    if (!c.note.empty()) os << "  " << c.note;
    os << "\n";
  }
  os << checks_.size() << " checks: " << count(CheckStatus::pass) << " pass, " << count(CheckStatus::fail)
     << " fail, " << count(CheckStatus::precondition) << " precondition, " << count(CheckStatus::skipped)
     << " skipped\n";
  return os.str();
}

}  // namespace pimsner
