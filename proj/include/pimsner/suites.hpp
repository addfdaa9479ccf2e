#pragma once

// Suite orchestration over a parsed instance.

#include <optional>
#include <string>
#include <vector>

#include "pimsner/instance.hpp"

namespace pimsner {

/// Command-line overrides of the instance parameters.
struct SuiteOptions {
  std::optional<int> truncation;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_word_length;
};

/// fock, ideal, factorization, toeplitz, crossed, free, amalg, bog, all
const std::vector<std::string>& suite_names();

/// Runs one suite. Missing sections and parameters become precondition
/// markers, dimension-cap overflows become skip markers, so a report is
/// always returned. Throws PreconditionError for an unknown suite name.
/// Checks at the default threshold are re-judged against the effective tolerance.
VerificationReport run_suite(const Instance& in, const std::string& suite, const SuiteOptions& opt = {});

}  // namespace pimsner
