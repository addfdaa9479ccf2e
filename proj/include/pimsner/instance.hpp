#pragma once

// Instance files: JSON descriptors for algebras, states, maps, automorphisms,
// groups, bimodules, words and the per-suite sections. Complex entries are
// [re, im] pairs or plain reals.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pimsner/bogoliubov.hpp"
#include "pimsner/crossed.hpp"
#include "pimsner/freeprod.hpp"

namespace pimsner {

using Json = nlohmann::ordered_json;

/// Malformed syntax, schema violations and unresolved references, one
/// "path: message" entry each.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct InstanceParameters {
  int truncation = 0;  // 0: not given
  double tolerance = kDefaultTol;
  std::uint64_t seed = 0;
  int max_word_length = 0;  // 0: not given
  long dimension_cap = kDefaultDimCap;
};

struct ModuleEntry {
  std::string kind;  // canonical | gns | cp | trivial
  HilbertBimodule module;
  Vector xi;  // set for gns and cp
  std::optional<CPLinearMap> map;  // the map of a cp module
  bool valid = true;
  VerificationReport construction;  // failing report when valid == false
};

struct NamedWord {
  std::string module;
  WordSpec spec;
};

struct FockSection {
  std::string module;
  int samples = 0;
};
struct IdealSection {
  std::string module;
  std::vector<int> levels;
};
struct FactorizationSection {
  std::string module;
  int max_total = 0;  // all (n, k, j) with k (n + 1) + j <= max_total
};
struct ToeplitzSection {
  std::string module;
  std::optional<std::string> state;
};
struct FreeSection {
  int semicircular_truncation = 0;
  std::vector<int> haar_truncations;
};
struct CrossedSection {
  std::string algebra, action;
  std::vector<int> folner;  // empty: all of G
  std::optional<std::string> automorphism;
  std::optional<std::string> defect_map;
};
struct AmalgSection {
  AmalgSpec spec;  // truncation comes from the parameters
  int vanishing_budget = 0;
  bool nonfree_control = false;
};
struct BogSection {
  std::string module, automorphism;
  std::optional<Matrix> u;  // absent: a seeded permutation twist
  std::vector<Vector> k_generators;
  int n_max = 0, p_max = 0;
};

struct Instance {
  std::string name;
  InstanceParameters params;
  std::map<std::string, CStarAlgebra> algebras;
  std::map<std::string, StateFunctional> states;
  std::map<std::string, CPLinearMap> maps;
  std::map<std::string, AlgebraAutomorphism> automorphisms;
  std::map<std::string, GroupTable> groups;
  std::map<std::string, GroupAction> actions;
  std::map<std::string, ModuleEntry> modules;
  std::map<std::string, NamedWord> words;

  std::optional<FockSection> fock;
  std::optional<IdealSection> ideal;
  std::optional<FactorizationSection> factorization;
  std::optional<ToeplitzSection> toeplitz;
  std::optional<FreeSection> free;
  std::vector<CrossedSection> crossed;
  std::optional<AmalgSection> amalg;
  std::vector<BogSection> bog;
};

/// Throws SchemaError listing every problem found.
Instance parse_instance_json(const Json& j);
Instance parse_instance_text(const std::string& text);
/// Throws SchemaError if the file cannot be read or parsed.
Instance parse_instance(const std::string& path);

// JSON encodings shared with the generator.
Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

}  // namespace pimsner
