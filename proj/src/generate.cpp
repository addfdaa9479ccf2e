#include "pimsner/generate.hpp"

#include <numeric>

namespace pimsner {

namespace {

long total(const std::vector<long>& d) { return std::accumulate(d.begin(), d.end(), 0L); }

Matrix random_density(int n, Rng& rng, double weight) {
  Matrix g = random_matrix(n, n, rng);
  Matrix d = g * g.adjoint() + 0.5 * Matrix::Identity(n, n);
  return weight * d / d.trace().real();
}

Json densities_json(const std::vector<int>& blocks, Rng& rng) {
  std::uniform_real_distribution<double> w(0.5, 1.5);
  std::vector<double> weights;
  for (std::size_t j = 0; j < blocks.size(); ++j) weights.push_back(w(rng));
  const double s = std::accumulate(weights.begin(), weights.end(), 0.0);
  Json out = Json::array();
  for (std::size_t j = 0; j < blocks.size(); ++j) out.push_back(matrix_to_json(random_density(blocks[j], rng, weights[j] / s)));
  return out;
}

Json element_json(const CStarAlgebra& b, const AlgebraElement& x) {
  Json out = Json::array();
  for (int j = 0; j < b.block_count(); ++j) out.push_back(matrix_to_json(x.block(j)));
  return out;
}

}  // namespace

Json generate_instance(std::uint64_t seed) {
  Rng rng(seed);
  static const std::vector<std::vector<int>> shapes = {{1}, {2}, {1, 1}, {1, 2}, {2, 2}, {2, 3}};
  std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1);
  std::uniform_int_distribution<int> mult(0, 2);

  // B and a left-multiplicity matrix with 1 <= dim H <= 12
  std::vector<int> blocks;
  std::vector<std::vector<int>> c;
  std::vector<int> r;
  for (;;) {
    blocks = shapes[pick(rng)];
    const std::size_t k = blocks.size();
    c.assign(k, std::vector<int>(k, 0));
    for (auto& row : c)
      for (auto& x : row) x = mult(rng);
    r.assign(k, 0);
    int dim = 0;
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t l = 0; l < k; ++l) r[j] += c[j][l] * blocks[l];
      dim += r[j] * blocks[j];
    }
    if (dim >= 1 && dim <= 12) break;
  }
  CStarAlgebra b(blocks);
  std::vector<Matrix> units;
  Json uj = Json::array();
  for (int rj : r) {
    units.push_back(rj > 0 ? random_unitary(rj, rng) : Matrix());
    uj.push_back(rj > 0 ? matrix_to_json(units.back()) : Json());
  }
  HilbertBimodule h(b, r, c, units);
  HilbertBimodule ht = augment(h).sum.module;

  int n = 4;
  while (n > 3 && total(FockSpace::predicted_level_dimensions(ht, n)) > 3000) --n;
  int max_total = 5;
  while (max_total > 2 && total(FockSpace::predicted_level_dimensions(ht, max_total)) > 1500) --max_total;

  Json j;
  j["name"] = "generated-" + std::to_string(seed);
  j["parameters"] = {{"truncation", n}, {"tolerance", kDefaultTol}, {"seed", seed}, {"max_word_length", 4},
                     {"dimension_cap", kDefaultDimCap}};
  Json bj = Json::array();
  for (int x : blocks) bj.push_back(x);
  j["algebras"] = {{"B", {{"blocks", bj}}}};
  j["states"] = {{"rho", {{"algebra", "B"}, {"densities", densities_json(blocks, rng)}}}};
  j["maps"] = {{"depol", {{"algebra", "B"}, {"kind", "depolarizing"}, {"eps", 0.1}}}};

  // block swap when the two blocks have equal size, identity otherwise
  const bool swap = blocks.size() == 2 && blocks[0] == blocks[1];
  Json perm = Json::array(), images = Json::array();
  for (std::size_t i = 0; i < blocks.size(); ++i) perm.push_back(swap ? blocks.size() - 1 - i : i);
  j["automorphisms"] = {{"beta", {{"algebra", "B"}, {"permutation", perm}}}};
  Json ident = Json::array();
  for (std::size_t i = 0; i < blocks.size(); ++i) ident.push_back(i);
  j["groups"] = {{"G", {{"cyclic", 2}}}};
  j["actions"] = {{"alpha", {{"algebra", "B"}, {"group", "G"}, {"images", Json::array({ident, perm})}}}};

  Json cj = Json::array();
  for (const auto& row : c) cj.push_back(row);
  Json rj = Json::array();
  for (int x : r) rj.push_back(x);
  j["bimodules"] = {{"H", {{"kind", "canonical"}, {"algebra", "B"}, {"right_multiplicities", rj},
                           {"left_multiplicities", cj}, {"unitaries", uj}}}};

  Json word = {{"bimodule", "H"},
               {"letters", Json::array({{{"h", vector_to_json(h.random_vector(rng))}, {"create", true}},
                                        {{"h", vector_to_json(h.random_vector(rng))}, {"create", false}}})},
               {"coefficients", Json::array({element_json(b, b.random(rng)), element_json(b, b.random(rng)),
                                             element_json(b, b.random(rng))})}};
  j["words"] = {{"w", word}};

  j["fock"] = {{"bimodule", "H"}, {"samples", 3}};
  j["ideal"] = {{"bimodule", "H"}, {"levels", Json::array({1, 2})}};
  j["factorization"] = {{"bimodule", "H"}, {"max_total", max_total}};
  j["toeplitz"] = {{"bimodule", "H"}, {"state", "rho"}};
  j["free"] = {{"semicircular_truncation", 8}, {"haar_truncations", Json::array({8, 16})}};
  j["crossed"] = Json::array({{{"algebra", "B"}, {"action", "alpha"}, {"automorphism", "beta"}, {"defect_map", "depol"}}});

  static const std::vector<std::vector<int>> cs = {{1, 1}, {1, 1, 1}, {2}};
  std::uniform_int_distribution<std::size_t> pc(0, cs.size() - 1);
  const auto c1 = cs[pc(rng)], c2 = cs[pc(rng) % 2];
  j["amalg"] = {{"b_blocks", Json::array({1})},        {"c1_blocks", c1},
                {"c2_blocks", c2},                     {"omega1", densities_json(c1, rng)},
                {"omega2", densities_json(c2, rng)},  {"vanishing_budget", 1},
                {"nonfree_control", false}};

  // U = left multiplication by a central unitary, beta = id
  std::vector<Matrix> zb;
  std::uniform_real_distribution<double> ph(0.0, 2.0 * 3.141592653589793);
  for (int x : blocks) zb.push_back(std::polar(1.0, ph(rng)) * Matrix::Identity(x, x));
  Matrix u = h.left_matrix(AlgebraElement(b, zb));
  j["automorphisms"]["id"] = {{"algebra", "B"}, {"permutation", ident}};
  j["bog"] = Json::array({{{"bimodule", "H"},
                           {"automorphism", "id"},
                           {"u", matrix_to_json(u)},
                           {"k_generators", Json::array({vector_to_json(h.random_vector(rng))})},
                           {"n_max", std::min(3, n)},
                           {"p_max", 4}}});
  return j;
}

}  // namespace pimsner
