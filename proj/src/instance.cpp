#include "pimsner/instance.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pimsner {

namespace {

std::string join_errors(const std::vector<std::string>& e) {
  std::string out = "instance has " + std::to_string(e.size()) + " schema error(s)";
  for (const auto& s : e) out += "\n  " + s;
  return out;
}

std::string sub(const std::string& path, const std::string& key) { return path + "." + key; }
std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

struct Bad {};  // unwinds one descriptor after an error was recorded

class Reader {
 public:
  std::vector<std::string> errors;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
    throw Bad{};
  }

  const Json& field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(sub(path, key), "missing required field");
    return *it;
  }
  const Json* optional(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  long integer(const Json& v, const std::string& path, long min) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    long x = v.get<long>();
    if (x < min) fail(path, "must be >= " + std::to_string(min) + ", got " + std::to_string(x));
    return x;
  }
  double real(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }
  bool boolean(const Json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }
  std::string string(const Json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }
  const Json& array(const Json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }
  cplx complex(const Json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    fail(path, "expected a number or an [re, im] pair");
  }
  std::vector<int> ints(const Json& v, const std::string& path, long min) {
    std::vector<int> out;
    array(v, path);
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(integer(v[i], at(path, i), min)));
    return out;
  }
  Vector vector(const Json& v, const std::string& path, Index size) {
    array(v, path);
    if (size >= 0 && static_cast<Index>(v.size()) != size)
      fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = complex(v[i], at(path, i));
    return out;
  }
  // rows of entries; rows < 0 or cols < 0 leave that extent free
  Matrix matrix(const Json& v, const std::string& path, Index rows, Index cols) {
    array(v, path);
    if (rows >= 0 && static_cast<Index>(v.size()) != rows)
      fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
    const Index r = static_cast<Index>(v.size());
    Index c = cols;
    if (r > 0) {
      array(v[0], at(path, 0));
      if (c < 0) c = static_cast<Index>(v[0].size());
    }
    if (c < 0) c = 0;
    Matrix out(r, c);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Json& row = array(v[i], at(path, i));
      if (static_cast<Index>(row.size()) != c)
        fail(at(path, i), "expected " + std::to_string(c) + " columns, got " + std::to_string(row.size()));
      for (std::size_t k = 0; k < row.size(); ++k)
        out(static_cast<Index>(i), static_cast<Index>(k)) = complex(row[k], at(at(path, i), k));
    }
    return out;
  }
  AlgebraElement element(const Json& v, const std::string& path, const CStarAlgebra& b) {
    array(v, path);
    if (static_cast<int>(v.size()) != b.block_count())
      fail(path, "expected " + std::to_string(b.block_count()) + " blocks, got " + std::to_string(v.size()));
    std::vector<Matrix> blocks;
    for (int j = 0; j < b.block_count(); ++j)
      blocks.push_back(matrix(v[static_cast<std::size_t>(j)], at(path, static_cast<std::size_t>(j)), b.block_size(j),
                              b.block_size(j)));
    return AlgebraElement(b, std::move(blocks));
  }
  std::vector<Matrix> densities(const Json& v, const std::string& path, const std::vector<int>& blocks) {
    array(v, path);
    if (v.size() != blocks.size())
      fail(path, "expected " + std::to_string(blocks.size()) + " densities, got " + std::to_string(v.size()));
    std::vector<Matrix> out;
    for (std::size_t j = 0; j < v.size(); ++j) out.push_back(matrix(v[j], at(path, j), blocks[j], blocks[j]));
    return out;
  }

  template <class Map>
  const typename Map::mapped_type& ref(const Json& v, const std::string& path, const Map& m,
                                       const std::set<std::string>& declared, const char* what) {
    std::string name = string(v, path);
    auto it = m.find(name);
    if (it != m.end()) return it->second;
    if (declared.count(name)) throw Bad{};  // already reported where it was declared
    fail(path, std::string("unresolved reference to ") + what + " '" + name + "'");
  }
  std::string ref_name(const Json& v, const std::string& path, const std::set<std::string>& declared,
                       const char* what) {
    std::string name = string(v, path);
    if (!declared.count(name)) fail(path, std::string("unresolved reference to ") + what + " '" + name + "'");
    return name;
  }
};

template <class F>
void each(Reader& rd, const Json& root, const std::string& key, std::set<std::string>& declared, F&& f) {
  auto it = root.find(key);
  if (it == root.end()) return;
  const std::string path = "$." + key;
  if (!it->is_object()) {
    rd.errors.push_back(path + ": expected an object keyed by name");
    return;
  }
  for (auto e = it->begin(); e != it->end(); ++e) declared.insert(e.key());
  for (auto e = it->begin(); e != it->end(); ++e) {
    try {
      f(e.key(), e.value(), sub(path, e.key()));
    } catch (const Bad&) {
    } catch (const std::exception& ex) {
      rd.errors.push_back(sub(path, e.key()) + ": " + ex.what());
    }
  }
}

template <class F>
void section(Reader& rd, const Json& root, const std::string& key, bool many, F&& f) {
  auto it = root.find(key);
  if (it == root.end() || it->is_null()) return;
  const std::string path = "$." + key;
  auto one = [&](const Json& v, const std::string& p) {
    try {
      f(v, p);
    } catch (const Bad&) {
    } catch (const std::exception& ex) {
      rd.errors.push_back(p + ": " + ex.what());
    }
  };
  if (many && it->is_array()) {
    for (std::size_t i = 0; i < it->size(); ++i) one((*it)[i], at(path, i));
  } else {
    one(*it, path);
  }
}

}  // namespace

SchemaError::SchemaError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) {
      const cplx x = m(i, k);
      if (x.imag() == 0.0) row.push_back(x.real());
      else row.push_back(Json::array({x.real(), x.imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i).imag() == 0.0) out.push_back(v(i).real());
    else out.push_back(Json::array({v(i).real(), v(i).imag()}));
  }
  return out;
}

Instance parse_instance_json(const Json& j) {
  Reader rd;
  Instance in;
  if (!j.is_object()) throw SchemaError({"$: expected an object"});

  static const std::set<std::string> known = {"name",   "parameters", "algebras", "states",  "maps",
                                              "automorphisms", "groups", "actions", "bimodules", "words",
                                              "fock",   "ideal",      "factorization", "toeplitz", "free",
                                              "crossed", "amalg",     "bog"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) rd.errors.push_back("$." + it.key() + ": unknown field");

  try {
    if (auto* v = rd.optional(j, "name", "$")) in.name = rd.string(*v, "$.name");
  } catch (const Bad&) {
  }
  if (auto it = j.find("parameters"); it != j.end()) {
    const std::string p = "$.parameters";
    auto opt = [&](const char* key, auto&& set) {
      try {
        if (auto* v = rd.optional(*it, key, p)) set(*v, sub(p, key));
      } catch (const Bad&) {
      }
    };
    opt("truncation", [&](const Json& v, const std::string& q) { in.params.truncation = static_cast<int>(rd.integer(v, q, 1)); });
    opt("tolerance", [&](const Json& v, const std::string& q) {
      in.params.tolerance = rd.real(v, q);
      if (!(in.params.tolerance > 0)) rd.fail(q, "must be positive");
    });
    opt("seed", [&](const Json& v, const std::string& q) { in.params.seed = static_cast<std::uint64_t>(rd.integer(v, q, 0)); });
    opt("max_word_length",
        [&](const Json& v, const std::string& q) { in.params.max_word_length = static_cast<int>(rd.integer(v, q, 1)); });
    opt("dimension_cap", [&](const Json& v, const std::string& q) { in.params.dimension_cap = rd.integer(v, q, 1); });
  }

  std::set<std::string> d_alg, d_state, d_map, d_aut, d_group, d_act, d_mod, d_word;
  each(rd, j, "algebras", d_alg, [&](const std::string& name, const Json& v, const std::string& p) {
    in.algebras.emplace(name, CStarAlgebra(rd.ints(rd.field(v, "blocks", p), sub(p, "blocks"), 1)));
  });
  each(rd, j, "states", d_state, [&](const std::string& name, const Json& v, const std::string& p) {
    const CStarAlgebra& b = rd.ref(rd.field(v, "algebra", p), sub(p, "algebra"), in.algebras, d_alg, "algebra");
    auto dens = rd.densities(rd.field(v, "densities", p), sub(p, "densities"), b.blocks());
    try {
      in.states.emplace(name, state_from_density(b, dens));
    } catch (const std::exception& e) {
      rd.fail(sub(p, "densities"), e.what());
    }
  });
  each(rd, j, "maps", d_map, [&](const std::string& name, const Json& v, const std::string& p) {
    const CStarAlgebra& a = rd.ref(rd.field(v, "algebra", p), sub(p, "algebra"), in.algebras, d_alg, "algebra");
    const std::string kind = rd.string(rd.field(v, "kind", p), sub(p, "kind"));
    if (kind == "identity") {
      in.maps.emplace(name, CPLinearMap::identity(a));
    } else if (kind == "transpose") {
      in.maps.emplace(name, CPLinearMap::transpose(a));
    } else if (kind == "depolarizing") {
      const double eps = rd.real(rd.field(v, "eps", p), sub(p, "eps"));
      if (eps < 0 || eps > 1) rd.fail(sub(p, "eps"), "must lie in [0, 1]");
      in.maps.emplace(name, depolarizing(a, eps));
    } else if (kind == "matrix") {
      Matrix act = rd.matrix(rd.field(v, "action", p), sub(p, "action"), a.dimension(), a.dimension());
      const bool cp = rd.boolean(rd.field(v, "claims_cp", p), sub(p, "claims_cp"));
      in.maps.emplace(name, CPLinearMap(a, a, act, cp));
    } else {
      rd.fail(sub(p, "kind"), "expected identity, transpose, depolarizing or matrix, got '" + kind + "'");
    }
  });
  each(rd, j, "automorphisms", d_aut, [&](const std::string& name, const Json& v, const std::string& p) {
    const CStarAlgebra& a = rd.ref(rd.field(v, "algebra", p), sub(p, "algebra"), in.algebras, d_alg, "algebra");
    std::vector<int> perm = rd.ints(rd.field(v, "permutation", p), sub(p, "permutation"), 0);
    std::vector<Matrix> units;
    if (auto* u = rd.optional(v, "unitaries", p)) {
      rd.array(*u, sub(p, "unitaries"));
      if (static_cast<int>(u->size()) != a.block_count())
        rd.fail(sub(p, "unitaries"), "expected one unitary per block");
      for (std::size_t i = 0; i < u->size(); ++i)
        units.push_back(rd.matrix((*u)[i], at(sub(p, "unitaries"), i), a.block_size(static_cast<int>(i)),
                                  a.block_size(static_cast<int>(i))));
    }
    try {
      in.automorphisms.emplace(name, AlgebraAutomorphism(a, perm, units));
    } catch (const std::exception& e) {
      rd.fail(p, e.what());
    }
  });
  each(rd, j, "groups", d_group, [&](const std::string& name, const Json& v, const std::string& p) {
    if (auto* c = rd.optional(v, "cyclic", p)) {
      in.groups.emplace(name, GroupTable::cyclic(static_cast<int>(rd.integer(*c, sub(p, "cyclic"), 1))));
    } else if (auto* s = rd.optional(v, "symmetric", p)) {
      if (rd.integer(*s, sub(p, "symmetric"), 1) != 3) rd.fail(sub(p, "symmetric"), "only S_3 is built in");
      in.groups.emplace(name, GroupTable::symmetric3());
    } else {
      const Json& t = rd.array(rd.field(v, "table", p), sub(p, "table"));
      std::vector<std::vector<int>> mult;
      for (std::size_t i = 0; i < t.size(); ++i) mult.push_back(rd.ints(t[i], at(sub(p, "table"), i), 0));
      int e = 0;
      if (auto* id = rd.optional(v, "identity", p)) e = static_cast<int>(rd.integer(*id, sub(p, "identity"), 0));
      try {
        in.groups.emplace(name, GroupTable(mult, e));
      } catch (const std::exception& ex) {
        rd.fail(sub(p, "table"), ex.what());
      }
    }
  });
  each(rd, j, "actions", d_act, [&](const std::string& name, const Json& v, const std::string& p) {
    const CStarAlgebra& a = rd.ref(rd.field(v, "algebra", p), sub(p, "algebra"), in.algebras, d_alg, "algebra");
    const GroupTable& g = rd.ref(rd.field(v, "group", p), sub(p, "group"), in.groups, d_group, "group");
    if (auto* im = rd.optional(v, "images", p)) {
      rd.array(*im, sub(p, "images"));
      if (static_cast<int>(im->size()) != g.order()) rd.fail(sub(p, "images"), "expected one image list per element");
      std::vector<std::vector<int>> images;
      for (std::size_t i = 0; i < im->size(); ++i) images.push_back(rd.ints((*im)[i], at(sub(p, "images"), i), 0));
      try {
        in.actions.emplace(name, permutation_action(a, g, images));
      } catch (const std::exception& ex) {
        rd.fail(sub(p, "images"), ex.what());
      }
    } else {
      const Json& list = rd.array(rd.field(v, "automorphisms", p), sub(p, "automorphisms"));
      if (static_cast<int>(list.size()) != g.order())
        rd.fail(sub(p, "automorphisms"), "expected one automorphism per element");
      std::vector<AlgebraAutomorphism> alpha;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& b = rd.ref(list[i], at(sub(p, "automorphisms"), i), in.automorphisms, d_aut, "automorphism");
        if (!(b.algebra() == a)) rd.fail(at(sub(p, "automorphisms"), i), "automorphism acts on another algebra");
        alpha.push_back(b);
      }
      in.actions.emplace(name, GroupAction{g, alpha});
    }
  });
  each(rd, j, "bimodules", d_mod, [&](const std::string& name, const Json& v, const std::string& p) {
    ModuleEntry m;
    m.kind = rd.string(rd.field(v, "kind", p), sub(p, "kind"));
    Rng rng(in.params.seed);
    if (m.kind == "canonical") {
      const CStarAlgebra& b = rd.ref(rd.field(v, "algebra", p), sub(p, "algebra"), in.algebras, d_alg, "algebra");
      auto r = rd.ints(rd.field(v, "right_multiplicities", p), sub(p, "right_multiplicities"), 0);
      const Json& cj = rd.array(rd.field(v, "left_multiplicities", p), sub(p, "left_multiplicities"));
      std::vector<std::vector<int>> c;
      for (std::size_t i = 0; i < cj.size(); ++i) c.push_back(rd.ints(cj[i], at(sub(p, "left_multiplicities"), i), 0));
      std::vector<Matrix> u;
      if (auto* uj = rd.optional(v, "unitaries", p)) {
        rd.array(*uj, sub(p, "unitaries"));
        if (uj->size() != r.size()) rd.fail(sub(p, "unitaries"), "expected one matrix per block");
        for (std::size_t i = 0; i < uj->size(); ++i)
          u.push_back((*uj)[i].is_null() || r[i] == 0 ? Matrix()
                                                       : rd.matrix((*uj)[i], at(sub(p, "unitaries"), i), r[i], r[i]));
      }
      try {
        m.module = HilbertBimodule(b, r, c, u);
      } catch (const std::exception& ex) {
        rd.fail(p, ex.what());
      }
      m.construction = validate_bimodule(m.module, rng);
      m.valid = m.construction.passed();
    } else if (m.kind == "trivial") {
      m.module = trivial_bimodule(rd.ref(rd.field(v, "algebra", p), sub(p, "algebra"), in.algebras, d_alg, "algebra"));
      m.construction = validate_bimodule(m.module, rng);
    } else if (m.kind == "gns") {
      const auto& rho = rd.ref(rd.field(v, "state", p), sub(p, "state"), in.states, d_state, "state");
      PointedBimodule pb = gns_bimodule(rho.algebra(), rho);
      m.module = pb.module;
      m.xi = pb.xi;
      m.construction = pb.report;
    } else if (m.kind == "cp") {
      const CPLinearMap& eta = rd.ref(rd.field(v, "map", p), sub(p, "map"), in.maps, d_map, "map");
      bool ok = true;
      PointedBimodule pb = cp_bimodule_checked(eta.domain(), eta, ok);
      m.map = eta;
      m.valid = ok;
      m.module = pb.module;
      m.xi = pb.xi;
      m.construction = pb.report;
    } else {
      rd.fail(sub(p, "kind"), "expected canonical, trivial, gns or cp, got '" + m.kind + "'");
    }
    in.modules.emplace(name, std::move(m));
  });
  auto valid_module = [&](const Json& v, const std::string& p) -> const ModuleEntry& {
    return rd.ref(v, p, in.modules, d_mod, "bimodule");
  };
  each(rd, j, "words", d_word, [&](const std::string& name, const Json& v, const std::string& p) {
    NamedWord w;
    w.module = rd.ref_name(rd.field(v, "bimodule", p), sub(p, "bimodule"), d_mod, "bimodule");
    const ModuleEntry& m = valid_module(rd.field(v, "bimodule", p), sub(p, "bimodule"));
    if (!m.valid) throw Bad{};
    const Json& letters = rd.array(rd.field(v, "letters", p), sub(p, "letters"));
    for (std::size_t i = 0; i < letters.size(); ++i) {
      const std::string q = at(sub(p, "letters"), i);
      w.spec.letters.push_back(
          {rd.vector(rd.field(letters[i], "h", q), sub(q, "h"), m.module.dimension()),
           rd.boolean(rd.field(letters[i], "create", q), sub(q, "create"))});
    }
    const Json& coeffs = rd.array(rd.field(v, "coefficients", p), sub(p, "coefficients"));
    if (coeffs.size() != letters.size() + 1) rd.fail(sub(p, "coefficients"), "expected one more coefficient than letters");
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      w.spec.coefficients.push_back(rd.element(coeffs[i], at(sub(p, "coefficients"), i), m.module.base()));
    in.words.emplace(name, std::move(w));
  });

  auto module_name = [&](const Json& v, const std::string& p) {
    std::string name = rd.ref_name(rd.field(v, "bimodule", p), sub(p, "bimodule"), d_mod, "bimodule");
    return name;
  };
  section(rd, j, "fock", false, [&](const Json& v, const std::string& p) {
    in.fock = FockSection{module_name(v, p), static_cast<int>(rd.integer(rd.field(v, "samples", p), sub(p, "samples"), 1))};
  });
  section(rd, j, "ideal", false, [&](const Json& v, const std::string& p) {
    in.ideal = IdealSection{module_name(v, p), rd.ints(rd.field(v, "levels", p), sub(p, "levels"), 1)};
  });
  section(rd, j, "factorization", false, [&](const Json& v, const std::string& p) {
    in.factorization = FactorizationSection{module_name(v, p),
                                            static_cast<int>(rd.integer(rd.field(v, "max_total", p), sub(p, "max_total"), 1))};
  });
  section(rd, j, "toeplitz", false, [&](const Json& v, const std::string& p) {
    ToeplitzSection t{module_name(v, p), std::nullopt};
    if (auto* s = rd.optional(v, "state", p)) t.state = rd.ref_name(*s, sub(p, "state"), d_state, "state");
    in.toeplitz = t;
  });
  section(rd, j, "free", false, [&](const Json& v, const std::string& p) {
    in.free = FreeSection{
        static_cast<int>(rd.integer(rd.field(v, "semicircular_truncation", p), sub(p, "semicircular_truncation"), 1)),
        rd.ints(rd.field(v, "haar_truncations", p), sub(p, "haar_truncations"), 1)};
  });
  section(rd, j, "crossed", true, [&](const Json& v, const std::string& p) {
    CrossedSection c;
    c.algebra = rd.ref_name(rd.field(v, "algebra", p), sub(p, "algebra"), d_alg, "algebra");
    c.action = rd.ref_name(rd.field(v, "action", p), sub(p, "action"), d_act, "action");
    if (auto* f = rd.optional(v, "folner", p)) c.folner = rd.ints(*f, sub(p, "folner"), 0);
    if (auto* b = rd.optional(v, "automorphism", p))
      c.automorphism = rd.ref_name(*b, sub(p, "automorphism"), d_aut, "automorphism");
    if (auto* m = rd.optional(v, "defect_map", p)) c.defect_map = rd.ref_name(*m, sub(p, "defect_map"), d_map, "map");
    in.crossed.push_back(std::move(c));
  });
  section(rd, j, "amalg", false, [&](const Json& v, const std::string& p) {
    AmalgSection a;
    a.spec.b_blocks = rd.ints(rd.field(v, "b_blocks", p), sub(p, "b_blocks"), 1);
    a.spec.c1_blocks = rd.ints(rd.field(v, "c1_blocks", p), sub(p, "c1_blocks"), 1);
    a.spec.c2_blocks = rd.ints(rd.field(v, "c2_blocks", p), sub(p, "c2_blocks"), 1);
    a.spec.omega1 = rd.densities(rd.field(v, "omega1", p), sub(p, "omega1"), a.spec.c1_blocks);
    a.spec.omega2 = rd.densities(rd.field(v, "omega2", p), sub(p, "omega2"), a.spec.c2_blocks);
    a.vanishing_budget = static_cast<int>(rd.integer(rd.field(v, "vanishing_budget", p), sub(p, "vanishing_budget"), 0));
    a.nonfree_control = rd.boolean(rd.field(v, "nonfree_control", p), sub(p, "nonfree_control"));
    in.amalg = a;
  });
  section(rd, j, "bog", true, [&](const Json& v, const std::string& p) {
    BogSection b;
    b.module = module_name(v, p);
    const ModuleEntry& m = valid_module(rd.field(v, "bimodule", p), sub(p, "bimodule"));
    b.automorphism = rd.ref_name(rd.field(v, "automorphism", p), sub(p, "automorphism"), d_aut, "automorphism");
    const int d = m.module.dimension();
    if (auto* u = rd.optional(v, "u", p)) b.u = rd.matrix(*u, sub(p, "u"), d, d);
    const Json& gens = rd.array(rd.field(v, "k_generators", p), sub(p, "k_generators"));
    if (gens.empty()) rd.fail(sub(p, "k_generators"), "needs at least one generator");
    for (std::size_t i = 0; i < gens.size(); ++i)
      b.k_generators.push_back(rd.vector(gens[i], at(sub(p, "k_generators"), i), d));
    b.n_max = static_cast<int>(rd.integer(rd.field(v, "n_max", p), sub(p, "n_max"), 1));
    b.p_max = static_cast<int>(rd.integer(rd.field(v, "p_max", p), sub(p, "p_max"), 1));
    in.bog.push_back(std::move(b));
  });

  if (!rd.errors.empty()) throw SchemaError(rd.errors);
  return in;
}

Instance parse_instance_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError({std::string("$: malformed JSON: ") + e.what()});
  }
  return parse_instance_json(j);
}

Instance parse_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError({path + ": cannot open instance file"});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_instance_text(ss.str());
}

}  // namespace pimsner
