#include "raggio/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace raggio::io {

namespace {

Json complex_to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorKind::Parse, "complex entries must be [re, im] pairs, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(complex_to_json(m(r, c)));
  }
  return out;
}

Matrix matrix_from_json(const Json& j, int n, const char* what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::Parse, std::string(what) + " needs " + std::to_string(n * n) +
                                      " row-major entries");
  }
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = complex_from_json(j[static_cast<std::size_t>(r * n + c)]);
  }
  return m;
}

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::Parse, std::string("missing member \"") + key + "\"");
  }
  return j.at(key);
}

}  // namespace

Json to_json(const FdAlgebra& a) {
  Json out{{"block_dims", a.block_dims()}, {"shorthand", a.shorthand()}};
  if (a.is_tensor_product()) {
    out["factors"] = Json::array({to_json(a.factor(Factor::A)), to_json(a.factor(Factor::B))});
  }
  return out;
}

FdAlgebra algebra_from_json(const Json& j) {
  if (j.is_string()) return parse_algebra(j.get<std::string>());
  if (j.is_object() && j.contains("factors")) {
    const Json& f = j.at("factors");
    if (!f.is_array() || f.size() != 2) throw Error(ErrorKind::Parse, "\"factors\" must list two algebras");
    FdAlgebra t = tensor(algebra_from_json(f[0]), algebra_from_json(f[1]));
    if (j.contains("block_dims") && j.at("block_dims").get<std::vector<int>>() != t.block_dims()) {
      throw Error(ErrorKind::Parse, "\"block_dims\" disagree with the tensor product of \"factors\"");
    }
    return t;
  }
  const Json& dims = member(j, "block_dims");
  if (!dims.is_array()) throw Error(ErrorKind::Parse, "\"block_dims\" must be an array");
  std::vector<int> out;
  for (const auto& d : dims) {
    if (!d.is_number_integer()) throw Error(ErrorKind::Parse, "block dimensions must be integers");
    out.push_back(d.get<int>());
  }
  return FdAlgebra(std::move(out));
}

Json to_json(const Element& x) {
  Json blocks = Json::array();
  for (const auto& b : x.blocks()) {
    blocks.push_back({{"dim", b.rows()}, {"entries", matrix_to_json(b)}});
  }
  return {{"blocks", blocks}};
}

Element element_from_json(const Json& j, const FdAlgebra* owner) {
  const Json& blocks_json = member(j, "blocks");
  if (!blocks_json.is_array()) throw Error(ErrorKind::Parse, "\"blocks\" must be an array");
  std::vector<int> dims;
  std::vector<Matrix> blocks;
  for (const auto& bj : blocks_json) {
    const int d = member(bj, "dim").get<int>();
    dims.push_back(d);
    if (d < 1) throw Error(ErrorKind::InvalidDimension, "block dim must be >= 1");
    blocks.push_back(matrix_from_json(member(bj, "entries"), d, "element block"));
  }
  if (owner) return Element(*owner, std::move(blocks));
  if (j.contains("algebra")) return Element(algebra_from_json(j.at("algebra")), std::move(blocks));
  return Element(FdAlgebra(std::move(dims)), std::move(blocks));
}

Json to_json(const State& s) {
  return {{"algebra", to_json(s.owner())}, {"entries", matrix_to_json(s.dense())}};
}

State state_from_json(const Json& j) {
  const FdAlgebra owner = algebra_from_json(member(j, "algebra"));
  const Matrix rho = matrix_from_json(member(j, "entries"), owner.total_dim(), "state");
  return State::from_dense(owner, rho);
}

Json to_json(const PureVector& v) {
  Json psi = Json::array();
  for (Eigen::Index i = 0; i < v.psi().size(); ++i) psi.push_back(complex_to_json(v.psi()(i)));
  return {{"algebra", to_json(v.owner())}, {"psi", psi}};
}

PureVector pure_vector_from_json(const Json& j, bool normalize) {
  const Json& psi_json = j.is_array() ? j : member(j, "psi");
  if (!psi_json.is_array() || psi_json.empty()) throw Error(ErrorKind::Parse, "\"psi\" must be a non-empty array");
  Vector psi(static_cast<Eigen::Index>(psi_json.size()));
  for (std::size_t i = 0; i < psi_json.size(); ++i) psi(static_cast<Eigen::Index>(i)) = complex_from_json(psi_json[i]);
  const FdAlgebra owner = (j.is_object() && j.contains("algebra"))
                              ? algebra_from_json(j.at("algebra"))
                              : make_full(static_cast<int>(psi.size()));
  return normalize ? PureVector::normalized(owner, psi) : PureVector(owner, psi);
}

Json to_json(const Decomposition& d) {
  Json a = Json::array();
  Json b = Json::array();
  for (const auto& s : d.a_parts) a.push_back(to_json(s));
  for (const auto& s : d.b_parts) b.push_back(to_json(s));
  return {{"weights", d.weights}, {"a_parts", a}, {"b_parts", b}};
}

Decomposition decomposition_from_json(const Json& j) {
  Decomposition d;
  d.weights = member(j, "weights").get<std::vector<double>>();
  for (const auto& s : member(j, "a_parts")) d.a_parts.push_back(state_from_json(s));
  for (const auto& s : member(j, "b_parts")) d.b_parts.push_back(state_from_json(s));
  validate(d);
  return d;
}

Json to_json(const SeparabilityVerdict& v) {
  Json cert = std::visit(
      [](const auto& c) -> Json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Decomposition>) {
          return {{"kind", "decomposition"}, {"decomposition", to_json(c)}};
        } else if constexpr (std::is_same_v<T, ReducedPurity>) {
          return {{"kind", "reduced_purity"}, {"value", c.value}};
        } else if constexpr (std::is_same_v<T, PartialTransposeEigenvalue>) {
          return {{"kind", "partial_transpose_min_eigenvalue"}, {"value", c.value}};
        } else {
          return {{"kind", "iteration_budget"}, {"value", c.iterations}};
        }
      },
      v.certificate);
  return {{"tag", std::string(to_string(v.tag))}, {"certificate", cert}};
}

Json to_json(const ChshResult& r) {
  return {{"value", r.value},
          {"observables",
           {{"a1", to_json(r.observables.a1)},
            {"a2", to_json(r.observables.a2)},
            {"b1", to_json(r.observables.b1)},
            {"b2", to_json(r.observables.b2)}}},
          {"restarts", r.restarts},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

Json to_json(const RaggioReport& r) {
  return {{"schema", 1},
          {"algebra_a", to_json(r.algebra_a)},
          {"algebra_b", to_json(r.algebra_b)},
          {"a_commutative", r.a_commutative},
          {"b_commutative", r.b_commutative},
          {"samples", r.samples},
          {"injected", r.injected},
          {"ensemble", r.ensemble},
          {"entangled_found", r.entangled_found},
          {"entangled_witness", r.entangled_found ? Json(r.entangled_witness) : Json(nullptr)},
          {"max_chsh", r.max_chsh},
          {"max_chsh_witness", r.max_chsh_witness},
          {"decomposition_success_rate", r.decomposition_success_rate},
          {"separable_count", r.separable_count},
          {"entangled_count", r.entangled_count},
          {"undetermined_count", r.undetermined_count},
          {"verdict", std::string(to_string(r.verdict))},
          {"seed", r.seed}};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot read file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str());
}

}  // namespace raggio::io
