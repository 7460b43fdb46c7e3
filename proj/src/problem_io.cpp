#include "conic_palm/problem_io.hpp"

#include "conic_palm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace conic_palm {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const json& require(const json& obj, const char* key, const std::string& at) {
  if (!obj.is_object()) throw ParseError(at.empty() ? "/" : at, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at + "/" + key, "missing field");
  return *it;
}

double read_number(const json& j, const std::string& at) {
  if (!j.is_number()) throw ParseError(at, "expected a number");
  return j.get<double>();
}

Vector read_vector(const json& j, const std::string& at) {
  if (!j.is_array()) throw ParseError(at, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = read_number(j[i], at + "/" + std::to_string(i));
  }
  return v;
}

Matrix read_matrix(const json& j, const std::string& at) {
  if (!j.is_array() || j.empty()) throw ParseError(at, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string row_at = at + "/" + std::to_string(i);
    const Vector row = read_vector(j[static_cast<std::size_t>(i)], row_at);
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) throw ParseError(row_at, "ragged matrix row");
    m.row(i) = row.transpose();
  }
  return m;
}

void require_length(const Vector& v, Eigen::Index n, const std::string& at) {
  if (v.size() != n) {
    throw ParseError(at, "expected length " + std::to_string(n) + ", got " +
                             std::to_string(v.size()));
  }
}

QuadraticFunction read_quadratic(const json& j, int n, const std::string& at,
                                 const char* offset_key) {
  QuadraticFunction fn;
  fn.Q = read_matrix(require(j, "Q", at), at + "/Q");
  if (fn.Q.rows() != n || fn.Q.cols() != n) {
    throw ParseError(at + "/Q", "expected a " + std::to_string(n) + "x" +
                                    std::to_string(n) + " matrix");
  }
  const double scale = std::max(1.0, fn.Q.cwiseAbs().maxCoeff());
  if ((fn.Q - fn.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParseError(at + "/Q", "matrix is not symmetric");
  }
  fn.q = read_vector(require(j, "q", at), at + "/q");
  require_length(fn.q, n, at + "/q");
  fn.r0 = j.contains(offset_key) ? read_number(j[offset_key], at + "/" + offset_key) : 0.0;
  return fn;
}

PrimitiveCone read_cone(const json& j, const std::string& at) {
  const json& kind_j = require(j, "kind", at);
  if (!kind_j.is_string()) throw ParseError(at + "/kind", "expected a string");
  ConeKind kind;
  try {
    kind = cone_kind_from_string(kind_j.get<std::string>());
  } catch (const InputError& e) {
    throw ParseError(at + "/kind", e.what());
  }
  const char* size_key = kind == ConeKind::kPsd ? "n" : "dim";
  const json& size_j = require(j, size_key, at);
  if (!size_j.is_number_integer() || size_j.get<int>() < 1) {
    throw ParseError(at + "/" + size_key, "expected a positive integer");
  }
  const int dim = size_j.get<int>();
  if (kind == ConeKind::kSecondOrder && dim < 2) {
    throw ParseError(at + "/dim", "second-order cone needs dim >= 2");
  }
  return {kind, dim};
}

MultiplierSetDesc read_multiplier_set(const json& j, const std::string& at) {
  const json& kind_j = require(j, "kind", at);
  const std::string kind = kind_j.is_string() ? kind_j.get<std::string>() : "";
  MultiplierSetDesc desc;
  if (kind == "singleton") {
    desc = Singleton{read_vector(require(j, "lambda", at), at + "/lambda")};
  } else if (kind == "segment") {
    desc = Segment{read_vector(require(j, "a", at), at + "/a"),
                   read_vector(require(j, "b", at), at + "/b")};
  } else if (kind == "affine_box") {
    desc = AffineBox{read_vector(require(j, "anchor", at), at + "/anchor"),
                     read_matrix(require(j, "basis", at), at + "/basis"),
                     read_vector(require(j, "lower", at), at + "/lower"),
                     read_vector(require(j, "upper", at), at + "/upper")};
  } else {
    throw ParseError(at + "/kind", "expected one of singleton, segment, affine_box");
  }
  try {
    validate(desc);
  } catch (const InputError& e) {
    throw ParseError(at, e.what());
  }
  return desc;
}

Vector default_lambda_bar(const MultiplierSetDesc& desc) {
  return std::visit(
      Overloaded{[](const Singleton& s) -> Vector { return s.lambda; },
                 [](const Segment& s) -> Vector { return 0.5 * (s.a + s.b); },
                 [](const AffineBox& b) -> Vector {
                   Vector t = Vector::Zero(b.basis.cols());
                   for (Eigen::Index i = 0; i < t.size(); ++i) {
                     if (std::isfinite(b.lower(i)) && std::isfinite(b.upper(i))) {
                       t(i) = 0.5 * (b.lower(i) + b.upper(i));
                     } else {
                       t(i) = std::clamp(0.0, b.lower(i), b.upper(i));
                     }
                   }
                   return b.anchor + b.basis * t;
                 }},
      desc);
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

json quadratic_json(const QuadraticFunction& fn, const char* offset_key) {
  return json{{"Q", matrix_json(fn.Q)}, {"q", vector_json(fn.q)}, {offset_key, fn.r0}};
}

json cone_json(const PrimitiveCone& c) {
  json out{{"kind", std::string(to_string(c.kind))}};
  out[c.kind == ConeKind::kPsd ? "n" : "dim"] = c.dim;
  return out;
}

json multiplier_set_json(const MultiplierSetDesc& desc) {
  return std::visit(
      Overloaded{[](const Singleton& s) {
                   return json{{"kind", "singleton"}, {"lambda", vector_json(s.lambda)}};
                 },
                 [](const Segment& s) {
                   return json{{"kind", "segment"}, {"a", vector_json(s.a)}, {"b", vector_json(s.b)}};
                 },
                 [](const AffineBox& b) {
                   return json{{"kind", "affine_box"},
                               {"anchor", vector_json(b.anchor)},
                               {"basis", matrix_json(b.basis)},
                               {"lower", vector_json(b.lower)},
                               {"upper", vector_json(b.upper)}};
                 }},
      desc);
}

}  // namespace

ProblemInstance parse_problem(const json& doc) {
  const json& n_j = require(doc, "n", "");
  if (!n_j.is_number_integer() || n_j.get<int>() < 1) {
    throw ParseError("/n", "expected a positive integer");
  }
  QuadraticProblemData data;
  data.n = n_j.get<int>();
  data.objective = read_quadratic(require(doc, "f", ""), data.n, "/f", "r0");

  const json& cons = require(doc, "constraints", "");
  if (!cons.is_array()) throw ParseError("/constraints", "expected an array");
  for (std::size_t i = 0; i < cons.size(); ++i) {
    const std::string at = "/constraints/" + std::to_string(i);
    ConstraintBlock block{AffineMap{}, read_cone(require(cons[i], "cone", at), at + "/cone")};
    const json& map = require(cons[i], "map", at);
    const std::string map_at = at + "/map";
    Eigen::Index rows = 0;
    if (map.is_object() && map.contains("A")) {
      AffineMap a;
      a.A = read_matrix(map["A"], map_at + "/A");
      if (a.A.cols() != data.n) {
        throw ParseError(map_at + "/A", "expected " + std::to_string(data.n) + " columns");
      }
      a.b = map.contains("b") ? read_vector(map["b"], map_at + "/b") : Vector::Zero(a.A.rows());
      require_length(a.b, a.A.rows(), map_at + "/b");
      rows = a.A.rows();
      block.map = std::move(a);
    } else if (map.is_object() && map.contains("rows")) {
      const json& rows_j = map["rows"];
      if (!rows_j.is_array()) throw ParseError(map_at + "/rows", "expected an array");
      QuadraticRows q;
      for (std::size_t r = 0; r < rows_j.size(); ++r) {
        q.rows.push_back(read_quadratic(rows_j[r], data.n,
                                        map_at + "/rows/" + std::to_string(r), "r"));
      }
      rows = static_cast<Eigen::Index>(q.rows.size());
      block.map = std::move(q);
    } else {
      throw ParseError(map_at, "expected an affine map {A, b} or quadratic rows {rows}");
    }
    if (rows != block.cone.vector_length()) {
      throw ParseError(map_at, "map has " + std::to_string(rows) + " rows, cone needs " +
                                   std::to_string(block.cone.vector_length()));
    }
    data.constraints.push_back(std::move(block));
  }
  if (data.constraints.empty()) throw ParseError("/constraints", "at least one block required");

  const std::string name =
      doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "file";
  ProblemInstance p = make_quadratic_problem(name, std::move(data));

  if (doc.contains("x0")) {
    p.default_x0 = read_vector(doc["x0"], "/x0");
    require_length(*p.default_x0, p.n, "/x0");
  }
  if (doc.contains("lam0")) {
    p.default_lam0 = read_vector(doc["lam0"], "/lam0");
    require_length(*p.default_lam0, p.m, "/lam0");
  }
  if (doc.contains("reference")) {
    const json& ref_j = doc["reference"];
    ReferenceSolution ref;
    ref.x_bar = read_vector(require(ref_j, "x_bar", "/reference"), "/reference/x_bar");
    require_length(ref.x_bar, p.n, "/reference/x_bar");
    ref.multiplier_set = read_multiplier_set(require(ref_j, "multiplier_set", "/reference"),
                                             "/reference/multiplier_set");
    if (dimension(ref.multiplier_set) != p.m) {
      throw ParseError("/reference/multiplier_set",
                       "dimension must equal constraint dimension " + std::to_string(p.m));
    }
    ref.lambda_bar = ref_j.contains("lambda_bar")
                         ? read_vector(ref_j["lambda_bar"], "/reference/lambda_bar")
                         : default_lambda_bar(ref.multiplier_set);
    require_length(ref.lambda_bar, p.m, "/reference/lambda_bar");
    if (ref_j.contains("sosc_holds")) {
      if (!ref_j["sosc_holds"].is_boolean()) {
        throw ParseError("/reference/sosc_holds", "expected a boolean");
      }
      ref.sosc_holds = ref_j["sosc_holds"].get<bool>();
    }
    p.reference = std::move(ref);
    try {
      validate_reference(p);
    } catch (const RegistryIntegrityError& e) {
      throw ParseError("/reference", e.what());
    }
  }
  return p;
}

ProblemInstance parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", e.what());
  }
  return parse_problem(doc);
}

ProblemInstance load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

json serialize_problem(const ProblemInstance& problem) {
  if (!problem.quadratic) {
    throw InputError("problem '" + problem.name + "' has no quadratic data to serialize");
  }
  const auto& data = *problem.quadratic;
  json doc;
  doc["name"] = problem.name;
  doc["n"] = data.n;
  doc["f"] = quadratic_json(data.objective, "r0");
  doc["constraints"] = json::array();
  for (const auto& block : data.constraints) {
    json map = std::visit(
        Overloaded{[](const AffineMap& a) {
                     return json{{"A", matrix_json(a.A)}, {"b", vector_json(a.b)}};
                   },
                   [](const QuadraticRows& q) {
                     json rows = json::array();
                     for (const auto& r : q.rows) rows.push_back(quadratic_json(r, "r"));
                     return json{{"rows", rows}};
                   }},
        block.map);
    doc["constraints"].push_back(json{{"map", map}, {"cone", cone_json(block.cone)}});
  }
  if (problem.default_x0) doc["x0"] = vector_json(*problem.default_x0);
  if (problem.default_lam0) doc["lam0"] = vector_json(*problem.default_lam0);
  if (problem.reference) {
    const auto& ref = *problem.reference;
    doc["reference"] = json{{"x_bar", vector_json(ref.x_bar)},
                            {"multiplier_set", multiplier_set_json(ref.multiplier_set)},
                            {"lambda_bar", vector_json(ref.lambda_bar)},
                            {"sosc_holds", ref.sosc_holds}};
  }
  return doc;
}

json to_json(const ConeSpec& cone) {
  json blocks = json::array();
  for (const auto& b : cone.blocks()) blocks.push_back(cone_json(b));
  return json{{"blocks", blocks}};
}

ConeSpec cone_from_json(const json& j) {
  const json& blocks = require(j, "blocks", "");
  if (!blocks.is_array()) throw ParseError("/blocks", "expected an array");
  std::vector<PrimitiveCone> out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out.push_back(read_cone(blocks[i], "/blocks/" + std::to_string(i)));
  }
  return ConeSpec(std::move(out));
}

}  // namespace conic_palm
