#include "conic_palm/errors.hpp"
#include "conic_palm/lagrangian.hpp"
#include "conic_palm/model.hpp"
#include "conic_palm/problem_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

using namespace conic_palm;
using conic_palm::testing::gaussian;
using conic_palm::testing::vec;
using nlohmann::json;

namespace {

json p1_document() {
  return json::parse(R"({
    "name": "p1-from-file",
    "n": 2,
    "f": {"Q": [[0, 0], [0, 2]], "q": [1, 0], "r0": 0},
    "constraints": [
      {"map": {"A": [[-1, 0], [-1, 0]], "b": [0, 0]}, "cone": {"kind": "nonpos", "dim": 2}}
    ],
    "reference": {
      "x_bar": [0, 0],
      "multiplier_set": {"kind": "segment", "a": [1, 0], "b": [0, 1]},
      "lambda_bar": [0.5, 0.5]
    }
  })");
}

json p2_document() {
  return json::parse(R"({
    "n": 2,
    "f": {"Q": [[1, 0], [0, 1]], "q": [0, 0], "r0": 0.75},
    "constraints": [
      {"map": {"A": [[1, 0]], "b": [-1]}, "cone": {"kind": "zero", "dim": 1}}
    ]
  })");
}

std::string parse_error_location(const json& doc) {
  try {
    parse_problem(doc);
  } catch (const ParseError& e) {
    return e.location();
  }
  return "<no error>";
}

void check_same_evaluators(const ProblemInstance& a, const ProblemInstance& b,
                           std::uint64_t seed, int points) {
  std::mt19937_64 rng(seed);
  for (int i = 0; i < points; ++i) {
    const Vector x = gaussian(a.n, rng);
    const Vector lam = gaussian(a.m, rng);
    const double scale = 1.0 + std::abs(a.f_value(x));
    CHECK(std::abs(a.f_value(x) - b.f_value(x)) <= 1e-12 * scale);
    CHECK((a.f_grad(x) - b.f_grad(x)).norm() <= 1e-12 * (1 + a.f_grad(x).norm()));
    CHECK((a.f_hess(x) - b.f_hess(x)).norm() <= 1e-12);
    CHECK((a.g_value(x) - b.g_value(x)).norm() <= 1e-12 * (1 + a.g_value(x).norm()));
    CHECK((a.g_jac(x) - b.g_jac(x)).norm() <= 1e-12);
    CHECK((a.g_hess_contract(x, lam) - b.g_hess_contract(x, lam)).norm() <= 1e-12);
  }
}

}  // namespace

TEST_CASE("registry contents") {
  const auto names = registry_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "nlp-degenerate");

  const auto p1 = registry_get("nlp-degenerate");
  REQUIRE(p1.reference);
  CHECK(p1.reference->x_bar.norm() == 0.0);
  CHECK((p1.reference->lambda_bar - vec({0.5, 0.5})).norm() == 0.0);

  const auto p2 = registry_get("eq-quadratic");
  REQUIRE(p2.reference);
  CHECK((p2.reference->x_bar - vec({1, 0})).norm() < 1e-15);
  CHECK((p2.reference->lambda_bar - vec({-1})).norm() < 1e-15);

  CHECK_THROWS_AS(registry_get("foo"), LookupError);
}

TEST_CASE("P1 multipliers agree with a brute-force grid over the KKT system") {
  const auto p1 = registry_get("nlp-degenerate");
  const Vector x_bar = p1.reference->x_bar;
  // Every grid point of [0,2]^2 with zero residual lies on the segment.
  int on_set = 0;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const Vector lam = vec({0.01 * i, 0.01 * j});
      if (kkt_residual(p1, x_bar, lam) <= 1e-12) {
        ++on_set;
        CHECK(std::abs(lam.sum() - 1.0) <= 1e-12);
      }
    }
  }
  CHECK(on_set == 101);
}

TEST_CASE("every benchmark reference is a KKT point for its whole multiplier set") {
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    const auto p = registry_get(name);
    REQUIRE(p.reference);
    CHECK(p.m == p.cone.total_dim());
    CHECK(kkt_residual(p, p.reference->x_bar, p.reference->lambda_bar) <= 1e-10);
    for (const auto& lam : sample_multipliers(p.reference->multiplier_set, 100, 3)) {
      CHECK(kkt_residual(p, p.reference->x_bar, lam) <= 1e-9);
    }
  }
}

TEST_CASE("derivative checks") {
  CHECK(check_derivatives(registry_get("eq-quadratic"), Vector::Zero(2), 7).max() <= 1e-6);
  CHECK(check_derivatives(registry_get("nlp-degenerate"), vec({0.3, -0.2}), 7).max() <= 1e-5);
  std::mt19937_64 rng(7);
  CHECK(check_derivatives(registry_get("psd-small"), gaussian(2, rng), 7).max() <= 1e-5);

  for (const auto& name : registry_names()) {
    CAPTURE(name);
    const auto p = registry_get(name);
    for (int i = 0; i < 20; ++i) {
      CHECK(check_derivatives(p, gaussian(p.n, rng), 100 + i).max() <= 1e-5);
    }
  }
}

TEST_CASE("a broken reference is rejected") {
  auto p = registry_get("nlp-degenerate");
  p.reference->lambda_bar = vec({2.0, 0.0});
  CHECK_THROWS_AS(validate_reference(p), RegistryIntegrityError);
  p = registry_get("nlp-degenerate");
  p.reference->multiplier_set = Segment{vec({1, 0}), vec({0, 2})};
  CHECK_THROWS_AS(validate_reference(p), RegistryIntegrityError);
}

TEST_CASE("multiplier set descriptions are validated") {
  CHECK_THROWS_AS(validate(MultiplierSetDesc{Segment{vec({1, 0}), vec({1, 0})}}), InputError);
  Matrix basis(2, 2);
  basis << 1, 2, 2, 4;
  CHECK_THROWS_AS(validate(MultiplierSetDesc{AffineBox{vec({0, 0}), basis, vec({0, 0}),
                                                       vec({1, 1})}}),
                  InputError);
}

TEST_CASE("parse_problem examples") {
  const auto p2 = parse_problem(p2_document());
  CHECK(p2.f_value(Vector::Zero(2)) == 0.75);
  CHECK_FALSE(p2.reference);

  auto doc = p2_document();
  doc["f"]["Q"] = json::parse("[[1, 0.5], [0, 1]]");
  CHECK(parse_error_location(doc) == "/f/Q");
}

TEST_CASE("parse errors carry their location") {
  auto doc = p2_document();
  doc.erase("n");
  CHECK(parse_error_location(doc) == "/n");

  doc = p2_document();
  doc["f"]["q"] = json::parse("[0, 0, 0]");
  CHECK(parse_error_location(doc) == "/f/q");

  doc = p2_document();
  doc["constraints"][0]["map"]["A"] = json::parse("[[1, 0, 0]]");
  CHECK(parse_error_location(doc) == "/constraints/0/map/A");

  doc = p2_document();
  doc["constraints"][0]["cone"]["kind"] = "exp";
  CHECK(parse_error_location(doc) == "/constraints/0/cone/kind");

  doc = p2_document();
  doc["constraints"][0]["cone"]["dim"] = 2;
  CHECK(parse_error_location(doc).rfind("/constraints/0", 0) == 0);

  doc = p1_document();
  doc["reference"]["lambda_bar"] = json::parse("[3, 0]");
  CHECK(parse_error_location(doc) == "/reference");

  CHECK_THROWS_AS(parse_problem(std::string("{not json")), ParseError);
}

TEST_CASE("parsed P1 matches the registry instance") {
  const auto parsed = parse_problem(p1_document());
  const auto registered = registry_get("nlp-degenerate");
  REQUIRE(parsed.reference);
  check_same_evaluators(parsed, registered, 5, 100);
}

TEST_CASE("serialize then parse is the identity on evaluators") {
  for (const auto& name : registry_names()) {
    CAPTURE(name);
    const auto p = registry_get(name);
    REQUIRE(p.quadratic);
    const json doc = serialize_problem(p);
    const auto back = parse_problem(json::parse(doc.dump()));
    CHECK(back.name == p.name);
    REQUIRE(back.reference);
    CHECK((back.reference->x_bar - p.reference->x_bar).norm() == 0.0);
    check_same_evaluators(p, back, 17, 20);
  }
}

TEST_CASE("cone json round trip") {
  const ConeSpec cone({{ConeKind::kSecondOrder, 3}, {ConeKind::kPsd, 2}});
  const json j = to_json(cone);
  CHECK(j.dump() == R"({"blocks":[{"dim":3,"kind":"soc"},{"kind":"psd","n":2}]})");
  const ConeSpec back = cone_from_json(j);
  CHECK(back.total_dim() == 6);
  CHECK(back.blocks()[1].kind == ConeKind::kPsd);
}
