// SPDX-License-Identifier: MIT
#include <doctest.h>

#include "sheetlab/serialize.hpp"

using namespace sheetlab;
using nlohmann::json;

TEST_CASE("multi-index round trip") {
  for (const auto& n : enumerate_up_to(3, 4)) CHECK(multiindex_from_json(to_json(n)) == n);
  CHECK(to_json(MultiIndex{2, 0, 1}) == json::parse("[2,0,1]"));
  CHECK_THROWS(multiindex_from_json(json::parse("[1,-1]")));
  CHECK_THROWS(multiindex_from_json(json::parse("[]")));
  CHECK_THROWS(multiindex_from_json(json::parse("{\"n\": 1}")));
}

TEST_CASE("series round trip and schema") {
  HermiteSeries s(2);
  s.set(MultiIndex{0, 0}, 0.5).set(MultiIndex{2, 1}, -1.25).set(MultiIndex{0, 3}, 3.0);
  const json j = to_json(s);
  CHECK(j.at("d") == 2);
  REQUIRE(j.at("coefficients").size() == 3);
  CHECK(j.at("coefficients")[0].at("n") == json::parse("[0,0]"));
  CHECK(j.at("coefficients")[0].at("a") == 0.5);
  CHECK(series_from_json(j) == s);
  CHECK(series_from_json(json::parse(j.dump())) == s);
  CHECK_THROWS(series_from_json(json::parse(R"({"d": 2, "coefficients": [{"n": [1], "a": 1.0}]})")));
  CHECK_THROWS(series_from_json(json::parse(R"({"coefficients": []})")));
}

TEST_CASE("curve round trip") {
  const IncreasingCurve c = random_staircase(MultiTime{1.0, 2.0, 0.5}, 6, 4);
  const json j = to_json(c);
  CHECK(j.size() == c.breakpoints().size());
  CHECK(j[0] == json::parse("[0.0,0.0,0.0]"));
  const IncreasingCurve back = curve_from_json(json::parse(j.dump()));
  REQUIRE(back.breakpoints().size() == c.breakpoints().size());
  for (std::size_t i = 0; i < back.breakpoints().size(); ++i) CHECK(back.breakpoints()[i] == c.breakpoints()[i]);
  CHECK_THROWS_AS(curve_from_json(json::parse("[[0,0],[1,1]]")), std::invalid_argument);
}

TEST_CASE("estimate report fields") {
  const Estimate e{0.98, 0.01, 1.0};
  const json j = to_json(e);
  CHECK(j.at("estimate") == 0.98);
  CHECK(j.at("se") == 0.01);
  CHECK(j.at("theoretical") == 1.0);
}
