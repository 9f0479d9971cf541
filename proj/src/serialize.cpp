// SPDX-License-Identifier: MIT
#include "sheetlab/serialize.hpp"

#include <stdexcept>

namespace sheetlab {

nlohmann::json to_json(const MultiIndex& n) {
  return nlohmann::json(std::vector<int>(n.components().begin(), n.components().end()));
}

MultiIndex multiindex_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("multi-index must be a JSON array");
  return MultiIndex(j.get<std::vector<int>>());
}

nlohmann::json to_json(const HermiteSeries& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [n, a] : s.terms()) coeffs.push_back({{"n", to_json(n)}, {"a", a}});
  return {{"d", s.dim()}, {"coefficients", coeffs}};
}

HermiteSeries series_from_json(const nlohmann::json& j) {
  HermiteSeries s(j.at("d").get<std::size_t>());
  for (const auto& term : j.at("coefficients")) s.add(multiindex_from_json(term.at("n")), term.at("a").get<double>());
  return s;
}

nlohmann::json to_json(const IncreasingCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.breakpoints()) pts.push_back(std::vector<double>(p.coords().data(), p.coords().data() + p.coords().size()));
  return pts;
}

IncreasingCurve curve_from_json(const nlohmann::json& j) {
  std::vector<MultiTime> pts;
  for (const auto& p : j) {
    const auto v = p.get<std::vector<double>>();
    pts.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return IncreasingCurve(std::move(pts));
}

nlohmann::json to_json(const Estimate& e) {
  return {{"estimate", e.mean}, {"se", e.se}, {"theoretical", e.theoretical}};
}

}  // namespace sheetlab
