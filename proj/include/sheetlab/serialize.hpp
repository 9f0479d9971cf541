// SPDX-License-Identifier: MIT
#pragma once

#include <json.hpp>

#include "sheetlab/hermite.hpp"
#include "sheetlab/integral.hpp"
#include "sheetlab/multiindex.hpp"
#include "sheetlab/montecarlo.hpp"

namespace sheetlab {

/// [n_1, ..., n_d]
nlohmann::json to_json(const MultiIndex& n);
MultiIndex multiindex_from_json(const nlohmann::json& j);

/// {"d": int, "coefficients": [{"n": [...], "a": real}, ...]} in graded order.
nlohmann::json to_json(const HermiteSeries& s);
HermiteSeries series_from_json(const nlohmann::json& j);

/// List of breakpoints, each a list of m coordinates.
nlohmann::json to_json(const IncreasingCurve& c);
IncreasingCurve curve_from_json(const nlohmann::json& j);

/// {"estimate", "se", "theoretical"}
nlohmann::json to_json(const Estimate& e);

}  // namespace sheetlab
