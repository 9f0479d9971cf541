// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sheetlab/kernel.hpp"

namespace sheetlab {

/**
 * Named test function for mean-value experiments.
 *
 *  - cos:              f(y) = cos(y^1 + ... + y^d)
 *  - gauss_bump:       f(y) = exp(-|y|^2 / 2)
 *  - indicator_smooth: f(y) = prod_a (1 + erf(y^a / eps)) / 2, eps = `param` (default 0.5)
 *  - poly_k:           f(y) = (y^1)^k, k = `param` (default 4); unbounded, moments only
 *
 * `mean` is the closed form of E[f(x + sqrt(variance) Z)].
 */
struct TestFunction {
  std::string name;
  Field f;
  std::function<double(double variance, const Eigen::VectorXd& x)> mean;
  double sup_norm;  ///< sup |f|, +inf when unbounded
};

TestFunction make_test_function(const std::string& name, double param = 0.0);

std::vector<std::string> test_function_names();

}  // namespace sheetlab
