#pragma once

#include <functional>
#include <vector>

#include "dvit/tensor.hpp"

namespace dvit {

struct GradCheckResult {
  double max_rel_error = 0.0;
  /// Maximum relative error per parameter tensor, in input order.
  std::vector<double> per_param;
};

/// Compares tape gradients of a scalar loss against central differences.
///
/// `loss_fn` must rebuild the loss from the current values of `params`.
/// Relative error per element is
///   |analytic - numeric| / (|analytic| + |numeric| + floor).
/// Throws InvalidOracleError if two evaluations at the same point disagree.
GradCheckResult finite_diff_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> params,
                                  double h = 1e-5, double floor = 1e-6);

}  // namespace dvit
