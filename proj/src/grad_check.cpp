#include "dvit/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "dvit/errors.hpp"

namespace dvit {

GradCheckResult finite_diff_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> params,
                                  double h, double floor) {
  if (!(h > 0.0)) throw ContractError("finite_diff_check: step must be positive");

  for (Tensor& p : params) p.zero_grad();
  {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = loss_fn();
    }
    tape.backward(loss);
  }

  const double base = loss_fn().item();
  if (loss_fn().item() != base)
    throw InvalidOracleError("finite_diff_check: loss is not deterministic at a fixed point");

  GradCheckResult result;
  for (Tensor& p : params) {
    std::vector<double> analytic(p.numel(), 0.0);
    if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), analytic.begin());
    auto values = p.mutable_data();
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_fn().item();
      values[i] = saved - h;
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) /
                         (std::abs(analytic[i]) + std::abs(numeric) + floor);
      worst = std::max(worst, err);
    }
    result.per_param.push_back(worst);
    result.max_rel_error = std::max(result.max_rel_error, worst);
  }
  return result;
}

}  // namespace dvit
