#include "rfcvnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rfcvnn {

double relative_gradient_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

namespace {

double evaluate(const std::function<Tensor()>& f) {
  const Tensor out = f();
  const double v = out.item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: function value is not finite");
  return v;
}

}  // namespace

GradCheckReport finite_diff_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs,
                                  GradCheckOptions options) {
  for (auto& in : inputs) {
    if (!in.is_leaf() || !in.requires_grad())
      throw GraphError("finite_diff_check: inputs must be leaf tensors that require gradients");
    in.zero_grad();
  }
  f().backward();

  GradCheckReport report;
  const double h = options.step;
  for (auto& in : inputs) {
    const std::vector<double> analytic(in.grad().begin(), in.grad().end());
    auto values = in.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(analytic[i])) throw NumericError("finite_diff_check: analytic gradient is not finite");
      const double x0 = values[i];
      values[i] = x0 + h;
      const double fp = evaluate(f);
      values[i] = x0 - h;
      const double fm = evaluate(f);
      values[i] = x0;
      const double f0 = evaluate(f);

      const double slope_fwd = (fp - f0) / h;
      const double slope_bwd = (f0 - fm) / h;
      if (std::abs(slope_fwd - slope_bwd) >
          options.kink_tolerance * std::max(1.0, std::abs(slope_fwd) + std::abs(slope_bwd))) {
        ++report.excluded_kinks;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * h);
      report.max_rel_error = std::max(report.max_rel_error, relative_gradient_error(analytic[i], numeric));
      ++report.checked;
    }
  }
  return report;
}

}  // namespace rfcvnn
