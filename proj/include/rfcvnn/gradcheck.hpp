#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "rfcvnn/tensor.hpp"

namespace rfcvnn {

struct GradCheckOptions {
  double step = 1e-6;
  // A coordinate whose forward and backward one-sided slopes disagree by more
  // than this (relative) sits on a kink and is left out of the maximum.
  double kink_tolerance = 1e-3;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t excluded_kinks = 0;
};

/// |a - n| / max(1e-8, |a| + |n|)
double relative_gradient_error(double analytic, double numeric);

/// Compares the analytic gradient of `f` with central differences, one
/// coordinate of `inputs` at a time. `f` must rebuild its graph from the
/// (leaf, requires-grad) `inputs` on every call and return a single-element
/// tensor. Throws NumericError on non-finite values.
GradCheckReport finite_diff_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs,
                                  GradCheckOptions options = {});

}  // namespace rfcvnn
