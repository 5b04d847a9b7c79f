#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tieforge/numcore/tensor.hpp"

namespace tieforge::num {

struct GradCheckReport {
  std::string op_name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

using CheckedOp = std::function<Var(Tape&, std::span<const Var>)>;

// Compares analytic gradients of sum(op(inputs)) against central differences
// with step 1e-5. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
// denominator.
GradCheckReport grad_check(const std::string& op_name, const CheckedOp& op,
                           const std::vector<Tensor>& inputs, double tolerance);

}  // namespace tieforge::num
