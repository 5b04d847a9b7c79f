#include "tieforge/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "tieforge/numcore/ops.hpp"

namespace tieforge::num {
namespace {

constexpr double kStep = 1e-5;

double evaluate(const CheckedOp& op, const std::vector<Tensor>& inputs) {
  Tape tape(false);
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(make_var(t));
  return sum(tape, op(tape, vars))->item();
}

}  // namespace

GradCheckReport grad_check(const std::string& op_name, const CheckedOp& op, const std::vector<Tensor>& inputs,
                           double tolerance) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(make_var(t, true));
  Var total = sum(tape, op(tape, vars));
  tape.backward(total);

  GradCheckReport report{op_name, 0.0, tolerance, false};
  std::vector<Tensor> probe = inputs;
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    const auto analytic = vars[v]->grad();
    for (std::size_t i = 0; i < inputs[v].size(); ++i) {
      const double original = probe[v][i];
      probe[v][i] = original + kStep;
      const double plus = evaluate(op, probe);
      probe[v][i] = original - kStep;
      const double minus = evaluate(op, probe);
      probe[v][i] = original;
      const double numeric = (plus - minus) / (2.0 * kStep);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      report.max_rel_error = std::max(report.max_rel_error, std::abs(analytic[i] - numeric) / denom);
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace tieforge::num
