#include "tieforge/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tieforge/errors.hpp"

namespace tieforge::num {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_size(shape_) != values_.size()) {
    throw DimensionError("shape " + shape_string(shape_) + " does not hold " + std::to_string(values_.size()) +
                         " values");
  }
}

Tensor Tensor::vector(std::initializer_list<double> v) { return Tensor({v.size()}, std::vector<double>(v)); }

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> flat;
  std::size_t cols = rows.size() ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix literal");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(flat));
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  throw DimensionError("rows() of rank-" + std::to_string(shape_.size()) + " tensor");
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  throw DimensionError("cols() of rank-" + std::to_string(shape_.size()) + " tensor");
}

double Tensor::item() const {
  if (values_.size() != 1) throw DimensionError("item() of tensor " + shape_string(shape_));
  return values_[0];
}

std::span<double> Tensor::grad() {
  if (grad_.size() != values_.size()) grad_.assign(values_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

bool Tensor::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(values_.begin(), values_.end(), finite) && std::all_of(grad_.begin(), grad_.end(), finite);
}

Var make_var(Tensor t, bool requires_grad) {
  auto v = std::make_shared<Tensor>(std::move(t));
  v->set_requires_grad(requires_grad);
  return v;
}

void Tape::record(std::function<void()> backward) {
  if (recording_) ops_.push_back(std::move(backward));
}

void Tape::backward(const Var& scalar_output) {
  if (scalar_output->size() != 1) {
    throw DimensionError("backward() needs a scalar, got " + shape_string(scalar_output->shape()));
  }
  scalar_output->grad()[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

}  // namespace tieforge::num
