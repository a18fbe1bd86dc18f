#pragma once

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>

#include "giant/types.hpp"

namespace giant {

// Temperature softmax with max-subtraction: softmax(v / tau).
// Output is a probability vector for every finite input.
Vector softmax_tempered(const Vector& v, double tau);

double log_sum_exp(const Vector& v);

// Named parameter tensor with an accumulated gradient of the same shape.
struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Flat registry of trainable tensors. Blocks live in a deque so references
// stay valid as more blocks are added.
class ParamStore {
 public:
  ParamBlock& add(const std::string& name, Matrix init);
  ParamBlock& block(const std::string& name);
  const ParamBlock& block(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return blocks_.size(); }
  ParamBlock& operator[](std::size_t i) { return blocks_[i]; }
  const ParamBlock& operator[](std::size_t i) const { return blocks_[i]; }

  void zero_grads();
  double squared_norm() const;       // sum over all blocks of ||value||^2
  void add_l2_gradient(double l2);   // grad += 2 * l2 * value
  Index total_elements() const;

  // Deep copy / restore of the values only (used for best-epoch snapshots).
  std::deque<Matrix> snapshot_values() const;
  void restore_values(const std::deque<Matrix>& values);

 private:
  std::deque<ParamBlock> blocks_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Result of comparing an analytic gradient against central finite
// differences, element by element across every block in the store.
struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_row = 0;
  Index worst_col = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::string failure;  // non-empty when f went non-finite; names the parameter
};

// `f(params, accumulate_grads)` must return the scalar loss; when
// `accumulate_grads` is true it must also leave gradients in the store
// (grads are zeroed here before that call). Perturbation step h = 1e-5 by
// default; relative error uses max(|analytic|, |numeric|, 1e-4) as the
// denominator so near-zero gradients are checked absolutely.
GradCheckReport grad_check(
    const std::function<double(ParamStore&, bool)>& f, ParamStore& params,
    double tol, double step = 1e-5);

}  // namespace giant
