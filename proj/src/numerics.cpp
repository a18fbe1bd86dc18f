#include "giant/numerics.hpp"

#include <cmath>

namespace giant {

Vector softmax_tempered(const Vector& v, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax temperature must be > 0");
  const Vector scaled = v / tau;
  const double m = scaled.maxCoeff();
  Vector out = (scaled.array() - m).exp();
  out /= out.sum();
  return out;
}

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

ParamBlock& ParamStore::add(const std::string& name, Matrix init) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
  index_[name] = blocks_.size();
  blocks_.push_back(
      {name, std::move(init), Matrix()});
  ParamBlock& b = blocks_.back();
  b.grad = Matrix::Zero(b.value.rows(), b.value.cols());
  return b;
}

ParamBlock& ParamStore::block(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return blocks_[it->second];
}

const ParamBlock& ParamStore::block(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown parameter: " + name);
  return blocks_[it->second];
}

void ParamStore::zero_grads() {
  for (auto& b : blocks_) b.grad.setZero();
}

double ParamStore::squared_norm() const {
  double total = 0.0;
  for (const auto& b : blocks_) total += b.value.squaredNorm();
  return total;
}

void ParamStore::add_l2_gradient(double l2) {
  for (auto& b : blocks_) b.grad += 2.0 * l2 * b.value;
}

Index ParamStore::total_elements() const {
  Index n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

std::deque<Matrix> ParamStore::snapshot_values() const {
  std::deque<Matrix> out;
  for (const auto& b : blocks_) out.push_back(b.value);
  return out;
}

void ParamStore::restore_values(const std::deque<Matrix>& values) {
  if (values.size() != blocks_.size())
    throw std::invalid_argument("snapshot size mismatch");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].value = values[i];
}

GradCheckReport grad_check(
    const std::function<double(ParamStore&, bool)>& f, ParamStore& params,
    double tol, double step) {
  GradCheckReport report;

  params.zero_grads();
  const double base = f(params, true);
  if (!std::isfinite(base)) {
    report.failure = "objective non-finite at base point";
    return report;
  }

  // Stash analytic grads; FD evaluations below must not depend on them.
  std::deque<Matrix> analytic;
  for (std::size_t b = 0; b < params.size(); ++b) analytic.push_back(params[b].grad);

  for (std::size_t b = 0; b < params.size(); ++b) {
    ParamBlock& blk = params[b];
    for (Index i = 0; i < blk.value.rows(); ++i) {
      for (Index j = 0; j < blk.value.cols(); ++j) {
        const double saved = blk.value(i, j);
        blk.value(i, j) = saved + step;
        const double up = f(params, false);
        blk.value(i, j) = saved - step;
        const double down = f(params, false);
        blk.value(i, j) = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) {
          report.failure = "objective non-finite while perturbing " + blk.name;
          return report;
        }
        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic[b](i, j);
        const double rel =
            std::abs(a - numeric) /
            std::max({std::abs(a), std::abs(numeric), 1e-4});
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = blk.name;
          report.worst_row = i;
          report.worst_col = j;
          report.analytic_at_worst = a;
          report.numeric_at_worst = numeric;
        }
      }
    }
  }

  // Leave the analytic grads in place for the caller.
  for (std::size_t b = 0; b < params.size(); ++b) params[b].grad = analytic[b];
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace giant
