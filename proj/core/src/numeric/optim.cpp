#include "dstgat/numeric/optim.hpp"

#include <cmath>
#include <unordered_set>

namespace dstgat {

AdamWState AdamWState::for_group(const ParameterGroup& group, AdamWConfig config) {
  AdamWState s;
  s.config = config;
  for (const Parameter* p : group.parameters) {
    s.first_moment.emplace_back(p->value.rows(), p->value.cols());
    s.second_moment.emplace_back(p->value.rows(), p->value.cols());
  }
  return s;
}

void adamw_step(ParameterGroup& group, AdamWState& state, std::span<const Matrix> grads, double lr) {
  if (lr < 0.0) throw ContractViolation("adamw_step: negative learning rate");
  if (grads.size() != group.parameters.size() ||
      state.first_moment.size() != group.parameters.size()) {
    throw DimensionError("adamw_step: group '" + group.name + "' has " +
                         std::to_string(group.parameters.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    require_same_shape(group.parameters[i]->value, grads[i], "adamw_step");
  }
  const AdamWConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Matrix& w = group.parameters[i]->value;
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    const Matrix& g = grads[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] *= 1.0 - lr * c.weight_decay;
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

void adamw_step(ParameterGroup& group, AdamWState& state, double lr) {
  std::vector<Matrix> grads;
  grads.reserve(group.parameters.size());
  for (const Parameter* p : group.parameters) grads.push_back(p->grad);
  adamw_step(group, state, grads, lr);
}

double linear_decay_lr(double initial, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) throw ContractViolation("linear_decay_lr: total_steps must be >= 1");
  if (step >= total_steps) return 0.0;
  return initial * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

AdamW::AdamW(std::vector<ParameterGroup> groups, std::size_t total_steps, AdamWConfig config)
    : groups_(std::move(groups)), total_steps_(total_steps) {
  if (total_steps_ == 0) throw ContractViolation("AdamW: total_steps must be >= 1");
  std::unordered_set<const Parameter*> seen;
  for (const ParameterGroup& g : groups_) {
    for (const Parameter* p : g.parameters) {
      if (!seen.insert(p).second) {
        throw ContractViolation("AdamW: parameter '" + p->name() + "' belongs to two groups");
      }
    }
    states_.push_back(AdamWState::for_group(g, config));
  }
}

void AdamW::zero_grad() {
  for (ParameterGroup& g : groups_)
    for (Parameter* p : g.parameters) p->zero_grad();
}

double AdamW::current_lr(std::size_t group) const {
  return linear_decay_lr(groups_.at(group).learning_rate, steps_, total_steps_);
}

void AdamW::step() {
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    adamw_step(groups_[i], states_[i], current_lr(i));
  }
  ++steps_;
}

}  // namespace dstgat
