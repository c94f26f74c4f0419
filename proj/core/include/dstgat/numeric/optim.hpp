#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dstgat/numeric/autodiff.hpp"

namespace dstgat {

/// Parameters sharing one initial learning rate.
struct ParameterGroup {
  std::string name;
  std::vector<Parameter*> parameters;
  double learning_rate = 0.0;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// Moment estimates for one ParameterGroup. Shapes mirror the parameters.
struct AdamWState {
  std::size_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  AdamWConfig config;

  static AdamWState for_group(const ParameterGroup& group, AdamWConfig config = {});
};

/// One AdamW update with bias correction and decoupled weight decay, applied
/// with learning rate `lr` to every parameter of the group.
void adamw_step(ParameterGroup& group, AdamWState& state, std::span<const Matrix> grads, double lr);

/// Same as above, reading gradients from Parameter::grad.
void adamw_step(ParameterGroup& group, AdamWState& state, double lr);

/// initial · (1 − step / total_steps), clamped to 0 once step ≥ total_steps.
double linear_decay_lr(double initial, std::size_t step, std::size_t total_steps);

/// AdamW over several parameter groups with a shared linear-decay schedule.
class AdamW {
 public:
  AdamW(std::vector<ParameterGroup> groups, std::size_t total_steps, AdamWConfig config = {});

  void zero_grad();
  /// Applies one update to every group and advances the schedule.
  void step();

  std::size_t steps_taken() const { return steps_; }
  std::size_t total_steps() const { return total_steps_; }
  double current_lr(std::size_t group) const;
  const std::vector<ParameterGroup>& groups() const { return groups_; }
  const std::vector<AdamWState>& states() const { return states_; }

 private:
  std::vector<ParameterGroup> groups_;
  std::vector<AdamWState> states_;
  std::size_t total_steps_;
  std::size_t steps_ = 0;
};

}  // namespace dstgat
