#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dstgat/numeric/autodiff.hpp"

namespace dstgat {

/// Builds a scalar loss on the given tape from the current parameter values.
using ScalarFn = std::function<Var(Tape&)>;

struct GradCheckFailure {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
  std::string reason;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
  bool passed = true;
  std::vector<GradCheckFailure> failures;

  std::string summary() const;
};

/// Compares reverse-mode gradients with central finite differences for every
/// entry of every parameter. The relative error of an entry is
/// |g_ad − g_fd| / max(1, |g_ad| + |g_fd|).
GradCheckReport gradient_check(const ScalarFn& f, std::span<Parameter* const> params,
                               double step = 1e-5, double tol = 1e-4);

}  // namespace dstgat
