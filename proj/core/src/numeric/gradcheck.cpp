#include "dstgat/numeric/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dstgat {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "FAIL") << ": " << entries_checked << " entries, max relative error "
     << max_relative_error;
  for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 5); ++i) {
    const auto& f = failures[i];
    os << "\n  " << f.parameter << "[" << f.index << "] ad=" << f.analytic << " fd=" << f.numeric
       << " r=" << f.relative_error;
    if (!f.reason.empty()) os << " (" << f.reason << ")";
  }
  return os.str();
}

namespace {

double evaluate(const ScalarFn& f) {
  Tape tape(false);
  Var loss = f(tape);
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ContractViolation("gradient_check: function must return a scalar");
  }
  return loss.value()[0];
}

}  // namespace

GradCheckReport gradient_check(const ScalarFn& f, std::span<Parameter* const> params, double step,
                               double tol) {
  if (step <= 0.0) throw ContractViolation("gradient_check: step must be > 0");
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }

  GradCheckReport report;
  for (Parameter* p : params) {
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double original = p->value[k];
      p->value[k] = original + step;
      const double up = evaluate(f);
      p->value[k] = original - step;
      const double down = evaluate(f);
      p->value[k] = original;

      const double analytic = p->grad[k];
      ++report.entries_checked;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        report.passed = false;
        report.failures.push_back({p->name(), k, analytic, NAN, INFINITY, "non-finite loss"});
        continue;
      }
      const double numeric = (up - down) / (2.0 * step);
      const double r =
          std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic) + std::abs(numeric));
      report.max_relative_error = std::max(report.max_relative_error, r);
      if (!(r < tol)) {
        report.passed = false;
        report.failures.push_back({p->name(), k, analytic, numeric, r, {}});
      }
    }
  }
  return report;
}

}  // namespace dstgat
