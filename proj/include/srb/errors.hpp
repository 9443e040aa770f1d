#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace srb {

/// Base class for failures of a numerical procedure on valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NeumannDivergence : public NumericalError {
 public:
  explicit NeumannDivergence(double ratio_norm)
      : NumericalError("Neumann series diverges: |Ts Td^-1|_F = " + std::to_string(ratio_norm) + " >= 1"),
        ratio_norm_(ratio_norm) {}
  double ratio_norm() const { return ratio_norm_; }

 private:
  double ratio_norm_;
};

class MidpointNonConvergence : public NumericalError {
 public:
  MidpointNonConvergence(int iterations, double residual)
      : NumericalError("implicit midpoint did not converge in " + std::to_string(iterations) +
                       " iterations, last residual " + std::to_string(residual)),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// A stepper failure annotated with the step index at which it occurred.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(std::string method, long step, const std::string& cause)
      : NumericalError(method + " failed at step " + std::to_string(step) + ": " + cause),
        method_(std::move(method)),
        step_(step),
        cause_(cause) {}
  const std::string& method() const { return method_; }
  long step() const { return step_; }
  const std::string& cause() const { return cause_; }

 private:
  std::string method_;
  long step_;
  std::string cause_;
};

}  // namespace srb
