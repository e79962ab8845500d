#pragma once

#include <stdexcept>
#include <string>

namespace fracsob {

/// Input outside the admissible domain of an operation (bad N, s, h, level, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its target accuracy or produced a
/// non-finite value. Carries the achieved error estimate when one exists.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, double achieved_error = -1.0)
      : std::runtime_error(what), achieved_error_(achieved_error) {}

  [[nodiscard]] double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

}  // namespace fracsob
