#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsm {

enum class ErrorKind {
  InvalidArgument,
  DegenerateDerivative,
  NonPositiveDerivative,
  IndexOutOfWindow,
  SolverFailure,
  EmptyInterval,
  NonReturn,
  NotSameElement,
  InfiniteBound,
  BTooSmall,
  NotFound,
  AccountingMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::DegenerateDerivative: return "degenerate-derivative";
    case ErrorKind::NonPositiveDerivative: return "nonpositive-derivative";
    case ErrorKind::IndexOutOfWindow: return "index-out-of-window";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::EmptyInterval: return "empty-interval";
    case ErrorKind::NonReturn: return "non-return";
    case ErrorKind::NotSameElement: return "not-same-element";
    case ErrorKind::InfiniteBound: return "infinite-bound";
    case ErrorKind::BTooSmall: return "b-too-small";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::AccountingMismatch: return "accounting-mismatch";
  }
  return "unknown";
}

}  // namespace dsm
