#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dnls {

enum class ErrorKind {
  Domain,          // argument outside the mathematical domain
  Span,            // evaluation point outside a computed span
  Overflow,        // coefficient or value beyond the representable range
  NonContraction,  // fixed-point iteration failed to contract
  SampleLimit,     // integrator exceeded max_samples
  IllConditioned,  // least-squares window too narrow
  Degenerate,      // amplitude too small for a phase to be defined
  Config,          // malformed configuration
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dnls
