#pragma once

#include <stdexcept>
#include <string>

namespace fractree {

// Base of every error the library throws. `code()` is a stable machine-readable
// tag; `field()` names the offending input when one is known.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(std::move(code)), field_(std::move(field)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string code_;
  std::string field_;
};

// A parameter lies outside its admissible range.
class DomainError : public Error {
 public:
  DomainError(const std::string& field, const std::string& message)
      : Error("parameter_domain", message, field) {}
};

// The requested work exceeds a configured cap (depth, sample budget).
class ResourceLimitError : public Error {
 public:
  ResourceLimitError(const std::string& field, const std::string& message)
      : Error("resource_limit", message, field) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& message) : Error("invalid_geometry", message) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& message) : Error("empty_input", message) {}
};

// A search bracket does not straddle the feasibility boundary.
class BracketError : public Error {
 public:
  BracketError(const std::string& message, double lo_clearance, double hi_clearance)
      : Error("no_bracket", message), lo_clearance_(lo_clearance), hi_clearance_(hi_clearance) {}

  double lo_clearance() const noexcept { return lo_clearance_; }
  double hi_clearance() const noexcept { return hi_clearance_; }

 private:
  double lo_clearance_;
  double hi_clearance_;
};

// An optimization has no finite optimum (nothing constrains it).
class UnboundedError : public Error {
 public:
  explicit UnboundedError(const std::string& message) : Error("unbounded", message) {}
};

}  // namespace fractree
