#pragma once

#include <stdexcept>
#include <string>

namespace snls {

/// Out-of-domain argument (p < 1, dt <= 0, x < 0, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Caller broke an interface contract (wrong representation tag, non-real
/// noise increment, mismatched grids).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// A resource budget (steps, samples, grid size) would be exceeded.
/// Distinct from any physics outcome such as a norm crossing.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// Config file could not be parsed or validated; message carries the
/// offending key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Scaling fit cannot proceed (e.g. not enough two-sided cells).
class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace snls
