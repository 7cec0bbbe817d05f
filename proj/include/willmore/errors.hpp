#ifndef WILLMORE_ERRORS_HPP
#define WILLMORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace willmore {

// Invalid configuration (bad parameters, grid too small for stencils).
class config_error : public std::runtime_error {
public:
  explicit config_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Violated operation precondition (trace mismatch, inconsistent flags, ...).
class precondition_error : public std::runtime_error {
public:
  explicit precondition_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Requested scale below what the grid can resolve.
class resolution_error : public std::runtime_error {
public:
  explicit resolution_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Numerical failure at runtime (stagnating line search, NaN propagation).
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace willmore

#endif
