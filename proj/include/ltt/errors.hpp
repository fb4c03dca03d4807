#pragma once

#include "ltt/types.hpp"

#include <stdexcept>
#include <string>

namespace ltt {

// Bad argument values (out-of-range proportions, empty inputs, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateLearnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Vector last_iterate, int iterations)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), iterations_(iterations) {}

  const Vector& last_iterate() const { return last_iterate_; }
  int iterations() const { return iterations_; }

 private:
  Vector last_iterate_;
  int iterations_;
};

}  // namespace ltt
