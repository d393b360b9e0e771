#pragma once

#include <stdexcept>
#include <string>

namespace prunetree {

// Invalid input or an operation outside its domain. Maps to CLI exit code 1.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Input violates the genericity assumptions (ties in extrema or basin lengths).
class GenericityError : public DomainError {
 public:
  explicit GenericityError(const std::string& what) : DomainError(what) {}
};

}  // namespace prunetree
