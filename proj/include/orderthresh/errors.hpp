#pragma once

#include <stdexcept>
#include <string>

namespace orderthresh {

/// An argument lies outside the domain of the requested operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data for which the statistic is undefined (e.g. zero within-group variance).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A valid request the library deliberately does not handle (e.g. unbalanced layouts).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace orderthresh
