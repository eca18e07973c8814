#pragma once

#include <stdexcept>
#include <string>

namespace amodscale {

// Malformed input file or field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An identifier that points at something that does not exist.
class ReferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside its allowed domain (nonpositive length, factor < 1, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller broke a precondition, e.g. passed a discontinuous path.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace amodscale
