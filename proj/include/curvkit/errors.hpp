#pragma once

#include <stdexcept>
#include <string>

namespace curvkit {

// Inputs that violate a documented precondition. The CLI maps these to exit 2.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotStochastic : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NotIrreducible : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NotReversible : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InvalidParameters : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ShapeMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A density or argument outside the domain of the active mean.
class DomainError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NegativeInput : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NegativeTime : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class TooLarge : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Two independent numerical routes disagree, or a solver broke down. Exit 3.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curvkit
