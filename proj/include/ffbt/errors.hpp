#pragma once

#include <stdexcept>
#include <string>

namespace ffbt {

/// Misuse of the pager's begin/fetch/end protocol.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The tree or store references something that does not exist.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An algorithmic invariant was breached (e.g. a split whose parent is full).
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid user-supplied configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A workload generator could not produce the requested stream.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed key file; the message carries the line or byte offset.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ffbt
