#pragma once

#include <stdexcept>
#include <string>

namespace fasta {

/// Caller passed data that violates an operation's preconditions
/// (shape mismatch, negative threshold, non-binary labels, ...).
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent solver options, detected before the first iteration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// The iteration produced a non-finite value.
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(const std::string &what, long iteration)
        : std::runtime_error(what), iteration_(iteration) {}
    long iteration() const noexcept { return iteration_; }

  private:
    long iteration_;
};

/// Malformed input document or data file.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fasta
