#pragma once

#include <stdexcept>
#include <string>

namespace blamestyle {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (blame porcelain, corpus records, serialized models).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Data that violates an operation's precondition (too few authors, bad fold arithmetic, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A git subprocess failed; `diagnostics()` carries its stderr.
class GitError : public Error {
 public:
  GitError(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class NotARepositoryError : public Error {
 public:
  using Error::Error;
};

}  // namespace blamestyle
