#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace commonlibs {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes (ConfigError -> 1, everything else -> 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedPackage : public Error {
 public:
  explicit MalformedPackage(const std::string& name)
      : Error("malformed package name '" + name + "'") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct ParseFailure {
  std::string file;
  int line = 0;
  std::string message;
};

// Carries one or more positioned failures. Directory loads aggregate every
// failing file into a single ParseError.
class ParseError : public Error {
 public:
  explicit ParseError(std::vector<ParseFailure> failures);
  ParseError(std::string file, int line, std::string message);

  const std::vector<ParseFailure>& failures() const { return failures_; }

 private:
  std::vector<ParseFailure> failures_;
};

// Schema violation in the descriptor interchange format. `field()` is the
// JSON path of the offending field, e.g. "classes[0].methods[2].signature".
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DuplicateSignature : public Error {
 public:
  explicit DuplicateSignature(const std::string& signature)
      : Error("duplicate method signature '" + signature + "'") {}
};

class EmptyComparison : public Error {
 public:
  EmptyComparison() : Error("both method sets are empty") {}
};

class NotEnoughApps : public Error {
 public:
  using Error::Error;
};

class UnknownPackage : public Error {
 public:
  explicit UnknownPackage(const std::string& pkg)
      : Error("package '" + pkg + "' does not occur in the corpus") {}
};

class UnknownApp : public Error {
 public:
  explicit UnknownApp(const std::string& app_id)
      : Error("unknown app '" + app_id + "'") {}
};

class EmptyApp : public Error {
 public:
  explicit EmptyApp(const std::string& app_id)
      : Error("app '" + app_id + "' has zero code size") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

} // namespace commonlibs
