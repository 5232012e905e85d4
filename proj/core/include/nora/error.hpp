#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nora {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or structural error in rule text. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t col)
      : Error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line), col_(col) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return col_; }

 private:
  std::size_t line_;
  std::size_t col_;
};

class ArityError : public ParseError {
 public:
  ArityError(const std::string& predicate, std::size_t line, std::size_t col, const std::string& msg)
      : ParseError(msg, line, col), predicate_(predicate) {}
  const std::string& predicate() const noexcept { return predicate_; }

 private:
  std::string predicate_;
};

class BoundsError : public ParseError {
 public:
  using ParseError::ParseError;
};

class StoryError : public Error {
 public:
  using Error::Error;
};

class UnknownPredicateError : public Error {
 public:
  using Error::Error;
};

class RefinementOverflow : public Error {
 public:
  RefinementOverflow(std::size_t count, std::size_t cap)
      : Error("refinement count " + std::to_string(count) + " exceeds cap " + std::to_string(cap)),
        count_(count), cap_(cap) {}
  std::size_t count() const noexcept { return count_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t count_;
  std::size_t cap_;
};

class InconsistentStory : public Error {
 public:
  using Error::Error;
};

class ProofError : public Error {
 public:
  using Error::Error;
};

// Raised when proof search exhausts its node budget.
class SearchBudgetExceeded : public ProofError {
 public:
  using ProofError::ProofError;
};

class GenerationFailure : public Error {
 public:
  GenerationFailure(const std::string& msg, std::size_t rejections, std::size_t attempts)
      : Error(msg), rejections_(rejections), attempts_(attempts) {}
  std::size_t rejections() const noexcept { return rejections_; }
  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t rejections_;
  std::size_t attempts_;
};

class StitchError : public Error {
 public:
  enum class Kind { Inconsistent, LemmaMismatch, RenamingCollision, AmbiguousInput };
  StitchError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& msg) : Error(path + ": " + msg), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace nora
