#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace eslmc {

// Failure categories surfaced by the library. Model-file validation does not
// throw; it collects Diagnostics (see model.hpp). Everything else that can go
// wrong at runtime is an Error with one of these kinds.
enum class ErrorKind {
  SyntaxError,          // concrete-syntax parse failure (position in message)
  UnknownAgent,
  UnknownProposition,
  UnknownAtom,
  NotEnabled,           // step/outcome queried with a non-enabled action
  RecallZero,           // recall must be >= 1
  RecallMismatch,       // assignment members disagree on recall
  SearchSpaceExceeded,  // strategy enumeration larger than the configured cap
  BoundsExceeded,       // oracle bounds invalid
  UnsupportedShape,     // oracle given quantifiers nested under temporal ops
  EmptyAP,
  BadModel,             // operating on an invalid or oversized model
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class SearchSpaceExceeded : public Error {
 public:
  SearchSpaceExceeded(std::uint64_t size, std::uint64_t cap)
      : Error(ErrorKind::SearchSpaceExceeded,
              "strategy space of size " + std::to_string(size) +
                  " exceeds cap " + std::to_string(cap)),
        size_(size),
        cap_(cap) {}

  std::uint64_t size() const { return size_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t size_;
  std::uint64_t cap_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(ErrorKind::SyntaxError,
              "at offset " + std::to_string(position) + ": " + what),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace eslmc
