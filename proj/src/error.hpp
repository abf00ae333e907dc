#pragma once

#include <stdexcept>
#include <string>

namespace splap {

/// Category of a failure; mirrored one-to-one by the C API status codes.
enum class ErrorKind {
  Input,        // bad argument (shape, range, non-finite value)
  Parse,        // malformed text input
  Validation,   // well-formed input that violates an invariant
  Config,       // experiment configuration rejected
  Convergence,  // iterative solver gave up
  Io,           // file system
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace splap
