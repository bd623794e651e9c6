#pragma once

#include <stdexcept>
#include <string>

namespace gptpat {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or usage (unknown arch, missing flag, bad ratio, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (bad JSONL line, dimension mismatch,
// single-class training set, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Chat/translation/embedding backend failures.
class BackendError : public Error {
 public:
  enum class Kind {
    Transport,        // connection refused, timeout, DNS
    RateLimited,      // 429
    ServerError,      // 5xx
    Auth,             // 401/403 or missing credentials
    EmptyCompletion,  // backend answered but the completion text is empty
    Malformed,        // response body did not match the expected wire shape
  };

  BackendError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

  // Only transport-level and 429/5xx-class failures are worth retrying.
  bool transient() const {
    return kind_ == Kind::Transport || kind_ == Kind::RateLimited || kind_ == Kind::ServerError;
  }

 private:
  Kind kind_;
};

// Embedding provider failures, with the offending pair/sample id when known.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// Model file problems.
class ModelIoError : public Error {
 public:
  enum class Kind { VersionMismatch, ArchMismatch, Corrupt, Io };

  ModelIoError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Training diverged (non-finite loss or parameters).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace gptpat
