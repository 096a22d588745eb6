#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bfkit {

// Every failure raised by the library derives from Error. kind() is a short
// stable token used by the CLI for its machine-parsable error line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  const char* kind() const noexcept override { return "format"; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

class RangeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "range"; }
};

class ParameterError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parameter"; }
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate-input"; }
};

class DegenerateClusterError : public Error {
 public:
  explicit DegenerateClusterError(std::size_t cluster, int iteration = -1)
      : Error(message(cluster, iteration)), cluster_(cluster), iteration_(iteration) {}
  const char* kind() const noexcept override { return "degenerate-cluster"; }
  std::size_t cluster() const noexcept { return cluster_; }
  int iteration() const noexcept { return iteration_; }

 private:
  static std::string message(std::size_t cluster, int iteration) {
    std::string msg = "cluster " + std::to_string(cluster) + " is empty";
    if (iteration >= 0) msg += " at iteration " + std::to_string(iteration);
    return msg;
  }
  std::size_t cluster_;
  int iteration_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

}  // namespace bfkit
