#pragma once

#include <stdexcept>
#include <string>

namespace femgraph {

// Base of every error raised by the pipeline. `kind()` is a stable,
// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DesignError : public Error {
 public:
  explicit DesignError(const std::string& what) : Error("design", what) {}
};

class MeshError : public Error {
 public:
  explicit MeshError(const std::string& what) : Error("mesh", what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error("solver", what) {}
};

class OptimizerError : public Error {
 public:
  explicit OptimizerError(const std::string& what) : Error("optimizer", what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error("data", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace femgraph
