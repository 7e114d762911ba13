#pragma once

#include <stdexcept>
#include <string>

namespace flowda {

// Base error with a stable category string used for CLI exit-code mapping.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

private:
  std::string category_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

class MeshError : public Error {
public:
  explicit MeshError(const std::string& msg) : Error("mesh", msg) {}
};

class NumericsError : public Error {
public:
  explicit NumericsError(const std::string& msg) : Error("numerics", msg) {}
};

// Factorization hit a zero/invalid pivot. pivot_index is the offending
// column when the backend reports one, -1 otherwise.
class SingularMatrixError : public NumericsError {
public:
  SingularMatrixError(const std::string& msg, int pivot_index)
      : NumericsError(msg), pivot_index_(pivot_index) {}
  int pivot_index() const { return pivot_index_; }

private:
  int pivot_index_;
};

class SolverError : public Error {
public:
  explicit SolverError(const std::string& msg) : Error("solver", msg) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error("io", msg) {}
};

}  // namespace flowda
