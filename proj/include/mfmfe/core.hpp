#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfmfe {

inline constexpr const char* version_string = "0.1.0";

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;

template <int Dim>
using Mat = Eigen::Matrix<double, Dim, Dim>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

// Error hierarchy. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (point outside the reference
/// cell, wrong cell kind, point not on the boundary, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

class DegenerateElementError : public Error {
public:
  using Error::Error;
};

class MeshGenerationError : public Error {
public:
  using Error::Error;
};

/// Inconsistent mesh connectivity or mismatched field dimensions.
class StructuralError : public Error {
public:
  using Error::Error;
};

class CoefficientError : public Error {
public:
  using Error::Error;
};

class VariantError : public Error {
public:
  using Error::Error;
};

class ParameterError : public Error {
public:
  using Error::Error;
};

class SamplingError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

class EliminationError : public SolverError {
public:
  EliminationError(const std::string& what, int vertex)
      : SolverError(what), vertex_(vertex) {}
  int vertex() const noexcept { return vertex_; }

private:
  int vertex_;
};

class LinearSolverError : public SolverError {
public:
  LinearSolverError(const std::string& what, int iterations)
      : SolverError(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

private:
  int iterations_;
};

class NonConvergenceError : public SolverError {
public:
  NonConvergenceError(const std::string& what, std::vector<double> history, int step = -1)
      : SolverError(what), history_(std::move(history)), step_(step) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }
  int step() const noexcept { return step_; }

private:
  std::vector<double> history_;
  int step_;
};

} // namespace mfmfe
