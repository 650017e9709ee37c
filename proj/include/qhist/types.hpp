#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qhist {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Event label: an eigenvalue of the magnetization difference X, or the
// reserved complement label collecting everything outside the energy window.
using Label = int;
inline constexpr Label kComplement = std::numeric_limits<int>::min();

std::string label_name(Label label);

enum class ErrorKind {
  InvalidInput,
  ConstructionFault,
  UndefinedConditional,
  ResourceLimit,
  NonConvergence,
  SingularFit,
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

// Largest dimension handled by dense diagonalization. Overridable through
// the QHIST_DENSE_MAX_DIM environment variable.
long dense_dimension_limit();

// Floor below which a history probability is treated as unreachable when it
// appears in a denominator.
inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace qhist
