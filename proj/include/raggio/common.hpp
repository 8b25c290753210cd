#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace raggio {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Seeded generator used by every sampling routine. There is no global RNG.
using Rng = std::mt19937_64;

enum class ErrorKind {
  InvalidDimension,
  AlgebraMismatch,
  UnsupportedShape,
  MissingFactorization,
  InvalidState,
  InvalidArgument,
  PreconditionViolated,
  ResourceLimit,
  Parse,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace tol {
inline constexpr double kHermitian = 1e-9;
inline constexpr double kEigenFloor = 1e-9;
inline constexpr double kTrace = 1e-9;
inline constexpr double kUnitNorm = 1e-12;
inline constexpr double kProbabilitySum = 1e-12;
inline constexpr double kSchmidt = 1e-9;
inline constexpr double kWeightPrune = 1e-12;
inline constexpr double kSignTie = 1e-12;
inline constexpr double kCommutator = 1e-12;
}  // namespace tol

/// Which tensor factor of a bipartite algebra A (x) B.
enum class Factor { A, B };

/// Independent stream seed from (seed, stream) via splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Vector of i.i.d. standard complex Gaussians (real and imaginary parts N(0, 1/2)).
Vector complex_gaussian_vector(Eigen::Index n, Rng& rng);
Matrix complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

Matrix kron(const Matrix& x, const Matrix& y);

/// Largest elementwise |h - h^*|.
double hermiticity_defect(const Matrix& h);

Matrix hermitian_part(const Matrix& h);

}  // namespace raggio
