#pragma once

#include <span>
#include <vector>

#include "raggio/algebra.hpp"

namespace raggio {

/// A state on a finite-dimensional algebra, stored as its density matrix.
///
/// The density matrix is block-diagonal with the owner's blocks. Construction
/// validates Hermiticity (1e-9), positivity (eigenvalues >= -1e-9) and unit
/// trace (1e-9), then symmetrizes and clips small negative eigenvalues to zero.
class State {
 public:
  State(FdAlgebra owner, std::vector<Matrix> blocks);

  static State from_dense(const FdAlgebra& owner, const Matrix& rho);
  /// I / total_dim.
  static State maximally_mixed(const FdAlgebra& owner);

  const FdAlgebra& owner() const noexcept { return owner_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(int k) const { return blocks_.at(static_cast<std::size_t>(k)); }
  /// Trace of each block; sums to one.
  std::vector<double> block_weights() const;
  Matrix dense() const;

 private:
  FdAlgebra owner_;
  std::vector<Matrix> blocks_;
};

/// Unit vector on a single-block algebra M_n, i.e. the vector state A -> (psi, A psi).
class PureVector {
 public:
  /// Throws InvalidState unless |psi| = 1 within 1e-12.
  PureVector(FdAlgebra owner, Vector psi);
  /// Rescales psi to unit length; throws InvalidState for the zero vector.
  static PureVector normalized(FdAlgebra owner, Vector psi);

  const FdAlgebra& owner() const noexcept { return owner_; }
  const Vector& psi() const noexcept { return psi_; }
  State to_state() const;

 private:
  FdAlgebra owner_;
  Vector psi_;
};

Complex expectation(const State& s, const Element& x);

/// Born probabilities |psi_i|^2: the restriction of a vector state to the
/// diagonal subalgebra.
std::vector<double> restrict_to_diagonal(const PureVector& v);
/// Diagonal of the density matrix (pinching onto the diagonal subalgebra).
std::vector<double> restrict_to_diagonal(const State& s);

/// Element h on the kept factor with s(x (x) y) = Tr(h x) for every x, where y
/// is an element of the discarded factor. With y = 1 this is the partial trace.
Element partial_expectation(const State& s, const Element& y, Factor keep);

/// omega|_A(x) = omega(x (x) 1), or the B analogue.
State restrict_to_factor(const State& s, Factor keep);

State product_state(const State& r, const State& s);
PureVector product_vector(const PureVector& u, const PureVector& v);

State mixture(std::span<const double> weights, std::span<const State> parts);

/// Tr(rho^2).
double purity(const State& s);

/// Half the trace norm of the difference; owners must agree.
double trace_distance(const State& s, const State& t);
double trace_distance(const Matrix& x, const Matrix& y);

/// Normalized complex Gaussian vector; the owner must be single-block.
PureVector random_pure(const FdAlgebra& a, Rng& rng);
PureVector random_pure(const FdAlgebra& a, std::uint64_t seed);
/// A pure state of a possibly multi-block algebra: a block is drawn with
/// probability proportional to its dimension, then a Gaussian vector inside it.
State random_pure_state(const FdAlgebra& a, Rng& rng);
/// Hilbert-Schmidt ensemble: G G^* per block, normalized to unit total trace.
State random_mixed(const FdAlgebra& a, Rng& rng);
State random_mixed(const FdAlgebra& a, std::uint64_t seed);

/// Random self-adjoint element with operator norm <= 1. Every third draw is a
/// sign operator so extreme points of the unit ball are covered.
Element random_contraction(const FdAlgebra& a, Rng& rng);

// Canonical two-qubit states on M2 x M2.

/// (e1 (x) e2 - e2 (x) e1) / sqrt 2.
PureVector singlet();
/// p |singlet><singlet| + (1 - p) I / 4, for p in [0, 1].
State werner(double p);

/// Pauli matrices sigma_1..3 (index 0 is the identity).
Matrix pauli(int k);

}  // namespace raggio
