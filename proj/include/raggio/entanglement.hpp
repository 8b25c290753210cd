#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "raggio/states.hpp"

namespace raggio {

/// omega = sum_i p_i rho_i (x) sigma_i.
struct Decomposition {
  std::vector<double> weights;
  std::vector<State> a_parts;
  std::vector<State> b_parts;
};

/// Throws on empty or ragged decompositions, on weights that are not a
/// probability vector, or on parts living on different algebras.
void validate(const Decomposition& d);

/// sum_i p_i rho_i (x) sigma_i on tensor(A, B).
State reconstruct(const Decomposition& d);

/// Singular values of the n x m coefficient matrix, nonincreasing. The owner
/// must be tensor(M_n, M_m).
std::vector<double> schmidt(const PureVector& v);

struct PureEntanglement {
  bool entangled = false;
  /// Purity of the reduced state on A (equal to that on B).
  double reduced_purity = 1.0;
};

/// More than one Schmidt coefficient above 1e-9.
PureEntanglement is_entangled_pure(const PureVector& v);

/// Conditions a state on the classical factor. If B is commutative the terms
/// are indexed by its points j with p_j = omega(1 (x) delta_j) and
/// rho_j(x) = omega(x (x) delta_j) / p_j; otherwise A must be commutative and
/// the roles swap. Terms with p_j <= 1e-12 are dropped.
Decomposition classical_decompose(const State& s);

/// Partial transpose (id (x) T) of a density matrix on C^n (x) C^m.
Matrix partial_transpose(const Matrix& rho, int n, int m);

/// Smallest eigenvalue of the partial transpose; owner must be tensor(M_n, M_m).
double ppt_check(const State& s);

enum class VerdictTag { Separable, EntangledPure, EntangledPPT, Undetermined };

std::string_view to_string(VerdictTag tag);

struct ReducedPurity {
  double value;
};
struct PartialTransposeEigenvalue {
  double value;
};
struct IterationBudget {
  int iterations;
};

using Certificate = std::variant<Decomposition, ReducedPurity, PartialTransposeEigenvalue, IterationBudget>;

struct SeparabilityVerdict {
  VerdictTag tag;
  Certificate certificate;
};

struct SeparabilityOptions {
  /// Outer iterations of the product-state search outside the PPT-complete dimensions.
  int budget = 200;
  /// Trace distance a Separable certificate must reach.
  double reconstruction_tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// Works block by block over the (i, j) blocks of tensor(A, B): a block with
/// a 1-dimensional side is a product; pure blocks go through the Schmidt
/// test; a negative partial transpose certifies entanglement; 2x2 blocks are
/// decomposed exactly, and other PPT blocks by a product-state search that
/// either reaches the tolerance or reports Undetermined.
SeparabilityVerdict separability_test(const State& s, const SeparabilityOptions& options = {});

/// Exact product decomposition of a PPT two-qubit density matrix (weights and
/// unit product vectors a_k (x) b_k). Returns an empty result when the state
/// has positive concurrence.
struct ProductTerms {
  std::vector<double> weights;
  std::vector<Vector> a;
  std::vector<Vector> b;
};
ProductTerms two_qubit_product_terms(const Matrix& rho);

/// Product-state search for an n x m density matrix. Stops once the mixture of
/// found product states is within `tolerance` in trace distance or after
/// `max_iterations` outer steps; `error` reports the final distance.
struct ProductSearchResult {
  ProductTerms terms;
  double error = 1.0;
  int iterations = 0;
};
ProductSearchResult product_state_search(const Matrix& rho, int n, int m, int max_iterations,
                                         double tolerance, Rng& rng);

}  // namespace raggio
