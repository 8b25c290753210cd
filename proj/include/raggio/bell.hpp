#pragma once

#include <cstdint>
#include <vector>

#include "raggio/states.hpp"

namespace raggio {

/// A1, A2 on the first factor and B1, B2 on the second; self-adjoint with
/// operator norm at most one.
struct ChshObservables {
  Element a1;
  Element a2;
  Element b1;
  Element b2;
};

/// Throws InvalidArgument for a non-self-adjoint or norm > 1 observable and
/// AlgebraMismatch when the observables do not live on the factors of `owner`.
void validate(const ChshObservables& obs, const FdAlgebra& owner);

/// All four observables equal to the unit element.
ChshObservables unit_observables(const FdAlgebra& owner);

/// The textbook optimal settings for the singlet on M2 x M2:
/// A1 = Z, A2 = X, B1 = -(Z + X)/sqrt 2, B2 = (X - Z)/sqrt 2.
ChshObservables singlet_optimal_observables();

/// omega(A1 (x) (B1 + B2) + A2 (x) (B1 - B2)).
double chsh_value(const State& s, const ChshObservables& obs);

/// Spectral sign of a self-adjoint element; eigenvalues >= -1e-12 map to +1.
Element sign_operator(const Element& h);

struct SeeSawRun {
  /// CHSH value before the first sweep and after each sweep; nondecreasing.
  std::vector<double> values;
  ChshObservables observables;
  bool converged = false;
};

/// Alternating maximization from `start`: with B fixed the best A_i is the sign
/// of the effective operator Tr_B[omega (1 (x) (B1 +- B2))], and symmetrically.
SeeSawRun see_saw(const State& s, ChshObservables start, int max_iterations = 500,
                  double tolerance = 1e-10);

struct ChshOptions {
  int restarts = 16;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double tolerance = 1e-10;
  /// Restarts are split across this many threads; the result does not depend on it.
  int threads = 1;
};

struct ChshResult {
  double value = 0.0;
  ChshObservables observables;
  int restarts = 0;
  int iterations = 0;
  bool converged = false;
};

/// Best see-saw value over seeded random restarts, never below the value 2 of
/// the unit observables. A certified lower bound on the CHSH supremum.
ChshResult chsh_optimize(const State& s, const ChshOptions& options);
ChshResult chsh_optimize(const State& s, int restarts, std::uint64_t seed);

/// Closed-form two-qubit maximum max(2, 2 sqrt(t1 + t2)), where t1 >= t2 are
/// the top eigenvalues of T^T T for the correlation matrix T_uv = omega(s_u (x) s_v).
double horodecki_two_qubit(const State& s);

}  // namespace raggio
