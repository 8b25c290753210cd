#pragma once

#include <cstdint>
#include <string>

#include "raggio/bell.hpp"
#include "raggio/entanglement.hpp"

namespace raggio {

enum class TheoremVerdict { ConsistentWithTheorem, InconsistentWithTheorem };

std::string_view to_string(TheoremVerdict v);

struct HarnessOptions {
  /// Largest allowed total dimension of tensor(a, b).
  int dimension_cap = 64;
  int chsh_restarts = 16;
  int separability_budget = 60;
  int threads = 1;
};

/// Aggregate of a sampled check of the three equivalent conditions: every state
/// is decomposable, one factor is commutative, every state obeys |CHSH| <= 2.
struct RaggioReport {
  FdAlgebra algebra_a;
  FdAlgebra algebra_b;
  bool a_commutative = false;
  bool b_commutative = false;
  int samples = 0;
  /// Canonical witnesses (singlet, Werner(0.5)) added when both factors are noncommutative.
  int injected = 0;
  std::string ensemble{};

  bool entangled_found = false;
  std::string entangled_witness{};
  double max_chsh = 0.0;
  std::string max_chsh_witness{};
  /// With a commutative factor: fraction of samples whose conditioning
  /// decomposition reconstructs within 1e-9. Otherwise: fraction of samples
  /// certified Separable.
  double decomposition_success_rate = 0.0;

  int separable_count = 0;
  int entangled_count = 0;
  int undetermined_count = 0;

  TheoremVerdict verdict = TheoremVerdict::InconsistentWithTheorem;
  std::uint64_t seed = 0;
};

/// Consistent iff, with a commutative factor, nothing entangled was found,
/// max_chsh <= 2 + 1e-6 and every decomposition succeeded; with two
/// noncommutative factors, iff entanglement was found and max_chsh > 2 + 1e-6.
/// Undetermined separability verdicts do not enter.
TheoremVerdict judge(const RaggioReport& r);

/// Samples random pure and mixed states on tensor(a, b), runs the separability
/// test and the CHSH optimizer on each and, when a factor is commutative, the
/// conditioning decomposition. Deterministic given the seed.
RaggioReport verify_equivalence(const FdAlgebra& a, const FdAlgebra& b, int samples,
                                std::uint64_t seed, const HarnessOptions& options = {});

/// True iff every sampled state and observable tuple has |CHSH| <= 2 + 1e-9.
/// When both factors are noncommutative a maximally entangled state and its
/// optimal settings are included, so a violation is exhibited.
bool bell_one_side_classical(const FdAlgebra& a, const FdAlgebra& b, int samples,
                             std::uint64_t seed, int tuples_per_state = 50);

/// (e1 (x) e2 - e2 (x) e1)/sqrt 2 placed in the first block of size >= 2 of
/// each factor. Throws PreconditionViolated when a factor is commutative.
State embedded_singlet(const FdAlgebra& a, const FdAlgebra& b);
/// Werner(p) embedded like the singlet.
State embedded_werner(const FdAlgebra& a, const FdAlgebra& b, double p);

/// Observables equal to the singlet-optimal Pauli settings on the embedding
/// block and zero elsewhere.
ChshObservables embedded_singlet_observables(const FdAlgebra& a, const FdAlgebra& b);

}  // namespace raggio
