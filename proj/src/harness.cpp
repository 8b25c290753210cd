#include "raggio/harness.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

namespace raggio {

std::string_view to_string(TheoremVerdict v) {
  return v == TheoremVerdict::ConsistentWithTheorem ? "ConsistentWithTheorem" : "InconsistentWithTheorem";
}

namespace {

constexpr double kChshSlack = 1e-6;
constexpr double kReconstructionTolerance = 1e-9;

int first_quantum_block(const FdAlgebra& a) {
  for (int k = 0; k < a.num_blocks(); ++k) {
    if (a.block_dim(k) >= 2) return k;
  }
  throw Error(ErrorKind::PreconditionViolated, "algebra " + a.shorthand() + " is commutative");
}

/// Places a 4x4 two-qubit matrix into block (i, j) of tensor(a, b).
State embed_two_qubit(const FdAlgebra& a, const FdAlgebra& b, const Matrix& rho) {
  const int i = first_quantum_block(a);
  const int j = first_quantum_block(b);
  const FdAlgebra owner = tensor(a, b);
  const int m = b.block_dim(j);
  std::vector<Matrix> blocks;
  for (int d : owner.block_dims()) blocks.push_back(Matrix::Zero(d, d));
  Matrix& target = blocks[static_cast<std::size_t>(tensor_block_index(b, i, j))];
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      for (int rp = 0; rp < 2; ++rp) {
        for (int sp = 0; sp < 2; ++sp) target(r * m + s, rp * m + sp) = rho(r * 2 + s, rp * 2 + sp);
      }
    }
  }
  return State(owner, std::move(blocks));
}

Element embed_qubit_operator(const FdAlgebra& a, const Matrix& op) {
  const int i = first_quantum_block(a);
  Element out = Element::zero(a);
  std::vector<Matrix> blocks = out.blocks();
  blocks[static_cast<std::size_t>(i)].topLeftCorner(2, 2) = op;
  return Element(a, std::move(blocks));
}

template <typename F>
void parallel_for(int count, int threads, F&& f) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int k = 0; k < count; ++k) f(k);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int k = t; k < count; k += threads) f(k);
    });
  }
  for (auto& th : pool) th.join();
}

struct SampleOutcome {
  VerdictTag tag = VerdictTag::Undetermined;
  double chsh = 0.0;
  bool decomposition_ok = false;
};

}  // namespace

State embedded_singlet(const FdAlgebra& a, const FdAlgebra& b) {
  const Vector psi = singlet().psi();
  return embed_two_qubit(a, b, psi * psi.adjoint());
}

State embedded_werner(const FdAlgebra& a, const FdAlgebra& b, double p) {
  return embed_two_qubit(a, b, werner(p).block(0));
}

ChshObservables embedded_singlet_observables(const FdAlgebra& a, const FdAlgebra& b) {
  const ChshObservables q = singlet_optimal_observables();
  return {embed_qubit_operator(a, q.a1.block(0)), embed_qubit_operator(a, q.a2.block(0)),
          embed_qubit_operator(b, q.b1.block(0)), embed_qubit_operator(b, q.b2.block(0))};
}

TheoremVerdict judge(const RaggioReport& r) {
  const bool classical = r.a_commutative || r.b_commutative;
  const bool consistent = classical ? !r.entangled_found && r.max_chsh <= 2.0 + kChshSlack &&
                                          r.decomposition_success_rate == 1.0
                                    : r.entangled_found && r.max_chsh > 2.0 + kChshSlack;
  return consistent ? TheoremVerdict::ConsistentWithTheorem : TheoremVerdict::InconsistentWithTheorem;
}

RaggioReport verify_equivalence(const FdAlgebra& a, const FdAlgebra& b, int samples,
                                std::uint64_t seed, const HarnessOptions& options) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  const FdAlgebra owner = tensor(a, b);
  if (owner.total_dim() > options.dimension_cap) {
    throw Error(ErrorKind::ResourceLimit, "tensor dimension " + std::to_string(owner.total_dim()) +
                                              " exceeds the cap " +
                                              std::to_string(options.dimension_cap));
  }

  RaggioReport report{a, b};
  report.a_commutative = a.is_commutative();
  report.b_commutative = b.is_commutative();
  report.samples = samples;
  report.seed = seed;
  report.ensemble = "alternating Gaussian pure and Hilbert-Schmidt mixed states";
  const bool classical = report.a_commutative || report.b_commutative;

  std::vector<State> states;
  std::vector<std::string> labels;
  states.reserve(static_cast<std::size_t>(samples) + 2);
  for (int k = 0; k < samples; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const bool pure = k % 2 == 0;
    states.push_back(pure ? random_pure_state(owner, rng) : random_mixed(owner, rng));
    labels.push_back("sample " + std::to_string(k) + (pure ? " (pure)" : " (mixed)"));
  }
  if (!classical) {
    states.push_back(embedded_singlet(a, b));
    labels.emplace_back("injected singlet");
    states.push_back(embedded_werner(a, b, 0.5));
    labels.emplace_back("injected Werner(0.5)");
    report.injected = 2;
  }

  std::vector<SampleOutcome> outcomes(states.size());
  parallel_for(static_cast<int>(states.size()), options.threads, [&](int k) {
    const State& s = states[static_cast<std::size_t>(k)];
    SampleOutcome& out = outcomes[static_cast<std::size_t>(k)];
    SeparabilityOptions sep;
    sep.budget = options.separability_budget;
    sep.seed = derive_seed(seed ^ 0x5e9a7ab1e5ULL, static_cast<std::uint64_t>(k));
    out.tag = separability_test(s, sep).tag;
    ChshOptions chsh;
    chsh.restarts = options.chsh_restarts;
    chsh.seed = derive_seed(seed ^ 0xc45bULL, static_cast<std::uint64_t>(k));
    out.chsh = chsh_optimize(s, chsh).value;
    if (classical) {
      out.decomposition_ok = trace_distance(reconstruct(classical_decompose(s)), s) <= kReconstructionTolerance;
    }
  });

  int successes = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& out = outcomes[k];
    switch (out.tag) {
      case VerdictTag::Separable: ++report.separable_count; break;
      case VerdictTag::EntangledPure:
      case VerdictTag::EntangledPPT:
        ++report.entangled_count;
        if (!report.entangled_found) {
          report.entangled_found = true;
          report.entangled_witness = labels[k];
        }
        break;
      case VerdictTag::Undetermined: ++report.undetermined_count; break;
    }
    if (k == 0 || out.chsh > report.max_chsh) {
      report.max_chsh = out.chsh;
      report.max_chsh_witness = labels[k];
    }
    if (classical ? out.decomposition_ok : out.tag == VerdictTag::Separable) ++successes;
  }
  report.decomposition_success_rate = static_cast<double>(successes) / static_cast<double>(outcomes.size());

  report.verdict = judge(report);
  return report;
}

bool bell_one_side_classical(const FdAlgebra& a, const FdAlgebra& b, int samples, std::uint64_t seed,
                             int tuples_per_state) {
  if (samples < 1 || tuples_per_state < 1) {
    throw Error(ErrorKind::InvalidArgument, "samples and tuples_per_state must be >= 1");
  }
  const FdAlgebra owner = tensor(a, b);
  constexpr double kBound = 2.0 + 1e-9;
  for (int k = 0; k < samples; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const State s = k % 2 == 0 ? random_pure_state(owner, rng) : random_mixed(owner, rng);
    for (int t = 0; t < tuples_per_state; ++t) {
      ChshObservables obs{random_contraction(a, rng), random_contraction(a, rng),
                          random_contraction(b, rng), random_contraction(b, rng)};
      if (std::abs(chsh_value(s, obs)) > kBound) return false;
    }
  }
  if (!a.is_commutative() && !b.is_commutative()) {
    const State s = embedded_singlet(a, b);
    if (std::abs(chsh_value(s, embedded_singlet_observables(a, b))) > kBound) return false;
  }
  return true;
}

}  // namespace raggio
