#include "raggio/bell.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

#include <Eigen/Eigenvalues>

namespace raggio {

namespace {

const FdAlgebra& side(const FdAlgebra& owner, Factor f) { return owner.factor(f); }

void check_observable(const Element& x, const FdAlgebra& expected, const char* name) {
  if (!(x.owner() == expected)) {
    throw Error(ErrorKind::AlgebraMismatch, std::string(name) + " must live on " +
                                                expected.shorthand() + ", got " +
                                                x.owner().shorthand());
  }
  if (!x.is_self_adjoint(tol::kHermitian)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " is not self-adjoint");
  }
  const double norm = operator_norm(x);
  if (norm > 1.0 + 1e-9) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(name) + " has operator norm " + std::to_string(norm) + " > 1");
  }
}

double trace_product(const Element& h, const Element& x) {
  Complex t = 0.0;
  for (std::size_t k = 0; k < h.blocks().size(); ++k) {
    t += h.blocks()[k].transpose().cwiseProduct(x.blocks()[k]).sum();
  }
  return t.real();
}

double value_unchecked(const State& s, const ChshObservables& obs) {
  const Element h1 = partial_expectation(s, add(obs.b1, obs.b2), Factor::A);
  const Element h2 = partial_expectation(s, subtract(obs.b1, obs.b2), Factor::A);
  return trace_product(h1, obs.a1) + trace_product(h2, obs.a2);
}

Element random_sign(const FdAlgebra& a, Rng& rng) {
  std::vector<Matrix> blocks;
  for (int d : a.block_dims()) blocks.push_back(hermitian_part(complex_gaussian_matrix(d, d, rng)));
  return sign_operator(Element(a, std::move(blocks)));
}

}  // namespace

void validate(const ChshObservables& obs, const FdAlgebra& owner) {
  const FdAlgebra& a = side(owner, Factor::A);
  const FdAlgebra& b = side(owner, Factor::B);
  check_observable(obs.a1, a, "A1");
  check_observable(obs.a2, a, "A2");
  check_observable(obs.b1, b, "B1");
  check_observable(obs.b2, b, "B2");
}

ChshObservables unit_observables(const FdAlgebra& owner) {
  const Element ia = Element::identity(side(owner, Factor::A));
  const Element ib = Element::identity(side(owner, Factor::B));
  return {ia, ia, ib, ib};
}

ChshObservables singlet_optimal_observables() {
  const FdAlgebra m2 = make_full(2);
  const double r = 1.0 / std::sqrt(2.0);
  return {Element(m2, {pauli(3)}), Element(m2, {pauli(1)}),
          Element(m2, {Matrix(-r * (pauli(3) + pauli(1)))}),
          Element(m2, {Matrix(r * (pauli(1) - pauli(3)))})};
}

double chsh_value(const State& s, const ChshObservables& obs) {
  validate(obs, s.owner());
  return value_unchecked(s, obs);
}

Element sign_operator(const Element& h) {
  if (!h.is_self_adjoint(tol::kHermitian)) {
    throw Error(ErrorKind::InvalidArgument, "sign_operator needs a self-adjoint element");
  }
  std::vector<Matrix> blocks;
  for (const Matrix& b : h.blocks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(b));
    const Eigen::VectorXd signs =
        eig.eigenvalues().unaryExpr([](double x) { return x >= -tol::kSignTie ? 1.0 : -1.0; });
    blocks.push_back(hermitian_part(eig.eigenvectors() * signs.asDiagonal() * eig.eigenvectors().adjoint()));
  }
  return Element(h.owner(), std::move(blocks));
}

SeeSawRun see_saw(const State& s, ChshObservables start, int max_iterations, double tolerance) {
  SeeSawRun run{{}, std::move(start), false};
  ChshObservables& obs = run.observables;
  run.values.push_back(value_unchecked(s, obs));
  for (int it = 0; it < max_iterations; ++it) {
    const Element h1 = partial_expectation(s, add(obs.b1, obs.b2), Factor::A);
    const Element h2 = partial_expectation(s, subtract(obs.b1, obs.b2), Factor::A);
    obs.a1 = sign_operator(h1);
    obs.a2 = sign_operator(h2);
    const Element k1 = partial_expectation(s, add(obs.a1, obs.a2), Factor::B);
    const Element k2 = partial_expectation(s, subtract(obs.a1, obs.a2), Factor::B);
    obs.b1 = sign_operator(k1);
    obs.b2 = sign_operator(k2);
    // After the B update the value is Tr|K1| + Tr|K2| in closed form.
    const double value = trace_product(k1, obs.b1) + trace_product(k2, obs.b2);
    const double previous = run.values.back();
    run.values.push_back(value);
    if (value - previous < tolerance) {
      run.converged = true;
      break;
    }
  }
  return run;
}

ChshResult chsh_optimize(const State& s, const ChshOptions& options) {
  if (options.restarts <= 0) throw Error(ErrorKind::InvalidArgument, "restarts must be >= 1");
  const FdAlgebra& a = side(s.owner(), Factor::A);
  const FdAlgebra& b = side(s.owner(), Factor::B);

  std::vector<std::optional<SeeSawRun>> runs(static_cast<std::size_t>(options.restarts));
  auto work = [&](int r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    ChshObservables start{random_sign(a, rng), random_sign(a, rng), random_sign(b, rng),
                          random_sign(b, rng)};
    runs[static_cast<std::size_t>(r)] =
        see_saw(s, std::move(start), options.max_iterations, options.tolerance);
  };
  const int threads = std::clamp(options.threads, 1, options.restarts);
  if (threads == 1) {
    for (int r = 0; r < options.restarts; ++r) work(r);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int r = t; r < options.restarts; r += threads) work(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  ChshResult result{0.0, unit_observables(s.owner()), options.restarts, 0, true};
  result.value = value_unchecked(s, result.observables);
  for (const auto& slot : runs) {
    const SeeSawRun& run = *slot;
    if (run.values.back() > result.value) {
      result.value = run.values.back();
      result.observables = run.observables;
      result.iterations = static_cast<int>(run.values.size()) - 1;
      result.converged = run.converged;
    }
  }
  // Report the value of the witness observables themselves.
  result.value = std::abs(value_unchecked(s, result.observables));
  return result;
}

ChshResult chsh_optimize(const State& s, int restarts, std::uint64_t seed) {
  ChshOptions options;
  options.restarts = restarts;
  options.seed = seed;
  return chsh_optimize(s, options);
}

double horodecki_two_qubit(const State& s) {
  const FdAlgebra& owner = s.owner();
  const FdAlgebra& a = owner.factor(Factor::A);
  const FdAlgebra& b = owner.factor(Factor::B);
  if (a.block_dims() != std::vector<int>{2} || b.block_dims() != std::vector<int>{2}) {
    throw Error(ErrorKind::UnsupportedShape, "two-qubit oracle needs M2 x M2, got " + owner.shorthand());
  }
  Eigen::Matrix3d t;
  for (int u = 0; u < 3; ++u) {
    for (int v = 0; v < 3; ++v) {
      const Element x = tensor(Element(a, {pauli(u + 1)}), Element(b, {pauli(v + 1)}));
      t(u, v) = expectation(s, x).real();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(t.transpose() * t, Eigen::EigenvaluesOnly);
  const double top_two = eig.eigenvalues()(2) + eig.eigenvalues()(1);
  return std::max(2.0, 2.0 * std::sqrt(std::max(top_two, 0.0)));
}

}  // namespace raggio
