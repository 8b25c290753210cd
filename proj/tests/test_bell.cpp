#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "raggio/bell.hpp"

using namespace raggio;
using support::kind_of;

namespace {

const FdAlgebra kQubits = tensor(make_full(2), make_full(2));
const double kTsirelson = 2.0 * std::sqrt(2.0);

ChshObservables random_observables(const FdAlgebra& owner, Rng& rng) {
  const FdAlgebra& a = owner.factor(Factor::A);
  const FdAlgebra& b = owner.factor(Factor::B);
  return {random_contraction(a, rng), random_contraction(a, rng), random_contraction(b, rng),
          random_contraction(b, rng)};
}

State random_two_qubit(int k, Rng& rng) {
  switch (k % 4) {
    case 0: return random_pure(kQubits, rng).to_state();
    case 1: return random_mixed(kQubits, rng);
    case 2: {
      // Noisy rotated singlet: larger violations than the Hilbert-Schmidt ensemble.
      const double p = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
      const Matrix u = complex_gaussian_matrix(2, 2, rng).householderQr().householderQ();
      const Matrix rot = kron(u, Matrix::Identity(2, 2));
      return State::from_dense(kQubits, rot * werner(p).dense() * rot.adjoint());
    }
    default: return product_state(random_mixed(make_full(2), rng), random_pure(make_full(2), rng).to_state());
  }
}

}  // namespace

TEST_SUITE("bell") {

TEST_CASE("chsh_value examples") {
  Rng rng(1);
  const State s = random_mixed(kQubits, rng);
  CHECK(chsh_value(s, unit_observables(kQubits)) == doctest::Approx(2.0).epsilon(1e-14));

  // Direct 4x4 computation of the Bell operator expectation.
  const ChshObservables opt = singlet_optimal_observables();
  const Matrix bell = oracle::kron(opt.a1.dense(), opt.b1.dense() + opt.b2.dense()) +
                      oracle::kron(opt.a2.dense(), opt.b1.dense() - opt.b2.dense());
  const Matrix rho = singlet().to_state().dense();
  const double direct = (rho * bell).trace().real();
  CHECK(direct == doctest::Approx(kTsirelson).epsilon(1e-14));
  CHECK(std::abs(chsh_value(singlet().to_state(), opt) - direct) < 1e-14);

  ChshObservables vanish = random_observables(kQubits, rng);
  vanish.a2 = Element::zero(make_full(2));
  vanish.b2 = scale(vanish.b1, -1.0);
  CHECK(std::abs(chsh_value(s, vanish)) < 1e-15);
}

TEST_CASE("observable validation") {
  ChshObservables obs = unit_observables(kQubits);
  obs.a1 = scale(obs.a1, 1.5);
  CHECK(kind_of([&] { validate(obs, kQubits); }) == ErrorKind::InvalidArgument);
  obs = unit_observables(kQubits);
  Matrix nh(2, 2);
  nh << 0, 1, 0, 0;
  obs.b2 = Element(make_full(2), {nh});
  CHECK(kind_of([&] { validate(obs, kQubits); }) == ErrorKind::InvalidArgument);
  obs = unit_observables(kQubits);
  obs.b1 = Element::identity(make_full(3));
  CHECK(kind_of([&] { chsh_value(singlet().to_state(), obs); }) == ErrorKind::AlgebraMismatch);
}

TEST_CASE("sign operator") {
  const FdAlgebra d2 = make_commutative(2);
  const Element s = sign_operator(Element(d2, {Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, -3.0)}));
  CHECK(s.block(0)(0, 0).real() == 1.0);
  CHECK(s.block(1)(0, 0).real() == -1.0);
  CHECK((sign_operator(Element::zero(make_full(3))).dense() - Matrix::Identity(3, 3)).norm() < 1e-15);
  CHECK((sign_operator(Element(make_full(2), {pauli(1)})).dense() - pauli(1)).norm() < 1e-14);
  Matrix nh(2, 2);
  nh << 0, 1, 0, 0;
  CHECK(kind_of([&] { sign_operator(Element(make_full(2), {nh})); }) == ErrorKind::InvalidArgument);
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    const Matrix g = complex_gaussian_matrix(3, 3, rng);
    const Element h(make_full(3), {g + g.adjoint()});
    const Element sg = sign_operator(h);
    CHECK(sg.is_self_adjoint(1e-12));
    CHECK(operator_norm(sg) == doctest::Approx(1.0).epsilon(1e-12));
    // sign(h) commutes with h and sign(h) h = |h| >= 0.
    CHECK((sg.dense() * h.dense() - h.dense() * sg.dense()).norm() < 1e-10);
    CHECK(oracle::min_eigenvalue(hermitian_part(sg.dense() * h.dense())) > -1e-10);
  }
}

TEST_CASE("two-qubit oracle examples") {
  const State s = singlet().to_state();
  const Eigen::Matrix3d t = oracle::correlation(s.dense());
  CHECK((t + Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(horodecki_two_qubit(s) == doctest::Approx(kTsirelson).epsilon(1e-12));
  Rng rng(5);
  const State p = product_vector(random_pure(make_full(2), rng), random_pure(make_full(2), rng)).to_state();
  CHECK(horodecki_two_qubit(p) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(horodecki_two_qubit(State::maximally_mixed(kQubits)) == 2.0);
  CHECK(kind_of([] { horodecki_two_qubit(State::maximally_mixed(tensor(make_full(2), make_full(3)))); }) ==
        ErrorKind::UnsupportedShape);
}

TEST_CASE("closed form agrees with direct search") {
  Rng rng(6);
  for (int k = 0; k < 24; ++k) {
    const State s = random_two_qubit(k, rng);
    CHECK(std::abs(horodecki_two_qubit(s) - oracle::chsh_two_qubit_search(s.dense())) < 1e-7);
  }
}

TEST_CASE("chsh_optimize examples") {
  const ChshResult r = chsh_optimize(singlet().to_state(), 8, 1);
  CHECK(std::abs(r.value - kTsirelson) <= 1e-6);
  CHECK(r.restarts == 8);
  CHECK(r.converged);
  CHECK(std::abs(r.value - std::abs(chsh_value(singlet().to_state(), r.observables))) <= 1e-9);
  validate(r.observables, kQubits);

  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    const FdAlgebra a = k % 2 ? make_full(2) : make_full(3);
    const FdAlgebra b = k % 3 ? make_full(2) : FdAlgebra({2, 1});
    const State p = product_state(random_mixed(a, rng), random_mixed(b, rng));
    CHECK(std::abs(chsh_optimize(p, 16, static_cast<std::uint64_t>(k)).value - 2.0) <= 1e-6);
  }
  // Oracle: 2 sqrt(2 p^2) = 2 sqrt 0.72 < 2, so the identity value 2 is optimal.
  CHECK(2.0 * std::sqrt(2 * 0.6 * 0.6) < 2.0);
  CHECK(horodecki_two_qubit(werner(0.6)) == 2.0);
  CHECK(std::abs(chsh_optimize(werner(0.6), 16, 3).value - 2.0) <= 1e-6);

  ChshOptions zero;
  zero.restarts = 0;
  CHECK(kind_of([&] { chsh_optimize(singlet().to_state(), zero); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { chsh_optimize(State::maximally_mixed(make_full(4)), 4, 1); }) ==
        ErrorKind::MissingFactorization);
}

TEST_CASE("decomposable states obey the bound") {
  Rng rng(343);
  const char* pairs[][2] = {{"M2", "M2"}, {"M2", "M3"}, {"M3", "M3"}, {"M2+M1", "M2"}, {"M2", "D3"}};
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto& pr = pairs[k % std::size(pairs)];
    const FdAlgebra a = parse_algebra(pr[0]), b = parse_algebra(pr[1]);
    const State s = reconstruct(support::random_decomposition(a, b, rng));
    for (int t = 0; t < 100; ++t) worst = std::max(worst, std::abs(chsh_value(s, random_observables(s.owner(), rng))));
  }
  MESSAGE("largest |chsh| over decomposable samples: " << worst);
  CHECK(worst <= 2.0 + 1e-9);
}

TEST_CASE("see-saw is monotone") {
  Rng rng(9);
  const char* pairs[][2] = {{"M2", "M2"}, {"M2", "M3"}, {"M3", "M3"}, {"M2+M1", "M3"}, {"M2", "D2"}};
  for (int k = 0; k < 100; ++k) {
    const auto& pr = pairs[k % std::size(pairs)];
    const FdAlgebra ab = tensor(parse_algebra(pr[0]), parse_algebra(pr[1]));
    const State s = k % 2 ? random_mixed(ab, rng) : random_pure_state(ab, rng);
    const SeeSawRun run = see_saw(s, random_observables(ab, rng));
    REQUIRE(run.values.size() >= 2);
    for (std::size_t i = 1; i < run.values.size(); ++i) CHECK(run.values[i] >= run.values[i - 1] - 1e-12);
    CHECK(std::abs(run.values.back() - chsh_value(s, run.observables)) < 1e-9);
    CHECK(run.converged);
  }
}

TEST_CASE("Tsirelson rail") {
  Rng rng(10);
  const char* pairs[][2] = {{"M2", "M2"}, {"M2", "M3"}, {"M3", "M3"}, {"M2+M1", "M2+M1"}, {"M4", "M2"}};
  for (int k = 0; k < 60; ++k) {
    const auto& pr = pairs[k % std::size(pairs)];
    const FdAlgebra ab = tensor(parse_algebra(pr[0]), parse_algebra(pr[1]));
    const State s = k % 2 ? random_mixed(ab, rng) : random_pure_state(ab, rng);
    const ChshResult r = chsh_optimize(s, 8, static_cast<std::uint64_t>(k));
    CHECK(r.value <= kTsirelson + 1e-6);
    CHECK(r.value >= 2.0 - 1e-6);
    CHECK(std::abs(r.value - std::abs(chsh_value(s, r.observables))) <= 1e-9);
  }
  // The maximally entangled qutrit pair. Dichotomic observables split C^3 into
  // a qubit part carrying weight 2/3 of a singlet and a one-dimensional rest,
  // so the optimum is (2/3) 2 sqrt 2 + (1/3) 2.
  Vector phi = Vector::Zero(9);
  for (int i = 0; i < 3; ++i) phi(i * 3 + i) = 1.0 / std::sqrt(3.0);
  const double v = chsh_optimize(PureVector(tensor(make_full(3), make_full(3)), phi).to_state(), 16, 1).value;
  CHECK(v == doctest::Approx(2.0 / 3.0 * kTsirelson + 2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("oracle agreement on 200 two-qubit states") {
  Rng rng(200);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const State s = random_two_qubit(k, rng);
    const double gap = std::abs(chsh_optimize(s, 16, static_cast<std::uint64_t>(k)).value - horodecki_two_qubit(s));
    worst = std::max(worst, gap);
    CHECK(gap <= 1e-5);
  }
  MESSAGE("largest see-saw / closed-form gap: " << worst);
}

TEST_CASE("Werner states: entangled yet within the bound") {
  for (double p : {0.5, 0.6}) {
    const State w = werner(p);
    CHECK(separability_test(w).tag == VerdictTag::EntangledPPT);
    CHECK(std::abs(chsh_optimize(w, 16, 11).value - 2.0) <= 1e-6);
  }
  // Above 1/sqrt 2 the violation returns.
  CHECK(chsh_optimize(werner(0.8), 16, 11).value == doctest::Approx(2.0 * std::sqrt(2 * 0.64)).epsilon(1e-6));
}

TEST_CASE("optimizer is deterministic and thread independent") {
  Rng rng(12);
  const State s = random_mixed(tensor(make_full(3), make_full(2)), rng);
  ChshOptions one;
  one.seed = 77;
  ChshOptions four = one;
  four.threads = 4;
  const ChshResult a = chsh_optimize(s, one);
  const ChshResult b = chsh_optimize(s, one);
  const ChshResult c = chsh_optimize(s, four);
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.iterations == c.iterations);
  CHECK((a.observables.a1.dense() - c.observables.a1.dense()).norm() == 0.0);
}

}  // TEST_SUITE
