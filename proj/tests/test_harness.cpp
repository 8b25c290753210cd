#include <doctest.h>

#include "support.hpp"
#include "raggio/harness.hpp"
#include "raggio/io.hpp"

using namespace raggio;
using support::kind_of;

TEST_SUITE("harness") {

TEST_CASE("classical pair examples") {
  const RaggioReport r = verify_equivalence(make_full(2), make_commutative(2), 100, 1);
  CHECK_FALSE(r.entangled_found);
  CHECK(r.max_chsh <= 2.0 + 1e-6);
  CHECK(r.decomposition_success_rate == 1.0);
  CHECK(r.verdict == TheoremVerdict::ConsistentWithTheorem);
  CHECK(r.samples == 100);
  CHECK(r.injected == 0);
  CHECK(r.b_commutative);
  CHECK_FALSE(r.a_commutative);

  const RaggioReport d = verify_equivalence(make_commutative(2), make_commutative(3), 100, 1);
  CHECK(d.a_commutative);
  CHECK(d.b_commutative);
  CHECK(d.separable_count == 100);
  CHECK(d.max_chsh <= 2.0 + 1e-6);
  CHECK(d.verdict == TheoremVerdict::ConsistentWithTheorem);
}

TEST_CASE("quantum pair example") {
  const RaggioReport r = verify_equivalence(make_full(2), make_full(2), 100, 1);
  CHECK(r.entangled_found);
  CHECK(r.max_chsh >= 2.8 - 1e-3);
  CHECK(r.max_chsh <= 2.0 * std::sqrt(2.0) + 1e-6);
  CHECK(r.injected == 2);
  CHECK(r.verdict == TheoremVerdict::ConsistentWithTheorem);
  // Random pure two-qubit states are entangled with probability one.
  CHECK(r.entangled_count >= 50);
  CHECK(r.separable_count + r.entangled_count + r.undetermined_count == r.samples + r.injected);
}

TEST_CASE("preconditions") {
  CHECK(kind_of([] { verify_equivalence(make_full(2), make_full(2), 0, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { verify_equivalence(make_full(8), make_full(9), 1, 1); }) == ErrorKind::ResourceLimit);
  HarnessOptions small;
  small.dimension_cap = 4;
  CHECK(kind_of([&] { verify_equivalence(make_full(2), make_full(3), 1, 1, small); }) == ErrorKind::ResourceLimit);
  CHECK(verify_equivalence(make_full(2), make_full(2), 1, 1, small).samples == 1);
}

TEST_CASE("reports are deterministic and thread independent") {
  HarnessOptions one;
  HarnessOptions many;
  many.threads = 3;
  for (const char* pair : {"M2 D3", "M2 M3", "M3 M2+M1"}) {
    std::string x(pair);
    const FdAlgebra a = parse_algebra(x.substr(0, x.find(' ')));
    const FdAlgebra b = parse_algebra(x.substr(x.find(' ') + 1));
    const std::string first = io::to_json(verify_equivalence(a, b, 30, 42, one)).dump();
    const std::string second = io::to_json(verify_equivalence(a, b, 30, 42, one)).dump();
    const std::string threaded = io::to_json(verify_equivalence(a, b, 30, 42, many)).dump();
    CHECK(first == second);
    CHECK(first == threaded);
    CHECK(first != io::to_json(verify_equivalence(a, b, 30, 43, one)).dump());
  }
}

TEST_CASE("theorem clauses agree across the test matrix") {
  std::vector<FdAlgebra> noncomm{make_full(2), make_full(3)};
  std::vector<std::pair<FdAlgebra, FdAlgebra>> pairs;
  for (const auto& a : {make_full(1), make_full(2), make_full(3)})
    for (int m = 1; m <= 4; ++m) pairs.emplace_back(a, make_commutative(m));
  for (const auto& a : noncomm)
    for (const auto& b : noncomm) pairs.emplace_back(a, b);
  for (const auto& [a, b] : pairs) {
    const RaggioReport r = verify_equivalence(a, b, 100, 9);
    const bool classical = a.is_commutative() || b.is_commutative();
    INFO(a.shorthand() << " x " << b.shorthand());
    CHECK(r.verdict == TheoremVerdict::ConsistentWithTheorem);
    // Decomposability, commutativity and the CHSH bound point the same way.
    CHECK(!r.entangled_found == classical);
    CHECK((r.max_chsh <= 2.0 + 1e-6) == classical);
    if (classical) CHECK(r.decomposition_success_rate == 1.0);
  }
}

TEST_CASE("verdict rule") {
  RaggioReport r{make_full(2), make_commutative(2)};
  r.b_commutative = true;
  r.max_chsh = 2.0;
  r.decomposition_success_rate = 1.0;
  CHECK(judge(r) == TheoremVerdict::ConsistentWithTheorem);
  r.undetermined_count = 7;
  CHECK(judge(r) == TheoremVerdict::ConsistentWithTheorem);
  r.max_chsh = 2.0 + 2e-6;
  CHECK(judge(r) == TheoremVerdict::InconsistentWithTheorem);
  r.max_chsh = 2.0;
  r.decomposition_success_rate = 0.99;
  CHECK(judge(r) == TheoremVerdict::InconsistentWithTheorem);
  r.decomposition_success_rate = 1.0;
  r.entangled_found = true;
  CHECK(judge(r) == TheoremVerdict::InconsistentWithTheorem);

  RaggioReport q{make_full(2), make_full(2)};
  q.entangled_found = true;
  q.max_chsh = 2.5;
  CHECK(judge(q) == TheoremVerdict::ConsistentWithTheorem);
  q.max_chsh = 2.0;
  CHECK(judge(q) == TheoremVerdict::InconsistentWithTheorem);
  q.max_chsh = 2.5;
  q.entangled_found = false;
  CHECK(judge(q) == TheoremVerdict::InconsistentWithTheorem);
}

TEST_CASE("one commutative side suffices for the bound") {
  CHECK(bell_one_side_classical(make_full(3), make_commutative(2), 100, 1));
  CHECK(bell_one_side_classical(make_full(2), make_commutative(4), 100, 2));
  CHECK_FALSE(bell_one_side_classical(make_full(2), make_full(2), 10, 3));
}

TEST_CASE("embedded witnesses") {
  const FdAlgebra a({1, 2}), b({3});
  const State s = embedded_singlet(a, b);
  validate(embedded_singlet_observables(a, b), s.owner());
  CHECK(purity(restrict_to_factor(s, Factor::A)) == doctest::Approx(0.5));
  CHECK(chsh_value(s, embedded_singlet_observables(a, b)) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(separability_test(s).tag == VerdictTag::EntangledPure);
  CHECK(separability_test(embedded_werner(a, b, 0.5)).tag == VerdictTag::EntangledPPT);
  CHECK(kind_of([] { embedded_singlet(make_full(2), make_commutative(3)); }) == ErrorKind::PreconditionViolated);
}

}  // TEST_SUITE
