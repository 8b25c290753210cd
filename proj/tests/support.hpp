#pragma once

#include <doctest.h>

#include "raggio/entanglement.hpp"

namespace support {

/// Runs f and returns the kind of the raggio::Error it throws; fails the test otherwise.
template <class F>
raggio::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const raggio::Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return raggio::ErrorKind::Parse;
}

/// 1 to 6 terms with random weights; parts alternate between pure and mixed.
inline raggio::Decomposition random_decomposition(const raggio::FdAlgebra& a, const raggio::FdAlgebra& b,
                                                  raggio::Rng& rng) {
  std::uniform_int_distribution<int> terms(1, 6);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  raggio::Decomposition d;
  const int k = terms(rng);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    d.weights.push_back(u(rng));
    total += d.weights.back();
    d.a_parts.push_back(i % 2 ? raggio::random_mixed(a, rng) : raggio::random_pure_state(a, rng));
    d.b_parts.push_back(i % 3 ? raggio::random_pure_state(b, rng) : raggio::random_mixed(b, rng));
  }
  for (double& w : d.weights) w /= total;
  return d;
}

}  // namespace support
