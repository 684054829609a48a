#pragma once

// Shared helpers for the test suites: seeded generators (re-exported) and brute-force
// oracles that never call into the elimination code under test.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nucalab/nuca.hpp"
#include "nucalab/sampling.hpp"

namespace nucalab::testing {

using sampling::random_config;
using sampling::random_config_over;
using sampling::random_finsupp;
using sampling::random_matrix;
using sampling::random_rule;
using sampling::RandomRuleSpec;
using sampling::seed_from_env;

/// Enumerates every vector of GF(p)^n (p^n of them), calling fn on each.
template <class Fn>
void for_each_vector(std::size_t n, std::uint32_t p, Fn&& fn) {
  Vec v(n, 0);
  while (true) {
    fn(static_cast<const Vec&>(v));
    std::size_t i = 0;
    while (i < n && ++v[i] == p) v[i++] = 0;
    if (i == n) return;
  }
}

/// Naive matrix-vector product straight from the definition.
inline Vec naive_apply(const Matrix& a, const Vec& x) {
  Vec y(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::uint64_t(a(i, j)) * x[j];
    y[i] = static_cast<Scalar>(s % a.modulus());
  }
  return y;
}

/// Naive sigma_s(x)(g) for a finitely supported x, straight from the definition.
inline Vec naive_sigma(const RuleConfig& s, const FinSuppConfig& x, Cell g) {
  const auto& u = s.universe();
  Vec out(static_cast<std::size_t>(u.k), 0);
  for (auto m : s.memory().offsets()) {
    Matrix a = s.entry(g, m);
    Vec v = x.at(g + m);
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint64_t acc = out[i];
      for (std::size_t j = 0; j < v.size(); ++j) acc += std::uint64_t(a(i, j)) * v[j];
      out[i] = static_cast<Scalar>(acc % u.p);
    }
  }
  return out;
}

}  // namespace nucalab::testing
