#pragma once

/// @file sampling.hpp
/// @brief Seeded random rule configurations and configurations for property sweeps.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "nucalab/rule.hpp"
#include "nucalab/config.hpp"

namespace nucalab::sampling {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// NUCALAB_SEED when set, otherwise `fallback`.
inline std::uint64_t seed_from_env(std::uint64_t fallback = kDefaultSeed) {
  if (const char* s = std::getenv("NUCALAB_SEED")) return std::strtoull(s, nullptr, 10);
  return fallback;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, std::uint32_t p, std::mt19937_64& rng) {
  Matrix m(r, c, p);
  std::uniform_int_distribution<std::uint32_t> val(0, p - 1);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m.set(i, j, val(rng));
  return m;
}

inline LocalRule random_rule(const Universe& u, const MemorySet& mem, std::mt19937_64& rng) {
  std::map<Cell, Matrix> b;
  for (auto m : mem.offsets()) b.emplace(m, random_matrix(u.k, u.k, u.p, rng));
  return LocalRule(std::move(b));
}

struct RandomRuleSpec {
  std::vector<std::uint32_t> primes{2, 3, 5};
  int max_k = 2;
  int memory_span = 2;    // offsets drawn from [-span, span]
  int max_overrides = 3;
  int override_span = 3;  // override cells drawn from [-span, span]
  bool allow_two_sided = true;
};

/// Random d = 1 rule configuration.
inline RuleConfig random_config(const RandomRuleSpec& spec, std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Universe u(1, pick(1, spec.max_k), spec.primes[static_cast<std::size_t>(pick(0, int(spec.primes.size()) - 1))]);
  std::set<Cell> offs;
  int n_off = pick(1, std::min(3, 2 * spec.memory_span + 1));
  while (static_cast<int>(offs.size()) < n_off) offs.insert(Cell{pick(-spec.memory_span, spec.memory_span)});
  MemorySet mem({offs.begin(), offs.end()});
  LocalRule right = random_rule(u, mem, rng);
  std::optional<LocalRule> left;
  if (spec.allow_two_sided && pick(0, 2) == 0) left = random_rule(u, mem, rng);
  std::map<Cell, LocalRule> ov;
  int n_ov = pick(0, spec.max_overrides);
  for (int i = 0; i < n_ov; ++i) ov[Cell{pick(-spec.override_span, spec.override_span)}] = random_rule(u, mem, rng);
  return RuleConfig(u, mem, right, ov, left);
}

/// Random rule over a fixed universe and memory.
inline RuleConfig random_config_over(const Universe& u, const MemorySet& mem, int max_overrides, int span,
                                     bool two_sided, std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::map<Cell, LocalRule> ov;
  int n_ov = pick(0, max_overrides);
  for (int i = 0; i < n_ov; ++i) ov[Cell{pick(-span, span)}] = random_rule(u, mem, rng);
  std::optional<LocalRule> left;
  if (two_sided) left = random_rule(u, mem, rng);
  return RuleConfig(u, mem, random_rule(u, mem, rng), ov, left);
}

/// Uniformly random values on E_radius, zero elsewhere.
inline FinSuppConfig random_finsupp(const Universe& u, int radius, std::mt19937_64& rng) {
  FinSuppConfig x(u.k);
  std::uniform_int_distribution<std::uint32_t> val(0, u.p - 1);
  for (auto g : box(u.d, radius)) {
    Vec v(static_cast<std::size_t>(u.k));
    for (auto& e : v) e = val(rng);
    x.set(g, v);
  }
  return x;
}

}  // namespace nucalab::sampling
