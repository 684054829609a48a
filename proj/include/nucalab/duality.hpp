#pragma once

/// @file duality.hpp
/// @brief Dual rule configurations s*(g, m) = s(g + m, -m)^T, the natural
/// pairing, and checks of the structural identities that tie s and s* together.
///
/// V* is identified with V through the standard dual basis, so covectors are
/// plain vectors and the pairing is a dot product.

#include <cstdint>
#include <map>
#include <random>
#include <type_traits>
#include <string>
#include <vector>

#include "nucalab/nuca.hpp"
#include "nucalab/sampling.hpp"

namespace nucalab {

inline RuleConfig dual_config(const RuleConfig& s) {
  const auto& u = s.universe();
  MemorySet mem = s.memory().negated();
  auto rule_at = [&](Cell g) {
    std::map<Cell, Matrix> blocks;
    for (auto m : mem.offsets()) blocks.emplace(m, transpose(s.entry(g + m, -m)));
    return LocalRule(std::move(blocks));
  };
  const std::int64_t far = s.override_radius() + s.memory().radius() + 2;
  LocalRule right = rule_at(u.d == 1 ? Cell{far} : Cell{far, far});
  LocalRule left = u.d == 1 ? rule_at(Cell{-far}) : right;
  std::map<Cell, LocalRule> ov;
  for (auto g : detail::candidate_cells({&s}, s.memory().radius())) ov.emplace(g, rule_at(g));
  return RuleConfig(u, std::move(mem), std::move(right), std::move(ov), std::move(left));
}

inline bool check_involution(const RuleConfig& s) { return dual_config(dual_config(s)) == s; }

/// <omega | c> = sum_g omega(g) . c(g) over the support of omega.
template <class Config>
Scalar pairing(const FinSuppConfig& omega, const Config& c, const PrimeField& f) {
  Scalar acc = 0;
  for (const auto& [g, w] : omega.values()) {
    if constexpr (std::is_same_v<Config, EvPerConfig>) {
      acc = f.add(acc, dot(f, w, c.at(g.x)));
    } else {
      acc = f.add(acc, dot(f, w, c.at(g)));
    }
  }
  return acc;
}

/// <sigma_{s*}(omega) | c> == <omega | sigma_s(c)>.
inline bool check_adjointness(const RuleConfig& s, const FinSuppConfig& omega, const FinSuppConfig& c) {
  const auto f = s.universe().field();
  auto lhs = pairing(apply_finsupp(dual_config(s), omega), c, f);
  auto rhs = pairing(omega, apply_finsupp(s, c), f);
  return lhs == rhs;
}

/// (sigma_s o sigma_t)* == sigma_{t*} o sigma_{s*}, compared entrywise.
inline bool check_functoriality(const RuleConfig& s, const RuleConfig& t) {
  return dual_config(compose(s, t)) == compose(dual_config(t), dual_config(s));
}

struct OrthogonalityReport {
  std::size_t kernel_samples = 0;     // finitely supported z with sigma_s(z) = 0
  std::size_t dual_kernel_samples = 0;  // finitely supported omega with sigma_{s*}(omega) = 0
  std::size_t pairings_checked = 0;
  std::vector<std::string> violations;
  bool passed() const { return violations.empty(); }
};

namespace detail {

/// Finitely supported kernel of sigma_s among configurations supported on E_radius.
inline std::vector<FinSuppConfig> finsupp_kernel(const RuleConfig& s, int radius) {
  auto cols = box(s.universe().d, radius);
  auto rows = affected_cells(s, cols);
  auto basis = kernel_basis(linear_block(s, rows, cols));
  std::vector<FinSuppConfig> out;
  const std::size_t k = static_cast<std::size_t>(s.universe().k);
  for (const auto& b : basis) {
    FinSuppConfig z(s.universe().k);
    for (std::size_t j = 0; j < cols.size(); ++j) z.set(cols[j], Vec(b.begin() + j * k, b.begin() + (j + 1) * k));
    out.push_back(std::move(z));
  }
  return out;
}

inline FinSuppConfig random_combination(const std::vector<FinSuppConfig>& basis, const PrimeField& f, int k,
                                        std::mt19937_64& rng) {
  FinSuppConfig z(k);
  std::uniform_int_distribution<std::uint32_t> val(0, f.modulus() - 1);
  for (const auto& b : basis) {
    Scalar c = val(rng);
    for (const auto& [g, v] : b.values()) {
      Vec w = z.at(g);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = f.add(w[i], f.mul(c, v[i]));
      z.set(g, w);
    }
  }
  return z;
}

}  // namespace detail

/// Tests the finitely checkable inclusions
///   im(sigma_{s*} on finite support) is orthogonal to Ker(sigma_s on finite support), and
///   Ker(sigma_{s*} on finite support) is orthogonal to im(sigma_s on finite support),
/// on kernel elements supported in E_radius and `samples` random partners.
inline OrthogonalityReport check_orthogonality(const RuleConfig& s, int samples, std::uint64_t seed, int radius = 4) {
  OrthogonalityReport rep;
  std::mt19937_64 rng(seed);
  const auto& u = s.universe();
  const auto f = u.field();
  RuleConfig sd = dual_config(s);
  auto ker = detail::finsupp_kernel(s, radius);
  auto dker = detail::finsupp_kernel(sd, radius);
  rep.kernel_samples = ker.size();
  rep.dual_kernel_samples = dker.size();
  for (int i = 0; i < samples; ++i) {
    FinSuppConfig z = detail::random_combination(ker, f, u.k, rng);
    FinSuppConfig omega = apply_finsupp(sd, sampling::random_finsupp(u, radius, rng));
    if (!apply_finsupp(s, z).is_zero()) rep.violations.push_back("sampled kernel element is not in the kernel");
    if (pairing(omega, z, f) != 0) rep.violations.push_back("<sigma_{s*}(w) | z> != 0 for z in Ker(sigma_s)");
    FinSuppConfig w = detail::random_combination(dker, f, u.k, rng);
    FinSuppConfig y = apply_finsupp(s, sampling::random_finsupp(u, radius, rng));
    if (pairing(w, y, f) != 0) rep.violations.push_back("<omega | sigma_s(x)> != 0 for omega in Ker(sigma_{s*})");
    rep.pairings_checked += 2;
  }
  return rep;
}

}  // namespace nucalab
