#pragma once

/// @file inverse.hpp
/// @brief Bounded searches for rule configurations t with sigma_t o sigma_s = Id
/// (left inverse) or sigma_s o sigma_t = Id (right inverse), and the
/// preimage-based construction of a two-sided inverse.
///
/// All searches are one-dimensional. An unknown t has memory [-mem_bound, mem_bound],
/// a left tail, a right tail and one rule per cell of [-support_bound, support_bound].
/// Every candidate is verified exactly with `compose` before it is returned.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nucalab/nuca.hpp"

namespace nucalab {

/// Operation not available for the rule's dimension.
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_d1(const RuleConfig& s, const char* what) {
  if (s.universe().d != 1) throw Unsupported(std::string(what) + " requires d = 1");
}

inline bool is_identity(const RuleConfig& s) { return equivalent(s, rules::identity(s.universe())); }

enum class InverseSide { Left, Right, TwoSided };

inline const char* to_string(InverseSide s) {
  switch (s) {
    case InverseSide::Left: return "left";
    case InverseSide::Right: return "right";
    case InverseSide::TwoSided: return "two-sided";
  }
  return "?";
}

/// Does t satisfy the inverse identities required by `side`? Exact.
inline bool verify_inverse(const RuleConfig& s, const RuleConfig& t, InverseSide side) {
  if (!(s.universe() == t.universe())) return false;
  bool left = side == InverseSide::Right || is_identity(compose(t, s));
  bool right = side == InverseSide::Left || is_identity(compose(s, t));
  return left && right;
}

namespace detail {

/// Layout of the unknown rule t: slot 0 = left tail, slot 1 = right tail,
/// slot 2 + (c + support_bound) = override at cell c.
struct InverseLayout {
  Universe u;
  std::int64_t mb;
  std::int64_t sb;

  std::size_t k() const { return static_cast<std::size_t>(u.k); }
  std::size_t offsets() const { return static_cast<std::size_t>(2 * mb + 1); }
  std::size_t slots() const { return static_cast<std::size_t>(2 * sb + 3); }
  std::size_t vars() const { return slots() * offsets() * k() * k(); }

  std::size_t slot(std::int64_t g) const {
    if (g < -sb) return 0;
    if (g > sb) return 1;
    return static_cast<std::size_t>(2 + g + sb);
  }
  std::size_t var(std::size_t slot, std::int64_t m, std::size_t i, std::size_t j) const {
    return ((slot * offsets() + static_cast<std::size_t>(m + mb)) * k() + i) * k() + j;
  }

  RuleConfig build(const Vec& x) const {
    auto rule = [&](std::size_t slot) {
      std::map<Cell, Matrix> blocks;
      for (auto m = -mb; m <= mb; ++m) {
        Matrix b(k(), k(), u.p);
        for (std::size_t i = 0; i < k(); ++i)
          for (std::size_t j = 0; j < k(); ++j) b.set(i, j, x[var(slot, m, i, j)]);
        blocks.emplace(Cell{m}, std::move(b));
      }
      return LocalRule(std::move(blocks));
    };
    std::map<Cell, LocalRule> ov;
    for (auto c = -sb; c <= sb; ++c) ov.emplace(Cell{c}, rule(slot(c)));
    return trimmed(RuleConfig(u, MemorySet::range(-mb, mb), rule(1), std::move(ov), rule(0)));
  }
};

inline std::optional<RuleConfig> inverse_search(const RuleConfig& s, int mem_bound, int support_bound, bool left) {
  require_d1(s, "inverse search");
  if (mem_bound < 0 || support_bound < 0) throw ContractViolation("inverse search bounds must be >= 0");
  const auto& u = s.universe();
  InverseLayout lay{u, mem_bound, support_bound};
  const std::size_t k = lay.k();
  auto [lo, hi] = s.singular_interval();
  const std::int64_t r = s.memory().radius();
  // Beyond this range both t and s read only tail rules, so the equations repeat.
  const std::int64_t g_lo = std::min(lo, -lay.sb) - lay.mb - r - 1;
  const std::int64_t g_hi = std::max(hi, lay.sb) + lay.mb + r + 1;
  const std::int64_t m_lo = -lay.mb + s.memory().min_x();
  const std::int64_t m_hi = lay.mb + s.memory().max_x();

  const std::size_t n_rows = static_cast<std::size_t>((g_hi - g_lo + 1) * (m_hi - m_lo + 1)) * k * k;
  Matrix a(n_rows, lay.vars(), u.p);
  Vec b(n_rows, 0);
  std::size_t row = 0;
  for (auto g = g_lo; g <= g_hi; ++g) {
    for (auto m = m_lo; m <= m_hi; ++m) {
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j, ++row) {
          if (m == 0 && i == j) b[row] = 1;
          if (left) {
            // (t o s)(g, m) = sum_{m1} t(g, m1) s(g + m1, m - m1)
            for (auto m1 = -lay.mb; m1 <= lay.mb; ++m1) {
              const Matrix* sb = s.find_entry(Cell{g + m1}, Cell{m - m1});
              if (!sb) continue;
              for (std::size_t l = 0; l < k; ++l) a.add_to(row, lay.var(lay.slot(g), m1, i, l), (*sb)(l, j));
            }
          } else {
            // (s o t)(g, m) = sum_{m1 in M_s} s(g, m1) t(g + m1, m - m1)
            for (const auto& [m1, sa] : s.rule_at(Cell{g}).blocks()) {
              auto m2 = m - m1.x;
              if (m2 < -lay.mb || m2 > lay.mb) continue;
              for (std::size_t l = 0; l < k; ++l) a.add_to(row, lay.var(lay.slot(g + m1.x), m2, l, j), sa(i, l));
            }
          }
        }
      }
    }
  }
  auto sol = solve_affine(a, b);
  if (!sol.particular) return std::nullopt;
  RuleConfig t = lay.build(*sol.particular);
  if (!verify_inverse(s, t, left ? InverseSide::Left : InverseSide::Right)) return std::nullopt;
  return t;
}

}  // namespace detail

/// Rule t with sigma_t o sigma_s = Id, memory within [-mem_bound, mem_bound] and
/// overrides within [-support_bound, support_bound]; nullopt when none exists there.
inline std::optional<RuleConfig> find_left_inverse(const RuleConfig& s, int mem_bound, int support_bound) {
  return detail::inverse_search(s, mem_bound, support_bound, true);
}

/// Rule t with sigma_s o sigma_t = Id under the same bounds.
inline std::optional<RuleConfig> find_right_inverse(const RuleConfig& s, int mem_bound, int support_bound) {
  return detail::inverse_search(s, mem_bound, support_bound, false);
}

struct ConstructedInverse {
  std::optional<RuleConfig> inverse;
  std::int64_t radius = -1;  // memory [-radius, radius] of the inverse when found
  std::vector<std::string> diagnostics;
};

/// Builds t(g)(v) = y_{g,v}(g), where y_{g,v} is the finitely supported preimage of the
/// pattern v planted at g + E, E = [-e, e], for e = 0, 1, ..., e_bound. The first t that
/// passes both exact composition checks is returned.
inline ConstructedInverse construct_inverse(const RuleConfig& s, int e_bound) {
  require_d1(s, "construct_inverse");
  const auto& u = s.universe();
  const std::size_t k = static_cast<std::size_t>(u.k);
  auto [lo, hi] = s.singular_interval();
  const std::int64_t r = s.memory().radius();
  ConstructedInverse out;

  for (std::int64_t e = 0; e <= e_bound; ++e) {
    const std::int64_t reach = 2 * e + r + 1;
    const std::int64_t c_lo = lo - reach - 1, c_hi = hi + reach + 1;  // c_lo, c_hi stand for the tails
    // Preimage of the unit vector j planted at cell h, supported on [h - e, h + e].
    std::map<std::int64_t, std::vector<FinSuppConfig>> pre;
    bool ok = true;
    for (auto h = c_lo - e; h <= c_hi + e && ok; ++h) {
      auto cols = interval(h - e, h + e);
      auto rows = affected_cells(s, cols);
      if (!std::binary_search(rows.begin(), rows.end(), Cell{h})) rows.insert(std::lower_bound(rows.begin(), rows.end(), Cell{h}), Cell{h});
      Matrix a = linear_block(s, rows, cols);
      std::size_t h_row = static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), Cell{h}) - rows.begin());
      for (std::size_t j = 0; j < k && ok; ++j) {
        Vec rhs(a.rows(), 0);
        rhs[h_row * k + j] = 1;
        auto sol = solve_affine(a, rhs);
        if (!sol.particular) {
          out.diagnostics.push_back("e=" + std::to_string(e) + ": no preimage of the unit pattern at cell " +
                                    std::to_string(h) + " within radius " + std::to_string(e));
          ok = false;
        } else if (!sol.kernel_basis.empty()) {
          out.diagnostics.push_back("e=" + std::to_string(e) + ": preimage at cell " + std::to_string(h) +
                                    " is not unique (finitely supported kernel)");
          ok = false;
        } else {
          FinSuppConfig y(u.k);
          for (std::size_t c = 0; c < cols.size(); ++c)
            y.set(cols[c], Vec(sol.particular->begin() + static_cast<std::ptrdiff_t>(c * k),
                               sol.particular->begin() + static_cast<std::ptrdiff_t>((c + 1) * k)));
          pre[h].push_back(std::move(y));
        }
      }
    }
    if (!ok) continue;
    auto rule_at = [&](std::int64_t g) {
      std::map<Cell, Matrix> blocks;
      for (auto c = -e; c <= e; ++c) {
        Matrix b(k, k, u.p);
        for (std::size_t j = 0; j < k; ++j) {
          Vec col = pre.at(g + c)[j].at(Cell{g});
          for (std::size_t i = 0; i < k; ++i) b.set(i, j, col[i]);
        }
        blocks.emplace(Cell{c}, std::move(b));
      }
      return LocalRule(std::move(blocks));
    };
    std::map<Cell, LocalRule> ov;
    for (auto g = c_lo + 1; g < c_hi; ++g) ov.emplace(Cell{g}, rule_at(g));
    RuleConfig t = trimmed(RuleConfig(u, MemorySet::range(-e, e), rule_at(c_hi), std::move(ov), rule_at(c_lo)));
    if (verify_inverse(s, t, InverseSide::TwoSided)) {
      out.inverse = std::move(t);
      out.radius = e;
      return out;
    }
    out.diagnostics.push_back("e=" + std::to_string(e) + ": assembled rule fails the composition check");
  }
  return out;
}

}  // namespace nucalab
