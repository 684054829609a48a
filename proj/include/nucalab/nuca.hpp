#pragma once

/// @file nuca.hpp
/// @brief Exact evaluation of sigma_s and the induced window maps.
///
/// sigma_s(x)(g) = sum_{m in M} s(g, m) x(g + m). Everything here is exact
/// over GF(p); windows are finite cell lists in lexicographic order and the
/// basis of V^E is (cell, coordinate) with the cell index varying slowest.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nucalab/config.hpp"
#include "nucalab/rule.hpp"

namespace nucalab {

namespace detail {

inline void accumulate(const PrimeField& f, Vec& acc, const Matrix& a, const Vec& x) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::uint64_t s = acc[i];
    for (std::size_t j = 0; j < a.cols(); ++j) s += static_cast<std::uint64_t>(a(i, j)) * x[j];
    acc[i] = static_cast<Scalar>(s % f.modulus());
  }
}

/// sigma_s(x)(g) for any accessor `x(Cell) -> Vec`.
template <class Access>
Vec eval_at(const RuleConfig& s, Cell g, Access&& x) {
  const auto& u = s.universe();
  const auto f = u.field();
  Vec acc = u.zero_vector();
  for (const auto& [m, block] : s.rule_at(g).blocks()) {
    if (block.is_zero()) continue;
    accumulate(f, acc, block, x(g + m));
  }
  return acc;
}

}  // namespace detail

/// sigma_s(x)(g) from a pattern that must cover g + M.
inline Vec evaluate_cell(const RuleConfig& s, const std::map<Cell, Vec>& pattern, Cell g) {
  for (auto m : s.memory().offsets())
    if (!pattern.count(g + m)) throw ContractViolation("pattern does not cover cell " + (g + m).str(2) + " of gM");
  return detail::eval_at(s, g, [&](Cell c) -> const Vec& {
    auto it = pattern.find(c);
    if (it == pattern.end()) throw ContractViolation("pattern does not cover cell " + c.str(2) + " of gM");
    return it->second;
  });
}

/// Matrix of x|_cols |-> sigma_s(x)|_rows, assuming x vanishes outside `cols`.
/// Rows and columns are (cell, coordinate) in the given cell order.
inline Matrix linear_block(const RuleConfig& s, const std::vector<Cell>& rows, const std::vector<Cell>& cols) {
  const auto& u = s.universe();
  const std::size_t k = static_cast<std::size_t>(u.k);
  std::map<Cell, std::size_t> col_index;
  for (std::size_t j = 0; j < cols.size(); ++j) col_index.emplace(cols[j], j);
  Matrix a(rows.size() * k, cols.size() * k, u.p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [m, block] : s.rule_at(rows[i]).blocks()) {
      auto it = col_index.find(rows[i] + m);
      if (it == col_index.end()) continue;
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) a.add_to(i * k + r, it->second * k + c, block(r, c));
    }
  }
  return a;
}

/// The induced map f+_{E, s|E} : V^{EM} -> V^E.
struct WindowMap {
  std::vector<Cell> domain_cells;    // EM
  std::vector<Cell> codomain_cells;  // E
  Matrix matrix;
};

inline WindowMap induced_map(const RuleConfig& s, std::vector<Cell> e) {
  if (e.empty()) throw ContractViolation("induced_map: window must be nonempty");
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  auto em = sumset(e, s.memory().offsets());
  Matrix a = linear_block(s, e, em);
  return {std::move(em), std::move(e), std::move(a)};
}

/// Cells where sigma_s(x) can be nonzero when x is supported on `support`.
inline std::vector<Cell> affected_cells(const RuleConfig& s, const std::vector<Cell>& support) {
  return sumset(support, s.memory().negated().offsets());
}

/// Exact image of a finitely supported configuration.
inline FinSuppConfig apply_finsupp(const RuleConfig& s, const FinSuppConfig& x) {
  FinSuppConfig y(s.universe().k);
  std::vector<Cell> support;
  for (const auto& [g, v] : x.values()) support.push_back(g);
  for (auto g : affected_cells(s, support)) y.set(g, detail::eval_at(s, g, [&](Cell c) { return x.at(c); }));
  return y;
}

/// Exact image of an eventually periodic configuration (d = 1).
inline EvPerConfig apply_evper(const RuleConfig& s, const EvPerConfig& x) {
  if (s.universe().d != 1) throw ContractViolation("apply_evper requires d = 1");
  if (x.k() != s.universe().k) throw ContractViolation("apply_evper: alphabet dimension mismatch");
  auto [lo, hi] = s.singular_interval();
  const auto mlo = s.memory().min_x();
  const auto mhi = s.memory().max_x();
  // Beyond [a, b] the rule is a tail rule reading only periodic cells, so the
  // image repeats with the input's period there.
  const auto a = std::min(lo, x.core_start() - mhi) - 1;
  const auto b = std::max(hi, x.core_end() - mlo) + 1;
  auto value = [&](std::int64_t n) { return detail::eval_at(s, Cell{n}, [&](Cell c) { return x.at(c.x); }); };
  std::vector<Vec> core, left, right;
  for (auto n = a; n <= b; ++n) core.push_back(value(n));
  for (std::size_t j = 0; j < x.left_period().size(); ++j) left.push_back(value(a - 1 - static_cast<std::int64_t>(j)));
  for (std::size_t j = 0; j < x.right_period().size(); ++j) right.push_back(value(b + 1 + static_cast<std::int64_t>(j)));
  return EvPerConfig(x.k(), a, std::move(core), std::move(left), std::move(right)).compacted();
}

namespace detail {

/// Cells that may need an override in a rule derived from `s` (and `t`),
/// reading neighbours up to `reach` away: override cells and the d = 1 split.
inline std::set<Cell> candidate_cells(const std::vector<const RuleConfig*>& sources, std::int64_t reach) {
  std::set<Cell> seeds;
  int d = sources.front()->universe().d;
  for (const auto* s : sources) {
    for (const auto& [g, r] : s->overrides()) seeds.insert(g);
    if (s->two_sided()) {
      seeds.insert(Cell{-1});
      seeds.insert(Cell{0});
    }
  }
  std::set<Cell> out;
  auto ball = box(d, reach);
  for (auto g : seeds)
    for (auto b : ball) out.insert(g + b);
  return out;
}

}  // namespace detail

/// Rule p with sigma_p = sigma_s o sigma_t, memory M_s + M_t and
/// p(g, m) = sum_{m1 + m2 = m} s(g, m1) t(g + m1, m2).
inline RuleConfig compose(const RuleConfig& s, const RuleConfig& t) {
  const auto& u = s.universe();
  if (!(u == t.universe())) throw ContractViolation("compose: universes differ");
  MemorySet mem = s.memory() + t.memory();
  auto rule_at = [&](Cell g) {
    std::map<Cell, Matrix> blocks;
    for (auto m : mem.offsets()) blocks.emplace(m, u.zero_matrix());
    for (const auto& [m1, a] : s.rule_at(g).blocks()) {
      if (a.is_zero()) continue;
      for (const auto& [m2, b] : t.rule_at(g + m1).blocks()) {
        if (b.is_zero()) continue;
        auto& dst = blocks.at(m1 + m2);
        dst = dst + a * b;
      }
    }
    return LocalRule(std::move(blocks));
  };
  // Far enough to the left (right) both s and t read only their left (right) tails.
  const std::int64_t far = s.override_radius() + t.override_radius() + s.memory().radius() + 2;
  LocalRule right = rule_at(u.d == 1 ? Cell{far} : Cell{far, far});
  LocalRule left = u.d == 1 ? rule_at(Cell{-far}) : right;
  std::map<Cell, LocalRule> ov;
  for (auto g : detail::candidate_cells({&s, &t}, s.memory().radius())) ov.emplace(g, rule_at(g));
  return RuleConfig(u, std::move(mem), std::move(right), std::move(ov), std::move(left));
}

/// The translate g.s with (g.s)(h) = s(h - g).
inline RuleConfig translate(const RuleConfig& s, Cell g) {
  const auto& u = s.universe();
  if (!u.admits(g)) throw ContractViolation("translate: cell outside Z^d");
  std::map<Cell, LocalRule> ov;
  // Every cell whose rule changes: shifted overrides plus cells crossing the split.
  std::set<Cell> cells;
  for (const auto& [h, r] : s.overrides()) cells.insert(h + g);
  if (s.two_sided()) {
    auto lo = std::min<std::int64_t>(0, g.x) - 1, hi = std::max<std::int64_t>(0, g.x);
    for (auto x = lo; x <= hi; ++x) cells.insert(Cell{x});
  }
  for (auto c : cells) ov.emplace(c, s.rule_at(c - g));
  return RuleConfig(u, s.memory(), s.right_default(), std::move(ov), s.left_default());
}

/// Orbit-closure classes of Sigma(s): the translates of s plus the constant
/// configurations of each tail rule. The first entry is s itself.
struct LimitClasses {
  RuleConfig representative;            // stands for the class {g.s}
  std::vector<RuleConfig> constants;    // one constant configuration per distinct tail
};

inline LimitClasses limit_representatives(const RuleConfig& s) {
  LimitClasses out{s, {}};
  if (s.is_constant()) return out;
  out.constants.push_back(RuleConfig::constant(s.universe(), s.memory(), s.right_default()));
  if (s.two_sided()) out.constants.push_back(RuleConfig::constant(s.universe(), s.memory(), s.left_default()));
  return out;
}

/// Is `p` the constant configuration of one of the tail rules of `s`, or a translate of s?
inline bool in_orbit_closure(const RuleConfig& s, const RuleConfig& p) {
  auto lc = limit_representatives(s);
  for (const auto& c : lc.constants)
    if (equivalent(c, p)) return true;
  if (s.is_constant()) return equivalent(s, p);
  if (p.overrides().empty() && !p.two_sided()) return false;
  // Translates of s: align the first override/split cell.
  auto anchor = [](const RuleConfig& r) {
    return r.overrides().empty() ? Cell{0} : r.overrides().begin()->first;
  };
  for (std::int64_t dx = -64; dx <= 64; ++dx) {
    Cell g = anchor(p) - anchor(s) + Cell{dx};
    if (s.universe().d == 1 && g.y != 0) continue;
    if (equivalent(translate(s, g), p)) return true;
  }
  return false;
}

}  // namespace nucalab
