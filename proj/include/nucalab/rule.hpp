#pragma once

/// @file rule.hpp
/// @brief Cells of Z^d, memory sets, local rules and rule configurations.
///
/// A rule configuration assigns a linear local rule V^M -> V to every cell.
/// Only configurations that are constant away from a finite set are
/// representable. In dimension 1 the constant tails may differ: cells n <= -1
/// default to the left tail rule and cells n >= 0 to the right tail rule
/// (`default_rule`). Overrides list the finitely many cells whose rule differs
/// from the tail rule of their side. The representation is canonical: an
/// override equal to its side's tail is never stored.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nucalab/gf.hpp"

namespace nucalab {

/// A point of Z^d with d <= 2. For d = 1 the second coordinate is always 0.
struct Cell {
  std::int64_t x = 0;
  std::int64_t y = 0;

  constexpr Cell() = default;
  constexpr explicit Cell(std::int64_t x_, std::int64_t y_ = 0) : x(x_), y(y_) {}

  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
  friend constexpr Cell operator+(Cell a, Cell b) { return Cell{a.x + b.x, a.y + b.y}; }
  friend constexpr Cell operator-(Cell a, Cell b) { return Cell{a.x - b.x, a.y - b.y}; }
  friend constexpr Cell operator-(Cell a) { return Cell{-a.x, -a.y}; }

  /// Chebyshev norm, so that E_n = [-n, n]^d is the ball of radius n.
  std::int64_t radius() const { return std::max(std::llabs(x), std::llabs(y)); }

  std::string str(int d) const {
    return d == 1 ? "[" + std::to_string(x) + "]" : "[" + std::to_string(x) + "," + std::to_string(y) + "]";
  }
};

/// The setting Z^d with alphabet V = GF(p)^k.
struct Universe {
  int d = 1;
  int k = 1;
  std::uint32_t p = 2;

  Universe() = default;
  Universe(int d_, int k_, std::uint32_t p_) : d(d_), k(k_), p(p_) { validate(); }

  void validate() const {
    if (d != 1 && d != 2) throw ContractViolation("dimension must be 1 or 2");
    if (k < 1) throw ContractViolation("alphabet dimension must be >= 1");
    (void)PrimeField(p);
  }
  PrimeField field() const { return PrimeField(p); }
  Vec zero_vector() const { return Vec(static_cast<std::size_t>(k), 0); }
  Matrix zero_matrix() const { return Matrix(k, k, p); }
  Matrix identity_matrix() const { return Matrix::identity(k, p); }

  bool admits(Cell c) const { return d == 2 || c.y == 0; }

  friend bool operator==(const Universe&, const Universe&) = default;
};

/// The box E_n = [-n, n]^d, cells in lexicographic order.
inline std::vector<Cell> box(int d, std::int64_t n) {
  std::vector<Cell> out;
  if (n < 0) return out;
  if (d == 1) {
    for (auto x = -n; x <= n; ++x) out.emplace_back(x);
  } else {
    for (auto x = -n; x <= n; ++x)
      for (auto y = -n; y <= n; ++y) out.emplace_back(x, y);
  }
  return out;
}

/// Cells of the 1-D interval [a, b].
inline std::vector<Cell> interval(std::int64_t a, std::int64_t b) {
  std::vector<Cell> out;
  for (auto x = a; x <= b; ++x) out.emplace_back(x);
  return out;
}

/// {e + m : e in E, m in M}, sorted, duplicates merged.
inline std::vector<Cell> sumset(const std::vector<Cell>& e, const std::vector<Cell>& m) {
  std::set<Cell> s;
  for (auto a : e)
    for (auto b : m) s.insert(a + b);
  return {s.begin(), s.end()};
}

/// Finite nonempty set of offsets, kept sorted lexicographically.
class MemorySet {
 public:
  MemorySet() : offsets_{Cell{0}} {}
  explicit MemorySet(std::vector<Cell> offsets) : offsets_(std::move(offsets)) {
    if (offsets_.empty()) throw ContractViolation("memory set must be nonempty");
    std::sort(offsets_.begin(), offsets_.end());
    if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end())
      throw ContractViolation("memory set offsets must be distinct");
  }
  static MemorySet range(std::int64_t lo, std::int64_t hi) { return MemorySet(interval(lo, hi)); }

  const std::vector<Cell>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  bool contains(Cell m) const { return std::binary_search(offsets_.begin(), offsets_.end(), m); }

  MemorySet negated() const {
    std::vector<Cell> n;
    for (auto m : offsets_) n.push_back(-m);
    return MemorySet(std::move(n));
  }
  MemorySet operator+(const MemorySet& o) const { return MemorySet(sumset(offsets_, o.offsets_)); }
  MemorySet united(const MemorySet& o) const {
    std::set<Cell> s(offsets_.begin(), offsets_.end());
    s.insert(o.offsets_.begin(), o.offsets_.end());
    return MemorySet({s.begin(), s.end()});
  }

  std::int64_t radius() const {
    std::int64_t r = 0;
    for (auto m : offsets_) r = std::max(r, m.radius());
    return r;
  }
  /// For d = 1: smallest and largest offset.
  std::int64_t min_x() const { return offsets_.front().x; }
  std::int64_t max_x() const { return offsets_.back().x; }

  friend bool operator==(const MemorySet&, const MemorySet&) = default;

 private:
  std::vector<Cell> offsets_;
};

/// A linear map V^M -> V given by one k x k block per offset: s(v) = sum_m s(m) v(m).
class LocalRule {
 public:
  LocalRule() = default;
  explicit LocalRule(std::map<Cell, Matrix> blocks) : blocks_(std::move(blocks)) {}

  /// Block for offset m; zero when m is not stored.
  Matrix at(Cell m, const Universe& u) const {
    auto it = blocks_.find(m);
    return it == blocks_.end() ? u.zero_matrix() : it->second;
  }
  const Matrix* find(Cell m) const {
    auto it = blocks_.find(m);
    return it == blocks_.end() ? nullptr : &it->second;
  }
  const std::map<Cell, Matrix>& blocks() const { return blocks_; }
  void set(Cell m, Matrix block) { blocks_[m] = std::move(block); }

  /// Same rule with exactly the offsets of `memory` (missing blocks become zero).
  /// Throws if a nonzero block sits outside `memory`.
  LocalRule on_memory(const MemorySet& memory, const Universe& u) const {
    std::map<Cell, Matrix> out;
    for (auto m : memory.offsets()) out.emplace(m, at(m, u));
    for (const auto& [m, b] : blocks_)
      if (!memory.contains(m) && !b.is_zero())
        throw ContractViolation("local rule has a nonzero block outside its memory set");
    return LocalRule(std::move(out));
  }

  bool is_zero() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](const auto& kv) { return kv.second.is_zero(); });
  }

  friend bool operator==(const LocalRule&, const LocalRule&) = default;

 private:
  std::map<Cell, Matrix> blocks_;
};

class RuleConfig {
 public:
  RuleConfig() = default;

  /// `left_default` is only meaningful for d = 1; when absent the left tail equals `default_rule`.
  RuleConfig(Universe u, MemorySet memory, LocalRule default_rule, std::map<Cell, LocalRule> overrides = {},
             std::optional<LocalRule> left_default = std::nullopt)
      : u_(u), memory_(std::move(memory)) {
    u_.validate();
    for (auto m : memory_.offsets())
      if (!u_.admits(m)) throw ContractViolation("memory offset " + m.str(2) + " not in Z^" + std::to_string(u_.d));
    right_ = normalize_rule(default_rule);
    left_ = left_default ? normalize_rule(*left_default) : right_;
    if (u_.d != 1 && !(left_ == right_))
      throw ContractViolation("distinct left/right tails are only supported for d = 1");
    for (auto& [g, r] : overrides) {
      if (!u_.admits(g)) throw ContractViolation("override cell " + g.str(2) + " not in Z^" + std::to_string(u_.d));
      LocalRule n = normalize_rule(r);
      if (!(n == tail_for(g))) overrides_.emplace(g, std::move(n));
    }
  }

  static RuleConfig constant(Universe u, MemorySet memory, LocalRule rule) {
    return RuleConfig(u, std::move(memory), std::move(rule));
  }

  const Universe& universe() const { return u_; }
  const MemorySet& memory() const { return memory_; }
  const LocalRule& default_rule() const { return right_; }
  const LocalRule& right_default() const { return right_; }
  const LocalRule& left_default() const { return left_; }
  bool two_sided() const { return !(left_ == right_); }
  const std::map<Cell, LocalRule>& overrides() const { return overrides_; }

  /// Tail rule that applies at g when g carries no override.
  const LocalRule& tail_for(Cell g) const { return (u_.d == 1 && g.x < 0) ? left_ : right_; }

  const LocalRule& rule_at(Cell g) const {
    auto it = overrides_.find(g);
    return it == overrides_.end() ? tail_for(g) : it->second;
  }

  /// s(g, m); zero when m is outside the memory set.
  Matrix entry(Cell g, Cell m) const { return rule_at(g).at(m, u_); }
  const Matrix* find_entry(Cell g, Cell m) const { return rule_at(g).find(m); }

  bool is_constant() const { return overrides_.empty() && !two_sided(); }

  /// For d = 1: smallest interval [lo, hi] outside of which every cell uses its
  /// side's tail rule and the tail does not change. Contains the split cells
  /// {-1, 0} when the tails differ. {0, 0} for a constant configuration.
  std::pair<std::int64_t, std::int64_t> singular_interval() const {
    std::int64_t lo = 0, hi = 0;
    bool any = false;
    auto take = [&](std::int64_t x) {
      lo = any ? std::min(lo, x) : x;
      hi = any ? std::max(hi, x) : x;
      any = true;
    };
    if (two_sided()) {
      take(-1);
      take(0);
    }
    for (const auto& [g, r] : overrides_) take(g.x);
    return {lo, hi};
  }

  /// Largest Chebyshev norm among override cells (and split cells for two-sided tails).
  std::int64_t override_radius() const {
    std::int64_t r = two_sided() ? 1 : 0;
    for (const auto& [g, rule] : overrides_) r = std::max(r, g.radius());
    return r;
  }

  /// Same configuration over a larger memory set (new offsets get zero blocks).
  RuleConfig with_memory(const MemorySet& bigger) const {
    std::map<Cell, LocalRule> ov;
    for (const auto& [g, r] : overrides_) ov.emplace(g, r.on_memory(bigger, u_));
    return RuleConfig(u_, bigger, right_.on_memory(bigger, u_), std::move(ov), left_.on_memory(bigger, u_));
  }

  friend bool operator==(const RuleConfig&, const RuleConfig&) = default;

 private:
  LocalRule normalize_rule(const LocalRule& r) const {
    for (const auto& [m, b] : r.blocks())
      if (b.rows() != static_cast<std::size_t>(u_.k) || b.cols() != static_cast<std::size_t>(u_.k) ||
          b.modulus() != u_.p)
        throw ContractViolation("local rule block must be k x k over GF(p)");
    return r.on_memory(memory_, u_);
  }

  Universe u_;
  MemorySet memory_;
  LocalRule left_;
  LocalRule right_;
  std::map<Cell, LocalRule> overrides_;
};

/// Drops offsets whose block is zero in every rule (keeps {0} if nothing remains).
inline RuleConfig trimmed(const RuleConfig& s) {
  const auto& u = s.universe();
  std::vector<Cell> keep;
  for (auto m : s.memory().offsets()) {
    bool used = !s.left_default().at(m, u).is_zero() || !s.right_default().at(m, u).is_zero();
    for (const auto& [g, r] : s.overrides())
      if (!used && !r.at(m, u).is_zero()) used = true;
    if (used) keep.push_back(m);
  }
  if (keep.empty()) keep.push_back(Cell{0});
  MemorySet mem(keep);
  auto restrict = [&](const LocalRule& r) {
    std::map<Cell, Matrix> b;
    for (auto m : mem.offsets()) b.emplace(m, r.at(m, u));
    return LocalRule(std::move(b));
  };
  std::map<Cell, LocalRule> ov;
  for (const auto& [g, r] : s.overrides()) ov.emplace(g, restrict(r));
  return RuleConfig(u, mem, restrict(s.right_default()), std::move(ov), restrict(s.left_default()));
}

/// Equality of the maps sigma_s and sigma_t, i.e. of all entries s(g, m).
inline bool equivalent(const RuleConfig& s, const RuleConfig& t) { return trimmed(s) == trimmed(t); }

/// Convenience builders for common rules.
namespace rules {

/// Scalar (k = 1) local rule from offset -> coefficient pairs.
inline LocalRule scalar(const Universe& u, const std::vector<std::pair<std::int64_t, std::int64_t>>& coeffs) {
  std::map<Cell, Matrix> b;
  for (auto [m, c] : coeffs) b.emplace(Cell{m}, Matrix::from_rows({{c}}, u.p));
  return LocalRule(std::move(b));
}

inline RuleConfig identity(const Universe& u) {
  return RuleConfig::constant(u, MemorySet(), LocalRule({{Cell{0}, u.identity_matrix()}}));
}

/// sigma(x)(g) = x(g + offset).
inline RuleConfig shift(const Universe& u, Cell offset) {
  return RuleConfig::constant(u, MemorySet({offset}), LocalRule({{offset, u.identity_matrix()}}));
}

/// Bijective counterexample over GF(2): f(u, v) = v for n <= 0, g(u, v) = u + v for n >= 1, M = {-1, 0}.
inline RuleConfig ex_s0() {
  Universe u(1, 1, 2);
  auto f = scalar(u, {{-1, 0}, {0, 1}});
  auto g = scalar(u, {{-1, 1}, {0, 1}});
  return RuleConfig(u, MemorySet::range(-1, 0), g, {{Cell{0}, f}}, f);
}

/// Its dual: f*(u, v) = u for n <= -1, g*(u, v) = u + v for n >= 0, N = {0, 1}.
inline RuleConfig ex_s0_dual() {
  Universe u(1, 1, 2);
  auto f = scalar(u, {{0, 1}, {1, 0}});
  auto g = scalar(u, {{0, 1}, {1, 1}});
  return RuleConfig(u, MemorySet::range(0, 1), g, {}, f);
}

/// Constant tail of ex_s0: x(n - 1) + x(n) over GF(2).
inline RuleConfig xor_tail() {
  Universe u(1, 1, 2);
  return RuleConfig::constant(u, MemorySet::range(-1, 0), scalar(u, {{-1, 1}, {0, 1}}));
}

/// GF(3), M = {0}, multiplication by 1 everywhere except by 2 at cell 0.
inline RuleConfig gf3_diagonal() {
  Universe u(1, 1, 3);
  return RuleConfig(u, MemorySet(), scalar(u, {{0, 1}}), {{Cell{0}, scalar(u, {{0, 2}})}});
}

}  // namespace rules

}  // namespace nucalab
