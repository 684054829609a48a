#pragma once

/// @file config.hpp
/// @brief Finitely supported and eventually periodic configurations.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nucalab/rule.hpp"

namespace nucalab {

/// Configuration asymptotic to 0: a finite map cell -> nonzero vector.
class FinSuppConfig {
 public:
  FinSuppConfig() = default;
  explicit FinSuppConfig(int k) : k_(k) {}

  static FinSuppConfig delta(int k, Cell g, Vec v) {
    FinSuppConfig x(k);
    x.set(g, std::move(v));
    return x;
  }

  int k() const { return k_; }
  const std::map<Cell, Vec>& values() const { return values_; }
  bool is_zero() const { return values_.empty(); }

  Vec at(Cell g) const {
    auto it = values_.find(g);
    return it == values_.end() ? Vec(static_cast<std::size_t>(k_), 0) : it->second;
  }

  /// Stores v at g; zero vectors erase the cell.
  void set(Cell g, Vec v) {
    if (v.size() != static_cast<std::size_t>(k_)) throw ContractViolation("vector length != k");
    if (nucalab::is_zero(v))
      values_.erase(g);
    else
      values_[g] = std::move(v);
  }

  FinSuppConfig plus(const FinSuppConfig& o, const PrimeField& f) const {
    FinSuppConfig r = *this;
    for (const auto& [g, v] : o.values_) r.set(g, add(f, r.at(g), v));
    return r;
  }

  friend bool operator==(const FinSuppConfig&, const FinSuppConfig&) = default;

 private:
  int k_ = 1;
  std::map<Cell, Vec> values_;
};

/// One-dimensional configuration with a finite core on [core_start, core_start + core.size() - 1]
/// and periodic tails. Cell core_start - 1 - j holds left_period[j mod L]; cell
/// core_end + 1 + j holds right_period[j mod R].
class EvPerConfig {
 public:
  EvPerConfig() = default;
  EvPerConfig(int k, std::int64_t core_start, std::vector<Vec> core, std::vector<Vec> left_period,
              std::vector<Vec> right_period)
      : k_(k),
        core_start_(core_start),
        core_(std::move(core)),
        left_(std::move(left_period)),
        right_(std::move(right_period)) {
    if (left_.empty() || right_.empty()) throw ContractViolation("periods must be nonempty");
    auto check = [&](const std::vector<Vec>& vs) {
      for (const auto& v : vs)
        if (v.size() != static_cast<std::size_t>(k_)) throw ContractViolation("vector length != k");
    };
    check(core_);
    check(left_);
    check(right_);
  }

  static EvPerConfig constant(Vec v) {
    int k = static_cast<int>(v.size());
    return EvPerConfig(k, 0, {}, {v}, {v});
  }
  static EvPerConfig zero(int k) { return constant(Vec(static_cast<std::size_t>(k), 0)); }
  static EvPerConfig from_finsupp(const FinSuppConfig& x) {
    Vec z(static_cast<std::size_t>(x.k()), 0);
    if (x.is_zero()) return zero(x.k());
    auto a = x.values().begin()->first.x;
    auto b = x.values().rbegin()->first.x;
    std::vector<Vec> core;
    for (auto n = a; n <= b; ++n) core.push_back(x.at(Cell{n}));
    return EvPerConfig(x.k(), a, std::move(core), {z}, {z});
  }

  int k() const { return k_; }
  std::int64_t core_start() const { return core_start_; }
  std::int64_t core_end() const { return core_start_ + static_cast<std::int64_t>(core_.size()) - 1; }
  const std::vector<Vec>& core() const { return core_; }
  const std::vector<Vec>& left_period() const { return left_; }
  const std::vector<Vec>& right_period() const { return right_; }

  const Vec& at(std::int64_t n) const {
    if (n < core_start_) {
      auto j = static_cast<std::size_t>(core_start_ - 1 - n);
      return left_[j % left_.size()];
    }
    if (n > core_end()) {
      auto j = static_cast<std::size_t>(n - core_end() - 1);
      return right_[j % right_.size()];
    }
    return core_[static_cast<std::size_t>(n - core_start_)];
  }

  bool is_zero() const {
    auto z = [](const std::vector<Vec>& vs) {
      return std::all_of(vs.begin(), vs.end(), [](const Vec& v) { return nucalab::is_zero(v); });
    };
    return z(core_) && z(left_) && z(right_);
  }

  /// Same configuration with the core extended to cover [a, b].
  EvPerConfig widened(std::int64_t a, std::int64_t b) const {
    a = std::min(a, core_start_);
    b = std::max(b, core_end());
    std::vector<Vec> core;
    for (auto n = a; n <= b; ++n) core.push_back(at(n));
    std::size_t L = left_.size(), R = right_.size();
    std::vector<Vec> left, right;
    for (std::size_t j = 0; j < L; ++j) left.push_back(at(a - 1 - static_cast<std::int64_t>(j)));
    for (std::size_t j = 0; j < R; ++j) right.push_back(at(b + 1 + static_cast<std::int64_t>(j)));
    return EvPerConfig(k_, a, std::move(core), std::move(left), std::move(right));
  }

  /// Copy with the value at n replaced.
  EvPerConfig with_value(std::int64_t n, Vec v) const {
    EvPerConfig w = widened(n, n);
    w.core_[static_cast<std::size_t>(n - w.core_start_)] = std::move(v);
    return w;
  }

  /// Shortest equivalent representation: minimal periods, core trimmed where
  /// it agrees with the periodic extension.
  EvPerConfig compacted() const {
    EvPerConfig c = *this;
    c.left_ = minimal_period(c.left_);
    c.right_ = minimal_period(c.right_);
    while (!c.core_.empty() && c.core_.back() == c.right_.back()) {
      std::rotate(c.right_.rbegin(), c.right_.rbegin() + 1, c.right_.rend());
      c.core_.pop_back();
    }
    while (!c.core_.empty() && c.core_.front() == c.left_.back()) {
      std::rotate(c.left_.rbegin(), c.left_.rbegin() + 1, c.left_.rend());
      c.core_.erase(c.core_.begin());
      ++c.core_start_;
    }
    return c;
  }

  /// Value equality (independent of representation).
  friend bool operator==(const EvPerConfig& a, const EvPerConfig& b) {
    if (a.k_ != b.k_) return false;
    auto lo = std::min(a.core_start_, b.core_start_) -
              static_cast<std::int64_t>(std::lcm(a.left_.size(), b.left_.size()));
    auto hi = std::max(a.core_end(), b.core_end()) +
              static_cast<std::int64_t>(std::lcm(a.right_.size(), b.right_.size()));
    for (auto n = lo; n <= hi; ++n)
      if (a.at(n) != b.at(n)) return false;
    return true;
  }

 private:
  static std::vector<Vec> minimal_period(const std::vector<Vec>& p) {
    const std::size_t n = p.size();
    for (std::size_t q = 1; q < n; ++q) {
      if (n % q) continue;
      bool ok = true;
      for (std::size_t i = q; i < n && ok; ++i) ok = p[i] == p[i - q];
      if (ok) return {p.begin(), p.begin() + static_cast<std::ptrdiff_t>(q)};
    }
    return p;
  }

  int k_ = 1;
  std::int64_t core_start_ = 0;
  std::vector<Vec> core_;
  std::vector<Vec> left_{Vec{0}};
  std::vector<Vec> right_{Vec{0}};
};

}  // namespace nucalab
