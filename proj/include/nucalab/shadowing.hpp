#pragma once

/// @file shadowing.hpp
/// @brief The standard metric on one-dimensional configurations, column factors of a
/// commuting family of rules, pseudo-orbits and their exact shadowing.
///
/// Generators tau_1..tau_r act through the monoid N^r: tau_alpha = tau_1^{alpha_1} ... tau_r^{alpha_r}.
/// Boxes in N^r are given by their extents; {0..e_1-1} x ... x {0..e_r-1}, walked lexicographically.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nucalab/inverse.hpp"

namespace nucalab {

/// Exact dyadic number: 0 or 2^exp.
struct Dyadic {
  bool zero = false;
  std::int64_t exp = 0;

  static Dyadic nil() { return {true, 0}; }
  static Dyadic pow2(std::int64_t e) { return {false, e}; }

  double to_double() const { return zero ? 0.0 : std::ldexp(1.0, static_cast<int>(exp)); }
  std::string str() const {
    if (zero) return "0";
    if (exp == 0) return "1";
    return "2^" + std::to_string(exp);
  }

  friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.zero == b.zero && (a.zero || a.exp == b.exp); }
  friend bool operator<(const Dyadic& a, const Dyadic& b) {
    if (b.zero) return false;
    if (a.zero) return true;
    return a.exp < b.exp;
  }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return a < b || a == b; }
  friend Dyadic max(const Dyadic& a, const Dyadic& b) { return a < b ? b : a; }
};

/// Parses "0", "1", "2^-3", "1/8" or "0.125". Anything that is not 0 or a power of two throws.
inline Dyadic parse_dyadic(std::string_view s) {
  auto fail = [&] { return ContractViolation("not a dyadic power of two: '" + std::string(s) + "'"); };
  auto to_int = [&](std::string_view t) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(std::string(t), &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != t.size()) throw fail();
    return static_cast<std::int64_t>(v);
  };
  if (s.empty()) throw fail();
  if (s.rfind("2^", 0) == 0) return Dyadic::pow2(to_int(s.substr(2)));
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = to_int(s.substr(0, slash));
    auto den = to_int(s.substr(slash + 1));
    if (num <= 0 || den <= 0 || (num & (num - 1)) || (den & (den - 1))) throw fail();
    return Dyadic::pow2(static_cast<std::int64_t>(std::log2(static_cast<double>(num))) -
                        static_cast<std::int64_t>(std::log2(static_cast<double>(den))));
  }
  double v = 0;
  try {
    std::size_t used = 0;
    v = std::stod(std::string(s), &used);
    if (used != s.size()) throw fail();
  } catch (const ContractViolation&) {
    throw;
  } catch (const std::exception&) {
    throw fail();
  }
  if (v == 0) return Dyadic::nil();
  int e = 0;
  double mant = std::frexp(v, &e);
  if (mant != 0.5) throw fail();
  return Dyadic::pow2(e - 1);
}

// --- metric -----------------------------------------------------------------

/// Smallest radius n with x(n) != y(n) or x(-n) != y(-n); nullopt when x = y.
inline std::optional<std::int64_t> first_difference(const EvPerConfig& x, const EvPerConfig& y) {
  if (x.k() != y.k()) throw ContractViolation("metric: alphabet dimension mismatch");
  if (x == y) return std::nullopt;
  for (std::int64_t n = 0;; ++n)
    if (x.at(n) != y.at(n) || x.at(-n) != y.at(-n)) return n;
}

/// d(x, y) = 2^-n with n the largest radius such that x and y agree on E_n = [-n, n];
/// d = 1 when they differ at cell 0.
inline Dyadic metric(const EvPerConfig& x, const EvPerConfig& y) {
  auto j = first_difference(x, y);
  if (!j) return Dyadic::nil();
  return Dyadic::pow2(-std::max<std::int64_t>(*j - 1, 0));
}

/// Smallest n with 2^-n < epsilon.
inline std::int64_t radius_below(Dyadic epsilon) {
  if (epsilon.zero) throw ContractViolation("epsilon must be positive");
  return std::max<std::int64_t>(0, 1 - epsilon.exp);
}

// --- generators -------------------------------------------------------------

/// Largest memory radius m of the generators.
inline std::int64_t generator_radius(const std::vector<RuleConfig>& gens) {
  std::int64_t m = 0;
  for (const auto& g : gens) m = std::max(m, g.memory().radius());
  return m;
}

/// C = 2^{m N r}: every tau_alpha with |alpha| <= N r is C-Lipschitz.
inline Dyadic lipschitz_bound(const std::vector<RuleConfig>& gens, int n) {
  return Dyadic::pow2(generator_radius(gens) * n * static_cast<std::int64_t>(gens.size()));
}

/// Exact pairwise commutation check.
inline bool generators_commute(const std::vector<RuleConfig>& gens) {
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j)
      if (!equivalent(compose(gens[i], gens[j]), compose(gens[j], gens[i]))) return false;
  return true;
}

/// tau^e for each exponent e (always a commuting family).
inline std::vector<RuleConfig> powers_of(const RuleConfig& tau, const std::vector<int>& exponents) {
  std::vector<RuleConfig> out;
  for (int e : exponents) {
    if (e < 1) throw ContractViolation("generator exponents must be >= 1");
    RuleConfig p = tau;
    for (int i = 1; i < e; ++i) p = trimmed(compose(tau, p));
    out.push_back(std::move(p));
  }
  return out;
}

using MultiIndex = std::vector<int>;

/// All multi-indices of the box with the given extents, in lexicographic order.
inline std::vector<MultiIndex> box_indices(const std::vector<int>& extents) {
  for (int e : extents)
    if (e < 1) throw ContractViolation("box extents must be >= 1");
  std::vector<MultiIndex> out;
  MultiIndex a(extents.size(), 0);
  for (;;) {
    out.push_back(a);
    std::size_t i = a.size();
    while (i > 0 && ++a[i - 1] == extents[i - 1]) a[--i] = 0;
    if (i == 0) return out;
  }
}

inline std::string index_str(const MultiIndex& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

namespace detail {

inline void require_family(const std::vector<RuleConfig>& gens) {
  if (gens.empty()) throw ContractViolation("at least one generator is required");
  for (const auto& g : gens) {
    require_d1(g, "shadowing");
    if (!(g.universe() == gens.front().universe())) throw ContractViolation("generators must share a universe");
  }
  if (!generators_commute(gens)) throw ContractViolation("generators must commute");
}

/// The index with the last nonzero coordinate decremented, and that coordinate.
inline std::pair<MultiIndex, std::size_t> predecessor(const MultiIndex& a) {
  std::size_t i = a.size();
  while (a[i - 1] == 0) --i;
  MultiIndex p = a;
  --p[i - 1];
  return {p, i - 1};
}

inline int degree(const MultiIndex& a) {
  int d = 0;
  for (int v : a) d += v;
  return d;
}

/// tau_alpha as a rule for every alpha of the box.
inline std::map<MultiIndex, RuleConfig> monoid_rules(const std::vector<RuleConfig>& gens,
                                                     const std::vector<MultiIndex>& box) {
  std::map<MultiIndex, RuleConfig> out;
  for (const auto& a : box) {
    if (detail::degree(a) == 0) {
      out.emplace(a, rules::identity(gens.front().universe()));
      continue;
    }
    auto [p, i] = predecessor(a);
    out.emplace(a, trimmed(compose(gens[i], out.at(p))));
  }
  return out;
}

inline std::vector<Cell> window_cells(std::int64_t radius) { return interval(-radius, radius); }

}  // namespace detail

// --- column factor ----------------------------------------------------------

/// Lambda restricted to a box Omega: the image of x |-> (tau_alpha(x)|_E)_{alpha in Omega}
/// inside (V^E)^Omega, coordinates ordered (alpha, cell of E, coordinate).
struct ColumnFactor {
  std::vector<Cell> window;               // E
  std::vector<int> extents;               // Omega
  std::vector<MultiIndex> indices;        // Omega, lexicographic
  std::vector<Cell> dependence;           // W: cells of x that matter
  Matrix map;                             // (V^E)^Omega <- V^W
  std::vector<Vec> basis;                 // images of unit configurations at pivot columns
  std::size_t dimension = 0;
  std::size_t sft_window = 0;             // N used for the sub-box check
  std::size_t shift_violations = 0;

  /// Is `v` in Lambda|_Omega?
  bool contains(const Vec& v) const {
    if (v.size() != map.rows()) return false;
    Matrix aug(map.rows(), map.cols() + 1, map.modulus());
    for (std::size_t i = 0; i < map.rows(); ++i) {
      for (std::size_t j = 0; j < map.cols(); ++j) aug.set(i, j, map(i, j));
      aug.set(i, map.cols(), v[i]);
    }
    return rank(aug) == dimension;
  }
};

namespace detail {

inline ColumnFactor column_image(const std::vector<RuleConfig>& gens, std::vector<Cell> e,
                                 const std::vector<int>& extents) {
  const auto& u = gens.front().universe();
  const std::size_t k = static_cast<std::size_t>(u.k);
  ColumnFactor cf;
  std::sort(e.begin(), e.end());
  cf.window = e;
  cf.extents = extents;
  cf.indices = box_indices(extents);
  int max_deg = 0;
  for (const auto& a : cf.indices) max_deg = std::max(max_deg, degree(a));
  const std::int64_t reach = generator_radius(gens) * max_deg;
  cf.dependence = interval(e.front().x - reach, e.back().x + reach);
  auto taus = monoid_rules(gens, cf.indices);
  const std::size_t block = e.size() * k;
  cf.map = Matrix(cf.indices.size() * block, cf.dependence.size() * k, u.p);
  for (std::size_t ai = 0; ai < cf.indices.size(); ++ai) {
    Matrix b = linear_block(taus.at(cf.indices[ai]), e, cf.dependence);
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) cf.map.set(ai * block + i, j, b(i, j));
  }
  auto piv = pivot_columns(cf.map);
  cf.dimension = piv.size();
  for (auto c : piv) {
    Vec col(cf.map.rows());
    for (std::size_t i = 0; i < cf.map.rows(); ++i) col[i] = cf.map(i, c);
    cf.basis.push_back(std::move(col));
  }
  return cf;
}

}  // namespace detail

/// Column factor of the generators on window E over the box Omega, with the sub-box
/// consistency check: every basis element restricted to each translate beta + F_N inside
/// Omega must lie in Lambda|_{F_N}. Violations are counted, not thrown.
inline ColumnFactor column_factor(const std::vector<RuleConfig>& gens, const std::vector<Cell>& e,
                                  const std::vector<int>& extents, int sft_window = 3) {
  detail::require_family(gens);
  if (e.empty()) throw ContractViolation("column_factor: window must be nonempty");
  if (extents.size() != gens.size()) throw ContractViolation("column_factor: box rank != generator count");
  if (sft_window < 1) throw ContractViolation("column_factor: N must be >= 1");
  ColumnFactor cf = detail::column_image(gens, e, extents);
  cf.sft_window = static_cast<std::size_t>(sft_window);

  std::vector<int> sub(extents.size());
  for (std::size_t i = 0; i < sub.size(); ++i) sub[i] = std::min(sft_window, extents[i]);
  ColumnFactor small = detail::column_image(gens, e, sub);
  std::vector<int> shifts(extents.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) shifts[i] = extents[i] - sub[i] + 1;
  std::map<MultiIndex, std::size_t> pos;
  for (std::size_t i = 0; i < cf.indices.size(); ++i) pos.emplace(cf.indices[i], i);
  const std::size_t block = cf.window.size() * static_cast<std::size_t>(gens.front().universe().k);

  for (const auto& b : cf.basis) {
    for (const auto& beta : box_indices(shifts)) {
      Vec v;
      for (const auto& g : small.indices) {
        MultiIndex a = g;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += beta[i];
        auto off = pos.at(a) * block;
        v.insert(v.end(), b.begin() + static_cast<std::ptrdiff_t>(off),
                 b.begin() + static_cast<std::ptrdiff_t>(off + block));
      }
      if (!small.contains(v)) ++cf.shift_violations;
    }
  }
  return cf;
}

// --- pseudo-orbits ----------------------------------------------------------

struct Perturbation {
  enum class Kind { None, Edge, Random };
  Kind kind = Kind::None;
  std::uint64_t seed = 0;
};

inline const char* to_string(Perturbation::Kind k) {
  switch (k) {
    case Perturbation::Kind::None: return "none";
    case Perturbation::Kind::Edge: return "edge";
    case Perturbation::Kind::Random: return "random";
  }
  return "?";
}

inline std::optional<Perturbation::Kind> parse_perturbation(std::string_view s) {
  for (auto k : {Perturbation::Kind::None, Perturbation::Kind::Edge, Perturbation::Kind::Random})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct PseudoOrbit {
  std::vector<RuleConfig> generators;
  std::vector<int> extents;                 // horizon box F
  std::map<MultiIndex, EvPerConfig> points;  // x_alpha
  Dyadic delta;
  std::int64_t perturbation_radius = 0;     // perturbed cells satisfy |c| >= this
};

/// Largest step error d(tau_i(x_alpha), x_{alpha + e_i}) over the horizon.
inline Dyadic max_step_error(const PseudoOrbit& o) {
  Dyadic worst = Dyadic::nil();
  for (const auto& [a, x] : o.points) {
    for (std::size_t i = 0; i < o.generators.size(); ++i) {
      MultiIndex b = a;
      ++b[i];
      auto it = o.points.find(b);
      if (it == o.points.end()) continue;
      worst = max(worst, metric(apply_evper(o.generators[i], x), it->second));
    }
  }
  return worst;
}

/// Walks the horizon box, applying one generator to the predecessor of each index and then
/// perturbing a single cell far enough out that every step error is below delta = 2^-j.
/// Edge perturbations add e_1 at +R and -R on alternate steps; random ones add a random
/// nonzero vector within [R, R + 3] on a random side. With r = 1, R = j + 2; with more generators the radius also
/// absorbs the spread m * |alpha| of earlier perturbations. The result is validated exactly.
inline PseudoOrbit generate_pseudo_orbit(const std::vector<RuleConfig>& gens, const EvPerConfig& x0, Dyadic delta,
                                         const std::vector<int>& extents, Perturbation pert = {}) {
  detail::require_family(gens);
  if (delta.zero || delta.exp > 0) throw ContractViolation("delta must be 2^-j with j >= 0");
  if (extents.size() != gens.size()) throw ContractViolation("horizon box rank != generator count");
  const auto& u = gens.front().universe();
  if (x0.k() != u.k) throw ContractViolation("x0: alphabet dimension mismatch");
  const std::int64_t j = -delta.exp;
  auto box = box_indices(extents);
  std::int64_t spread = 0;
  if (gens.size() > 1)
    for (const auto& a : box) spread = std::max<std::int64_t>(spread, generator_radius(gens) * (detail::degree(a) + 1));

  PseudoOrbit o{gens, extents, {}, delta, j + 2 + spread};
  std::mt19937_64 rng(pert.seed);
  const auto f = u.field();
  for (const auto& a : box) {
    if (detail::degree(a) == 0) {
      o.points.emplace(a, x0);
      continue;
    }
    auto [p, i] = detail::predecessor(a);
    EvPerConfig x = apply_evper(gens[i], o.points.at(p));
    if (pert.kind != Perturbation::Kind::None) {
      std::int64_t cell = o.perturbation_radius;
      Vec dv(static_cast<std::size_t>(u.k), 0);
      if (pert.kind == Perturbation::Kind::Edge) {
        dv[0] = 1;
        if (detail::degree(a) % 2 == 0) cell = -cell;
      } else {
        cell += static_cast<std::int64_t>(rng() % 4);
        if (rng() % 2) cell = -cell;
        while (nucalab::is_zero(dv))
          for (auto& c : dv) c = static_cast<Scalar>(rng() % u.p);
      }
      x = x.with_value(cell, add(f, x.at(cell), dv)).compacted();
    }
    o.points.emplace(a, std::move(x));
  }
  auto err = max_step_error(o);
  if (!(err < delta)) throw ContractViolation("generated pseudo-orbit has step error " + err.str());
  return o;
}

// --- shadowing --------------------------------------------------------------

struct ShadowStep {
  MultiIndex alpha;
  Dyadic distance;  // d(tau_alpha(x), x_alpha)
};

struct ShadowReport {
  bool ok = false;
  std::string message;
  std::int64_t n0 = 0;
  Dyadic epsilon;
  Dyadic lipschitz;
  Dyadic required_delta;
  bool precondition_met = false;  // orbit delta <= required_delta
  int sft_window = 0;
  std::int64_t solve_radius = 0;  // unknowns are x on [-solve_radius, solve_radius]
  std::optional<EvPerConfig> point;
  std::vector<ShadowStep> steps;
  Dyadic max_distance = Dyadic::nil();
};

/// delta_max = 1 / (2^{n0} C N r), rounded down to a power of two.
inline Dyadic required_delta(const std::vector<RuleConfig>& gens, Dyadic epsilon, int sft_window) {
  const std::int64_t n0 = radius_below(epsilon);
  const auto c = lipschitz_bound(gens, sft_window);
  const auto nr = static_cast<std::uint64_t>(sft_window) * gens.size();
  std::int64_t log_nr = 0;
  while ((std::uint64_t{1} << log_nr) < nr) ++log_nr;
  return Dyadic::pow2(-(n0 + c.exp + log_nr));
}

/// Finds x with (tau_alpha(x))|_{E_{n0}} = x_alpha|_{E_{n0}} for every alpha of the horizon:
/// x agrees with x_0 outside [-R, R], R = n0 + m * max|alpha|, and the values on [-R, R]
/// solve the affine system. Every distance is then re-verified by exact evaluation.
/// An orbit whose delta exceeds 1/(2^n0 C N r) is still attempted; `precondition_met` records it.
inline ShadowReport shadow_point(const PseudoOrbit& orbit, Dyadic epsilon, int sft_window = 3) {
  const auto& gens = orbit.generators;
  detail::require_family(gens);
  if (sft_window < 1) throw ContractViolation("N must be >= 1");
  ShadowReport rep;
  rep.epsilon = epsilon;
  rep.n0 = radius_below(epsilon);
  rep.lipschitz = lipschitz_bound(gens, sft_window);
  rep.required_delta = required_delta(gens, epsilon, sft_window);
  rep.sft_window = sft_window;
  rep.precondition_met = orbit.delta <= rep.required_delta;

  const auto& u = gens.front().universe();
  const std::size_t k = static_cast<std::size_t>(u.k);
  const auto f = u.field();
  auto box = box_indices(orbit.extents);
  int max_deg = 0;
  for (const auto& a : box) max_deg = std::max(max_deg, detail::degree(a));
  rep.solve_radius = rep.n0 + generator_radius(gens) * max_deg;
  auto rows = detail::window_cells(rep.n0);
  auto cols = detail::window_cells(rep.solve_radius);
  auto taus = detail::monoid_rules(gens, box);
  const EvPerConfig& x0 = orbit.points.at(MultiIndex(gens.size(), 0));

  // tau_alpha(x0 + z) = tau_alpha(x0) + tau_alpha(z) with z supported on the solve window.
  const std::size_t block = rows.size() * k;
  Matrix a(box.size() * block, cols.size() * k, u.p);
  Vec rhs(a.rows(), 0);
  for (std::size_t ai = 0; ai < box.size(); ++ai) {
    const auto& tau = taus.at(box[ai]);
    Matrix b = linear_block(tau, rows, cols);
    EvPerConfig base = apply_evper(tau, x0);
    const EvPerConfig& target = orbit.points.at(box[ai]);
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) a.set(ai * block + i, j, b(i, j));
    for (std::size_t c = 0; c < rows.size(); ++c) {
      const Vec& want = target.at(rows[c].x);
      const Vec& have = base.at(rows[c].x);
      for (std::size_t t = 0; t < k; ++t)
        rhs[ai * block + c * k + t] = f.reduce(static_cast<std::int64_t>(want[t]) - have[t]);
    }
  }
  auto sol = solve_affine(a, rhs);
  if (!sol.particular) {
    rep.message = "affine system infeasible: delta too large for the SFT window or the solve window too small";
    return rep;
  }
  EvPerConfig x = x0.widened(-rep.solve_radius, rep.solve_radius);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Vec z(sol.particular->begin() + static_cast<std::ptrdiff_t>(c * k),
          sol.particular->begin() + static_cast<std::ptrdiff_t>((c + 1) * k));
    x = x.with_value(cols[c].x, add(f, x.at(cols[c].x), z));
  }
  x = x.compacted();

  const Dyadic bound = Dyadic::pow2(-rep.n0);
  rep.ok = true;
  for (const auto& al : box) {
    Dyadic d = metric(apply_evper(taus.at(al), x), orbit.points.at(al));
    rep.steps.push_back({al, d});
    rep.max_distance = max(rep.max_distance, d);
    if (!(d <= bound) || !(d < epsilon)) {
      rep.ok = false;
      rep.message = "re-verification failed at alpha = " + index_str(al) + ": distance " + d.str();
    }
  }
  rep.point = std::move(x);
  if (rep.ok) rep.message = "shadowed";
  return rep;
}

}  // namespace nucalab
