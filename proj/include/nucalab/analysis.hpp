#pragma once

/// @file analysis.hpp
/// @brief Verdicts for pre-injectivity, injectivity, surjectivity, post-surjectivity,
/// their stable variants and invertibility, each backed by a re-checkable certificate.
///
/// Direct evidence on s is combined with the partner evidence on s* through the
/// duality clauses
///   pre-injective(s)          <=> surjective(s*)
///   injective(s)              <=> post-surjective(s*)
///   stably injective(s)       <=> stably post-surjective(s*)
///   invertible(s)             <=> invertible(s*).
/// Conflicting definitive verdicts raise ContradictionError.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nucalab/duality.hpp"
#include "nucalab/inverse.hpp"
#include "nucalab/verdict.hpp"

namespace nucalab {

struct AnalysisBounds {
  int n_max = 8;          // windows E_n, n <= n_max
  int mem_bound = 3;      // inverse searches: memory within [-mem_bound, mem_bound]
  int support_bound = 4;  // inverse searches: overrides within [-support_bound, support_bound]
  int max_period = 8;     // eventually periodic kernel search: periods 1..max_period per side
};

namespace detail {

struct NonzeroSpan {
  bool zero = true;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Smallest and largest offset carrying a nonzero block (d = 1).
inline NonzeroSpan nonzero_span(const LocalRule& r) {
  NonzeroSpan s;
  for (const auto& [m, b] : r.blocks()) {
    if (b.is_zero()) continue;
    s.lo = s.zero ? m.x : std::min(s.lo, m.x);
    s.hi = s.zero ? m.x : std::max(s.hi, m.x);
    s.zero = false;
  }
  return s;
}

inline FinSuppConfig finsupp_from(const std::vector<Cell>& cells, const Vec& x, int k) {
  FinSuppConfig z(k);
  const auto kk = static_cast<std::ptrdiff_t>(k);
  for (std::size_t c = 0; c < cells.size(); ++c)
    z.set(cells[c], Vec(x.begin() + static_cast<std::ptrdiff_t>(c) * kk, x.begin() + static_cast<std::ptrdiff_t>(c + 1) * kk));
  return z;
}

/// A nonzero finitely supported kernel element supported in E_n, if any.
inline std::optional<FinSuppConfig> window_kernel(const RuleConfig& s, std::int64_t n) {
  auto cols = box(s.universe().d, n);
  auto basis = kernel_basis(linear_block(s, affected_cells(s, cols), cols));
  if (basis.empty()) return std::nullopt;
  return finsupp_from(cols, basis.front(), s.universe().k);
}

inline std::int64_t interval_radius(std::int64_t a, std::int64_t b) { return std::max(std::llabs(a), std::llabs(b)); }

struct SupportReduction {
  cert::RecurrenceWindow window;
  std::optional<FinSuppConfig> witness;
};

/// When the right tail's lowest nonzero block and the left tail's highest nonzero block
/// are invertible, every finitely supported kernel element is supported in
/// [lo + hL, hi + lR] ([lo, hi] = singular interval).
inline std::optional<SupportReduction> support_reduction(const RuleConfig& s) {
  if (s.universe().d != 1) return std::nullopt;
  const auto& u = s.universe();
  auto rs = nonzero_span(s.right_default());
  auto ls = nonzero_span(s.left_default());
  if (rs.zero || ls.zero) return std::nullopt;
  if (!inverse(s.right_default().at(Cell{rs.lo}, u)) || !inverse(s.left_default().at(Cell{ls.hi}, u)))
    return std::nullopt;
  auto [lo, hi] = s.singular_interval();
  SupportReduction out;
  out.window = {cert::RecurrenceWindow::Kind::Support, lo + ls.hi, hi + rs.lo, 0};
  if (out.window.lo > out.window.hi) return out;
  auto cols = interval(out.window.lo, out.window.hi);
  auto basis = kernel_basis(linear_block(s, affected_cells(s, cols), cols));
  out.window.kernel_dim = basis.size();
  if (!basis.empty()) out.witness = finsupp_from(cols, basis.front(), u.k);
  return out;
}

struct ExtensionReduction {
  cert::RecurrenceWindow window;
  std::optional<EvPerConfig> witness;
};

/// Rows n of the interval system on [a, b]: cells whose nonzero reads all lie in [a, b].
inline std::vector<Cell> interior_rows(const RuleConfig& s, std::int64_t a, std::int64_t b) {
  std::vector<Cell> rows;
  for (auto n = a - s.memory().max_x(); n <= b - s.memory().min_x(); ++n) {
    auto sp = nonzero_span(s.rule_at(Cell{n}));
    if (sp.zero || (n + sp.lo >= a && n + sp.hi <= b)) rows.push_back(Cell{n});
  }
  return rows;
}

/// When the right tail's highest nonzero block and the left tail's lowest nonzero block
/// are invertible, each kernel element of sigma_s is the unique recurrence extension of
/// a solution of the interval system on W = [lo + mlo - D, hi + mhi + D]. Nontrivial
/// solutions are extended until the recurrence state repeats on each side.
inline std::optional<ExtensionReduction> extension_reduction(const RuleConfig& s, std::size_t max_steps = 1u << 14) {
  if (s.universe().d != 1) return std::nullopt;
  const auto& u = s.universe();
  const auto f = u.field();
  const std::size_t k = static_cast<std::size_t>(u.k);
  auto rs = nonzero_span(s.right_default());
  auto ls = nonzero_span(s.left_default());
  if (rs.zero || ls.zero) return std::nullopt;
  auto r_top = inverse(s.right_default().at(Cell{rs.hi}, u));
  auto l_bottom = inverse(s.left_default().at(Cell{ls.lo}, u));
  if (!r_top || !l_bottom) return std::nullopt;

  auto [lo, hi] = s.singular_interval();
  const auto mlo = s.memory().min_x(), mhi = s.memory().max_x();
  const auto D = mhi - mlo + 1;
  const auto A = lo + mlo - D, B = hi + mhi + D;
  auto cols = interval(A, B);
  auto basis = kernel_basis(linear_block(s, interior_rows(s, A, B), cols));
  ExtensionReduction out{{cert::RecurrenceWindow::Kind::Extension, A, B, basis.size()}, std::nullopt};
  if (basis.empty()) return out;

  std::map<std::int64_t, Vec> x;
  for (std::size_t c = 0; c < cols.size(); ++c)
    x[cols[c].x] = Vec(basis.front().begin() + static_cast<std::ptrdiff_t>(c * k),
                       basis.front().begin() + static_cast<std::ptrdiff_t>((c + 1) * k));

  auto next = [&](const LocalRule& rule, const Matrix& lead_inv, std::int64_t n, std::int64_t skip) {
    Vec acc(k, 0);
    for (const auto& [m, b] : rule.blocks()) {
      if (m.x == skip || b.is_zero()) continue;
      accumulate(f, acc, b, x.at(n + m.x));
    }
    Vec neg(k);
    for (std::size_t i = 0; i < k; ++i) neg[i] = f.neg(acc[i]);
    Vec out_v(k, 0);
    accumulate(f, out_v, lead_inv, neg);
    return out_v;
  };
  // Returns (i, period) with the periodic part starting i steps beyond the window.
  auto run = [&](bool right) -> std::optional<std::pair<std::int64_t, std::int64_t>> {
    const std::int64_t w = right ? rs.hi - rs.lo : ls.hi - ls.lo;
    std::map<std::vector<Vec>, std::int64_t> seen;
    for (std::int64_t t = 0; t <= static_cast<std::int64_t>(max_steps); ++t) {
      std::vector<Vec> state;
      for (std::int64_t q = 0; q < w; ++q) state.push_back(right ? x.at(B + t - w + 1 + q) : x.at(A - t + q));
      auto [it, fresh] = seen.emplace(std::move(state), t);
      if (!fresh) return std::make_pair(it->second, t - it->second);
      if (right) {
        auto c = B + t + 1;
        x[c] = next(s.right_default(), *r_top, c - rs.hi, rs.hi);
      } else {
        auto c = A - t - 1;
        x[c] = next(s.left_default(), *l_bottom, c - ls.lo, ls.lo);
      }
    }
    return std::nullopt;
  };
  auto rr = run(true);
  auto lr = run(false);
  if (!rr || !lr) return out;
  auto [ir, pr] = *rr;
  auto [il, pl] = *lr;
  std::vector<Vec> core, left, right;
  for (auto c = A - il; c <= B + ir; ++c) core.push_back(x.at(c));
  for (std::int64_t q = 0; q < pl; ++q) left.push_back(x.at(A - il - 1 - q));
  for (std::int64_t q = 0; q < pr; ++q) right.push_back(x.at(B + ir + 1 + q));
  EvPerConfig w(u.k, A - il, std::move(core), std::move(left), std::move(right));
  w = w.compacted();
  if (!w.is_zero() && apply_evper(s, w).is_zero()) out.witness = std::move(w);
  return out;
}

/// Nonzero kernel element with core on [a, b] and tail periods exactly (L, R),
/// a = min(lo - D, -n_max), b = max(hi + D, n_max). Periods are tried by increasing L + R.
inline std::optional<EvPerConfig> periodic_kernel_search(const RuleConfig& s, int n_max, int max_period) {
  if (s.universe().d != 1) return std::nullopt;
  const auto& u = s.universe();
  const std::size_t k = static_cast<std::size_t>(u.k);
  auto [lo, hi] = s.singular_interval();
  const auto mlo = s.memory().min_x(), mhi = s.memory().max_x();
  const auto D = mhi - mlo + 1;
  const std::int64_t a = std::min<std::int64_t>(lo - D, -n_max), b = std::max<std::int64_t>(hi + D, n_max);
  const std::size_t core_n = static_cast<std::size_t>(b - a + 1);
  for (int total = 2; total <= 2 * max_period; ++total) {
    for (int L = std::max(1, total - max_period); L <= std::min(max_period, total - 1); ++L) {
      const int R = total - L;
      auto unknown = [&](std::int64_t c) -> std::size_t {
        if (c < a) return core_n + static_cast<std::size_t>((a - 1 - c) % L);
        if (c > b) return core_n + static_cast<std::size_t>(L) + static_cast<std::size_t>((c - b - 1) % R);
        return static_cast<std::size_t>(c - a);
      };
      const std::size_t n_unknowns = core_n + static_cast<std::size_t>(L + R);
      const std::int64_t r_lo = a - mhi - L - 1, r_hi = b - mlo + R + 1;
      Matrix m(static_cast<std::size_t>(r_hi - r_lo + 1) * k, n_unknowns * k, u.p);
      for (auto n = r_lo; n <= r_hi; ++n) {
        const std::size_t row = static_cast<std::size_t>(n - r_lo) * k;
        for (const auto& [off, blk] : s.rule_at(Cell{n}).blocks()) {
          const std::size_t col = unknown(n + off.x) * k;
          for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) m.add_to(row + i, col + j, blk(i, j));
        }
      }
      auto basis = kernel_basis(m);
      if (basis.empty()) continue;
      const Vec& z = basis.front();
      auto slice = [&](std::size_t idx) {
        return Vec(z.begin() + static_cast<std::ptrdiff_t>(idx * k), z.begin() + static_cast<std::ptrdiff_t>((idx + 1) * k));
      };
      std::vector<Vec> core, left, right;
      for (std::size_t c = 0; c < core_n; ++c) core.push_back(slice(c));
      for (int q = 0; q < L; ++q) left.push_back(slice(core_n + static_cast<std::size_t>(q)));
      for (int q = 0; q < R; ++q) right.push_back(slice(core_n + static_cast<std::size_t>(L + q)));
      EvPerConfig w = EvPerConfig(u.k, a, std::move(core), std::move(left), std::move(right)).compacted();
      if (!w.is_zero() && apply_evper(s, w).is_zero()) return w;
    }
  }
  return std::nullopt;
}

inline std::vector<Vec> anchor_values(const Universe& u) {
  std::vector<Vec> out;
  std::uint64_t count = 1;
  for (int i = 0; i < u.k && count <= 16; ++i) count *= u.p;
  if (count <= 16) {
    Vec v(static_cast<std::size_t>(u.k), 0);
    while (true) {
      std::size_t i = 0;
      while (i < v.size() && ++v[i] == u.p) v[i++] = 0;
      if (i == v.size()) break;
      out.push_back(v);
    }
  } else {
    for (int i = 0; i < u.k; ++i) {
      Vec v(static_cast<std::size_t>(u.k), 0);
      v[static_cast<std::size_t>(i)] = 1;
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace detail

/// Cells of the singular interval inflated by the memory radius plus one tail cell at
/// twice the radius beyond it, each paired with every nonzero value (p^k <= 16) or with
/// the unit vectors.
inline std::vector<Anchor> default_anchors(const RuleConfig& s) {
  require_d1(s, "anchors");
  auto [lo, hi] = s.singular_interval();
  const std::int64_t r = std::max<std::int64_t>(1, s.memory().radius());
  std::vector<std::int64_t> cells;
  for (auto g = lo - r; g <= hi + r; ++g) cells.push_back(g);
  cells.push_back(hi + 2 * r);
  std::vector<Anchor> out;
  for (auto g : cells)
    for (const auto& v : detail::anchor_values(s.universe())) out.push_back({Cell{g}, v});
  return out;
}

/// Anchors (g, v) for g in [a, b] and every value from the default value set.
inline std::vector<Anchor> interval_anchors(const RuleConfig& s, std::int64_t a, std::int64_t b) {
  std::vector<Anchor> out;
  for (auto g = a; g <= b; ++g)
    for (const auto& v : detail::anchor_values(s.universe())) out.push_back({Cell{g}, v});
  return out;
}

/// For each anchor, the first n <= n_max such that no x on E_n M with f+_{E_n}(x) = 0 has
/// x(g) = v. Such an anchor value is never attained by a global kernel element.
inline std::vector<AnchorResult> injectivity_anchors(const RuleConfig& s, const std::vector<Anchor>& anchors, int n_max) {
  const std::size_t k = static_cast<std::size_t>(s.universe().k);
  std::vector<AnchorResult> out;
  std::vector<WindowMap> maps;
  for (int n = 0; n <= n_max; ++n) maps.push_back(induced_map(s, box(s.universe().d, n)));
  for (const auto& a : anchors) {
    if (a.v.size() != k || is_zero(a.v)) throw ContractViolation("anchor values must be nonzero vectors of length k");
    AnchorResult res{a, std::nullopt, std::nullopt};
    for (int n = 0; n <= n_max && !res.settled_at; ++n) {
      const auto& w = maps[static_cast<std::size_t>(n)];
      auto it = std::lower_bound(w.domain_cells.begin(), w.domain_cells.end(), a.g);
      if (it == w.domain_cells.end() || *it != a.g) continue;
      const std::size_t col = static_cast<std::size_t>(it - w.domain_cells.begin()) * k;
      Matrix m(w.matrix.rows() + k, w.matrix.cols(), s.universe().p);
      Vec rhs(m.rows(), 0);
      for (std::size_t i = 0; i < w.matrix.rows(); ++i)
        for (std::size_t j = 0; j < w.matrix.cols(); ++j) m.set(i, j, w.matrix(i, j));
      for (std::size_t i = 0; i < k; ++i) {
        m.set(w.matrix.rows() + i, col + i, 1);
        rhs[w.matrix.rows() + i] = a.v[i];
      }
      if (!solve_affine(m, rhs).particular) res.settled_at = n;
    }
    out.push_back(std::move(res));
  }
  return out;
}

/// For each anchor, the smallest n <= n_max with a z supported in E_n and sigma_s(z)
/// equal to v planted at g, together with that z.
inline std::vector<AnchorResult> postsurjectivity_anchors(const RuleConfig& s, const std::vector<Anchor>& anchors,
                                                          int n_max) {
  const std::size_t k = static_cast<std::size_t>(s.universe().k);
  std::vector<AnchorResult> out;
  for (const auto& a : anchors) {
    if (a.v.size() != k || is_zero(a.v)) throw ContractViolation("anchor values must be nonzero vectors of length k");
    AnchorResult res{a, std::nullopt, std::nullopt};
    for (int n = 0; n <= n_max && !res.settled_at; ++n) {
      auto cols = box(s.universe().d, n);
      auto rows = affected_cells(s, cols);
      auto it = std::lower_bound(rows.begin(), rows.end(), a.g);
      if (it == rows.end() || *it != a.g) it = rows.insert(it, a.g);
      const std::size_t g_row = static_cast<std::size_t>(it - rows.begin()) * k;
      Matrix m = linear_block(s, rows, cols);
      Vec rhs(m.rows(), 0);
      for (std::size_t i = 0; i < k; ++i) rhs[g_row + i] = a.v[i];
      auto sol = solve_affine(m, rhs);
      if (sol.particular) {
        res.settled_at = n;
        res.preimage = detail::finsupp_from(cols, *sol.particular, s.universe().k);
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

/// Facts about a constant scalar rule (k = 1, d = 1) read off p(X) = sum_m s(m) X^m.
struct ScalarCAFacts {
  std::vector<std::pair<std::int64_t, Scalar>> laurent_coeffs;  // nonzero terms, increasing exponent

  bool zero() const { return laurent_coeffs.empty(); }
  bool monomial() const { return laurent_coeffs.size() == 1; }
  bool pre_injective() const { return !zero(); }
  bool surjective() const { return !zero(); }
  bool injective() const { return monomial(); }
  bool post_surjective() const { return monomial(); }
};

inline ScalarCAFacts scalar_ca_facts(const LocalRule& rule, const Universe& u) {
  if (u.k != 1 || u.d != 1) throw ContractViolation("scalar_ca_facts requires k = 1 and d = 1");
  ScalarCAFacts out;
  for (const auto& [m, b] : rule.blocks())
    if (b(0, 0) != 0) out.laurent_coeffs.emplace_back(m.x, b(0, 0));
  return out;
}

/// Nonzero eventually periodic solution of the constant scalar recurrence, when p(X)
/// has at least two terms.
inline std::optional<EvPerConfig> scalar_kernel_witness(const LocalRule& rule, const Universe& u) {
  auto facts = scalar_ca_facts(rule, u);
  if (facts.zero() || facts.monomial()) return std::nullopt;
  std::vector<Cell> offs;
  for (auto [m, c] : facts.laurent_coeffs) offs.push_back(Cell{m});
  auto r = detail::extension_reduction(RuleConfig::constant(u, MemorySet(offs), rule.on_memory(MemorySet(offs), u)));
  return r ? r->witness : std::nullopt;
}

/// Direct (one-sided) evidence about a single configuration. Inverse searches are cached.
class Evidence {
 public:
  Evidence(RuleConfig s, AnalysisBounds b, std::optional<std::vector<Anchor>> anchors = std::nullopt)
      : s_(std::move(s)), b_(b), anchors_(std::move(anchors)) {}

  const RuleConfig& subject() const { return s_; }
  const AnalysisBounds& bounds() const { return b_; }

  const std::optional<RuleConfig>& left_inverse() {
    if (!left_) left_ = find_left_inverse(s_, b_.mem_bound, b_.support_bound);
    return *left_;
  }
  const std::optional<RuleConfig>& right_inverse() {
    if (!right_) right_ = find_right_inverse(s_, b_.mem_bound, b_.support_bound);
    return *right_;
  }

  const std::vector<Anchor>& anchors() {
    if (!anchors_) anchors_ = default_anchors(s_);
    return *anchors_;
  }

  const Verdict& pre_injective() {
    return memo(Property::PreInjective, [&] {
      const auto& u = s_.universe();
      if (detail::window_kernel(s_, b_.n_max)) {
        for (int n = 0; n <= b_.n_max; ++n)
          if (auto z = detail::window_kernel(s_, n)) return make(Property::PreInjective, Status::Fails, cert::FinSuppKernelWitness{*z});
      }
      if (u.d == 1) {
        auto red = detail::support_reduction(s_);
        if (red && (red->window.lo > red->window.hi || detail::interval_radius(red->window.lo, red->window.hi) <= b_.n_max)) {
          if (red->window.kernel_dim == 0) return make(Property::PreInjective, Status::Holds, red->window);
          return make(Property::PreInjective, Status::Fails, cert::FinSuppKernelWitness{*red->witness});
        }
        if (left_inverse()) return make(Property::PreInjective, Status::Holds, cert::InverseRule{*left_inverse(), InverseSide::Left});
      }
      return make(Property::PreInjective, Status::Inconclusive, cert::BoundExhausted{b_.n_max});
    });
  }

  const Verdict& surjective() {
    return memo(Property::Surjective, [&] {
      const auto& u = s_.universe();
      auto deficient = [&](int n) -> std::optional<cert::WindowRankFailure> {
        auto e = box(u.d, n);
        std::size_t full = e.size() * static_cast<std::size_t>(u.k);
        std::size_t r = rank(induced_map(s_, e).matrix);
        if (r < full) return cert::WindowRankFailure{n, r, full};
        return std::nullopt;
      };
      // Restricting to a smaller window maps images onto images, so deficiency is monotone in n.
      if (deficient(b_.n_max)) {
        for (int n = 0; n <= b_.n_max; ++n)
          if (auto w = deficient(n)) return make(Property::Surjective, Status::Fails, *w);
      }
      if (u.d == 1 && right_inverse())
        return make(Property::Surjective, Status::Holds, cert::InverseRule{*right_inverse(), InverseSide::Right});
      return make(Property::Surjective, Status::Inconclusive, cert::BoundExhausted{b_.n_max});
    });
  }

  const Verdict& injective() {
    return memo(Property::Injective, [&] {
      require_d1(s_, "injectivity");
      Verdict v = [&] {
        const auto& pre = pre_injective();
        if (pre.status == Status::Fails) return make(Property::Injective, Status::Fails, pre.certificate);
        auto red = detail::extension_reduction(s_);
        if (red && detail::interval_radius(red->window.lo, red->window.hi) <= b_.n_max) {
          if (red->window.kernel_dim == 0) return make(Property::Injective, Status::Holds, red->window);
          if (red->witness) return make(Property::Injective, Status::Fails, cert::EvPerKernelWitness{*red->witness});
          return make(Property::Injective, Status::Fails, red->window);
        }
        if (auto w = detail::periodic_kernel_search(s_, b_.n_max, b_.max_period))
          return make(Property::Injective, Status::Fails, cert::EvPerKernelWitness{*w});
        if (left_inverse()) return make(Property::Injective, Status::Holds, cert::InverseRule{*left_inverse(), InverseSide::Left});
        return make(Property::Injective, Status::Inconclusive, cert::BoundExhausted{b_.n_max});
      }();
      v.anchors = injectivity_anchors(s_, anchors(), b_.n_max);
      return v;
    });
  }

  const Verdict& post_surjective() {
    return memo(Property::PostSurjective, [&] {
      require_d1(s_, "post-surjectivity");
      Verdict v = [&] {
        const auto& surj = surjective();
        if (surj.status == Status::Fails) return make(Property::PostSurjective, Status::Fails, cert::Implication{share(surj)});
        if (right_inverse())
          return make(Property::PostSurjective, Status::Holds, cert::InverseRule{*right_inverse(), InverseSide::Right});
        return make(Property::PostSurjective, Status::Inconclusive, cert::BoundExhausted{b_.n_max});
      }();
      v.anchors = postsurjectivity_anchors(s_, anchors(), b_.n_max);
      return v;
    });
  }

  const Verdict& direct(Property p) {
    switch (p) {
      case Property::PreInjective: return pre_injective();
      case Property::Surjective: return surjective();
      case Property::Injective: return injective();
      case Property::PostSurjective: return post_surjective();
      default: throw ContractViolation("no direct evidence for " + std::string(to_string(p)));
    }
  }

  Verdict make(Property p, Status st, Certificate c) const { return Verdict{p, st, std::move(c), s_, {}}; }

 private:
  template <class Fn>
  const Verdict& memo(Property p, Fn&& fn) {
    auto it = cache_.find(p);
    if (it == cache_.end()) it = cache_.emplace(p, fn()).first;
    return it->second;
  }

  RuleConfig s_;
  AnalysisBounds b_;
  std::optional<std::vector<Anchor>> anchors_;
  std::optional<std::optional<RuleConfig>> left_;
  std::optional<std::optional<RuleConfig>> right_;
  std::map<Property, Verdict> cache_;
};

namespace detail {

/// First definitive verdict; throws if two definitive verdicts disagree.
inline Verdict merge(std::vector<Verdict> candidates) {
  const Verdict* chosen = nullptr;
  for (const auto& c : candidates) {
    if (!c.definitive()) continue;
    if (!chosen) {
      chosen = &c;
    } else if (chosen->status != c.status) {
      throw ContradictionError(std::string("contradictory verdicts for ") + to_string(c.property) + ": " +
                                   certificate_kind(chosen->certificate) + " vs " + certificate_kind(c.certificate),
                               *chosen, c);
    }
  }
  Verdict out = chosen ? *chosen : candidates.front();
  if (out.anchors.empty()) {
    for (const auto& c : candidates)
      if (!c.anchors.empty() && c.subject == out.subject) {
        out.anchors = c.anchors;
        break;
      }
  }
  return out;
}

inline Verdict transfer(const RuleConfig& s, Property p, const Verdict& dual) {
  if (!dual.definitive()) return Verdict{p, Status::Inconclusive, dual.certificate, s, {}};
  return Verdict{p, dual.status, cert::DualTransfer{share(dual)}, s, {}};
}

}  // namespace detail

/// Combined verdict engine for one configuration and its dual.
class Analyzer {
 public:
  explicit Analyzer(RuleConfig s, AnalysisBounds b = {}, std::optional<std::vector<Anchor>> anchors = std::nullopt)
      : self_(s, b, std::move(anchors)), dual_(dual_config(s), b), b_(b) {}

  const RuleConfig& subject() const { return self_.subject(); }
  const RuleConfig& dual_subject() const { return dual_.subject(); }
  Evidence& evidence() { return self_; }
  Evidence& dual_evidence() { return dual_; }

  const Verdict& verdict(Property p) {
    auto it = cache_.find(p);
    if (it != cache_.end()) return it->second;
    Verdict v = compute(p);
    return cache_.emplace(p, std::move(v)).first->second;
  }

 private:
  Verdict make(Property p, Status st, Certificate c) { return self_.make(p, st, std::move(c)); }
  Verdict inconclusive(Property p) { return make(p, Status::Inconclusive, cert::BoundExhausted{b_.n_max}); }

  /// Pre-injectivity or surjectivity from direct evidence on s and s* only.
  const Verdict& base(Property p) {
    auto it = base_.find(p);
    if (it != base_.end()) return it->second;
    Verdict v = detail::merge({self_.direct(p), detail::transfer(subject(), p, dual_.direct(dual_partner(p)))});
    return base_.emplace(p, std::move(v)).first->second;
  }

  std::vector<Analyzer*> tails() {
    if (!tails_) {
      tails_.emplace();
      for (auto& c : limit_representatives(subject()).constants) tails_->push_back(std::make_unique<Analyzer>(c, b_));
    }
    std::vector<Analyzer*> out;
    for (auto& t : *tails_) out.push_back(t.get());
    return out;
  }

  Verdict compute(Property p) {
    switch (p) {
      case Property::PreInjective: {
        const auto& pre = base(Property::PreInjective);
        if (pre.definitive() || subject().universe().d != 1) return pre;
        const auto& inj = verdict(Property::Injective);
        if (inj.status == Status::Holds) return make(p, Status::Holds, cert::Implication{share(inj)});
        return pre;
      }
      case Property::Surjective: {
        const auto& surj = base(Property::Surjective);
        if (surj.definitive() || subject().universe().d != 1) return surj;
        const auto& ps = verdict(Property::PostSurjective);
        if (ps.status == Status::Holds) return make(p, Status::Holds, cert::Implication{share(ps)});
        return surj;
      }
      case Property::Injective: {
        std::vector<Verdict> c{self_.injective(), detail::transfer(subject(), p, dual_.post_surjective())};
        const auto& pre = base(Property::PreInjective);
        if (pre.status == Status::Fails) c.push_back(make(p, Status::Fails, cert::Implication{share(pre)}));
        return detail::merge(std::move(c));
      }
      case Property::PostSurjective: {
        std::vector<Verdict> c{self_.post_surjective(), detail::transfer(subject(), p, dual_.injective())};
        const auto& surj = base(Property::Surjective);
        if (surj.status == Status::Fails) c.push_back(make(p, Status::Fails, cert::Implication{share(surj)}));
        return detail::merge(std::move(c));
      }
      case Property::StablyInjective: return stable(p, Property::Injective);
      case Property::StablyPostSurjective: return stable(p, Property::PostSurjective);
      case Property::Invertible: return invertible();
    }
    return inconclusive(p);
  }

  /// Stable injectivity / post-surjectivity: the plain property on s and on every
  /// limit rule of its orbit closure.
  Verdict stable(Property p, Property plain) {
    require_d1(subject(), "stable verdicts");
    const bool inj = plain == Property::Injective;
    std::vector<Verdict> c;
    const auto& own = verdict(plain);
    if (own.status == Status::Fails) c.push_back(make(p, Status::Fails, cert::Implication{share(own)}));
    const auto& inv = inj ? self_.left_inverse() : self_.right_inverse();
    if (inv) c.push_back(make(p, Status::Holds, cert::InverseRule{*inv, inj ? InverseSide::Left : InverseSide::Right}));
    const auto& dinv = inj ? dual_.right_inverse() : dual_.left_inverse();
    if (dinv) {
      Verdict dv = dual_.make(dual_partner(p), Status::Holds,
                              cert::InverseRule{*dinv, inj ? InverseSide::Right : InverseSide::Left});
      c.push_back(detail::transfer(subject(), p, dv));
    }
    std::vector<VerdictPtr> parts{share(own)};
    bool all_hold = own.status == Status::Holds;
    for (auto* t : tails()) {
      const auto& tv = t->verdict(plain);
      if (tv.status == Status::Fails) c.push_back(make(p, Status::Fails, cert::Implication{share(tv)}));
      all_hold = all_hold && tv.status == Status::Holds;
      parts.push_back(share(tv));
    }
    if (all_hold) c.push_back(make(p, Status::Holds, cert::Conjunction{std::move(parts)}));
    c.push_back(inconclusive(p));
    return detail::merge(std::move(c));
  }

  Verdict invertible() {
    const Property p = Property::Invertible;
    require_d1(subject(), "invertibility");
    std::vector<Verdict> c;
    for (const auto* t : {&self_.left_inverse(), &self_.right_inverse()}) {
      if (*t && verify_inverse(subject(), **t, InverseSide::TwoSided)) {
        c.push_back(make(p, Status::Holds, cert::InverseRule{**t, InverseSide::TwoSided}));
        break;
      }
    }
    const auto& pre = verdict(Property::PreInjective);
    const auto& sps = verdict(Property::StablyPostSurjective);
    const auto& surj = verdict(Property::Surjective);
    const auto& si = verdict(Property::StablyInjective);
    if (pre.status == Status::Holds && sps.status == Status::Holds)
      c.push_back(make(p, Status::Holds, cert::Conjunction{{share(pre), share(sps)}}));
    else if (surj.status == Status::Holds && si.status == Status::Holds)
      c.push_back(make(p, Status::Holds, cert::Conjunction{{share(surj), share(si)}}));
    for (auto q : {Property::PreInjective, Property::Surjective, Property::Injective, Property::PostSurjective,
                   Property::StablyInjective, Property::StablyPostSurjective}) {
      const auto& v = verdict(q);
      if (v.status == Status::Fails) {
        c.push_back(make(p, Status::Fails, cert::Implication{share(v)}));
        break;
      }
    }
    c.push_back(inconclusive(p));
    return detail::merge(std::move(c));
  }

  Evidence self_;
  Evidence dual_;
  AnalysisBounds b_;
  std::map<Property, Verdict> base_;
  std::map<Property, Verdict> cache_;
  std::optional<std::vector<std::unique_ptr<Analyzer>>> tails_;
};

/// Single-property entry points.
inline Verdict surjectivity_verdict(const RuleConfig& s, AnalysisBounds b = {}) {
  return Analyzer(s, b).verdict(Property::Surjective);
}
inline Verdict preinjectivity_verdict(const RuleConfig& s, AnalysisBounds b = {}) {
  return Analyzer(s, b).verdict(Property::PreInjective);
}
inline Verdict injectivity_verdict(const RuleConfig& s, std::optional<std::vector<Anchor>> anchors, AnalysisBounds b = {}) {
  require_d1(s, "injectivity");
  return Analyzer(s, b, std::move(anchors)).verdict(Property::Injective);
}
inline Verdict postsurjectivity_verdict(const RuleConfig& s, std::optional<std::vector<Anchor>> anchors,
                                        AnalysisBounds b = {}) {
  require_d1(s, "post-surjectivity");
  return Analyzer(s, b, std::move(anchors)).verdict(Property::PostSurjective);
}
/// Stable verdict for any property; for pre-injectivity and surjectivity stability is
/// automatic and the plain verdict is returned.
inline Verdict stable_verdict(const RuleConfig& s, Property p, AnalysisBounds b = {}) {
  Analyzer a(s, b);
  switch (p) {
    case Property::Injective: return a.verdict(Property::StablyInjective);
    case Property::PostSurjective: return a.verdict(Property::StablyPostSurjective);
    default: return a.verdict(p);
  }
}

// ---------------------------------------------------------------------------
// Certificate verification

struct CertificateCheck {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

namespace detail {

inline CertificateCheck fail(std::string why) { return {false, std::move(why)}; }

/// Properties implied by `p` holding (including p itself).
inline bool implies(Property strong, Property weak) {
  if (strong == weak || strong == Property::Invertible) return true;
  switch (strong) {
    case Property::StablyInjective: return weak == Property::Injective || weak == Property::PreInjective;
    case Property::Injective: return weak == Property::PreInjective;
    case Property::StablyPostSurjective: return weak == Property::PostSurjective || weak == Property::Surjective;
    case Property::PostSurjective: return weak == Property::Surjective;
    default: return false;
  }
}

inline bool is_limit_rule(const RuleConfig& s, const RuleConfig& p) {
  for (const auto& c : limit_representatives(s).constants)
    if (equivalent(c, p)) return true;
  return false;
}

inline bool covered_by_inverse(Property p, InverseSide side) {
  switch (side) {
    case InverseSide::TwoSided: return true;
    case InverseSide::Left: return implies(Property::StablyInjective, p);
    case InverseSide::Right: return implies(Property::StablyPostSurjective, p);
  }
  return false;
}

}  // namespace detail

inline CertificateCheck verify_certificate(const Verdict& v);

namespace detail {

struct CertificateVerifier {
  const Verdict& v;

  CertificateCheck operator()(const cert::BoundExhausted&) const {
    if (v.status != Status::Inconclusive) return fail("BoundExhausted backs only Inconclusive verdicts");
    return {};
  }

  CertificateCheck operator()(const cert::WindowRankFailure& w) const {
    if (v.property != Property::Surjective || v.status != Status::Fails)
      return fail("WindowRankFailure backs only a failed surjectivity verdict");
    const auto& u = v.subject.universe();
    auto e = box(u.d, w.radius);
    std::size_t full = e.size() * static_cast<std::size_t>(u.k);
    std::size_t r = rank(induced_map(v.subject, e).matrix);
    if (r != w.rank || full != w.full || r >= full) return fail("window rank does not reproduce a deficiency");
    return {};
  }

  CertificateCheck operator()(const cert::FinSuppKernelWitness& w) const {
    if (v.status != Status::Fails || (v.property != Property::PreInjective && v.property != Property::Injective))
      return fail("FinSuppKernelWitness backs only failed pre-injectivity or injectivity");
    if (w.x.is_zero()) return fail("kernel witness is zero");
    if (w.x.k() != v.subject.universe().k) return fail("kernel witness has the wrong alphabet");
    if (!apply_finsupp(v.subject, w.x).is_zero()) return fail("sigma_s(x) != 0 for the kernel witness");
    return {};
  }

  CertificateCheck operator()(const cert::EvPerKernelWitness& w) const {
    if (v.status != Status::Fails || v.property != Property::Injective)
      return fail("EvPerKernelWitness backs only failed injectivity");
    if (v.subject.universe().d != 1) return fail("eventually periodic witnesses need d = 1");
    if (w.x.is_zero()) return fail("kernel witness is zero");
    if (w.x.k() != v.subject.universe().k) return fail("kernel witness has the wrong alphabet");
    if (!apply_evper(v.subject, w.x).is_zero()) return fail("sigma_s(x) != 0 for the kernel witness");
    return {};
  }

  CertificateCheck operator()(const cert::RecurrenceWindow& w) const {
    using K = cert::RecurrenceWindow::Kind;
    if (w.kind == K::Support) {
      if (v.property != Property::PreInjective) return fail("support reduction backs only pre-injectivity");
      auto r = support_reduction(v.subject);
      if (!r || r->window.lo != w.lo || r->window.hi != w.hi || r->window.kernel_dim != w.kernel_dim)
        return fail("support reduction does not reproduce");
    } else {
      if (v.property != Property::Injective) return fail("extension reduction backs only injectivity");
      auto r = extension_reduction(v.subject);
      if (!r || r->window.lo != w.lo || r->window.hi != w.hi || r->window.kernel_dim != w.kernel_dim)
        return fail("extension reduction does not reproduce");
    }
    if ((w.kernel_dim == 0) != (v.status == Status::Holds) || v.status == Status::Inconclusive)
      return fail("kernel dimension disagrees with the verdict status");
    return {};
  }

  CertificateCheck operator()(const cert::InverseRule& w) const {
    if (v.status != Status::Holds) return fail("InverseRule backs only Holds verdicts");
    if (!covered_by_inverse(v.property, w.side)) return fail("inverse side does not imply the property");
    if (!verify_inverse(v.subject, w.t, w.side)) return fail("composition with the inverse is not the identity");
    return {};
  }

  CertificateCheck operator()(const cert::DualTransfer& w) const {
    if (!w.dual) return fail("missing dual verdict");
    const Verdict& d = *w.dual;
    if (d.property != dual_partner(v.property)) return fail("dual verdict concerns the wrong property");
    if (d.status != v.status) return fail("dual verdict status differs");
    if (!equivalent(d.subject, dual_config(v.subject))) return fail("dual verdict is not about s*");
    if (std::holds_alternative<cert::DualTransfer>(d.certificate)) return fail("transfer chains are not accepted");
    return verify_certificate(d);
  }

  CertificateCheck operator()(const cert::Implication& w) const {
    if (!w.premise) return fail("missing premise");
    const Verdict& pr = *w.premise;
    if (!pr.definitive() || v.status != pr.status) return fail("implication must preserve a definitive status");
    bool ok = false;
    if (equivalent(pr.subject, v.subject)) {
      ok = v.status == Status::Holds ? implies(pr.property, v.property) : implies(v.property, pr.property);
    } else if (v.status == Status::Fails && is_limit_rule(v.subject, pr.subject)) {
      ok = v.property == Property::Invertible ||
           (v.property == Property::StablyInjective && implies(Property::StablyInjective, pr.property)) ||
           (v.property == Property::StablyPostSurjective && implies(Property::StablyPostSurjective, pr.property));
    }
    if (!ok) return fail(std::string("premise ") + to_string(pr.property) + " does not imply " + to_string(v.property));
    return verify_certificate(pr);
  }

  CertificateCheck operator()(const cert::Conjunction& w) const {
    if (v.status != Status::Holds) return fail("Conjunction backs only Holds verdicts");
    for (const auto& part : w.parts)
      if (!part || part->status != Status::Holds) return fail("every conjunct must hold");
    auto has = [&](Property p, const RuleConfig& subj) {
      for (const auto& part : w.parts)
        if (implies(part->property, p) && equivalent(part->subject, subj)) return true;
      return false;
    };
    bool ok = false;
    if (v.property == Property::StablyInjective || v.property == Property::StablyPostSurjective) {
      Property plain = v.property == Property::StablyInjective ? Property::Injective : Property::PostSurjective;
      ok = has(plain, v.subject);
      for (const auto& c : limit_representatives(v.subject).constants) ok = ok && has(plain, c);
    } else if (v.property == Property::Invertible) {
      ok = (has(Property::PreInjective, v.subject) && has(Property::StablyPostSurjective, v.subject)) ||
           (has(Property::Surjective, v.subject) && has(Property::StablyInjective, v.subject));
    }
    if (!ok) return fail("conjuncts do not cover the property");
    for (const auto& part : w.parts)
      if (auto r = verify_certificate(*part); !r) return r;
    return {};
  }
};

}  // namespace detail

/// Re-verifies a verdict's certificate from scratch by direct evaluation.
inline CertificateCheck verify_certificate(const Verdict& v) {
  return std::visit(detail::CertificateVerifier{v}, v.certificate);
}

// ---------------------------------------------------------------------------
// Cross-validation

struct CrossValidationReport {
  std::map<Property, Verdict> primal;
  std::map<Property, Verdict> dual;
  std::vector<std::string> certificate_failures;

  bool ok() const { return certificate_failures.empty(); }
};

/// Runs every verdict on s and s*, checks each duality clause in both directions and
/// re-verifies every certificate. Contradictions raise ContradictionError.
inline CrossValidationReport cross_validate(const RuleConfig& s, AnalysisBounds b = {}) {
  require_d1(s, "cross_validate");
  Analyzer a(s, b);
  Analyzer d(dual_config(s), b);
  CrossValidationReport rep;
  for (auto p : kAllProperties) {
    rep.primal.emplace(p, a.verdict(p));
    rep.dual.emplace(p, d.verdict(p));
  }
  for (auto p : kAllProperties) {
    const auto& x = rep.primal.at(p);
    const auto& y = rep.dual.at(dual_partner(p));
    if (x.definitive() && y.definitive() && x.status != y.status)
      throw ContradictionError(std::string("duality clause violated: ") + to_string(p) + "(s) is " +
                                   to_string(x.status) + " but " + to_string(dual_partner(p)) + "(s*) is " +
                                   to_string(y.status),
                               x, y);
  }
  for (const auto* side : {&rep.primal, &rep.dual})
    for (const auto& [p, v] : *side)
      if (auto r = verify_certificate(v); !r)
        rep.certificate_failures.push_back(std::string(side == &rep.primal ? "s: " : "s*: ") + to_string(p) + ": " +
                                           r.reason);
  return rep;
}

}  // namespace nucalab
