#pragma once

/// @file verdict.hpp
/// @brief Properties, verdicts and the certificates that back them.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nucalab/inverse.hpp"

namespace nucalab {

enum class Property {
  PreInjective,
  Injective,
  Surjective,
  PostSurjective,
  StablyInjective,
  StablyPostSurjective,
  Invertible,
};

inline constexpr Property kAllProperties[] = {
    Property::PreInjective,    Property::Injective,           Property::Surjective, Property::PostSurjective,
    Property::StablyInjective, Property::StablyPostSurjective, Property::Invertible,
};

inline const char* to_string(Property p) {
  switch (p) {
    case Property::PreInjective: return "pre-injective";
    case Property::Injective: return "injective";
    case Property::Surjective: return "surjective";
    case Property::PostSurjective: return "post-surjective";
    case Property::StablyInjective: return "stable-injective";
    case Property::StablyPostSurjective: return "stable-post-surjective";
    case Property::Invertible: return "invertible";
  }
  return "?";
}

inline std::optional<Property> parse_property(std::string_view s) {
  for (auto p : kAllProperties)
    if (s == to_string(p)) return p;
  return std::nullopt;
}

/// The property of sigma_{s*} that is equivalent to `p` for sigma_s.
inline Property dual_partner(Property p) {
  switch (p) {
    case Property::PreInjective: return Property::Surjective;
    case Property::Surjective: return Property::PreInjective;
    case Property::Injective: return Property::PostSurjective;
    case Property::PostSurjective: return Property::Injective;
    case Property::StablyInjective: return Property::StablyPostSurjective;
    case Property::StablyPostSurjective: return Property::StablyInjective;
    case Property::Invertible: return Property::Invertible;
  }
  return p;
}

enum class Status { Holds, Fails, Inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Holds: return "Holds";
    case Status::Fails: return "Fails";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "?";
}

inline std::optional<Status> parse_status(std::string_view s) {
  for (auto st : {Status::Holds, Status::Fails, Status::Inconclusive})
    if (s == to_string(st)) return st;
  return std::nullopt;
}

struct Verdict;
using VerdictPtr = std::shared_ptr<const Verdict>;

namespace cert {

/// rank(f+ on E_radius) < k |E_radius|.
struct WindowRankFailure {
  std::int64_t radius = 0;
  std::size_t rank = 0;
  std::size_t full = 0;
};

/// Nonzero finitely supported x with sigma_s(x) = 0.
struct FinSuppKernelWitness {
  FinSuppConfig x;
};

/// Nonzero eventually periodic x with sigma_s(x) = 0.
struct EvPerKernelWitness {
  EvPerConfig x;
};

/// Exact finite reduction on the cell interval [lo, hi]. `Support`: every finitely
/// supported kernel element lives in [lo, hi]. `Extension`: every kernel element is
/// determined by its values on [lo, hi] and the interval system is complete.
struct RecurrenceWindow {
  enum class Kind { Support, Extension };
  Kind kind = Kind::Support;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::size_t kernel_dim = 0;
};

struct InverseRule {
  RuleConfig t;
  InverseSide side = InverseSide::Left;
};

/// The partner verdict on the dual configuration.
struct DualTransfer {
  VerdictPtr dual;
};

/// Follows from one verdict on the same subject or on one of its limit rules.
struct Implication {
  VerdictPtr premise;
};

/// Follows from all parts together.
struct Conjunction {
  std::vector<VerdictPtr> parts;
};

struct BoundExhausted {
  int n_max = 0;
};

}  // namespace cert

using Certificate = std::variant<cert::WindowRankFailure, cert::FinSuppKernelWitness, cert::EvPerKernelWitness,
                                 cert::RecurrenceWindow, cert::InverseRule, cert::DualTransfer, cert::Implication,
                                 cert::Conjunction, cert::BoundExhausted>;

inline const char* certificate_kind(const Certificate& c) {
  static constexpr const char* names[] = {"WindowRankFailure", "FinSuppKernelWitness", "EvPerKernelWitness",
                                          "RecurrenceWindow",  "InverseRule",          "DualTransfer",
                                          "Implication",       "Conjunction",          "BoundExhausted"};
  return names[c.index()];
}

/// A cell together with a nonzero value there.
struct Anchor {
  Cell g;
  Vec v;
};

/// Per-anchor evidence. For injectivity `settled_at` is the first window radius n at which
/// no x on E_n M with f+(x) = 0 has x(g) = v. For post-surjectivity it is the radius of
/// the support of `preimage`, a finitely supported z with sigma_s(z) = v planted at g.
struct AnchorResult {
  Anchor anchor;
  std::optional<std::int64_t> settled_at;
  std::optional<FinSuppConfig> preimage;
};

struct Verdict {
  Property property = Property::PreInjective;
  Status status = Status::Inconclusive;
  Certificate certificate = cert::BoundExhausted{};
  RuleConfig subject;
  std::vector<AnchorResult> anchors;

  bool definitive() const { return status != Status::Inconclusive; }
};

inline VerdictPtr share(Verdict v) { return std::make_shared<const Verdict>(std::move(v)); }

/// Raised when two definitive verdicts disagree across a duality clause.
class ContradictionError : public std::runtime_error {
 public:
  ContradictionError(const std::string& what, Verdict a, Verdict b)
      : std::runtime_error(what), first(std::move(a)), second(std::move(b)) {}
  Verdict first;
  Verdict second;
};

}  // namespace nucalab
