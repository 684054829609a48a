#pragma once

/// @file io.hpp
/// @brief JSON encoding of rule configurations, configurations, verdicts with their
/// certificates, and shadowing reports.
///
/// Rule file:
///   {"schema_version": 1, "p": 2, "k": 1, "d": 1, "memory": [[-1], [0]],
///    "default_rule": {"[-1]": [[1]], "[0]": [[1]]},
///    "left_default_rule": {...},            // optional, d = 1 only
///    "overrides": {"[0]": {"[-1]": [[0]], "[0]": [[1]]}}}
/// Matrices are row-major; entries are integers taken mod p.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "nucalab/analysis.hpp"
#include "nucalab/shadowing.hpp"

namespace nucalab {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Malformed input document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io {

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown field '" + key + "'");
  }
}

}  // namespace detail

// --- cells and vectors -------------------------------------------------------

inline json cell_tuple(Cell c, int d) { return d == 1 ? json::array({c.x}) : json::array({c.x, c.y}); }

inline Cell cell_from_tuple(const json& j, int d, const std::string& where) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(d)) detail::fail(where, "expected a " + std::to_string(d) + "-tuple");
  Cell c{detail::integer(j[0], where)};
  if (d == 2) c.y = detail::integer(j[1], where);
  return c;
}

inline std::string cell_key(Cell c, int d) { return c.str(d); }

inline Cell cell_from_key(const std::string& key, int d, const std::string& where) {
  json j;
  try {
    j = json::parse(key);
  } catch (const json::exception&) {
    detail::fail(where, "bad cell key '" + key + "'");
  }
  return cell_from_tuple(j, d, where + " key " + key);
}

inline json vec_json(const Vec& v) { return json(v); }

inline Vec vec_from(const json& j, int k, std::uint32_t p, const std::string& where) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(k)) detail::fail(where, "expected a vector of length " + std::to_string(k));
  PrimeField f(p);
  Vec v;
  for (const auto& e : j) v.push_back(f.reduce(detail::integer(e, where)));
  return v;
}

// --- rules -------------------------------------------------------------------

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from(const json& j, const Universe& u, const std::string& where) {
  const auto k = static_cast<std::size_t>(u.k);
  if (!j.is_array() || j.size() != k) detail::fail(where, "expected a " + std::to_string(k) + "x" + std::to_string(k) + " matrix");
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& r : j) {
    if (!r.is_array() || r.size() != k) detail::fail(where, "matrix row must have length " + std::to_string(k));
    std::vector<std::int64_t> row;
    for (const auto& e : r) row.push_back(detail::integer(e, where));
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows, u.p);
}

inline json local_rule_json(const LocalRule& r, int d) {
  json o = json::object();
  for (const auto& [m, b] : r.blocks()) o[cell_key(m, d)] = matrix_json(b);
  return o;
}

inline LocalRule local_rule_from(const json& j, const Universe& u, const MemorySet& mem, const std::string& where) {
  if (!j.is_object()) detail::fail(where, "local rule must be an object of offset -> matrix");
  std::map<Cell, Matrix> blocks;
  for (const auto& [key, value] : j.items()) {
    Cell m = cell_from_key(key, u.d, where);
    if (!mem.contains(m)) detail::fail(where, "offset " + key + " is not in the memory set");
    if (!blocks.emplace(m, matrix_from(value, u, where + key)).second) detail::fail(where, "duplicate offset " + key);
  }
  return LocalRule(std::move(blocks));
}

inline json rule_to_json(const RuleConfig& s) {
  const auto& u = s.universe();
  json memory = json::array();
  for (auto m : s.memory().offsets()) memory.push_back(cell_tuple(m, u.d));
  json j{{"schema_version", kSchemaVersion}, {"p", u.p},         {"k", u.k},
         {"d", u.d},                         {"memory", memory}, {"default_rule", local_rule_json(s.right_default(), u.d)}};
  if (s.two_sided()) j["left_default_rule"] = local_rule_json(s.left_default(), u.d);
  json ov = json::object();
  for (const auto& [g, r] : s.overrides()) ov[cell_key(g, u.d)] = local_rule_json(r, u.d);
  j["overrides"] = std::move(ov);
  return j;
}

/// Throws ParseError on malformed input and Unsupported when d is not 1 or 2.
inline RuleConfig rule_from_json(const json& j) {
  const std::string w = "rule";
  if (!j.is_object()) detail::fail(w, "expected an object");
  detail::only_keys(j, {"schema_version", "p", "k", "d", "memory", "default_rule", "left_default_rule", "overrides"}, w);
  if (j.contains("schema_version") && detail::integer(j["schema_version"], w + ".schema_version") != kSchemaVersion)
    detail::fail(w, "unsupported schema_version");
  auto p = detail::integer(detail::field(j, "p", w), w + ".p");
  auto k = detail::integer(detail::field(j, "k", w), w + ".k");
  auto d = detail::integer(detail::field(j, "d", w), w + ".d");
  if (d != 1 && d != 2) throw Unsupported("dimension d = " + std::to_string(d) + " is not supported (d must be 1 or 2)");
  if (p < 2 || p >= static_cast<std::int64_t>(kMaxModulus) || !is_prime(static_cast<std::uint32_t>(p)))
    detail::fail(w + ".p", "must be a prime below 2^16");
  if (k < 1 || k > 64) detail::fail(w + ".k", "must be in [1, 64]");
  Universe u(static_cast<int>(d), static_cast<int>(k), static_cast<std::uint32_t>(p));

  const auto& mj = detail::field(j, "memory", w);
  if (!mj.is_array() || mj.empty()) detail::fail(w + ".memory", "expected a nonempty array of offsets");
  std::vector<Cell> offsets;
  for (const auto& m : mj) offsets.push_back(cell_from_tuple(m, u.d, w + ".memory"));
  MemorySet mem = [&] {
    try {
      return MemorySet(offsets);
    } catch (const ContractViolation& e) {
      detail::fail(w + ".memory", e.what());
    }
  }();

  LocalRule right = local_rule_from(detail::field(j, "default_rule", w), u, mem, w + ".default_rule");
  std::optional<LocalRule> left;
  if (j.contains("left_default_rule")) {
    if (u.d != 1) detail::fail(w, "left_default_rule requires d = 1");
    left = local_rule_from(j["left_default_rule"], u, mem, w + ".left_default_rule");
  }
  std::map<Cell, LocalRule> ov;
  if (j.contains("overrides")) {
    const auto& oj = j["overrides"];
    if (!oj.is_object()) detail::fail(w + ".overrides", "expected an object of cell -> local rule");
    for (const auto& [key, value] : oj.items()) {
      Cell g = cell_from_key(key, u.d, w + ".overrides");
      if (!ov.emplace(g, local_rule_from(value, u, mem, w + ".overrides" + key)).second)
        detail::fail(w + ".overrides", "duplicate cell " + key);
    }
  }
  try {
    return RuleConfig(u, std::move(mem), std::move(right), std::move(ov), std::move(left));
  } catch (const ContractViolation& e) {
    detail::fail(w, e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": invalid JSON: " + e.what());
  }
}

inline RuleConfig read_rule_file(const std::string& path) { return rule_from_json(parse_text(read_text(path), path)); }

/// Compact serialization followed by a newline.
inline std::string dump_line(const json& j, int indent = -1) { return j.dump(indent) + "\n"; }

/// One top-level field per line, values compact; ends with a newline.
inline std::string format_document(const json& j) {
  if (!j.is_object() || j.empty()) return dump_line(j);
  std::string out = "{\n";
  std::size_t i = 0;
  for (const auto& [key, value] : j.items())
    out += "  " + json(key).dump() + ": " + value.dump() + (++i < j.size() ? ",\n" : "\n");
  return out + "}\n";
}

/// 64-bit FNV-1a of the compact canonical serialization.
inline std::string rule_digest(const RuleConfig& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : rule_to_json(s).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream ss;
  ss << "fnv1a64:" << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

// --- configurations ----------------------------------------------------------

inline json finsupp_json(const FinSuppConfig& x, int d = 1) {
  json cells = json::object();
  for (const auto& [g, v] : x.values()) cells[cell_key(g, d)] = vec_json(v);
  return json{{"k", x.k()}, {"cells", cells}};
}

inline FinSuppConfig finsupp_from(const json& j, const Universe& u, const std::string& where) {
  detail::only_keys(j, {"k", "cells"}, where);
  if (detail::integer(detail::field(j, "k", where), where + ".k") != u.k) detail::fail(where, "k mismatch");
  const auto& cells = detail::field(j, "cells", where);
  if (!cells.is_object()) detail::fail(where + ".cells", "expected an object");
  FinSuppConfig x(u.k);
  for (const auto& [key, value] : cells.items()) x.set(cell_from_key(key, u.d, where), vec_from(value, u.k, u.p, where + key));
  return x;
}

inline json evper_json(const EvPerConfig& x) {
  auto list = [](const std::vector<Vec>& vs) {
    json a = json::array();
    for (const auto& v : vs) a.push_back(vec_json(v));
    return a;
  };
  return json{{"k", x.k()},
              {"core_start", x.core_start()},
              {"core", list(x.core())},
              {"left_period", list(x.left_period())},
              {"right_period", list(x.right_period())}};
}

inline EvPerConfig evper_from(const json& j, const Universe& u, const std::string& where) {
  detail::only_keys(j, {"k", "core_start", "core", "left_period", "right_period"}, where);
  if (detail::integer(detail::field(j, "k", where), where + ".k") != u.k) detail::fail(where, "k mismatch");
  auto list = [&](const char* key) {
    const auto& a = detail::field(j, key, where);
    if (!a.is_array()) detail::fail(where + "." + key, "expected an array of vectors");
    std::vector<Vec> out;
    for (const auto& v : a) out.push_back(vec_from(v, u.k, u.p, where + "." + key));
    return out;
  };
  auto left = list("left_period"), right = list("right_period");
  if (left.empty() || right.empty()) detail::fail(where, "periods must be nonempty");
  return EvPerConfig(u.k, detail::integer(detail::field(j, "core_start", where), where), list("core"), std::move(left),
                     std::move(right));
}

// --- verdicts ----------------------------------------------------------------

inline json verdict_json(const Verdict& v);
inline Verdict verdict_from(const json& j, const std::string& where);

inline json certificate_json(const Certificate& c, const RuleConfig& subject) {
  const int d = subject.universe().d;
  json j{{"kind", certificate_kind(c)}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, cert::WindowRankFailure>) {
          j["radius"] = x.radius;
          j["rank"] = x.rank;
          j["full"] = x.full;
        } else if constexpr (std::is_same_v<T, cert::FinSuppKernelWitness>) {
          j["x"] = finsupp_json(x.x, d);
        } else if constexpr (std::is_same_v<T, cert::EvPerKernelWitness>) {
          j["x"] = evper_json(x.x);
        } else if constexpr (std::is_same_v<T, cert::RecurrenceWindow>) {
          j["window_kind"] = x.kind == cert::RecurrenceWindow::Kind::Support ? "support" : "extension";
          j["lo"] = x.lo;
          j["hi"] = x.hi;
          j["kernel_dim"] = x.kernel_dim;
        } else if constexpr (std::is_same_v<T, cert::InverseRule>) {
          j["side"] = to_string(x.side);
          j["t"] = rule_to_json(x.t);
        } else if constexpr (std::is_same_v<T, cert::DualTransfer>) {
          j["dual"] = verdict_json(*x.dual);
        } else if constexpr (std::is_same_v<T, cert::Implication>) {
          j["premise"] = verdict_json(*x.premise);
        } else if constexpr (std::is_same_v<T, cert::Conjunction>) {
          json parts = json::array();
          for (const auto& p : x.parts) parts.push_back(verdict_json(*p));
          j["parts"] = std::move(parts);
        } else {
          j["n_max"] = x.n_max;
        }
      },
      c);
  return j;
}

inline Certificate certificate_from(const json& j, const RuleConfig& subject, const std::string& where) {
  const auto& kind_j = detail::field(j, "kind", where);
  if (!kind_j.is_string()) detail::fail(where + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  const auto& u = subject.universe();
  auto num = [&](const char* key) { return detail::integer(detail::field(j, key, where), where + "." + key); };
  auto sub = [&](const char* key) { return share(verdict_from(detail::field(j, key, where), where + "." + key)); };
  if (kind == "WindowRankFailure")
    return cert::WindowRankFailure{num("radius"), static_cast<std::size_t>(num("rank")), static_cast<std::size_t>(num("full"))};
  if (kind == "FinSuppKernelWitness") return cert::FinSuppKernelWitness{finsupp_from(detail::field(j, "x", where), u, where + ".x")};
  if (kind == "EvPerKernelWitness") return cert::EvPerKernelWitness{evper_from(detail::field(j, "x", where), u, where + ".x")};
  if (kind == "RecurrenceWindow") {
    const auto& wk = detail::field(j, "window_kind", where);
    if (wk != "support" && wk != "extension") detail::fail(where + ".window_kind", "expected support or extension");
    return cert::RecurrenceWindow{wk == "support" ? cert::RecurrenceWindow::Kind::Support : cert::RecurrenceWindow::Kind::Extension,
                                  num("lo"), num("hi"), static_cast<std::size_t>(num("kernel_dim"))};
  }
  if (kind == "InverseRule") {
    const auto& side = detail::field(j, "side", where);
    cert::InverseRule r{rule_from_json(detail::field(j, "t", where)), InverseSide::Left};
    if (side == "left") r.side = InverseSide::Left;
    else if (side == "right") r.side = InverseSide::Right;
    else if (side == "two-sided") r.side = InverseSide::TwoSided;
    else detail::fail(where + ".side", "expected left, right or two-sided");
    return r;
  }
  if (kind == "DualTransfer") return cert::DualTransfer{sub("dual")};
  if (kind == "Implication") return cert::Implication{sub("premise")};
  if (kind == "Conjunction") {
    const auto& parts = detail::field(j, "parts", where);
    if (!parts.is_array()) detail::fail(where + ".parts", "expected an array");
    cert::Conjunction c;
    for (const auto& p : parts) c.parts.push_back(share(verdict_from(p, where + ".parts")));
    return c;
  }
  if (kind == "BoundExhausted") return cert::BoundExhausted{static_cast<int>(num("n_max"))};
  detail::fail(where + ".kind", "unknown certificate kind '" + kind + "'");
}

inline json verdict_json(const Verdict& v) {
  const int d = v.subject.universe().d;
  json anchors = json::array();
  for (const auto& a : v.anchors) {
    json aj{{"cell", cell_tuple(a.anchor.g, d)}, {"value", vec_json(a.anchor.v)}};
    aj["settled_at"] = a.settled_at ? json(*a.settled_at) : json(nullptr);
    if (a.preimage) aj["preimage"] = finsupp_json(*a.preimage, d);
    anchors.push_back(std::move(aj));
  }
  json j{{"property", to_string(v.property)},
         {"status", to_string(v.status)},
         {"certificate", certificate_json(v.certificate, v.subject)},
         {"subject", rule_to_json(v.subject)}};
  if (!anchors.empty()) j["anchors"] = std::move(anchors);
  return j;
}

inline Verdict verdict_from(const json& j, const std::string& where) {
  if (!j.is_object()) detail::fail(where, "expected a verdict object");
  Verdict v;
  const auto& pj = detail::field(j, "property", where);
  const auto& sj = detail::field(j, "status", where);
  auto p = pj.is_string() ? parse_property(pj.get<std::string>()) : std::nullopt;
  auto st = sj.is_string() ? parse_status(sj.get<std::string>()) : std::nullopt;
  if (!p) detail::fail(where + ".property", "unknown property");
  if (!st) detail::fail(where + ".status", "unknown status");
  v.property = *p;
  v.status = *st;
  v.subject = rule_from_json(detail::field(j, "subject", where));
  v.certificate = certificate_from(detail::field(j, "certificate", where), v.subject, where + ".certificate");
  const auto& u = v.subject.universe();
  if (j.contains("anchors")) {
    for (const auto& a : j["anchors"]) {
      AnchorResult r;
      r.anchor.g = cell_from_tuple(detail::field(a, "cell", where), u.d, where + ".anchors");
      r.anchor.v = vec_from(detail::field(a, "value", where), u.k, u.p, where + ".anchors");
      if (a.contains("settled_at") && !a["settled_at"].is_null()) r.settled_at = detail::integer(a["settled_at"], where);
      if (a.contains("preimage")) r.preimage = finsupp_from(a["preimage"], u, where + ".anchors.preimage");
      v.anchors.push_back(std::move(r));
    }
  }
  return v;
}

// --- shadowing ---------------------------------------------------------------

inline json shadow_json(const ShadowReport& r, const PseudoOrbit& o) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back({{"alpha", s.alpha}, {"distance", s.distance.str()}});
  json j{{"ok", r.ok},
         {"message", r.message},
         {"epsilon", r.epsilon.str()},
         {"n0", r.n0},
         {"lipschitz_C", r.lipschitz.str()},
         {"sft_window_N", r.sft_window},
         {"generators", o.generators.size()},
         {"delta", o.delta.str()},
         {"required_delta", r.required_delta.str()},
         {"precondition_met", r.precondition_met},
         {"perturbation_radius", o.perturbation_radius},
         {"max_step_error", max_step_error(o).str()},
         {"solve_radius", r.solve_radius},
         {"steps", std::move(steps)},
         {"max_distance", r.max_distance.str()}};
  j["shadow_point"] = r.point ? evper_json(*r.point) : json(nullptr);
  return j;
}

}  // namespace io
}  // namespace nucalab
