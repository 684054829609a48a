#pragma once

/// @file commands.hpp
/// @brief The command-line operations as plain functions returning an exit code and
/// the text for stdout and stderr.
///
/// Exit codes: 0 Holds / success, 1 Fails / mismatch / not found, 2 Inconclusive,
/// 64 malformed input or arguments, 65 unsupported dimension, 66 unreadable file,
/// 70 internal inconsistency.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nucalab/io.hpp"
#include "nucalab/sampling.hpp"

namespace nucalab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFails = 1,
  kExitInconclusive = 2,
  kExitMalformed = 64,
  kExitUnsupported = 65,
  kExitNoInput = 66,
  kExitInternal = 70,
};

inline int exit_for(Status s) {
  switch (s) {
    case Status::Holds: return kExitOk;
    case Status::Fails: return kExitFails;
    case Status::Inconclusive: return kExitInconclusive;
  }
  return kExitInternal;
}

struct Output {
  int code = kExitOk;
  std::string out;
  std::string err;
};

/// Runs `body`, mapping the library's exceptions to exit codes.
inline Output guarded(const std::function<Output()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    return {kExitMalformed, "", std::string("error: ") + e.what() + "\n"};
  } catch (const Unsupported& e) {
    return {kExitUnsupported, "", std::string("error: unsupported: ") + e.what() + "\n"};
  } catch (const std::ios_base::failure& e) {
    return {kExitNoInput, "", std::string("error: ") + e.what() + "\n"};
  } catch (const ContractViolation& e) {
    return {kExitMalformed, "", std::string("error: ") + e.what() + "\n"};
  } catch (const ContradictionError& e) {
    return {kExitInternal, "", std::string("internal error: ") + e.what() + "\n"};
  } catch (const std::exception& e) {
    return {kExitInternal, "", std::string("internal error: ") + e.what() + "\n"};
  }
}

/// Explicit seed, else NUCALAB_SEED, else the fixed default.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed) {
  return explicit_seed ? *explicit_seed : sampling::seed_from_env();
}

// --- text rendering ----------------------------------------------------------

inline std::string vec_str(const Vec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + ")";
}

inline std::string config_str(const EvPerConfig& x) {
  auto list = [](const std::vector<Vec>& vs) {
    std::string s;
    for (const auto& v : vs) s += (s.empty() ? "" : " ") + vec_str(v);
    return s;
  };
  std::string left;
  for (auto it = x.left_period().rbegin(); it != x.left_period().rend(); ++it) left += (left.empty() ? "" : " ") + vec_str(*it);
  return "...[" + left + "]* | core@" + std::to_string(x.core_start()) + " [" + list(x.core()) + "] | [" +
         list(x.right_period()) + "]*...";
}

inline std::string config_str(const FinSuppConfig& x, int d = 1) {
  std::string s = "{";
  for (const auto& [g, v] : x.values()) {
    if (nucalab::is_zero(v)) continue;
    s += (s.size() > 1 ? ", " : "") + g.str(d) + ": " + vec_str(v);
  }
  return s + "}";
}

inline void describe(std::ostringstream& os, const Verdict& v, int depth, const RuleConfig* parent) {
  std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  os << pad << to_string(v.property) << ": " << to_string(v.status) << " [" << certificate_kind(v.certificate) << "]";
  if (parent && !(v.subject == *parent)) os << " on limit rule " << io::rule_digest(v.subject);
  os << "\n";
  const int d = v.subject.universe().d;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cert::WindowRankFailure>) {
          os << pad << "  window E_" << c.radius << ": rank " << c.rank << " < " << c.full << "\n";
        } else if constexpr (std::is_same_v<T, cert::FinSuppKernelWitness>) {
          os << pad << "  kernel element " << config_str(c.x, d) << "\n";
        } else if constexpr (std::is_same_v<T, cert::EvPerKernelWitness>) {
          os << pad << "  kernel element " << config_str(c.x) << "\n";
        } else if constexpr (std::is_same_v<T, cert::RecurrenceWindow>) {
          os << pad << "  " << (c.kind == cert::RecurrenceWindow::Kind::Support ? "support" : "extension")
             << " window [" << c.lo << ", " << c.hi << "], kernel dimension " << c.kernel_dim << "\n";
        } else if constexpr (std::is_same_v<T, cert::InverseRule>) {
          os << pad << "  " << to_string(c.side) << " inverse " << io::rule_to_json(c.t).dump() << "\n";
        } else if constexpr (std::is_same_v<T, cert::DualTransfer>) {
          os << pad << "  from the dual configuration:\n";
          describe(os, *c.dual, depth + 2, nullptr);
        } else if constexpr (std::is_same_v<T, cert::Implication>) {
          os << pad << "  implied by:\n";
          describe(os, *c.premise, depth + 2, &v.subject);
        } else if constexpr (std::is_same_v<T, cert::Conjunction>) {
          os << pad << "  all of:\n";
          for (const auto& p : c.parts) describe(os, *p, depth + 2, &v.subject);
        } else {
          os << pad << "  no decision with windows up to n = " << c.n_max << "\n";
        }
      },
      v.certificate);
}

inline std::string describe(const Verdict& v) {
  std::ostringstream os;
  describe(os, v, 0, nullptr);
  return os.str();
}

// --- reports -----------------------------------------------------------------

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline json run_report(const std::string& command, const std::vector<std::string>& echo,
                       const std::optional<RuleConfig>& rule, const Stopwatch& clock) {
  json j{{"schema_version", kSchemaVersion}, {"command", command}, {"args", echo}};
  j["rule_digest"] = rule ? json(io::rule_digest(*rule)) : json(nullptr);
  j["elapsed_ms"] = clock.elapsed_ms();
  return j;
}

// --- check -------------------------------------------------------------------

struct CheckOptions {
  std::string rule_path;
  std::string property;
  AnalysisBounds bounds;
  bool json = false;
  std::vector<std::string> echo;
};

inline Output cmd_check(const CheckOptions& o) {
  return guarded([&] {
    Stopwatch clock;
    auto p = parse_property(o.property);
    if (!p) throw ContractViolation("unknown property '" + o.property + "'");
    RuleConfig s = io::read_rule_file(o.rule_path);
    Analyzer a(s, o.bounds);
    const Verdict& v = a.verdict(*p);
    auto ok = verify_certificate(v);
    if (!ok) return Output{kExitInternal, "", "internal error: certificate does not verify: " + ok.reason + "\n"};
    Output out{exit_for(v.status), "", ""};
    if (o.json) {
      json j = run_report("check", o.echo, s, clock);
      j["property"] = to_string(*p);
      j["bounds"] = {{"n_max", o.bounds.n_max},
                     {"mem_bound", o.bounds.mem_bound},
                     {"support_bound", o.bounds.support_bound},
                     {"max_period", o.bounds.max_period}};
      j["certificate_verified"] = true;
      j["verdict"] = io::verdict_json(v);
      out.out = io::dump_line(j);
    } else {
      out.out = describe(v);
    }
    return out;
  });
}

// --- dual --------------------------------------------------------------------

inline Output cmd_dual(const std::string& rule_path) {
  return guarded([&] {
    RuleConfig s = io::read_rule_file(rule_path);
    return Output{kExitOk, io::format_document(io::rule_to_json(dual_config(s))), ""};
  });
}

// --- invert ------------------------------------------------------------------

struct InvertOptions {
  std::string rule_path;
  std::string mode = "all";  // left | right | construct | all
  int mem_bound = 3;
  int support_bound = 4;
  int e_bound = 4;
  bool json = false;
  std::vector<std::string> echo;
};

inline Output cmd_invert(const InvertOptions& o) {
  return guarded([&] {
    Stopwatch clock;
    if (o.mode != "left" && o.mode != "right" && o.mode != "construct" && o.mode != "all")
      throw ContractViolation("unknown mode '" + o.mode + "' (left, right, construct, all)");
    RuleConfig s = io::read_rule_file(o.rule_path);
    require_d1(s, "inverse search");
    json results = json::array();
    std::ostringstream text;
    bool any = false;
    auto record = [&](const char* mode, const std::optional<RuleConfig>& t, const std::vector<std::string>& notes) {
      json r{{"mode", mode}, {"found", t.has_value()}};
      r["inverse"] = t ? io::rule_to_json(*t) : json(nullptr);
      if (!notes.empty()) r["diagnostics"] = notes;
      results.push_back(std::move(r));
      text << mode << ": " << (t ? "found" : "none within bounds") << "\n";
      if (t) text << io::format_document(io::rule_to_json(*t));
      for (const auto& n : notes) text << "  " << n << "\n";
      any = any || t.has_value();
    };
    if (o.mode == "left" || o.mode == "all") record("left", find_left_inverse(s, o.mem_bound, o.support_bound), {});
    if (o.mode == "right" || o.mode == "all") record("right", find_right_inverse(s, o.mem_bound, o.support_bound), {});
    if (o.mode == "construct" || o.mode == "all") {
      auto c = construct_inverse(s, o.e_bound);
      record("construct", c.inverse, c.diagnostics);
    }
    Output out{any ? kExitOk : kExitFails, "", ""};
    if (o.json) {
      json j = run_report("invert", o.echo, s, clock);
      j["bounds"] = {{"mem_bound", o.mem_bound}, {"support_bound", o.support_bound}, {"e_bound", o.e_bound}};
      j["results"] = std::move(results);
      out.out = io::dump_line(j);
    } else {
      out.out = text.str();
    }
    return out;
  });
}

// --- shadow ------------------------------------------------------------------

struct ShadowOptions {
  std::string rule_path;
  std::string epsilon = "2^-2";
  int horizon = 10;
  std::string perturb = "none";  // none | edge | random
  std::optional<std::uint64_t> seed;
  int sft_window = 3;
  std::vector<int> powers{1};
  std::vector<std::string> echo;
};

inline Output cmd_shadow(const ShadowOptions& o) {
  return guarded([&] {
    Stopwatch clock;
    if (o.horizon < 0) throw ContractViolation("horizon must be >= 0");
    auto kind = parse_perturbation(o.perturb);
    if (!kind) throw ContractViolation("unknown perturbation '" + o.perturb + "' (none, edge, random)");
    Dyadic eps = parse_dyadic(o.epsilon);
    RuleConfig s = io::read_rule_file(o.rule_path);
    require_d1(s, "shadowing");
    auto gens = powers_of(s, o.powers);
    const std::uint64_t seed = resolve_seed(o.seed);
    Dyadic delta = required_delta(gens, eps, o.sft_window);
    Vec e1(static_cast<std::size_t>(s.universe().k), 0);
    e1[0] = 1;
    EvPerConfig x0 = EvPerConfig::from_finsupp(FinSuppConfig::delta(s.universe().k, Cell{0}, e1));
    auto orbit = generate_pseudo_orbit(gens, x0, delta, std::vector<int>(gens.size(), o.horizon + 1), {*kind, seed});
    auto rep = shadow_point(orbit, eps, o.sft_window);
    json j = run_report("shadow", o.echo, s, clock);
    j["seed"] = seed;
    j["perturbation"] = o.perturb;
    j["horizon"] = o.horizon;
    j["powers"] = o.powers;
    j["shadow"] = io::shadow_json(rep, orbit);
    Output out{rep.ok ? kExitOk : kExitFails, io::dump_line(j), ""};
    if (!rep.ok) out.err = "shadowing failed: " + rep.message + "\n";
    return out;
  });
}

// --- repro-paper -------------------------------------------------------------

struct ReproOptions {
  std::optional<std::string> rule_path;  // the counterexample; built in when absent
  AnalysisBounds bounds;                 // n_max 8, mem_bound 3, support_bound 4 by default
  int structural_samples = 100;
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::vector<std::string> echo;
};

enum class ClaimResult { Confirmed, Mismatch, Inconclusive };

inline const char* to_string(ClaimResult r) {
  switch (r) {
    case ClaimResult::Confirmed: return "confirmed";
    case ClaimResult::Mismatch: return "MISMATCH";
    case ClaimResult::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Claim {
  std::string name;
  ClaimResult result = ClaimResult::Inconclusive;
  std::string detail;
  std::optional<Verdict> verdict;
};

struct ReproResult {
  std::vector<Claim> claims;  // the nine property claims
  std::vector<Claim> checks;  // witnesses, anchors, windows and structural identities

  int exit_code() const {
    bool inconclusive = false;
    for (const auto* list : {&claims, &checks})
      for (const auto& c : *list) {
        if (c.result == ClaimResult::Mismatch) return kExitFails;
        inconclusive = inconclusive || c.result == ClaimResult::Inconclusive;
      }
    return inconclusive ? kExitInconclusive : kExitOk;
  }
};

/// The property table of the bijective counterexample and its dual, plus the exact witnesses
/// behind it and the structural identities of the duality.
inline ReproResult reproduce(const RuleConfig& s, const AnalysisBounds& b, int samples, std::uint64_t seed) {
  require_d1(s, "repro-paper");
  ReproResult res;
  const RuleConfig sd = dual_config(s);
  Analyzer a(s, b), ad(sd, b);

  auto claim = [&](Analyzer& an, const char* who, Property p, Status expected) {
    Claim c;
    const Verdict& v = an.verdict(p);
    c.name = std::string(who) + " " + (expected == Status::Fails ? "not " : "") + to_string(p);
    auto ok = verify_certificate(v);
    if (!ok) {
      c.result = ClaimResult::Mismatch;
      c.detail = "certificate rejected: " + ok.reason;
    } else if (v.status == expected) {
      c.result = ClaimResult::Confirmed;
      c.detail = std::string(to_string(v.status)) + " via " + certificate_kind(v.certificate);
    } else if (v.definitive()) {
      c.result = ClaimResult::Mismatch;
      c.detail = std::string("verdict is ") + to_string(v.status) + " via " + certificate_kind(v.certificate);
    } else {
      c.detail = "Inconclusive within bounds";
    }
    c.verdict = v;
    res.claims.push_back(std::move(c));
  };
  claim(a, "s", Property::Surjective, Status::Holds);
  claim(a, "s", Property::Injective, Status::Holds);
  claim(a, "s", Property::PreInjective, Status::Holds);
  claim(a, "s", Property::PostSurjective, Status::Fails);
  claim(a, "s", Property::StablyInjective, Status::Fails);
  claim(ad, "s*", Property::Surjective, Status::Holds);
  claim(ad, "s*", Property::PostSurjective, Status::Holds);
  claim(ad, "s*", Property::PreInjective, Status::Holds);
  claim(ad, "s*", Property::Injective, Status::Fails);

  auto check = [&](std::string name, ClaimResult r, std::string detail) {
    res.checks.push_back({std::move(name), r, std::move(detail), std::nullopt});
  };
  auto pass = [](bool ok) { return ok ? ClaimResult::Confirmed : ClaimResult::Mismatch; };

  {
    std::int64_t bad = -1;
    for (int n = 0; n <= b.n_max && bad < 0; ++n) {
      auto w = induced_map(s, box(1, n));
      if (rank(w.matrix) != w.matrix.rows()) bad = n;
    }
    check("s window maps onto V^{E_n} for n <= " + std::to_string(b.n_max), pass(bad < 0),
          bad < 0 ? "full rank on every window" : "rank deficit at n = " + std::to_string(bad));
  }
  {
    auto res_a = injectivity_anchors(s, interval_anchors(s, -4, 4), b.n_max);
    std::size_t settled = 0;
    std::int64_t worst = 0;
    for (const auto& r : res_a)
      if (r.settled_at) {
        ++settled;
        worst = std::max(worst, *r.settled_at);
      }
    check("s injective at all anchors in [-4, 4]",
          settled == res_a.size() ? ClaimResult::Confirmed : ClaimResult::Inconclusive,
          std::to_string(settled) + "/" + std::to_string(res_a.size()) + " anchors settled" +
              (settled ? ", largest radius " + std::to_string(worst) : ""));
  }
  {
    const std::size_t k = static_cast<std::size_t>(s.universe().k);
    Vec zero(k, 0), one(k, 0);
    one[0] = 1;
    EvPerConfig c(s.universe().k, 0, {}, {zero}, {one});
    bool ok = !c.is_zero() && apply_evper(sd, c).is_zero();
    check("s* kernel witness c = 0 on n <= -1, e_1 on n >= 0", pass(ok),
          ok ? "sigma_{s*}(c) = 0 exactly" : "sigma_{s*}(c) != 0");
  }
  {
    auto res_p = postsurjectivity_anchors(sd, interval_anchors(sd, -4, 4), b.n_max);
    std::size_t backed = 0;
    for (const auto& r : res_p)
      if (r.preimage &&
          apply_finsupp(sd, *r.preimage) == FinSuppConfig::delta(sd.universe().k, r.anchor.g, r.anchor.v))
        ++backed;
    check("s* post-surjective anchors in [-4, 4] have finitely supported preimages",
          backed == res_p.size() ? ClaimResult::Confirmed : ClaimResult::Inconclusive,
          std::to_string(backed) + "/" + std::to_string(res_p.size()) + " anchors witness-backed");
  }
  {
    std::mt19937_64 rng(seed);
    sampling::RandomRuleSpec spec;
    std::size_t inv = 0, fun = 0, adj = 0, total = 0;
    bool own = check_involution(s) && check_involution(sd) && check_functoriality(s, sd) && check_functoriality(sd, s);
    for (int i = 0; i < 20; ++i)
      own = own && check_adjointness(s, sampling::random_finsupp(s.universe(), 4, rng),
                                     sampling::random_finsupp(s.universe(), 4, rng));
    check("s: involution, functoriality and adjointness", pass(own), own ? "exact equalities hold" : "identity violated");
    for (int i = 0; i < samples; ++i) {
      auto r = sampling::random_config(spec, rng);
      auto t = sampling::random_config_over(r.universe(), r.memory(), spec.max_overrides, spec.override_span,
                                            rng() % 2 == 0, rng);
      ++total;
      inv += check_involution(r);
      fun += check_functoriality(r, t);
      adj += check_adjointness(r, sampling::random_finsupp(r.universe(), 3, rng),
                               sampling::random_finsupp(r.universe(), 3, rng));
    }
    const std::string of = "/" + std::to_string(total);
    check("random involution s** = s", pass(inv == total), std::to_string(inv) + of);
    check("random functoriality (st)* = t* s*", pass(fun == total), std::to_string(fun) + of);
    check("random adjointness <s* w | c> = <w | s c>", pass(adj == total), std::to_string(adj) + of);
  }
  return res;
}

inline json claim_json(const Claim& c) {
  json j{{"claim", c.name}, {"result", to_string(c.result)}, {"detail", c.detail}};
  if (c.verdict) j["verdict"] = io::verdict_json(*c.verdict);
  return j;
}

inline Output cmd_repro_paper(const ReproOptions& o) {
  return guarded([&] {
    Stopwatch clock;
    RuleConfig s = o.rule_path ? io::read_rule_file(*o.rule_path) : rules::ex_s0();
    const std::uint64_t seed = resolve_seed(o.seed);
    auto res = reproduce(s, o.bounds, o.structural_samples, seed);
    Output out{res.exit_code(), "", ""};
    if (o.json) {
      json j = run_report("repro-paper", o.echo, s, clock);
      j["seed"] = seed;
      j["bounds"] = {{"n_max", o.bounds.n_max}, {"mem_bound", o.bounds.mem_bound}, {"support_bound", o.bounds.support_bound}};
      json claims = json::array(), checks = json::array();
      for (const auto& c : res.claims) claims.push_back(claim_json(c));
      for (const auto& c : res.checks) checks.push_back(claim_json(c));
      j["claims"] = std::move(claims);
      j["checks"] = std::move(checks);
      out.out = io::dump_line(j);
    } else {
      std::ostringstream os;
      std::size_t confirmed = 0;
      for (const auto* list : {&res.claims, &res.checks})
        for (const auto& c : *list) {
          os << (c.result == ClaimResult::Confirmed ? "ok    " : c.result == ClaimResult::Mismatch ? "FAIL  " : "??    ")
             << c.name << ": " << c.detail << "\n";
          confirmed += c.result == ClaimResult::Confirmed;
        }
      std::size_t claims_ok = 0;
      for (const auto& c : res.claims) claims_ok += c.result == ClaimResult::Confirmed;
      os << claims_ok << "/" << res.claims.size() << " property claims confirmed; " << confirmed << "/"
         << res.claims.size() + res.checks.size() << " checks in total\n";
      out.out = os.str();
    }
    return out;
  });
}

// --- verify-cert -------------------------------------------------------------

/// Every verdict in a document: a bare verdict, a report with "verdict", or a report
/// whose "claims" carry verdicts.
inline std::vector<Verdict> collect_verdicts(const json& j) {
  std::vector<Verdict> out;
  if (!j.is_object()) throw ParseError("certificate document must be a JSON object");
  if (j.contains("status") && j.contains("certificate")) out.push_back(io::verdict_from(j, "verdict"));
  if (j.contains("verdict")) out.push_back(io::verdict_from(j["verdict"], "verdict"));
  if (j.contains("claims") && j["claims"].is_array())
    for (const auto& c : j["claims"])
      if (c.contains("verdict")) out.push_back(io::verdict_from(c["verdict"], "claims.verdict"));
  if (out.empty()) throw ParseError("no verdict found in the document");
  return out;
}

inline Output cmd_verify_cert(const std::string& path) {
  return guarded([&] {
    auto verdicts = collect_verdicts(io::parse_text(io::read_text(path), path));
    std::ostringstream os;
    bool all = true;
    for (const auto& v : verdicts) {
      auto r = verify_certificate(v);
      os << (r ? "verified " : "REJECTED ") << to_string(v.property) << " " << to_string(v.status) << " ["
         << certificate_kind(v.certificate) << "]";
      if (!r) os << ": " << r.reason;
      os << "\n";
      all = all && r.ok;
    }
    return Output{all ? kExitOk : kExitFails, os.str(), ""};
  });
}

}  // namespace nucalab::cli
