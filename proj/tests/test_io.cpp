#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "nucalab/analysis.hpp"
#include "nucalab/io.hpp"
#include "support.hpp"

using namespace nucalab;
namespace nt = nucalab::testing;

namespace {

/// FNV-1a 64 written out from the published constants.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

json rule_doc(const std::string& text) { return json::parse(text); }

const char* kXorText = R"({"p":2,"k":1,"d":1,"memory":[[-1],[0]],
  "default_rule":{"[-1]":[[1]],"[0]":[[1]]},"overrides":{}})";

}  // namespace

TEST(Fnv, PublishedVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

TEST(RuleJson, ParsesHandWrittenDocument) {
  auto s = io::rule_from_json(rule_doc(kXorText));
  EXPECT_EQ(s, rules::xor_tail());
}

TEST(RuleJson, SchemaVersionOptionalButChecked) {
  auto j = rule_doc(kXorText);
  j["schema_version"] = 1;
  EXPECT_EQ(io::rule_from_json(j), rules::xor_tail());
  j["schema_version"] = 2;
  EXPECT_THROW(io::rule_from_json(j), ParseError);
  EXPECT_EQ(io::rule_to_json(rules::xor_tail())["schema_version"], 1);
}

TEST(RuleJson, EntriesReducedModP) {
  auto j = rule_doc(R"({"p":3,"k":1,"d":1,"memory":[[0]],"default_rule":{"[0]":[[7]]},
                        "overrides":{"[2]":{"[0]":[[-1]]}}})");
  auto s = io::rule_from_json(j);
  EXPECT_EQ(s.entry(Cell{0}, Cell{0})(0, 0), 1u);
  EXPECT_EQ(s.entry(Cell{2}, Cell{0})(0, 0), 2u);
}

TEST(RuleJson, MalformedDocumentsRejected) {
  const char* bad[] = {
      R"([])",
      R"({"k":1,"d":1,"memory":[[0]],"default_rule":{}})",
      R"({"p":4,"k":1,"d":1,"memory":[[0]],"default_rule":{}})",
      R"({"p":2,"k":0,"d":1,"memory":[[0]],"default_rule":{}})",
      R"({"p":2,"k":1,"d":1,"memory":[],"default_rule":{}})",
      R"({"p":2,"k":1,"d":1,"memory":[[0,1]],"default_rule":{}})",
      R"({"p":2,"k":1,"d":1,"memory":[[0]],"default_rule":{"[1]":[[1]]}})",
      R"({"p":2,"k":1,"d":1,"memory":[[0]],"default_rule":{"[0]":[[1,0]]}})",
      R"({"p":2,"k":1,"d":1,"memory":[[0]],"default_rule":{"[0]":[[1.5]]}})",
      R"({"p":2,"k":1,"d":1,"memory":[[0]],"default_rule":{"zero":[[1]]}})",
      R"({"p":2,"k":1,"d":1,"memory":[[0]],"default_rule":{},"colour":"red"})",
      R"({"p":2,"k":1,"d":1,"memory":[[0]],"default_rule":{},"overrides":[]})",
      R"({"p":2,"k":1,"d":2,"memory":[[0,0]],"default_rule":{},"left_default_rule":{}})",
  };
  for (const char* text : bad) EXPECT_THROW(io::rule_from_json(rule_doc(text)), ParseError) << text;
}

TEST(RuleJson, UnsupportedDimension) {
  EXPECT_THROW(io::rule_from_json(rule_doc(R"({"p":2,"k":1,"d":3,"memory":[[0,0,0]],"default_rule":{}})")),
               Unsupported);
}

TEST(RuleJson, InvalidTextAndMissingFile) {
  EXPECT_THROW(io::parse_text("{\"p\": 2,", "x"), ParseError);
  EXPECT_THROW(io::read_text("/nonexistent/nucalab/rule.json"), std::ios_base::failure);
}

TEST(RuleJson, TwoDimensionalRoundTrip) {
  Universe u(2, 2, 3);
  MemorySet mem({Cell{0, 0}, Cell{1, 0}, Cell{0, -1}});
  std::mt19937_64 rng(nt::seed_from_env());
  for (int i = 0; i < 20; ++i) {
    auto s = nt::random_config_over(u, mem, 2, 2, false, rng);
    EXPECT_EQ(io::rule_from_json(io::rule_to_json(s)), s);
  }
}

TEST(RuleJson, FixturesMatchBuiltins) {
  const std::string dir = NUCALAB_RULES_DIR;
  EXPECT_EQ(io::read_rule_file(dir + "/ex_s0.json"), rules::ex_s0());
  EXPECT_EQ(io::read_rule_file(dir + "/ex_s0_dual.json"), rules::ex_s0_dual());
  EXPECT_EQ(io::read_rule_file(dir + "/xor.json"), rules::xor_tail());
  EXPECT_EQ(io::read_rule_file(dir + "/gf3_diag.json"), rules::gf3_diagonal());
  EXPECT_EQ(io::read_rule_file(dir + "/identity.json"), rules::identity(Universe(1, 1, 2)));
  EXPECT_EQ(io::read_rule_file(dir + "/shift.json"), rules::shift(Universe(1, 1, 2), Cell{-1}));
}

TEST(Digest, MatchesIndependentHash) {
  for (const auto& s : {rules::ex_s0(), rules::xor_tail(), rules::gf3_diagonal()}) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a(io::rule_to_json(s).dump())));
    EXPECT_EQ(io::rule_digest(s), buf);
  }
  EXPECT_NE(io::rule_digest(rules::ex_s0()), io::rule_digest(rules::ex_s0_dual()));
}

TEST(Digest, StableAcrossSerialization) {
  auto s = rules::ex_s0();
  auto again = io::rule_from_json(json::parse(io::format_document(io::rule_to_json(s))));
  EXPECT_EQ(io::rule_digest(again), io::rule_digest(s));
}

TEST(Configs, FinSuppAndEvPerRoundTrip) {
  std::mt19937_64 rng(nt::seed_from_env());
  Universe u(1, 2, 5);
  for (int i = 0; i < 30; ++i) {
    auto x = nt::random_finsupp(u, 3, rng);
    EXPECT_EQ(io::finsupp_from(io::finsupp_json(x), u, "x"), x);
    auto e = EvPerConfig(2, -2, {Vec{1, 2}, Vec{0, 4}}, {Vec{3, 3}}, {Vec{0, 1}, Vec{2, 0}});
    EXPECT_EQ(io::evper_from(io::evper_json(e), u, "e"), e);
  }
  EXPECT_THROW(io::finsupp_from(json{{"k", 1}, {"cells", json::object()}}, u, "x"), ParseError);
  EXPECT_THROW(io::evper_from(json{{"k", 2}, {"core_start", 0}, {"core", json::array()}, {"left_period", json::array()},
                                   {"right_period", json::array({{1, 1}})}},
                              u, "e"),
               ParseError);
}

TEST(Property, RandomRuleRoundTrip) {
  std::mt19937_64 rng(nt::seed_from_env());
  nt::RandomRuleSpec spec;
  for (int i = 0; i < 200; ++i) {
    auto s = nt::random_config(spec, rng);
    auto j = io::rule_to_json(s);
    auto back = io::rule_from_json(io::parse_text(j.dump(), "t"));
    ASSERT_EQ(back, s) << j.dump();
    EXPECT_EQ(io::rule_to_json(back), j);
    EXPECT_EQ(io::rule_digest(back), io::rule_digest(s));
  }
}

TEST(Property, VerdictRoundTripStillVerifies) {
  std::mt19937_64 rng(nt::seed_from_env());
  nt::RandomRuleSpec spec;
  spec.max_k = 1;
  AnalysisBounds b;
  b.n_max = 4;
  b.mem_bound = 1;
  b.support_bound = 2;
  std::vector<RuleConfig> subjects{rules::ex_s0(), rules::xor_tail(), rules::gf3_diagonal()};
  for (int i = 0; i < 12; ++i) subjects.push_back(nt::random_config(spec, rng));
  for (const auto& s : subjects) {
    Analyzer a(s, b);
    for (auto p : kAllProperties) {
      const Verdict& v = a.verdict(p);
      auto j = io::verdict_json(v);
      Verdict back = io::verdict_from(json::parse(j.dump()), "v");
      EXPECT_EQ(io::verdict_json(back), j);
      EXPECT_TRUE(verify_certificate(back).ok) << j.dump();
    }
  }
}

TEST(VerdictJson, TamperedWitnessRejected) {
  Analyzer a(rules::ex_s0_dual());
  auto j = io::verdict_json(a.verdict(Property::Injective));
  ASSERT_EQ(j["status"], "Fails");
  ASSERT_EQ(j["certificate"]["kind"], "EvPerKernelWitness");
  j["certificate"]["x"]["right_period"] = json::array({json::array({0})});
  j["certificate"]["x"]["core"] = json::array({json::array({1})});
  EXPECT_FALSE(verify_certificate(io::verdict_from(j, "v")).ok);
}

TEST(VerdictJson, UnknownKindRejected) {
  Analyzer a(rules::xor_tail());
  auto j = io::verdict_json(a.verdict(Property::Surjective));
  j["certificate"]["kind"] = "Oracle";
  EXPECT_THROW(io::verdict_from(j, "v"), ParseError);
  j = io::verdict_json(a.verdict(Property::Surjective));
  j["status"] = "Maybe";
  EXPECT_THROW(io::verdict_from(j, "v"), ParseError);
}
