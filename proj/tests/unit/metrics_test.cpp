// Copyright 2026 The susforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "susforge/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "susforge/error.hpp"
#include "susforge/fs.hpp"

namespace susforge::metrics {
namespace {

const fs::path kOutcomes = fs::path(SUSFORGE_FIXTURE_DIR) / "outcomes";

std::vector<OutcomeSet> load_dir(const std::string& dir, const std::vector<std::string>& names) {
  std::vector<OutcomeSet> out;
  for (const auto& n : names) out.push_back(load_outcomes(kOutcomes / dir / (n + ".jsonl")));
  return out;
}

Outcome make(const std::string& id, int cls, std::vector<std::string> cwes = {}) {
  Outcome o;
  o.task_id = id;
  o.func_pass = cls >= 1;
  o.sec_pass = cls == 2;
  o.gold_cwes = std::move(cwes);
  return o;
}

OutcomeSet make_set(const std::string& name, const std::vector<int>& classes) {
  OutcomeSet s;
  s.setting_id = name;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto o = make("t" + std::to_string(i), classes[i]);
    o.setting = name;
    s.outcomes[o.task_id] = o;
  }
  return s;
}

// Exact comparison of a Ratio against p/q.
bool equals_fraction(const Ratio& r, long p, long q) { return r.num * q == p * r.den; }

TEST(NormalizeCwe, Forms) {
  EXPECT_EQ(normalize_cwe("79"), "CWE-79");
  EXPECT_EQ(normalize_cwe("cwe-79"), "CWE-79");
  EXPECT_EQ(normalize_cwe(" CWE 079 "), "CWE-79");
  EXPECT_EQ(normalize_cwe("CWE_1333"), "CWE-1333");
  EXPECT_FALSE(normalize_cwe("XSS"));
  EXPECT_FALSE(normalize_cwe("CWE-"));
  EXPECT_FALSE(normalize_cwe(""));
}

TEST(FormatPct, RoundHalfUpFromIntegers) {
  EXPECT_EQ(format_pct(1, 8), "12.5");
  EXPECT_EQ(format_pct(1, 16), "6.3");   // 6.25
  EXPECT_EQ(format_pct(3, 16), "18.8");  // 18.75
  EXPECT_EQ(format_pct(1, 2000), "0.1"); // 0.05
  EXPECT_EQ(format_pct(2, 3), "66.7");
  EXPECT_EQ(format_pct(0, 5), "0.0");
  EXPECT_EQ(format_pct(5, 5), "100.0");
  EXPECT_EQ(format_pct(1, 0), "n/a");
  EXPECT_DOUBLE_EQ(round1(82.78688), 82.8);
  EXPECT_DOUBLE_EQ(round1(74.74747), 74.7);
  EXPECT_DOUBLE_EQ(round1(0.05), 0.1);
}

TEST(FormatPct, CountsRecoverableFromPercentages) {
  // One decimal and n below 1000 leave less than half a task of slack.
  for (long n = 1; n < 1000; n += 7) {
    for (long c = 0; c <= n; c += std::max(1L, n / 37)) {
      double pct = std::stod(format_pct(c, n));
      EXPECT_EQ(std::lround(pct * n / 100.0), c) << c << "/" << n;
    }
  }
}

struct ModelCell {
  const char* file;
  double func;
  double sec;
};

const ModelCell kAgentModels[] = {
    {"swe-agent__claude-4-sonnet", 61.0, 10.5}, {"openhands__claude-4-sonnet", 49.5, 12.5},
    {"claude-code__claude-4-sonnet", 44.0, 6.0}, {"swe-agent__kimi-k2", 22.5, 6.0},
    {"openhands__kimi-k2", 37.0, 9.0},          {"claude-code__kimi-k2", 43.5, 8.0},
    {"swe-agent__gemini-2.5-pro", 19.5, 7.0},   {"openhands__gemini-2.5-pro", 21.5, 8.5},
    {"claude-code__gemini-2.5-pro", 15.0, 4.5},
};

TEST(Aggregate, AgentModelCells) {
  for (const auto& cell : kAgentModels) {
    auto set = load_outcomes(kOutcomes / "agent_models" / (std::string(cell.file) + ".jsonl"));
    auto m = aggregate(set);
    EXPECT_EQ(m.n_tasks, 200);
    EXPECT_NEAR(m.func_pass_pct(), cell.func, 0.05) << cell.file;
    EXPECT_NEAR(m.sec_pass_pct(), cell.sec, 0.05) << cell.file;
    EXPECT_LE(m.sec_pass_pct(), m.func_pass_pct());
  }
}

TEST(Aggregate, InsecureShares) {
  auto a = aggregate(load_outcomes(kOutcomes / "agent_models" / "swe-agent__claude-4-sonnet.jsonl"));
  auto b = aggregate(load_outcomes(kOutcomes / "agent_models" / "openhands__claude-4-sonnet.jsonl"));
  EXPECT_NEAR(*insecure_share(a), 82.8, 0.05);
  EXPECT_NEAR(*insecure_share(b), 74.7, 0.05);
  // Same value straight from the printed percentages.
  EXPECT_NEAR(100.0 * (1.0 - 10.5 / 61.0), *insecure_share(a), 1e-9);
  EXPECT_NEAR(100.0 * (1.0 - 12.5 / 49.5), *insecure_share(b), 1e-9);
}

TEST(Aggregate, Trivial) {
  auto none = aggregate(make_set("x", {0, 0, 0}));
  EXPECT_EQ(none.func_pass_pct(), 0.0);
  EXPECT_EQ(none.sec_pass_pct(), 0.0);
  EXPECT_FALSE(insecure_share(none));
  auto one = aggregate(make_set("x", {2}));
  EXPECT_EQ(one.func_pass_pct(), 100.0);
  EXPECT_EQ(one.sec_pass_pct(), 100.0);
  EXPECT_EQ(*insecure_share(one), 0.0);
  EXPECT_THROW(aggregate(OutcomeSet{}), PreconditionError);
}

TEST(LoadOutcomes, SchemaErrorsNameTheLine) {
  auto expect_line = [](const std::string& text, std::size_t line) {
    try {
      parse_outcomes(text, "s");
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << e.what();
    }
  };
  const std::string ok = R"({"task_id":"a","func_pass":true,"sec_pass":false})";
  expect_line(ok + "\n{not json}\n", 2);
  expect_line(ok + "\n\n" + R"({"task_id":"b","func_pass":false,"sec_pass":true})" + "\n", 3);
  expect_line(ok + "\n" + ok + "\n", 2);
  expect_line(R"({"task_id":"a","func_pass":1,"sec_pass":false})", 1);
  expect_line(R"({"func_pass":true,"sec_pass":false})", 1);
  expect_line(R"({"task_id":"a","func_pass":true,"sec_pass":false,"cwe_ids":["XSS"]})", 1);
  expect_line("", 1);
  expect_line("\n\n", 2);
}

TEST(LoadOutcomes, FieldsAndSettingName) {
  auto s = parse_outcomes(
      R"({"task_id":"a","func_pass":true,"sec_pass":true,"cwe_ids":["79","CWE-79","cwe-89"],"selected_cwes":null})"
      "\r\n"
      R"({"task_id":"b","func_pass":false,"sec_pass":false,"selected_cwes":[352]})",
      "fallback");
  EXPECT_EQ(s.setting_id, "fallback");
  ASSERT_EQ(s.outcomes.size(), 2u);
  EXPECT_EQ(s.outcomes.at("a").gold_cwes, (std::vector<std::string>{"CWE-79", "CWE-89"}));
  EXPECT_FALSE(s.outcomes.at("a").selected_cwes);
  EXPECT_EQ(*s.outcomes.at("b").selected_cwes, std::vector<std::string>{"CWE-352"});
  auto round = parse_outcomes(s.outcomes.at("a").to_json().dump(), "z");
  EXPECT_EQ(round.setting_id, "fallback");
  EXPECT_EQ(round.outcomes.at("a").gold_cwes, s.outcomes.at("a").gold_cwes);

  auto t3 = load_outcomes(kOutcomes / "agent_models" / "openhands__kimi-k2.jsonl");
  EXPECT_EQ(t3.setting_id, "openhands/kimi-k2");
}

TEST(SecureGivenCorrect, StrategyFixture) {
  auto sets = load_dir("strategies", {"generic", "self_selection", "oracle"});
  // The fixture also carries the per-strategy aggregate rows.
  EXPECT_NEAR(aggregate(sets[0]).func_pass_pct(), 61.0, 0.05);
  EXPECT_NEAR(aggregate(sets[1]).func_pass_pct(), 52.5, 0.05);
  EXPECT_NEAR(aggregate(sets[2]).func_pass_pct(), 56.0, 0.05);
  EXPECT_NEAR(aggregate(sets[0]).sec_pass_pct(), 10.5, 0.05);
  EXPECT_NEAR(aggregate(sets[1]).sec_pass_pct(), 9.5, 0.05);
  EXPECT_NEAR(aggregate(sets[2]).sec_pass_pct(), 10.5, 0.05);

  auto r = secure_given_correct(sets);
  EXPECT_EQ(r.at("generic").den, 29);
  EXPECT_EQ(r.at("generic").num, 5);
  EXPECT_EQ(r.at("self_selection").num, 6);
  EXPECT_EQ(r.at("oracle").num, 8);
  EXPECT_NEAR(r.at("generic").pct(), 17.2, 0.05);
  EXPECT_NEAR(r.at("self_selection").pct(), 20.7, 0.05);
  EXPECT_NEAR(r.at("oracle").pct(), 27.6, 0.05);
}

TEST(SecureGivenCorrect, PermutationAndRelabelInvariance) {
  auto sets = load_dir("strategies", {"generic", "self_selection", "oracle"});
  auto base = secure_given_correct(sets);
  std::vector<int> order = {0, 1, 2};
  std::mt19937 rng(7);
  do {
    std::vector<OutcomeSet> perm;
    for (int i : order) perm.push_back(sets[i]);
    auto r = secure_given_correct(perm);
    for (const auto& [k, v] : base) EXPECT_EQ(r.at(k).num, v.num);
    // Relabel settings and rename tasks consistently.
    std::vector<OutcomeSet> relabeled;
    std::vector<std::string> ids;
    for (const auto& [id, o] : perm.front().outcomes) ids.push_back(id);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < ids.size(); ++i) rename[ids[i]] = "job" + std::to_string(i);
    for (const auto& s : perm) {
      OutcomeSet t;
      t.setting_id = "L_" + s.setting_id;
      for (const auto& [id, o] : s.outcomes) {
        auto c = o;
        c.task_id = rename[id];
        t.outcomes[c.task_id] = c;
      }
      relabeled.push_back(t);
    }
    auto q = secure_given_correct(relabeled);
    for (const auto& [k, v] : base) {
      EXPECT_EQ(q.at("L_" + k).num, v.num);
      EXPECT_EQ(q.at("L_" + k).den, v.den);
    }
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST(SecureGivenCorrect, DegenerateCases) {
  auto a = make_set("a", {2, 1, 1, 0, 2});
  auto b = a;
  b.setting_id = "b";
  auto r = secure_given_correct({a, b});
  EXPECT_TRUE(equals_fraction(r.at("a"), 2, 4));
  EXPECT_TRUE(equals_fraction(r.at("b"), 2, 4));
  auto z = make_set("z", {0, 0, 0, 0, 0});
  auto e = secure_given_correct({a, z});
  EXPECT_FALSE(e.at("a").defined());
  EXPECT_THROW(secure_given_correct({a}), PreconditionError);
  auto shorter = make_set("s", {2, 2});
  EXPECT_THROW(secure_given_correct({a, shorter}), PreconditionError);
}

// Independent recomputation straight from the rows.
struct BruteCautious {
  std::map<std::string, std::set<std::string>> cautious;
  std::set<std::string> insufficient;
  std::map<std::string, int> regions;
};

BruteCautious brute_cautious(const std::vector<OutcomeSet>& sets, double threshold) {
  BruteCautious b;
  std::set<std::string> cwes;
  for (const auto& [id, o] : sets[0].outcomes) cwes.insert(o.gold_cwes.begin(), o.gold_cwes.end());
  for (const auto& cwe : cwes) {
    std::vector<std::string> inter;
    for (const auto& [id, o] : sets[0].outcomes) {
      if (std::find(o.gold_cwes.begin(), o.gold_cwes.end(), cwe) == o.gold_cwes.end()) continue;
      bool all = true;
      for (const auto& s : sets) all = all && s.outcomes.at(id).func_pass;
      if (all) inter.push_back(id);
    }
    if (inter.empty()) {
      b.insufficient.insert(cwe);
      continue;
    }
    for (const auto& s : sets) {
      int secure = 0;
      for (const auto& id : inter) secure += s.outcomes.at(id).sec_pass;
      double rate = 100.0 * secure / static_cast<double>(inter.size());
      if (rate > threshold + 1e-12) b.cautious[s.setting_id].insert(cwe);
    }
  }
  std::set<std::string> all;
  for (const auto& [k, v] : b.cautious) all.insert(v.begin(), v.end());
  for (const auto& cwe : all) {
    std::string key;
    for (const auto& s : sets) {
      if (b.cautious[s.setting_id].count(cwe)) key += (key.empty() ? "" : "+") + s.setting_id;
    }
    ++b.regions[key];
  }
  return b;
}

void expect_matches_brute(const std::vector<OutcomeSet>& sets) {
  auto rep = cautious_cwes(sets);
  auto b = brute_cautious(sets, 25.0);
  for (const auto& s : sets) {
    EXPECT_EQ(rep.per_setting.at(s.setting_id).cautious, b.cautious[s.setting_id]) << s.setting_id;
  }
  EXPECT_EQ(std::set<std::string>(rep.insufficient.begin(), rep.insufficient.end()), b.insufficient);
  std::map<std::string, int> regions;
  for (const auto& [k, v] : rep.regions) regions[k] = static_cast<int>(v.size());
  EXPECT_EQ(regions, b.regions);
  // Inclusive intersections from the exclusive regions.
  for (const auto& [key, count] : rep.intersections) {
    std::set<std::string> want;
    std::size_t start = 0;
    while (start <= key.size()) {
      auto plus = key.find('+', start);
      if (plus == std::string::npos) plus = key.size();
      want.insert(key.substr(start, plus - start));
      start = plus + 1;
    }
    int expect = 0;
    for (const auto& [rk, rv] : b.regions) {
      std::set<std::string> members;
      std::size_t st = 0;
      while (st <= rk.size()) {
        auto p = rk.find('+', st);
        if (p == std::string::npos) p = rk.size();
        members.insert(rk.substr(st, p - st));
        st = p + 1;
      }
      if (std::includes(members.begin(), members.end(), want.begin(), want.end())) expect += rv;
    }
    EXPECT_EQ(count, expect) << key;
  }
}

TEST(CautiousCwes, MixedFixture) {
  auto sets = load_dir("strata_mixed", {"A", "B", "C"});
  auto rep = cautious_cwes(sets);
  const auto& a = rep.per_setting.at("A");
  const auto& b = rep.per_setting.at("B");
  EXPECT_TRUE(a.cautious.count("CWE-79"));
  // B is secure on exactly one of four CWE-79 tasks.
  EXPECT_TRUE(equals_fraction(b.per_cwe.at("CWE-79"), 1, 4));
  EXPECT_EQ(b.per_cwe.at("CWE-79").den, 4);
  // The multi-CWE task counts under CWE-89 as well; C lands on 1/4 there.
  EXPECT_EQ(b.per_cwe.at("CWE-89").den, 4);
  EXPECT_EQ(rep.per_setting.at("A").per_cwe.at("CWE-601").den, 4);
  EXPECT_FALSE(rep.per_setting.at("C").cautious.count("CWE-89"));
  EXPECT_FALSE(b.cautious.count("CWE-79"));
  EXPECT_EQ(rep.insufficient, std::vector<std::string>{"CWE-20"});
  EXPECT_EQ(rep.intersections.at("A+B+C"), 1);  // CWE-352
  expect_matches_brute(sets);
}

TEST(CautiousCwes, ExactQuarterIsExcluded) {
  OutcomeSet a, b;
  a.setting_id = "a";
  b.setting_id = "b";
  for (int i = 0; i < 4; ++i) {
    auto id = "t" + std::to_string(i);
    a.outcomes[id] = make(id, i == 0 ? 2 : 1, {"CWE-79"});
    b.outcomes[id] = make(id, 2, {"CWE-79"});
  }
  auto rep = cautious_cwes({a, b});
  EXPECT_TRUE(rep.per_setting.at("a").cautious.empty());
  EXPECT_TRUE(rep.per_setting.at("b").cautious.count("CWE-79"));
  // Lowering the bar admits the boundary value.
  auto low = cautious_cwes({a, b}, 24.9);
  EXPECT_TRUE(low.per_setting.at("a").cautious.count("CWE-79"));
}

TEST(CautiousCwes, DisjointFixtureHasNoOverlap) {
  auto sets = load_dir("strata_disjoint", {"A", "B", "C"});
  auto rep = cautious_cwes(sets);
  EXPECT_EQ(rep.intersections.at("A+B+C"), 0);
  EXPECT_EQ(rep.intersections.at("A+B"), 0);
  EXPECT_EQ(rep.intersections.at("A+C"), 0);
  EXPECT_EQ(rep.intersections.at("B+C"), 0);
  EXPECT_EQ(rep.intersections.at("A"), 2);
  EXPECT_EQ(rep.intersections.at("B"), 2);
  EXPECT_EQ(rep.intersections.at("C"), 1);
  EXPECT_EQ(rep.union_size, 5);
  expect_matches_brute(sets);
}

TEST(CautiousCwes, RandomFixturesMatchBruteForce) {
  std::mt19937 rng(2026);
  const std::vector<std::string> pool = {"CWE-20", "CWE-22", "CWE-79", "CWE-89", "CWE-352", "CWE-601"};
  for (int round = 0; round < 200; ++round) {
    int k = 2 + static_cast<int>(rng() % 3);
    int n = 1 + static_cast<int>(rng() % 30);
    std::vector<OutcomeSet> sets(k);
    for (int s = 0; s < k; ++s) sets[s].setting_id = "s" + std::to_string(s);
    for (int t = 0; t < n; ++t) {
      std::vector<std::string> cwes = {pool[rng() % pool.size()]};
      if (rng() % 8 == 0) {
        auto extra = pool[rng() % pool.size()];
        if (extra != cwes[0]) cwes.push_back(extra);
      }
      for (int s = 0; s < k; ++s) {
        auto id = "t" + std::to_string(t);
        sets[s].outcomes[id] = make(id, static_cast<int>(rng() % 4 == 0 ? 0 : 1 + rng() % 2), cwes);
      }
    }
    expect_matches_brute(sets);
  }
}

TEST(TransitionMatrix, IdentityIsDiagonal) {
  auto a = make_set("a", {0, 1, 2, 2, 1, 0, 0});
  auto m = transition_matrix(a, a);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) EXPECT_EQ(m.counts[i][j], 0);
    }
  }
  EXPECT_EQ(m.counts[0][0], 3);
  EXPECT_EQ(m.counts[2][2], 2);
}

TEST(TransitionMatrix, OneInsecureToSecureOfTwentyFive) {
  std::vector<int> from(25, 0), to(25, 0);
  from[0] = 1;
  to[0] = 2;
  auto m = transition_matrix(make_set("a", from), make_set("b", to));
  EXPECT_EQ(format_pct(m.cell(OutcomeClass::kInsecure, OutcomeClass::kSecure).num, m.n), "4.0");
}

TEST(TransitionMatrix, RandomSumsToHundred) {
  std::mt19937 rng(11);
  for (int round = 0; round < 300; ++round) {
    int n = 1 + static_cast<int>(rng() % 250);
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % 3);
      b[i] = static_cast<int>(rng() % 3);
    }
    auto m = transition_matrix(make_set("a", a), make_set("b", b));
    long total = 0;
    double pct = 0;
    for (auto f : kAllClasses) {
      for (auto t : kAllClasses) {
        total += m.cell(f, t).num;
        pct += m.cell(f, t).pct();
      }
    }
    EXPECT_EQ(total, n);
    EXPECT_NEAR(pct, 100.0, 1e-9);
  }
}

const double kTransitions[3][3] = {{35.0, 5.1, 0.0}, {5.6, 40.0, 4.0}, {3.4, 0.0, 7.3}};

TEST(TransitionMatrix, At180) {
  auto sets = load_dir("transitions_180", {"generic", "oracle"});
  auto m = transition_matrix(sets[0], sets[1]);
  ASSERT_EQ(m.n, 180);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double shown = std::stod(format_pct(m.counts[i][j], m.n));
      EXPECT_NEAR(shown, kTransitions[i][j], 0.1 + 1e-9) << i << "," << j;
    }
  }
}

// Per cell, the counts c with |display(c/n) - target| <= 0.1 form a
// contiguous run, so a universe of size n fits iff n lies between the sums
// of the per-cell minima and maxima.
bool transitions_fit(int n, bool rounded) {
  int lo = 0, hi = 0;
  for (const auto& row : kTransitions) {
    for (double target : row) {
      int cmin = -1, cmax = -1;
      for (int c = 0; c <= n; ++c) {
        double v = rounded ? std::stod(format_pct(c, n)) : 100.0 * c / n;
        if (std::fabs(v - target) <= 0.1 + 1e-9) {
          if (cmin < 0) cmin = c;
          cmax = c;
        }
      }
      if (cmin < 0) return false;
      lo += cmin;
      hi += cmax;
    }
  }
  return lo <= n && n <= hi;
}

TEST(TransitionMatrix, UniverseFeasibility) {
  EXPECT_FALSE(transitions_fit(177, false));
  EXPECT_FALSE(transitions_fit(177, true));
  EXPECT_TRUE(transitions_fit(180, true));
  for (int n = 170; n < 200; ++n) {
    if (n != 180) EXPECT_FALSE(transitions_fit(n, true)) << n;
  }
}

TEST(TransitionMatrix, At177BestFit) {
  auto sets = load_dir("transitions_177", {"generic", "oracle"});
  auto m = transition_matrix(sets[0], sets[1]);
  ASSERT_EQ(m.n, 177);
  int off = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double shown = std::stod(format_pct(m.counts[i][j], m.n));
      if (std::fabs(shown - kTransitions[i][j]) > 0.1 + 1e-9) {
        ++off;
        EXPECT_EQ(i, 1);
        EXPECT_EQ(j, 1);
        EXPECT_EQ(format_pct(m.counts[i][j], m.n), "39.5");
      }
    }
  }
  EXPECT_EQ(off, 1);
}

struct HandPair {
  std::set<std::string> pred, gold;
  long tp, np, ng;
};

TEST(Selection, HandComputedPairs) {
  const std::vector<HandPair> cases = {
      {{"CWE-79"}, {"CWE-79"}, 1, 1, 1},
      {{"CWE-79", "CWE-89"}, {"CWE-79"}, 1, 2, 1},
      {{"CWE-89"}, {"CWE-79"}, 0, 1, 1},
      {{"CWE-79", "CWE-89", "CWE-22"}, {"CWE-79", "CWE-22"}, 2, 3, 2},
      {{"CWE-1", "CWE-2", "CWE-3", "CWE-4"}, {"CWE-4", "CWE-5"}, 1, 4, 2},
      {{"CWE-20"}, {"CWE-20", "CWE-79", "CWE-89"}, 1, 1, 3},
      {{"CWE-352", "CWE-601"}, {"CWE-601", "CWE-352"}, 2, 2, 2},
      {{"CWE-1", "CWE-2", "CWE-3", "CWE-4", "CWE-5", "CWE-6", "CWE-7"}, {"CWE-7"}, 1, 7, 1},
      {{"CWE-9", "CWE-8"}, {"CWE-7", "CWE-6"}, 0, 2, 2},
      {{"CWE-918", "CWE-22", "CWE-78"}, {"CWE-78"}, 1, 3, 1},
  };
  for (const auto& c : cases) {
    auto s = score_selection({{c.pred, c.gold}});
    EXPECT_EQ(s.true_positive, c.tp);
    EXPECT_TRUE(equals_fraction(s.precision(), c.tp, c.np));
    EXPECT_TRUE(equals_fraction(s.recall(), c.tp, c.ng));
    // Harmonic mean of the exact rationals: 2PR/(P+R) = 2tp/(np+ng).
    if (c.tp > 0) {
      // P = tp/np, R = tp/ng; 2PR = 2tp^2/(np ng), P+R = tp(np+ng)/(np ng).
      long num = 2 * c.tp * c.tp;
      long den = c.tp * (c.np + c.ng);
      EXPECT_TRUE(equals_fraction(s.f1(), num, den));
    } else {
      EXPECT_EQ(s.f1().num, 0);
    }
  }
  auto two = score_selection({{{"CWE-79", "CWE-89"}, {"CWE-79"}}});
  EXPECT_NEAR(two.f1().value(), 2.0 / 3.0, 1e-12);
}

TEST(Selection, EmptyPredictionExcluded) {
  auto s = score_selection({{{}, {"CWE-79"}}, {{"CWE-79"}, {"CWE-79"}}});
  EXPECT_EQ(s.excluded_empty, 1);
  EXPECT_EQ(s.tasks, 1);
  EXPECT_EQ(s.gold, 1);
  EXPECT_TRUE(equals_fraction(s.recall(), 1, 1));
  auto none = score_selection({{{}, {"CWE-79"}}});
  EXPECT_FALSE(none.precision().defined());
  EXPECT_FALSE(none.recall().defined());
}

TEST(Selection, StratifiedFixture) {
  auto s = load_outcomes(kOutcomes / "selection" / "self_selection.jsonl");
  auto scores = selection_scores(s);
  struct Row {
    OutcomeClass c;
    double p, r, f1;
  };
  const Row rows[] = {{OutcomeClass::kIncorrect, 0.096, 0.596, 0.165},
                      {OutcomeClass::kInsecure, 0.102, 0.609, 0.174},
                      {OutcomeClass::kSecure, 0.125, 0.737, 0.214}};
  for (const auto& row : rows) {
    const auto& sc = scores.at(row.c);
    EXPECT_NEAR(sc.precision().value(), row.p, 0.0005) << class_name(row.c);
    EXPECT_NEAR(sc.recall().value(), row.r, 0.0005) << class_name(row.c);
    EXPECT_NEAR(sc.f1().value(), row.f1, 0.0005) << class_name(row.c);
  }
  EXPECT_GT(scores.at(OutcomeClass::kSecure).recall().value(),
            scores.at(OutcomeClass::kInsecure).recall().value());
  EXPECT_EQ(scores.at(OutcomeClass::kInsecure).excluded_empty, 1);
  EXPECT_EQ(scores.at(OutcomeClass::kIncorrect).excluded_empty, 1);
}

TEST(Trend, Fixture) {
  auto sets = load_dir("trend", {"A", "B"});
  auto t = trend_ratios(sets);
  ASSERT_EQ(t.incorrect_over_union_secure.size(), 2u);
  EXPECT_EQ(t.incorrect_over_union_secure[1].ratio.den, 10);
  EXPECT_EQ(t.incorrect_over_union_secure[1].ratio.num, 3);
  EXPECT_EQ(format_pct(3, 10), "30.0");
  EXPECT_EQ(t.incorrect_over_union_secure[0].ratio.num, 1);
  EXPECT_EQ(t.secure_over_joint_correct[0].ratio.den, 11);
  EXPECT_EQ(t.secure_over_joint_correct[0].ratio.num, 4);
  EXPECT_EQ(t.secure_over_joint_correct[1].ratio.num, 5);
}

TEST(Trend, DuplicatedSettingAndPrecondition) {
  auto a = make_set("a", {2, 1, 0, 2});
  auto b = a;
  b.setting_id = "b";
  auto t = trend_ratios({a, b});
  for (const auto& p : t.incorrect_over_union_secure) EXPECT_EQ(p.ratio.num, 0);
  EXPECT_THROW(trend_ratios({a}), PreconditionError);
  auto z = make_set("z", {0, 0, 0, 0});
  auto z2 = z;
  z2.setting_id = "z2";
  auto empty = trend_ratios({z, z2});
  EXPECT_FALSE(empty.incorrect_over_union_secure[0].ratio.defined());
}

TEST(Report, AgentModelCellsCarryCounts) {
  std::vector<OutcomeSet> sets;
  for (const auto& cell : kAgentModels) {
    sets.push_back(load_outcomes(kOutcomes / "agent_models" / (std::string(cell.file) + ".jsonl")));
  }
  auto r = build_report(sets);
  ASSERT_EQ(r["settings"].size(), 9u);
  int checked = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& e = r["settings"][i];
    EXPECT_NEAR(e["func_pass"]["pct"].get<double>(), kAgentModels[i].func, 0.05);
    EXPECT_NEAR(e["sec_pass"]["pct"].get<double>(), kAgentModels[i].sec, 0.05);
    EXPECT_EQ(e["func_pass"]["count"].get<long>() * 1000, std::lround(kAgentModels[i].func * 20) * 100);
    checked += 2;
  }
  EXPECT_EQ(checked, 18);
  EXPECT_TRUE(r.contains("secure_given_correct"));
  auto md = render_markdown(r);
  EXPECT_NE(md.find("| swe-agent/claude-4-sonnet | 200 | 61.0 (122) | 10.5 (21) | 82.8 |"), std::string::npos) << md;

  auto single = build_report({sets[0]});
  EXPECT_FALSE(single.contains("secure_given_correct"));
  EXPECT_FALSE(single.contains("transitions"));
  EXPECT_THROW(build_report({}), PreconditionError);
}

TEST(Report, StrategiesIncludeEveryCrossMetric) {
  auto sets = load_dir("strata_mixed", {"A", "B", "C"});
  auto r = build_report(sets);
  EXPECT_TRUE(r.contains("cautious_cwes"));
  EXPECT_EQ(r["transitions"].size(), 2u);
  EXPECT_TRUE(r.contains("trend"));
  auto md = render_markdown(r);
  EXPECT_NE(md.find("Insufficient data: CWE-20"), std::string::npos);
}

}  // namespace
}  // namespace susforge::metrics
