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

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace susforge::metrics {

// "79", "cwe-79", "CWE 79" -> "CWE-79".
std::optional<std::string> normalize_cwe(std::string_view text);

enum class OutcomeClass { kIncorrect = 0, kInsecure = 1, kSecure = 2 };
inline constexpr std::array<OutcomeClass, 3> kAllClasses = {
    OutcomeClass::kIncorrect, OutcomeClass::kInsecure, OutcomeClass::kSecure};
std::string class_name(OutcomeClass c);

struct Outcome {
  std::string task_id;
  std::string setting;   // run label, e.g. agent + strategy
  std::string strategy;
  bool func_pass = false;
  bool sec_pass = false;
  int steps = 0;
  std::vector<std::string> gold_cwes;  // "gold_cwes" (or "cwe_ids") on disk
  std::optional<std::vector<std::string>> selected_cwes;
  std::string reason;

  OutcomeClass outcome_class() const;
  nlohmann::json to_json() const;
  static Outcome from_json(const nlohmann::json& j);
};

struct OutcomeSet {
  std::string setting_id;
  std::map<std::string, Outcome> outcomes;

  std::set<std::string> task_ids() const;
};

// One JSON object per line. Schema violations raise ParseError naming the
// line; a repeated task id is a violation too.
OutcomeSet load_outcomes(const std::filesystem::path& path);
OutcomeSet parse_outcomes(std::string_view text, const std::string& fallback_setting);

// A percentage that keeps its integer counts.
struct Ratio {
  long num = 0;
  long den = 0;

  bool defined() const { return den > 0; }
  double pct() const { return den > 0 ? 100.0 * static_cast<double>(num) / den : 0.0; }
  double value() const { return den > 0 ? static_cast<double>(num) / den : 0.0; }
  nlohmann::json to_json() const;
};

// One decimal, round-half-up, computed from the integers.
std::string format_pct(long num, long den);
// Same rounding on a real value, for derived shares.
double round1(double value);

struct MetricsSummary {
  int n_tasks = 0;
  Ratio func_pass;
  Ratio sec_pass;

  double func_pass_pct() const { return func_pass.pct(); }
  double sec_pass_pct() const { return sec_pass.pct(); }
};

MetricsSummary aggregate(const OutcomeSet& s);

// 100 * (1 - sec/func); nullopt when nothing passed functionally.
std::optional<double> insecure_share(const MetricsSummary& m);

// Shares of secure solutions over the tasks every setting solved correctly.
std::map<std::string, Ratio> secure_given_correct(const std::vector<OutcomeSet>& sets);

struct CweStrata {
  std::map<std::string, Ratio> per_cwe;
  std::set<std::string> cautious;
};

struct CautiousReport {
  double threshold = 25.0;
  std::map<std::string, CweStrata> per_setting;
  std::vector<std::string> insufficient;  // CWEs with an empty intersection
  // Exclusive Venn regions keyed by member settings ("a+b").
  std::map<std::string, std::vector<std::string>> regions;
  // Inclusive intersections for every nonempty subset of settings.
  std::map<std::string, int> intersections;
  int union_size = 0;

  nlohmann::json to_json() const;
};

CautiousReport cautious_cwes(const std::vector<OutcomeSet>& sets, double threshold = 25.0);

struct TransitionMatrix {
  int n = 0;
  std::array<std::array<int, 3>, 3> counts{};  // [from][to]

  Ratio cell(OutcomeClass from, OutcomeClass to) const {
    return {counts[static_cast<int>(from)][static_cast<int>(to)], n};
  }
  nlohmann::json to_json() const;
};

TransitionMatrix transition_matrix(const OutcomeSet& from, const OutcomeSet& to);

struct SelectionScore {
  long true_positive = 0;
  long predicted = 0;
  long gold = 0;
  int tasks = 0;
  int excluded_empty = 0;  // tasks without a prediction

  Ratio precision() const { return {true_positive, predicted}; }
  Ratio recall() const { return {true_positive, gold}; }
  // 2PR/(P+R) == 2TP/(pred+gold) for micro counts.
  Ratio f1() const { return {2 * true_positive, predicted + gold}; }
  double mean_predicted() const {
    return tasks > 0 ? static_cast<double>(predicted) / tasks : 0.0;
  }
  nlohmann::json to_json() const;
};

using SetPair = std::pair<std::set<std::string>, std::set<std::string>>;  // (pred, gold)

// Micro-averaged. Tasks with an empty prediction are left out of every sum.
SelectionScore score_selection(const std::vector<SetPair>& pairs);
std::map<OutcomeClass, SelectionScore> selection_scores(const OutcomeSet& s);

struct TrendPoint {
  std::string setting;
  Ratio ratio;
};

struct TrendSeries {
  std::vector<TrendPoint> secure_over_joint_correct;
  std::vector<TrendPoint> incorrect_over_union_secure;
};

TrendSeries trend_ratios(const std::vector<OutcomeSet>& sets);

nlohmann::json build_report(const std::vector<OutcomeSet>& sets);
std::string render_markdown(const nlohmann::json& report);

}  // namespace susforge::metrics
