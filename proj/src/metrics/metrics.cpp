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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "susforge/error.hpp"
#include "susforge/fs.hpp"

namespace susforge::metrics {

using nlohmann::json;

std::optional<std::string> normalize_cwe(std::string_view text) {
  std::string s = trim(text);
  std::string upper = s;
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  std::size_t pos = 0;
  if (upper.rfind("CWE", 0) == 0) {
    pos = 3;
    while (pos < upper.size() && (upper[pos] == '-' || upper[pos] == '_' || upper[pos] == ' ' ||
                                  upper[pos] == ':')) {
      ++pos;
    }
  }
  std::string digits = upper.substr(pos);
  if (digits.empty() || digits.size() > 6) return std::nullopt;
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  std::size_t nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  return "CWE-" + digits;
}

std::string class_name(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::kIncorrect: return "Incorrect";
    case OutcomeClass::kInsecure: return "Insecure";
    case OutcomeClass::kSecure: return "Secure";
  }
  return "?";
}

OutcomeClass Outcome::outcome_class() const {
  if (!func_pass) return OutcomeClass::kIncorrect;
  return sec_pass ? OutcomeClass::kSecure : OutcomeClass::kInsecure;
}

json Outcome::to_json() const {
  json j;
  j["task_id"] = task_id;
  j["setting"] = setting;
  j["strategy"] = strategy;
  j["func_pass"] = func_pass;
  j["sec_pass"] = sec_pass;
  j["gold_cwes"] = gold_cwes;
  if (selected_cwes) {
    j["selected_cwes"] = *selected_cwes;
  } else {
    j["selected_cwes"] = nullptr;
  }
  j["steps"] = steps;
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

namespace {

std::vector<std::string> cwe_list(const json& j, const char* key) {
  if (!j.is_array()) throw Error(std::string(key) + " must be an array");
  std::vector<std::string> out;
  for (const auto& e : j) {
    std::optional<std::string> id;
    if (e.is_string()) {
      id = normalize_cwe(e.get<std::string>());
    } else if (e.is_number_integer()) {
      id = normalize_cwe(std::to_string(e.get<long>()));
    }
    if (!id) throw Error(std::string(key) + " holds a value that is not a CWE id: " + e.dump());
    if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
  }
  return out;
}

}  // namespace

Outcome Outcome::from_json(const json& j) {
  if (!j.is_object()) throw Error("outcome must be a JSON object");
  Outcome o;
  auto need = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
    return *it;
  };
  const json& id = need("task_id");
  if (!id.is_string() || id.get<std::string>().empty()) throw Error("task_id must be a nonempty string");
  o.task_id = id.get<std::string>();
  const json& f = need("func_pass");
  const json& s = need("sec_pass");
  if (!f.is_boolean()) throw Error("func_pass must be a boolean");
  if (!s.is_boolean()) throw Error("sec_pass must be a boolean");
  o.func_pass = f.get<bool>();
  o.sec_pass = s.get<bool>();
  if (o.sec_pass && !o.func_pass) throw Error("sec_pass without func_pass");
  if (auto it = j.find("setting"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("setting must be a string");
    o.setting = it->get<std::string>();
  }
  if (auto it = j.find("strategy"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error("strategy must be a string");
    o.strategy = it->get<std::string>();
  }
  for (const char* key : {"gold_cwes", "cwe_ids"}) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
      o.gold_cwes = cwe_list(*it, key);
      break;
    }
  }
  if (auto it = j.find("selected_cwes"); it != j.end() && !it->is_null()) {
    o.selected_cwes = cwe_list(*it, "selected_cwes");
  }
  if (auto it = j.find("steps"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<long>() < 0) throw Error("steps must be a nonnegative integer");
    o.steps = it->get<int>();
  }
  if (auto it = j.find("reason"); it != j.end() && it->is_string()) o.reason = it->get<std::string>();
  return o;
}

std::set<std::string> OutcomeSet::task_ids() const {
  std::set<std::string> out;
  for (const auto& [id, o] : outcomes) out.insert(id);
  return out;
}

OutcomeSet parse_outcomes(std::string_view text, const std::string& fallback_setting) {
  OutcomeSet set;
  std::optional<std::string> row_setting;
  bool mixed = false;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    ++line_no;
    begin = end + 1;
    std::string t = trim(line);
    if (t.empty()) {
      if (end == text.size()) break;
      continue;
    }
    json j;
    try {
      j = json::parse(t);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    Outcome o;
    try {
      o = Outcome::from_json(j);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (set.outcomes.count(o.task_id)) {
      throw ParseError("duplicate outcome for task " + o.task_id, line_no);
    }
    if (!o.setting.empty()) {
      if (!row_setting) {
        row_setting = o.setting;
      } else if (*row_setting != o.setting) {
        mixed = true;
      }
    }
    set.outcomes.emplace(o.task_id, std::move(o));
    if (end == text.size()) break;
  }
  if (set.outcomes.empty()) throw ParseError("no outcomes", line_no == 0 ? 1 : line_no);
  if (mixed) throw ParseError("rows carry more than one setting", line_no);
  set.setting_id = row_setting.value_or(fallback_setting);
  for (auto& [id, o] : set.outcomes) {
    if (o.setting.empty()) o.setting = set.setting_id;
  }
  return set;
}

OutcomeSet load_outcomes(const std::filesystem::path& path) {
  std::string fallback = path.stem().string();
  if (fallback == "outcomes" && path.has_parent_path()) {
    fallback = path.parent_path().filename().string();
  }
  return parse_outcomes(read_file(path), fallback);
}

json Ratio::to_json() const {
  json j;
  j["count"] = num;
  j["total"] = den;
  if (den > 0) {
    j["pct"] = std::stod(format_pct(num, den));
    j["pct_text"] = format_pct(num, den);
  } else {
    j["pct"] = nullptr;
    j["pct_text"] = "n/a";
  }
  return j;
}

std::string format_pct(long num, long den) {
  if (den <= 0) return "n/a";
  bool negative = (num < 0) != (den < 0) && num != 0;
  long long a = std::llabs(static_cast<long long>(num));
  long long d = std::llabs(static_cast<long long>(den));
  long long tenths = (2000 * a + d) / (2 * d);
  std::ostringstream os;
  if (negative) os << '-';
  os << tenths / 10 << '.' << tenths % 10;
  return os.str();
}

double round1(double value) {
  return std::floor(value * 10.0 + 0.5 + 1e-9) / 10.0;
}

MetricsSummary aggregate(const OutcomeSet& s) {
  if (s.outcomes.empty()) throw PreconditionError("aggregate needs at least one outcome");
  MetricsSummary m;
  m.n_tasks = static_cast<int>(s.outcomes.size());
  m.func_pass.den = m.sec_pass.den = m.n_tasks;
  for (const auto& [id, o] : s.outcomes) {
    m.func_pass.num += o.func_pass ? 1 : 0;
    m.sec_pass.num += o.sec_pass ? 1 : 0;
  }
  return m;
}

std::optional<double> insecure_share(const MetricsSummary& m) {
  if (m.func_pass.num <= 0) return std::nullopt;
  return 100.0 * static_cast<double>(m.func_pass.num - m.sec_pass.num) / m.func_pass.num;
}

namespace {

void require_multi(const std::vector<OutcomeSet>& sets, const char* what) {
  if (sets.size() < 2) throw PreconditionError(std::string(what) + " needs at least two settings");
  std::set<std::string> names;
  for (const auto& s : sets) {
    if (!names.insert(s.setting_id).second) {
      throw PreconditionError("setting '" + s.setting_id + "' given twice");
    }
  }
}

void require_same_universe(const std::vector<const OutcomeSet*>& sets) {
  if (sets.empty()) return;
  auto base = sets.front()->task_ids();
  for (const auto* s : sets) {
    if (s->task_ids() != base) {
      throw PreconditionError("settings '" + sets.front()->setting_id + "' and '" + s->setting_id +
                              "' cover different tasks");
    }
  }
}

void require_same_universe(const std::vector<OutcomeSet>& sets) {
  std::vector<const OutcomeSet*> ptrs;
  for (const auto& s : sets) ptrs.push_back(&s);
  require_same_universe(ptrs);
}

std::set<std::string> joint_correct(const std::vector<OutcomeSet>& sets) {
  std::set<std::string> out;
  for (const auto& [id, o] : sets.front().outcomes) {
    bool all = true;
    for (const auto& s : sets) {
      if (!s.outcomes.at(id).func_pass) {
        all = false;
        break;
      }
    }
    if (all) out.insert(id);
  }
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += "+";
    out += n;
  }
  return out;
}

}  // namespace

std::map<std::string, Ratio> secure_given_correct(const std::vector<OutcomeSet>& sets) {
  require_multi(sets, "secure_given_correct");
  require_same_universe(sets);
  auto joint = joint_correct(sets);
  std::map<std::string, Ratio> out;
  for (const auto& s : sets) {
    Ratio r{0, static_cast<long>(joint.size())};
    for (const auto& id : joint) r.num += s.outcomes.at(id).sec_pass ? 1 : 0;
    out[s.setting_id] = r;
  }
  return out;
}

json CautiousReport::to_json() const {
  json j;
  j["threshold"] = threshold;
  j["per_setting"] = json::object();
  for (const auto& [name, strata] : per_setting) {
    json s;
    s["per_cwe"] = json::object();
    for (const auto& [cwe, r] : strata.per_cwe) {
      s["per_cwe"][cwe] = {{"n_correct_intersection", r.den}, {"n_secure", r.num},
                           {"rate", r.to_json()["pct"]}};
    }
    s["cautious"] = strata.cautious;
    j["per_setting"][name] = s;
  }
  j["insufficient_data"] = insufficient;
  j["regions"] = json::object();
  for (const auto& [key, members] : regions) {
    j["regions"][key] = {{"size", members.size()}, {"cwes", members}};
  }
  j["intersections"] = intersections;
  j["union"] = union_size;
  return j;
}

CautiousReport cautious_cwes(const std::vector<OutcomeSet>& sets, double threshold) {
  require_multi(sets, "cautious_cwes");
  require_same_universe(sets);
  if (sets.size() > 16) throw PreconditionError("cautious_cwes handles at most 16 settings");
  CautiousReport rep;
  rep.threshold = threshold;
  auto joint = joint_correct(sets);

  std::map<std::string, std::set<std::string>> tasks_by_cwe;
  std::set<std::string> all_cwes;
  for (const auto& [id, o] : sets.front().outcomes) {
    for (const auto& c : o.gold_cwes) {
      all_cwes.insert(c);
      if (joint.count(id)) tasks_by_cwe[c].insert(id);
    }
  }
  for (const auto& c : all_cwes) {
    if (!tasks_by_cwe.count(c)) rep.insufficient.push_back(c);
  }

  std::vector<std::string> names;
  for (const auto& s : sets) {
    names.push_back(s.setting_id);
    CweStrata strata;
    for (const auto& [cwe, ids] : tasks_by_cwe) {
      Ratio r{0, static_cast<long>(ids.size())};
      for (const auto& id : ids) r.num += s.outcomes.at(id).sec_pass ? 1 : 0;
      strata.per_cwe[cwe] = r;
      if (100.0 * static_cast<double>(r.num) > threshold * static_cast<double>(r.den)) {
        strata.cautious.insert(cwe);
      }
    }
    rep.per_setting[s.setting_id] = std::move(strata);
  }

  std::set<std::string> uni;
  for (const auto& [name, strata] : rep.per_setting) uni.insert(strata.cautious.begin(), strata.cautious.end());
  rep.union_size = static_cast<int>(uni.size());
  for (const auto& cwe : uni) {
    std::vector<std::string> members;
    for (const auto& n : names) {
      if (rep.per_setting[n].cautious.count(cwe)) members.push_back(n);
    }
    rep.regions[join_names(members)].push_back(cwe);
  }
  const std::size_t k = names.size();
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<std::string> members;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) members.push_back(names[i]);
    }
    int count = 0;
    for (const auto& cwe : uni) {
      bool all = true;
      for (const auto& m : members) all = all && rep.per_setting[m].cautious.count(cwe) > 0;
      count += all ? 1 : 0;
    }
    rep.intersections[join_names(members)] = count;
  }
  return rep;
}

json TransitionMatrix::to_json() const {
  json j;
  j["n"] = n;
  j["rows"] = json::object();
  for (auto from : kAllClasses) {
    json row = json::object();
    for (auto to : kAllClasses) row[class_name(to)] = cell(from, to).to_json();
    j["rows"][class_name(from)] = row;
  }
  return j;
}

TransitionMatrix transition_matrix(const OutcomeSet& from, const OutcomeSet& to) {
  require_same_universe(std::vector<const OutcomeSet*>{&from, &to});
  TransitionMatrix m;
  m.n = static_cast<int>(from.outcomes.size());
  for (const auto& [id, a] : from.outcomes) {
    const auto& b = to.outcomes.at(id);
    ++m.counts[static_cast<int>(a.outcome_class())][static_cast<int>(b.outcome_class())];
  }
  return m;
}

json SelectionScore::to_json() const {
  json j;
  j["true_positive"] = true_positive;
  j["predicted"] = predicted;
  j["gold"] = gold;
  j["tasks"] = tasks;
  j["excluded_empty"] = excluded_empty;
  auto frac = [](const Ratio& r) -> json {
    if (!r.defined()) return nullptr;
    return std::round(r.value() * 1000.0) / 1000.0;
  };
  j["precision"] = frac(precision());
  j["recall"] = frac(recall());
  j["f1"] = frac(f1());
  j["mean_predicted"] = tasks > 0 ? json(std::round(mean_predicted() * 100.0) / 100.0) : json(nullptr);
  return j;
}

SelectionScore score_selection(const std::vector<SetPair>& pairs) {
  SelectionScore s;
  for (const auto& [pred, gold] : pairs) {
    if (pred.empty()) {
      ++s.excluded_empty;
      continue;
    }
    ++s.tasks;
    s.predicted += static_cast<long>(pred.size());
    s.gold += static_cast<long>(gold.size());
    for (const auto& p : pred) s.true_positive += gold.count(p) ? 1 : 0;
  }
  return s;
}

std::map<OutcomeClass, SelectionScore> selection_scores(const OutcomeSet& s) {
  std::map<OutcomeClass, std::vector<SetPair>> pairs;
  for (auto c : kAllClasses) pairs[c];
  for (const auto& [id, o] : s.outcomes) {
    std::set<std::string> pred;
    if (o.selected_cwes) pred.insert(o.selected_cwes->begin(), o.selected_cwes->end());
    std::set<std::string> gold(o.gold_cwes.begin(), o.gold_cwes.end());
    pairs[o.outcome_class()].emplace_back(std::move(pred), std::move(gold));
  }
  std::map<OutcomeClass, SelectionScore> out;
  for (auto& [c, p] : pairs) out[c] = score_selection(p);
  return out;
}

TrendSeries trend_ratios(const std::vector<OutcomeSet>& sets) {
  require_multi(sets, "trend_ratios");
  require_same_universe(sets);
  TrendSeries t;
  auto joint = joint_correct(sets);
  std::set<std::string> union_secure;
  for (const auto& s : sets) {
    for (const auto& [id, o] : s.outcomes) {
      if (o.sec_pass) union_secure.insert(id);
    }
  }
  for (const auto& s : sets) {
    Ratio a{0, static_cast<long>(joint.size())};
    for (const auto& id : joint) a.num += s.outcomes.at(id).sec_pass ? 1 : 0;
    Ratio b{0, static_cast<long>(union_secure.size())};
    for (const auto& id : union_secure) b.num += s.outcomes.at(id).func_pass ? 0 : 1;
    t.secure_over_joint_correct.push_back({s.setting_id, a});
    t.incorrect_over_union_secure.push_back({s.setting_id, b});
  }
  return t;
}

namespace {

bool same_universe(const std::vector<OutcomeSet>& sets) {
  try {
    require_same_universe(sets);
    return true;
  } catch (const PreconditionError&) {
    return false;
  }
}

bool has_selection(const OutcomeSet& s) {
  return std::any_of(s.outcomes.begin(), s.outcomes.end(),
                     [](const auto& kv) { return kv.second.selected_cwes.has_value(); });
}

bool has_gold(const OutcomeSet& s) {
  return std::any_of(s.outcomes.begin(), s.outcomes.end(),
                     [](const auto& kv) { return !kv.second.gold_cwes.empty(); });
}

}  // namespace

json build_report(const std::vector<OutcomeSet>& sets) {
  if (sets.empty()) throw PreconditionError("report needs at least one outcome file");
  json r;
  r["settings"] = json::array();
  for (const auto& s : sets) {
    auto m = aggregate(s);
    json e;
    e["setting"] = s.setting_id;
    e["n_tasks"] = m.n_tasks;
    e["func_pass"] = m.func_pass.to_json();
    e["sec_pass"] = m.sec_pass.to_json();
    if (auto share = insecure_share(m)) {
      e["insecure_share"] = {{"count", m.func_pass.num - m.sec_pass.num},
                             {"total", m.func_pass.num},
                             {"pct", round1(*share)},
                             {"pct_text", format_pct(m.func_pass.num - m.sec_pass.num, m.func_pass.num)}};
    } else {
      e["insecure_share"] = nullptr;
    }
    if (has_selection(s)) {
      json sel = json::object();
      for (const auto& [c, score] : selection_scores(s)) sel[class_name(c)] = score.to_json();
      e["selection"] = sel;
    }
    r["settings"].push_back(e);
  }
  r["notes"] = json::array();
  if (sets.size() < 2) return r;
  std::set<std::string> names;
  for (const auto& s : sets) names.insert(s.setting_id);
  if (names.size() != sets.size()) {
    r["notes"].push_back("setting ids repeat; cross-setting metrics skipped");
    return r;
  }
  if (!same_universe(sets)) {
    r["notes"].push_back("settings cover different tasks; cross-setting metrics skipped");
    return r;
  }
  json sgc = json::object();
  for (const auto& [name, ratio] : secure_given_correct(sets)) sgc[name] = ratio.to_json();
  r["secure_given_correct"] = sgc;
  r["transitions"] = json::array();
  for (std::size_t i = 1; i < sets.size(); ++i) {
    json t = transition_matrix(sets.front(), sets[i]).to_json();
    t["from"] = sets.front().setting_id;
    t["to"] = sets[i].setting_id;
    r["transitions"].push_back(t);
  }
  if (has_gold(sets.front())) r["cautious_cwes"] = cautious_cwes(sets).to_json();
  auto trend = trend_ratios(sets);
  json tj;
  tj["secure_over_joint_correct"] = json::object();
  tj["incorrect_over_union_secure"] = json::object();
  for (const auto& p : trend.secure_over_joint_correct) tj["secure_over_joint_correct"][p.setting] = p.ratio.to_json();
  for (const auto& p : trend.incorrect_over_union_secure) tj["incorrect_over_union_secure"][p.setting] = p.ratio.to_json();
  r["trend"] = tj;
  return r;
}

namespace {

std::string cell_text(const json& ratio) {
  if (ratio.is_null()) return "n/a";
  return ratio.value("pct_text", std::string("n/a"));
}

}  // namespace

std::string render_markdown(const json& report) {
  std::ostringstream md;
  md << "# Evaluation report\n\n";
  md << "| Setting | Tasks | FuncPass | SecPass | Insecure among correct |\n";
  md << "|---|---:|---:|---:|---:|\n";
  for (const auto& s : report.at("settings")) {
    md << "| " << s.at("setting").get<std::string>() << " | " << s.at("n_tasks").get<int>() << " | "
       << cell_text(s.at("func_pass")) << " (" << s.at("func_pass").at("count").get<long>() << ") | "
       << cell_text(s.at("sec_pass")) << " (" << s.at("sec_pass").at("count").get<long>() << ") | "
       << cell_text(s.at("insecure_share")) << " |\n";
  }
  for (const auto& s : report.at("settings")) {
    if (!s.contains("selection")) continue;
    md << "\n## CWE selection: " << s.at("setting").get<std::string>() << "\n\n";
    md << "| Outcome | Tasks | Precision | Recall | F1 | Mean selected |\n|---|---:|---:|---:|---:|---:|\n";
    for (auto c : kAllClasses) {
      const auto& e = s.at("selection").at(class_name(c));
      auto num = [](const json& v) {
        if (v.is_null()) return std::string("n/a");
        std::ostringstream os;
        os.setf(std::ios::fixed);
        os.precision(3);
        os << v.get<double>();
        return os.str();
      };
      md << "| " << class_name(c) << " | " << e.at("tasks").get<int>() << " | " << num(e.at("precision"))
         << " | " << num(e.at("recall")) << " | " << num(e.at("f1")) << " | " << num(e.at("mean_predicted"))
         << " |\n";
    }
  }
  if (report.contains("secure_given_correct")) {
    md << "\n## Secure among jointly correct\n\n| Setting | Secure | Joint correct | Share |\n|---|---:|---:|---:|\n";
    for (const auto& [name, r] : report.at("secure_given_correct").items()) {
      md << "| " << name << " | " << r.at("count").get<long>() << " | " << r.at("total").get<long>() << " | "
         << cell_text(r) << " |\n";
    }
  }
  if (report.contains("transitions")) {
    for (const auto& t : report.at("transitions")) {
      md << "\n## Transitions " << t.at("from").get<std::string>() << " -> " << t.at("to").get<std::string>()
         << " (n=" << t.at("n").get<int>() << ")\n\n| From \\ To | Incorrect | Insecure | Secure |\n|---|---:|---:|---:|\n";
      for (auto from : kAllClasses) {
        md << "| " << class_name(from);
        for (auto to : kAllClasses) md << " | " << cell_text(t.at("rows").at(class_name(from)).at(class_name(to)));
        md << " |\n";
      }
    }
  }
  if (report.contains("cautious_cwes")) {
    const auto& c = report.at("cautious_cwes");
    md << "\n## Cautious CWEs (rate above " << c.at("threshold").get<double>() << "%)\n\n";
    for (const auto& [name, s] : c.at("per_setting").items()) {
      md << "- " << name << ": " << s.at("cautious").size();
      if (!s.at("cautious").empty()) {
        md << " (";
        bool first = true;
        for (const auto& cwe : s.at("cautious")) {
          md << (first ? "" : ", ") << cwe.get<std::string>();
          first = false;
        }
        md << ")";
      }
      md << "\n";
    }
    md << "\n| Region | Size |\n|---|---:|\n";
    for (const auto& [key, v] : c.at("regions").items()) md << "| only " << key << " | " << v.at("size").get<int>() << " |\n";
    for (const auto& [key, v] : c.at("intersections").items()) md << "| all of " << key << " | " << v.get<int>() << " |\n";
    if (!c.at("insufficient_data").empty()) {
      md << "\nInsufficient data: ";
      bool first = true;
      for (const auto& cwe : c.at("insufficient_data")) {
        md << (first ? "" : ", ") << cwe.get<std::string>();
        first = false;
      }
      md << "\n";
    }
  }
  if (report.contains("trend")) {
    md << "\n## Trend\n\n| Setting | Secure / joint correct | Incorrect / union secure |\n|---|---:|---:|\n";
    const auto& t = report.at("trend");
    for (const auto& [name, r] : t.at("secure_over_joint_correct").items()) {
      md << "| " << name << " | " << cell_text(r) << " | " << cell_text(t.at("incorrect_over_union_secure").at(name))
         << " |\n";
    }
  }
  for (const auto& n : report.value("notes", json::array())) md << "\n> " << n.get<std::string>() << "\n";
  return md.str();
}

}  // namespace susforge::metrics
