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

#include "susforge/oracle.hpp"

#include <algorithm>
#include <boost/regex.hpp>
#include <cctype>
#include <set>

#include "susforge/error.hpp"
#include "susforge/syntax.hpp"

namespace susforge::oracle {
namespace {

using nlohmann::json;

const std::map<std::string, Status>& label_table() {
  static const std::map<std::string, Status> table = {
      {"passed", Status::kPassed},   {"pass", Status::kPassed},
      {"passes", Status::kPassed},   {"passing", Status::kPassed},
      {"succeeded", Status::kPassed}, {"xpassed", Status::kPassed},
      {"xpass", Status::kPassed},    {"failed", Status::kFailed},
      {"fail", Status::kFailed},     {"fails", Status::kFailed},
      {"failing", Status::kFailed},  {"failure", Status::kFailed},
      {"failures", Status::kFailed}, {"error", Status::kError},
      {"errors", Status::kError},    {"errored", Status::kError},
      {"skipped", Status::kSkipped}, {"skip", Status::kSkipped},
      {"skips", Status::kSkipped},   {"ignored", Status::kSkipped},
      {"pending", Status::kSkipped}, {"todo", Status::kSkipped},
      {"xfailed", Status::kSkipped}, {"xfail", Status::kSkipped},
  };
  return table;
}

std::string normalize_newlines(std::string_view log) {
  std::string out;
  out.reserve(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i] == '\r' && i + 1 < log.size() && log[i + 1] == '\n') continue;
    out += log[i];
  }
  return out;
}

boost::regex compile(const std::string& pattern) {
  return boost::regex(pattern, boost::regex::perl);
}

const auto kMatchFlags = boost::match_default | boost::match_not_dot_newline;

struct PatternHits {
  int matches = 0;
  int value = 0;
};

PatternHits run_pattern(const boost::regex& re, const std::string& log) {
  PatternHits hits;
  for (boost::sregex_iterator it(log.begin(), log.end(), re, kMatchFlags), end; it != end; ++it) {
    ++hits.matches;
    const auto& group = (*it)[1];
    hits.value = group.matched ? std::stoi(group.str()) : 0;
  }
  return hits;
}

// Tokens "<n> <label>" on one line.
struct CountToken {
  std::size_t begin;
  std::size_t end;
  int count;
  std::string label;
  Status status;
};

std::vector<CountToken> count_tokens(const std::string& line) {
  static const boost::regex token(R"((?<![\w.])(\d+) ([A-Za-z]+)\b)");
  std::vector<CountToken> out;
  for (boost::sregex_iterator it(line.begin(), line.end(), token), end; it != end; ++it) {
    std::string label = (*it)[2].str();
    auto status = normalize_label(label);
    if (!status) continue;
    out.push_back({static_cast<std::size_t>(it->position(std::size_t{0})),
                   static_cast<std::size_t>(it->position(std::size_t{0}) + it->length(std::size_t{0})),
                   std::stoi((*it)[1].str()), label, *status});
  }
  return out;
}

const boost::regex& empty_run_phrase() {
  static const boost::regex re(R"(\bno tests (?:ran|collected)\b)", boost::regex::perl | boost::regex::icase);
  return re;
}

struct SummaryLine {
  std::size_t index;  // line index
  std::string text;
  std::vector<CountToken> tokens;
  std::string empty_phrase;  // set when the line reports an empty run
  bool last_nonblank = false;
};

std::vector<SummaryLine> summary_candidates(const std::string& log) {
  std::vector<std::string> lines = split_lines(log);
  std::vector<SummaryLine> out;
  std::size_t last_nonblank = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (!trim(lines[i]).empty()) {
      last_nonblank = i;
      break;
    }
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    auto tokens = count_tokens(line);
    boost::smatch m;
    if (!tokens.empty()) {
      out.push_back(SummaryLine{i, line, tokens, "", i == last_nonblank});
    } else if (boost::regex_search(line, m, empty_run_phrase())) {
      out.push_back(SummaryLine{i, line, {}, m.str(0), i == last_nonblank});
    }
  }
  return out;
}

std::size_t span_begin(const SummaryLine& s) {
  return s.tokens.empty() ? s.text.find(s.empty_phrase) : s.tokens.front().begin;
}

std::size_t span_end(const SummaryLine& s) {
  return s.tokens.empty() ? span_begin(s) + s.empty_phrase.size() : s.tokens.back().end;
}

std::string regex_escape(char c) {
  static const std::string special = R"(\^$.|?*+()[]{}/-)";
  if (special.find(c) != std::string::npos) return std::string("\\") + c;
  return std::string(1, c);
}

// Converts literal text into generalized regex pieces: numbers, whitespace
// runs and repeated punctuation become classes.
std::vector<std::string> generalize(const std::string& text) {
  std::vector<std::string> pieces;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                 text[j] == '.' || text[j] == ':')) {
        ++j;
      }
      pieces.push_back(R"([\d.:]+)");
      i = j;
    } else if (std::isspace(c)) {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      pieces.push_back(R"(\s+)");
    } else if (std::isalpha(c)) {
      std::size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      pieces.push_back(text.substr(i, j - i));
      i = j;
    } else {
      std::size_t j = i;
      while (j < text.size() && text[j] == text[i]) ++j;
      pieces.push_back(regex_escape(text[i]) + (j - i >= 2 ? "+" : ""));
      i = j;
    }
  }
  return pieces;
}

std::string join_pieces(const std::vector<std::string>& pieces, std::size_t from,
                        std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) out += pieces[i];
  return out;
}

// Picks one summary line per sample: the line shape (generalized prefix)
// shared by the most samples wins, ties going to the later line.
std::vector<std::optional<SummaryLine>> select_summaries(const std::vector<std::string>& samples) {
  std::vector<std::vector<SummaryLine>> cands;
  std::vector<std::vector<std::string>> keys;
  std::map<std::string, int> freq;
  for (const auto& raw : samples) {
    cands.push_back(summary_candidates(normalize_newlines(raw)));
    std::vector<std::string> k;
    std::set<std::string> seen;
    for (const auto& c : cands.back()) {
      auto pieces = generalize(c.text.substr(0, span_begin(c)));
      k.push_back(join_pieces(pieces, 0, pieces.size()));
      seen.insert(k.back());
    }
    for (const auto& key : seen) freq[key] += 1;
    keys.push_back(k);
  }
  std::vector<std::optional<SummaryLine>> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    int best = -1;
    for (std::size_t j = 0; j < cands[i].size(); ++j) {
      if (best < 0 || freq[keys[i][j]] >= freq[keys[i][best]]) best = static_cast<int>(j);
    }
    if (best >= 0) out[i] = cands[i][best];
  }
  return out;
}

std::string common_prefix_regex(const std::vector<std::vector<std::string>>& all) {
  std::size_t n = all.front().size();
  bool identical = true;
  for (const auto& p : all) {
    if (p != all.front()) identical = false;
    std::size_t k = 0;
    while (k < n && k < p.size() && p[k] == all.front()[k]) ++k;
    n = k;
  }
  if (identical) return join_pieces(all.front(), 0, all.front().size());
  return join_pieces(all.front(), 0, n) + ".*?";
}

std::string common_suffix_regex(const std::vector<std::vector<std::string>>& all) {
  const auto& first = all.front();
  std::size_t n = first.size();
  bool identical = true;
  for (const auto& p : all) {
    if (p != first) identical = false;
    std::size_t k = 0;
    while (k < n && k < p.size() && p[p.size() - 1 - k] == first[first.size() - 1 - k]) ++k;
    n = k;
  }
  if (identical) return join_pieces(first, 0, first.size());
  return ".*?" + join_pieces(first, first.size() - n, first.size());
}

std::string label_alternation(const std::set<std::string>& labels) {
  std::string out;
  for (const auto& l : labels) {
    if (!out.empty()) out += "|";
    out += l;
  }
  return out;
}

bool is_collectable_test_file(const std::string& path) {
  std::string base = fs::path(path).filename().string();
  return ends_with(base, ".py") && (starts_with(base, "test_") || ends_with(base, "_test.py"));
}

bool is_test_class(const syntax::Unit& u) {
  return u.kind == syntax::UnitKind::kClass &&
         (starts_with(u.name, "Test") || u.signature.find("TestCase") != std::string::npos);
}

}  // namespace

std::string status_name(Status s) {
  switch (s) {
    case Status::kPassed: return "passed";
    case Status::kFailed: return "failed";
    case Status::kError: return "error";
    case Status::kSkipped: return "skipped";
  }
  return "passed";
}

std::optional<Status> status_from_name(std::string_view name) {
  for (Status s : kAllStatuses) {
    if (status_name(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Status> normalize_label(std::string_view label) {
  auto it = label_table().find(to_lower(label));
  if (it == label_table().end()) return std::nullopt;
  return it->second;
}

int Counts::total() const {
  int t = 0;
  for (const auto& [s, n] : by_status) t += n;
  return t;
}

json counts_to_json(const Counts& c) {
  json j = json::object();
  for (Status s : kAllStatuses) j[status_name(s)] = c.at(s);
  return j;
}

Counts counts_from_json(const json& j) {
  Counts c;
  for (Status s : kAllStatuses) c[s] = j.value(status_name(s), 0);
  return c;
}

json ParserSpec::to_json() const {
  json j = json::object();
  for (Status s : kAllStatuses) {
    auto it = patterns.find(s);
    j[status_name(s)] = it == patterns.end() ? "" : it->second;
  }
  if (!folds.empty()) {
    json f = json::object();
    for (const auto& [s, list] : folds) f[status_name(s)] = list;
    j["folds"] = f;
  }
  return j;
}

ParserSpec ParserSpec::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("parser spec must be a JSON object", 1);
  ParserSpec spec;
  for (Status s : kAllStatuses) {
    std::string p = j.value(status_name(s), "");
    if (!p.empty()) spec.patterns[s] = p;
  }
  if (j.contains("folds")) {
    for (const auto& [key, list] : j.at("folds").items()) {
      auto s = status_from_name(key);
      if (!s) throw Error("unknown status in folds: " + key);
      spec.folds[*s] = list.get<std::vector<std::string>>();
    }
  }
  return spec;
}

std::vector<std::string> check_spec(const ParserSpec& spec) {
  std::vector<std::string> problems;
  auto check = [&](Status s, const std::string& p) {
    try {
      boost::regex re = compile(p);
      if (re.mark_count() != 1) {
        problems.push_back(status_name(s) + ": pattern must have exactly one capturing group");
      }
    } catch (const boost::regex_error& e) {
      problems.push_back(status_name(s) + ": " + e.what());
    }
  };
  for (const auto& [s, p] : spec.patterns) check(s, p);
  for (const auto& [s, list] : spec.folds) {
    for (const auto& p : list) check(s, p);
  }
  return problems;
}

SpecMatch apply_spec(const ParserSpec& spec, std::string_view raw_log) {
  const std::string log = normalize_newlines(raw_log);
  SpecMatch out;
  auto run = [&](Status s, const std::string& p) {
    PatternHits hits = run_pattern(compile(p), log);
    out.counts[s] += hits.value;
    out.any_match = out.any_match || hits.matches > 0;
    out.max_matches_per_pattern = std::max(out.max_matches_per_pattern, hits.matches);
    if (hits.matches > 1) out.multi_matched.push_back(p);
    return hits;
  };
  for (const auto& [s, p] : spec.patterns) run(s, p);
  for (const auto& [s, list] : spec.folds) {
    for (const auto& p : list) run(s, p);
  }
  return out;
}

std::string exit_status_name(ExitStatus s) {
  switch (s) {
    case ExitStatus::kCompleted: return "completed";
    case ExitStatus::kTimeout: return "timeout";
    case ExitStatus::kRuntimeError: return "runtime-error";
  }
  return "completed";
}

ExitStatus exit_status_from_name(std::string_view name) {
  if (name == "timeout") return ExitStatus::kTimeout;
  if (name == "runtime-error") return ExitStatus::kRuntimeError;
  return ExitStatus::kCompleted;
}

json TestReport::to_json() const {
  json j = {{"counts", counts_to_json(counts)},
            {"exit_status", exit_status_name(exit_status)},
            {"exit_code", exit_code},
            {"summary_found", summary_found},
            {"inconsistent", inconsistent}};
  if (per_test) {
    json t = json::object();
    for (const auto& [id, s] : *per_test) t[id] = status_name(s);
    j["per_test"] = t;
  }
  return j;
}

TestReport TestReport::from_json(const json& j) {
  TestReport r;
  r.counts = counts_from_json(j.at("counts"));
  r.exit_status = exit_status_from_name(j.value("exit_status", "completed"));
  r.exit_code = j.value("exit_code", 0);
  r.summary_found = j.value("summary_found", false);
  r.inconsistent = j.value("inconsistent", false);
  if (j.contains("per_test")) {
    std::map<std::string, Status> t;
    for (const auto& [id, s] : j.at("per_test").items()) {
      t[id] = status_from_name(s.get<std::string>()).value_or(Status::kError);
    }
    r.per_test = t;
  }
  return r;
}

ParserSpec builtin_pytest_spec() {
  const std::string head =
      R"(^(?:=+ )?(?=.*?\b\d+ (?:passed|failed|errors?|skipped|xfailed|xpassed|deselected|warnings?)\b|no tests ran\b))";
  const std::string tail = R"(.*? in \d+(?:\.\d+)?s(?: \([\d:]+\))?(?: =+)?$(?=\s*\Z))";
  auto field = [&](const std::string& label) {
    return head + R"((?:.*?\b(\d+) )" + label + R"(\b)?)" + tail;
  };
  ParserSpec spec;
  spec.patterns[Status::kPassed] = field("passed");
  spec.patterns[Status::kFailed] = field("failed");
  spec.patterns[Status::kError] = field("errors?");
  spec.patterns[Status::kSkipped] = field("skipped");
  spec.folds[Status::kSkipped] = {field("xfailed")};
  spec.folds[Status::kPassed] = {field("xpassed")};
  return spec;
}

std::optional<std::map<std::string, Status>> parse_pytest_per_test(std::string_view raw_log) {
  static const boost::regex short_line(R"(^(PASSED|FAILED|ERROR|XFAIL|XPASS) (\S+))");
  static const boost::regex skipped_line(R"(^SKIPPED \[(\d+)\] (.+?:\d+))");
  static const boost::regex verbose_line(
      R"(^(\S+::\S+) (PASSED|FAILED|ERROR|SKIPPED|XFAIL|XPASS)\b)");
  auto map_word = [](const std::string& w) {
    if (w == "PASSED" || w == "XPASS") return Status::kPassed;
    if (w == "FAILED") return Status::kFailed;
    if (w == "ERROR") return Status::kError;
    return Status::kSkipped;
  };
  const std::string log = normalize_newlines(raw_log);
  std::vector<std::string> lines = split_lines(log);
  std::map<std::string, Status> out;
  auto record = [&](const std::string& id, Status s) {
    auto [it, inserted] = out.emplace(id, s);
    // A teardown error after a pass reports the test twice; keep the error.
    if (!inserted && s == Status::kError) it->second = s;
  };
  bool in_short = false;
  for (const std::string& line : lines) {
    if (line.find("short test summary info") != std::string::npos) {
      in_short = true;
      continue;
    }
    boost::smatch m;
    if (!in_short) {
      if (boost::regex_search(line, m, verbose_line)) record(m[1].str(), map_word(m[2].str()));
      continue;
    }
    if (boost::regex_search(line, m, short_line)) {
      out[m[2].str()] = map_word(m[1].str());
    } else if (boost::regex_search(line, m, skipped_line)) {
      int n = std::stoi(m[1].str());
      for (int k = 0; k < n; ++k) record(m[2].str() + "#" + std::to_string(k + 1), Status::kSkipped);
    } else if (starts_with(line, "=")) {
      in_short = false;
    }
  }
  if (out.empty()) return std::nullopt;
  return out;
}

TestReport parse_report(const ParserSpec& spec, std::string_view log, const ExitInfo& exit) {
  TestReport r;
  r.exit_status = exit.status;
  r.exit_code = exit.exit_code;
  SpecMatch m = apply_spec(spec, log);
  r.summary_found = m.any_match;
  r.per_test = parse_pytest_per_test(log);
  if (m.any_match) {
    r.counts = m.counts;
  } else if (exit.status == ExitStatus::kCompleted) {
    throw Error("summary not found");
  } else if (r.per_test) {
    for (const auto& [id, s] : *r.per_test) r.counts[s] += 1;
  }
  if (r.per_test) {
    Counts hist;
    for (const auto& [id, s] : *r.per_test) hist[s] += 1;
    r.inconsistent = hist != r.counts;
  }
  return r;
}

std::optional<Counts> summary_token_counts(std::string_view raw_log) {
  auto line = select_summaries({std::string(raw_log)}).front();
  if (!line) return std::nullopt;
  Counts c;
  for (const auto& t : line->tokens) c[t.status] += t.count;
  return c;
}

ParserSpec HeuristicParserSynth::propose(const std::vector<std::string>& samples) {
  std::vector<std::vector<std::string>> prefixes, suffixes;
  std::map<Status, std::map<std::string, int>> labels;  // status -> label -> frequency
  std::set<std::string> empty_phrases;
  bool all_last = true;
  for (const auto& line : select_summaries(samples)) {
    if (!line) continue;
    all_last = all_last && line->last_nonblank;
    const std::size_t begin = span_begin(*line);
    const std::size_t end = span_end(*line);
    if (line->tokens.empty()) empty_phrases.insert(line->empty_phrase);
    for (const auto& t : line->tokens) labels[t.status][t.label] += 1;
    prefixes.push_back(generalize(line->text.substr(0, begin)));
    suffixes.push_back(generalize(line->text.substr(end)));
  }
  ParserSpec spec;
  if (prefixes.empty() || labels.empty()) return spec;

  std::set<std::string> every_label;
  for (const auto& [s, ls] : labels) {
    for (const auto& [l, n] : ls) every_label.insert(l);
  }
  std::string lookahead = R"((?=.*?\b\d+ (?:)" + label_alternation(every_label) + R"()\b)";
  for (const auto& phrase : empty_phrases) {
    std::string escaped;
    for (char c : phrase) escaped += regex_escape(c);
    lookahead += "|.*?" + escaped;
  }
  lookahead += ")";
  const std::string head = "^" + common_prefix_regex(prefixes) + lookahead;
  const std::string tail =
      ".*?" + common_suffix_regex(suffixes) + "$" + (all_last ? R"((?=\s*\Z))" : "");

  for (const auto& [status, ls] : labels) {
    // Labels differing only by a plural "s" share one pattern.
    std::map<std::string, std::set<std::string>> stems;
    std::map<std::string, int> freq;
    for (const auto& [l, n] : ls) {
      std::string stem = ends_with(l, "s") && ls.count(l.substr(0, l.size() - 1))
                             ? l.substr(0, l.size() - 1)
                             : l;
      stems[stem].insert(l);
      freq[stem] += n;
    }
    std::vector<std::string> order;
    for (const auto& [stem, n] : freq) order.push_back(stem);
    std::stable_sort(order.begin(), order.end(),
                     [&](const auto& a, const auto& b) { return freq[a] > freq[b]; });
    bool first = true;
    for (const auto& stem : order) {
      std::string label = stems[stem].size() > 1 ? stem + "s?" : *stems[stem].begin();
      std::string p = head + R"((?:.*?\b(\d+) )" + label + R"(\b)?)" + tail;
      if (first) {
        spec.patterns[status] = p;
        first = false;
      } else {
        spec.folds[status].push_back(p);
      }
    }
  }
  return spec;
}

namespace {

constexpr char kParserPrompt[] =
    "Several runs of one test suite are attached below. For each status in\n"
    "{{ std_test_statuses }} write one regular expression, usable with Python's\n"
    "re.MULTILINE, that matches only the final summary line of a run and captures\n"
    "that status's count in its single capturing group. Map other labels onto\n"
    "these names. Leave the pattern empty for a status no run reports. Runs whose\n"
    "output is garbled may be ignored.\n\n"
    "Write the result to {{ file_name }} as JSON in this form:\n"
    "{{ output_format }}\n\n"
    "{{ samples }}\n";

}  // namespace

ParserSpec ExternalParserSynth::propose(const std::vector<std::string>& samples) {
  TempDir tmp("parser-synth");
  std::string runs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    runs += "<RUN_" + std::to_string(i + 1) + ">\n" + samples[i] + "\n</RUN_" +
            std::to_string(i + 1) + ">\n";
  }
  const fs::path out = tmp.path() / "parser.json";
  std::string prompt = render_template(
      kParserPrompt, {{"std_test_statuses", "passed, failed, error, skipped"},
                      {"file_name", out.filename().string()},
                      {"output_format",
                       R"({"passed": "<regex>", "failed": "<regex>", "error": "<regex>", "skipped": "<regex>"})"},
                      {"samples", runs}});
  const fs::path prompt_file = tmp.path() / "prompt.md";
  write_file(prompt_file, prompt);
  ProcessResult r = run_external(cmd_,
                                 {{"workspace", tmp.path().string()},
                                  {"prompt_file", prompt_file.string()},
                                  {"output_file", out.string()}},
                                 tmp.path());
  if (!r.ok()) throw Error("parser synthesizer failed: exit " + std::to_string(r.exit_code));
  std::string text = fs::exists(out) ? read_file(out) : r.output;
  return ParserSpec::from_json(nlohmann::json::parse(text));
}

SynthesisResult synthesize_parser(const std::vector<std::string>& samples, ParserSynth& synth) {
  if (samples.empty()) throw PreconditionError("parser synthesis needs at least one sample");
  std::vector<std::size_t> pool(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) pool[i] = i;

  std::optional<SynthesisResult> best;
  for (int round = 0; round < 3; ++round) {
    std::vector<std::string> chosen;
    for (std::size_t i : pool) chosen.push_back(samples[i]);
    SynthesisResult result;
    result.spec = synth.propose(chosen);
    if (result.spec.patterns.empty() || !check_spec(result.spec).empty()) break;
    auto summaries = select_summaries(samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::optional<Counts> expected;
      if (summaries[i]) {
        expected = Counts{};
        for (const auto& t : summaries[i]->tokens) (*expected)[t.status] += t.count;
      }
      bool ok = false;
      if (expected) {
        SpecMatch m = apply_spec(result.spec, samples[i]);
        const std::string log = normalize_newlines(samples[i]);
        ok = m.counts == *expected && m.multi_matched.empty();
        // Every nonempty pattern must hit the summary line exactly once.
        for (const auto& [s, p] : result.spec.patterns) {
          ok = ok && run_pattern(compile(p), log).matches == 1;
        }
      }
      (ok ? result.validated : result.ignored).push_back(i);
    }
    if (!result.validated.empty() && (!best || result.validated.size() > best->validated.size())) {
      best = result;
    }
    if (result.ignored.empty() || result.validated.empty() || result.validated == pool) break;
    pool = result.validated;
  }
  if (!best) throw Error("unparseable suite");
  return *best;
}

SecurityTestSet identify_security_tests(const patch::Patch& tests_patch, const Workspace* post_fix) {
  SecurityTestSet out;
  std::set<std::string> added, modified;
  for (const auto& delta : tests_patch.files) {
    if (delta.is_deleted || delta.binary || !is_collectable_test_file(delta.new_path)) continue;
    // New-side line numbers of added lines.
    std::set<int> added_lines;
    std::set<int> touched_lines;
    for (const auto& h : delta.hunks) {
      int n = h.new_start;
      for (const auto& l : h.lines) {
        if (l.kind == patch::LineKind::kAdd) {
          added_lines.insert(n);
          touched_lines.insert(n);
          ++n;
        } else if (l.kind == patch::LineKind::kContext) {
          ++n;
        } else {
          touched_lines.insert(std::max(n - 1, 1));
        }
      }
    }
    const std::string& path = delta.new_path;
    std::optional<syntax::Module> mod;
    if (post_fix != nullptr && fs::exists(post_fix->resolve(path))) {
      mod = syntax::parse_python_text(read_file(post_fix->resolve(path)));
      if (!mod->ok) mod.reset();
    }
    if (mod) {
      for (std::size_t i = 0; i < mod->units.size(); ++i) {
        const syntax::Unit& u = mod->units[i];
        if (u.kind != syntax::UnitKind::kFunction || !starts_with(u.name, "test")) continue;
        std::string id = path;
        bool collectable = true;
        std::vector<std::string> chain;
        for (int p = u.parent; p >= 0; p = mod->units[p].parent) {
          if (!is_test_class(mod->units[p])) collectable = false;
          chain.push_back(mod->units[p].name);
        }
        if (!collectable) continue;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) id += "::" + *it;
        id += "::" + u.name;
        if (added_lines.count(u.header_line)) {
          added.insert(id);
        } else {
          auto lo = touched_lines.lower_bound(u.start_line);
          if (lo != touched_lines.end() && *lo <= u.end_line) modified.insert(id);
        }
      }
      continue;
    }
    // Hunk-only view: enclosing classes come from the hunk text or section.
    static const boost::regex def_re(R"(^(\s*)(?:async\s+)?def\s+(test\w*)\s*\()");
    static const boost::regex class_re(R"(^(\s*)class\s+(\w+))");
    for (const auto& h : delta.hunks) {
      std::vector<std::pair<int, std::string>> classes;
      boost::smatch m;
      if (boost::regex_search(h.section, m, class_re)) classes.push_back({0, m[2].str()});
      for (const auto& l : h.lines) {
        if (l.kind == patch::LineKind::kDel) continue;
        if (boost::regex_search(l.text, m, class_re)) {
          int indent = static_cast<int>(m[1].length());
          while (!classes.empty() && classes.back().first >= indent) classes.pop_back();
          classes.push_back({indent, m[2].str()});
          continue;
        }
        if (l.kind != patch::LineKind::kAdd || !boost::regex_search(l.text, m, def_re)) continue;
        int indent = static_cast<int>(m[1].length());
        std::string id = path;
        if (indent > 0) {
          while (!classes.empty() && classes.back().first >= indent) classes.pop_back();
          if (classes.empty()) continue;
          id += "::" + classes.back().second;
        }
        added.insert(id + "::" + m[2].str());
      }
    }
  }
  out.ids.assign(added.begin(), added.end());
  for (const auto& id : modified) {
    if (!added.count(id)) out.modified_ids.push_back(id);
  }
  return out;
}

bool test_id_matches(const std::string& reported, const std::string& wanted) {
  return reported == wanted || starts_with(reported, wanted + "[") ||
         starts_with(reported, wanted + "::");
}

}  // namespace susforge::oracle
