#include "secretsieve/three_layer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace secretsieve {

std::string_view to_string(FilterKind f) {
  switch (f) {
    case FilterKind::kEntropy: return "entropy";
    case FilterKind::kWord: return "word";
    case FilterKind::kPattern: return "pattern";
  }
  return "unknown";
}

DetectionRule::DetectionRule(std::string name, std::string provider, std::string pattern,
                             PrecisionClass precision, std::set<FilterKind> filters)
    : name_(std::move(name)),
      provider_(std::move(provider)),
      pattern_(std::move(pattern)),
      precision_(precision),
      filters_(std::move(filters)) {
  if (provider_.empty()) throw RuleCompileError("rule '" + name_ + "' has an empty provider");
  if (name_.empty()) name_ = provider_;
  try {
    regex_ = std::make_shared<const std::regex>(pattern_, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw RuleCompileError("rule '" + name_ + "': cannot compile /" + pattern_ + "/: " + e.what());
  }
}

std::vector<std::string> DetectionRule::extract(const std::string& s) const {
  std::vector<std::string> out;
  if (s.empty()) return out;
  if (precision_ == PrecisionClass::kLoose) {
    if (std::regex_match(s, *regex_)) out.push_back(s);
    return out;
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), *regex_); it != std::sregex_iterator();
       ++it) {
    std::string m = it->str();
    if (m.empty()) continue;
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
  }
  return out;
}

std::vector<DetectionRule> parse_rules(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw RuleCompileError(std::string("rules file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw RuleCompileError("rules file must be a JSON array");
  std::vector<DetectionRule> rules;
  for (const auto& entry : doc) {
    try {
      const std::string provider = entry.at("provider").get<std::string>();
      const std::string precision = entry.value("precision_class", "precise");
      PrecisionClass pc;
      if (precision == "precise") pc = PrecisionClass::kPrecise;
      else if (precision == "loose") pc = PrecisionClass::kLoose;
      else throw RuleCompileError("unknown precision_class '" + precision + "'");
      std::set<FilterKind> filters{FilterKind::kEntropy, FilterKind::kWord, FilterKind::kPattern};
      if (entry.contains("filters")) {
        filters.clear();
        for (const auto& f : entry.at("filters")) {
          const auto name = f.get<std::string>();
          if (name == "entropy") filters.insert(FilterKind::kEntropy);
          else if (name == "word") filters.insert(FilterKind::kWord);
          else if (name == "pattern") filters.insert(FilterKind::kPattern);
          else throw RuleCompileError("unknown filter '" + name + "'");
        }
      }
      rules.emplace_back(entry.value("name", provider), provider,
                         entry.at("pattern").get<std::string>(), pc, std::move(filters));
    } catch (const nlohmann::json::exception& e) {
      throw RuleCompileError(std::string("malformed rule entry: ") + e.what());
    }
  }
  return rules;
}

std::vector<DetectionRule> load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuleCompileError("cannot open rules file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str());
}

Dictionary::Dictionary(const std::vector<std::string>& words) {
  for (const auto& w : words) insert(w);
}

void Dictionary::insert(std::string word) {
  if (word.empty()) return;
  max_len_ = std::max(max_len_, word.size());
  words_.insert(std::move(word));
}

Dictionary Dictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dictionary " + path);
  Dictionary dict;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    dict.insert(std::move(line));
  }
  return dict;
}

std::optional<std::string> Dictionary::find_word_in(std::string_view s,
                                                    std::size_t min_len) const {
  min_len = std::max<std::size_t>(min_len, 1);
  std::string folded(s);
  for (auto& c : folded) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const std::string_view view(folded);
  for (std::size_t i = 0; i < view.size(); ++i) {
    const std::size_t longest = std::min(max_len_, view.size() - i);
    for (std::size_t len = min_len; len <= longest; ++len) {
      std::string candidate(view.substr(i, len));
      if (words_.contains(candidate)) return candidate;
    }
  }
  return std::nullopt;
}

std::vector<RegexMatch> scan_regex(std::span<const StringOccurrence> occurrences,
                                   std::span<const DetectionRule> rules) {
  std::vector<RegexMatch> out;
  for (std::size_t o = 0; o < occurrences.size(); ++o) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      for (auto& m : rules[r].extract(occurrences[o].value)) {
        out.push_back(RegexMatch{o, r, std::move(m)});
      }
    }
  }
  return out;
}

double shannon_entropy(std::string_view s) {
  if (s.empty()) throw EmptyString("entropy of an empty string is undefined");
  std::array<std::size_t, 256> counts{};
  for (const char c : s) ++counts[static_cast<unsigned char>(c)];
  const double n = static_cast<double>(s.size());
  double h = 0.0;
  for (const auto count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<bool> entropy_filter(std::span<const double> group_entropies, EntropySided sided) {
  std::vector<bool> pass(group_entropies.size(), true);
  if (group_entropies.size() < 2) return pass;
  const double n = static_cast<double>(group_entropies.size());
  double mean = 0.0;
  for (double e : group_entropies) mean += e;
  mean /= n;
  double var = 0.0;
  for (double e : group_entropies) var += (e - mean) * (e - mean);
  const double sigma = std::sqrt(var / n);
  for (std::size_t i = 0; i < group_entropies.size(); ++i) {
    const double dev = group_entropies[i] - mean;
    const double measured = sided == EntropySided::kTwoSided ? std::abs(dev) : -dev;
    pass[i] = !(measured > 3.0 * sigma);
  }
  return pass;
}

bool word_filter(std::string_view s, const Dictionary& dictionary, std::size_t min_word_len) {
  return !dictionary.find_word_in(s, min_word_len).has_value();
}

bool pattern_filter(std::string_view s, std::size_t run_len) {
  if (run_len < 2) throw std::invalid_argument("run_len must be at least 2");
  std::size_t same = 1, up = 1, down = 1;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const int prev = static_cast<unsigned char>(s[i - 1]);
    const int cur = static_cast<unsigned char>(s[i]);
    same = cur == prev ? same + 1 : 1;
    up = cur == prev + 1 ? up + 1 : 1;
    down = cur == prev - 1 ? down + 1 : 1;
    if (same >= run_len || up >= run_len || down >= run_len) return false;
  }
  return true;
}

std::vector<CandidateVerdict> evaluate_candidates(std::span<const StringOccurrence> occurrences,
                                                  std::span<const DetectionRule> rules,
                                                  const Dictionary& dictionary,
                                                  const ThreeLayerConfig& config) {
  const auto matches = scan_regex(occurrences, rules);

  std::vector<double> entropy(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    entropy[i] = shannon_entropy(occurrences[matches[i].occurrence].value);
  }

  // Barrier: entropy statistics need the whole rule group.
  using GroupKey = std::tuple<std::size_t, std::string>;
  std::map<GroupKey, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& occ = occurrences[matches[i].occurrence];
    groups[{matches[i].rule, config.per_app_entropy ? occ.app_id : std::string{}}].push_back(i);
  }
  std::vector<bool> entropy_pass(matches.size(), true);
  for (const auto& [key, members] : groups) {
    std::vector<double> values;
    values.reserve(members.size());
    for (auto i : members) values.push_back(entropy[i]);
    const auto pass = entropy_filter(values, config.entropy_sided);
    for (std::size_t k = 0; k < members.size(); ++k) entropy_pass[members[k]] = pass[k];
  }

  std::vector<CandidateVerdict> out;
  out.reserve(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& rule = rules[matches[i].rule];
    const auto& value = occurrences[matches[i].occurrence].value;
    FilterVerdict v;
    v.matched_rule = rule.name();
    v.entropy_bits = entropy[i];
    // Every enabled filter is evaluated so reports can attribute rejections.
    if (rule.has_filter(FilterKind::kEntropy)) v.passed["entropy"] = entropy_pass[i];
    if (rule.has_filter(FilterKind::kWord)) {
      v.passed["word"] = word_filter(value, dictionary, config.min_word_len);
    }
    if (rule.has_filter(FilterKind::kPattern)) {
      v.passed["pattern"] = pattern_filter(value, config.run_len);
    }
    v.accepted = std::all_of(v.passed.begin(), v.passed.end(),
                             [](const auto& kv) { return kv.second; });
    out.push_back(CandidateVerdict{matches[i], std::move(v)});
  }
  return out;
}

std::vector<SecretFinding> run_three_layer(std::span<const StringOccurrence> occurrences,
                                           std::span<const DetectionRule> rules,
                                           const Dictionary& dictionary,
                                           const ThreeLayerConfig& config) {
  std::vector<SecretFinding> findings;
  for (auto& cand : evaluate_candidates(occurrences, rules, dictionary, config)) {
    if (!cand.verdict.accepted) continue;
    const auto& occ = occurrences[cand.match.occurrence];
    const auto& rule = rules[cand.match.rule];
    SecretFinding f;
    f.app_id = occ.app_id;
    f.value = cand.match.matched;
    f.provider = rule.provider();
    f.detectors = {Detector::kThreeLayer};
    f.locations = {FindingLocation{occ.class_name, occ.method_name.value_or(""),
                                   occ.statement_index}};
    f.confidence[Detector::kThreeLayer] = rule.precision() == PrecisionClass::kPrecise ? 1.0 : 0.5;
    f.verdict = std::move(cand.verdict);
    findings.push_back(std::move(f));
  }

  return collapse_findings(std::move(findings));
}

}  // namespace secretsieve
