#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "secretsieve/finding.hpp"
#include "secretsieve/strings.hpp"

namespace secretsieve {

class RuleCompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyString : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class PrecisionClass { kPrecise, kLoose };
enum class FilterKind { kEntropy, kWord, kPattern };

std::string_view to_string(FilterKind f);

/// Provider regex. Precise rules match anywhere in a string; loose rules
/// must match the whole string.
class DetectionRule {
 public:
  DetectionRule(std::string name, std::string provider, std::string pattern,
                PrecisionClass precision, std::set<FilterKind> filters);

  const std::string& name() const noexcept { return name_; }
  const std::string& provider() const noexcept { return provider_; }
  const std::string& pattern() const noexcept { return pattern_; }
  PrecisionClass precision() const noexcept { return precision_; }
  const std::set<FilterKind>& filters() const noexcept { return filters_; }
  bool has_filter(FilterKind f) const { return filters_.contains(f); }

  /// Secret substrings this rule extracts from `s`, in order, deduplicated.
  std::vector<std::string> extract(const std::string& s) const;
  bool matches(const std::string& s) const { return !extract(s).empty(); }

 private:
  std::string name_;
  std::string provider_;
  std::string pattern_;
  PrecisionClass precision_;
  std::set<FilterKind> filters_;
  std::shared_ptr<const std::regex> regex_;
};

/// Parses a JSON array of {name?, provider, pattern, precision_class, filters}.
std::vector<DetectionRule> parse_rules(std::string_view json_text);
std::vector<DetectionRule> load_rules(const std::string& path);

/// Lowercase English word list with substring lookup.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(const std::vector<std::string>& words);

  static Dictionary load(const std::string& path);

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const noexcept { return words_.size(); }
  std::size_t max_length() const noexcept { return max_len_; }
  void insert(std::string word);

  /// First dictionary word of length >= min_len found in lowercase(s).
  std::optional<std::string> find_word_in(std::string_view s, std::size_t min_len) const;

 private:
  std::unordered_set<std::string> words_;
  std::size_t max_len_ = 0;
};

struct RegexMatch {
  std::size_t occurrence = 0;
  std::size_t rule = 0;
  std::string matched;  // extracted secret substring

  bool operator==(const RegexMatch&) const = default;
};

std::vector<RegexMatch> scan_regex(std::span<const StringOccurrence> occurrences,
                                   std::span<const DetectionRule> rules);

/// -sum p(c) log2 p(c) over the byte distribution of `s`.
double shannon_entropy(std::string_view s);

enum class EntropySided { kTwoSided, kLowOnly };

/// Pass flags for one rule group: a value fails when it lies more than three
/// population standard deviations from the group mean. Groups with fewer
/// than two values pass.
std::vector<bool> entropy_filter(std::span<const double> group_entropies,
                                 EntropySided sided = EntropySided::kTwoSided);

/// True (pass) when `s` contains no dictionary word of length >= min_word_len.
bool word_filter(std::string_view s, const Dictionary& dictionary, std::size_t min_word_len);

/// True (pass) when `s` has no run of `run_len` identical, ascending-by-one
/// or descending-by-one characters.
bool pattern_filter(std::string_view s, std::size_t run_len = 4);

struct ThreeLayerConfig {
  EntropySided entropy_sided = EntropySided::kTwoSided;
  std::size_t run_len = 4;
  std::size_t min_word_len = 5;
  /// Entropy statistics per (rule, app) instead of per rule over the corpus.
  bool per_app_entropy = false;
};

/// Regex candidates that survive every enabled filter, collapsed per
/// (app, value, provider). Each finding carries its FilterVerdict.
std::vector<SecretFinding> run_three_layer(std::span<const StringOccurrence> occurrences,
                                           std::span<const DetectionRule> rules,
                                           const Dictionary& dictionary,
                                           const ThreeLayerConfig& config = {});

/// Same pipeline, returning every candidate verdict (accepted or not).
struct CandidateVerdict {
  RegexMatch match;
  FilterVerdict verdict;
};
std::vector<CandidateVerdict> evaluate_candidates(std::span<const StringOccurrence> occurrences,
                                                  std::span<const DetectionRule> rules,
                                                  const Dictionary& dictionary,
                                                  const ThreeLayerConfig& config = {});

}  // namespace secretsieve
