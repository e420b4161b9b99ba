#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace secretsieve {

enum class Detector { kThreeLayer, kSigFlow, kIntrinsic, kContext, kStringGroup };

inline constexpr Detector kAllDetectors[] = {Detector::kThreeLayer, Detector::kSigFlow,
                                             Detector::kIntrinsic, Detector::kContext,
                                             Detector::kStringGroup};

std::string_view to_string(Detector d);
/// Throws std::invalid_argument for unknown names.
Detector parse_detector(std::string_view name);

struct FindingLocation {
  std::string class_name;
  std::string method_name;  // empty for static-field initializers
  std::optional<std::size_t> statement_index;

  bool operator==(const FindingLocation&) const = default;
  auto operator<=>(const FindingLocation&) const = default;
};

/// Per-filter outcome for one regex candidate. A filter that is not enabled
/// for the rule has no entry in `passed`.
struct FilterVerdict {
  std::string matched_rule;
  std::map<std::string, bool> passed;  // "entropy", "word", "pattern"
  double entropy_bits = 0.0;           // Shannon entropy, bits per character
  bool accepted = false;

  bool operator==(const FilterVerdict&) const = default;
};

struct TraceStep {
  std::string method;
  std::size_t index = 0;
  std::string transfer;

  bool operator==(const TraceStep&) const = default;
};

struct SecretFinding {
  std::string app_id;
  std::string value;
  std::string provider;
  std::set<Detector> detectors;
  std::vector<FindingLocation> locations;
  std::map<Detector, double> confidence;
  std::vector<TraceStep> trace;
  std::optional<FilterVerdict> verdict;
  std::size_t multiplicity = 1;

  bool operator==(const SecretFinding&) const = default;
};

/// Merges findings sharing (app_id, value, provider): detectors, locations
/// and confidences are unioned. Output is sorted by that key.
std::vector<SecretFinding> merge_findings(std::vector<SecretFinding> findings);

/// Collapses one detector's duplicate findings; multiplicities add up.
std::vector<SecretFinding> collapse_findings(std::vector<SecretFinding> findings);

}  // namespace secretsieve
