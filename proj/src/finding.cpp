#include "secretsieve/finding.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace secretsieve {

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::kThreeLayer: return "three_layer";
    case Detector::kSigFlow: return "sig_flow";
    case Detector::kIntrinsic: return "intrinsic";
    case Detector::kContext: return "context";
    case Detector::kStringGroup: return "string_group";
  }
  return "unknown";
}

Detector parse_detector(std::string_view name) {
  for (Detector d : kAllDetectors) {
    if (to_string(d) == name) return d;
  }
  throw std::invalid_argument("unknown detector: " + std::string(name));
}

namespace {

auto finding_key(const SecretFinding& f) { return std::tie(f.app_id, f.value, f.provider); }

std::vector<SecretFinding> fold(std::vector<SecretFinding> findings, bool add_multiplicity) {
  std::stable_sort(findings.begin(), findings.end(),
                   [](const SecretFinding& a, const SecretFinding& b) {
                     return finding_key(a) < finding_key(b);
                   });
  std::vector<SecretFinding> out;
  for (auto& f : findings) {
    if (out.empty() || finding_key(out.back()) != finding_key(f)) {
      out.push_back(std::move(f));
      continue;
    }
    auto& into = out.back();
    into.detectors.insert(f.detectors.begin(), f.detectors.end());
    for (auto& loc : f.locations) into.locations.push_back(std::move(loc));
    for (const auto& [d, c] : f.confidence) {
      auto [it, inserted] = into.confidence.emplace(d, c);
      if (!inserted) it->second = std::max(it->second, c);
    }
    if (into.trace.empty()) into.trace = std::move(f.trace);
    if (!into.verdict) into.verdict = std::move(f.verdict);
    into.multiplicity = add_multiplicity ? into.multiplicity + f.multiplicity
                                         : std::max(into.multiplicity, f.multiplicity);
  }
  for (auto& f : out) {
    std::sort(f.locations.begin(), f.locations.end());
    f.locations.erase(std::unique(f.locations.begin(), f.locations.end()), f.locations.end());
  }
  return out;
}

}  // namespace

std::vector<SecretFinding> merge_findings(std::vector<SecretFinding> findings) {
  return fold(std::move(findings), false);
}

std::vector<SecretFinding> collapse_findings(std::vector<SecretFinding> findings) {
  return fold(std::move(findings), true);
}

}  // namespace secretsieve
