#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "secretsieve/finding.hpp"
#include "secretsieve/ir.hpp"

namespace secretsieve {

class SignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MatchMode { kExact, kStructural };

/// Cloud API that consumes a secret. `owner_pattern` is a dotted class name,
/// optionally ending in `.*` to accept every class below a package.
struct ApiSignature {
  std::string provider;
  std::string owner_pattern;
  std::string method_name;
  std::vector<std::string> param_types;
  std::set<std::size_t> secret_param_indices;
  MatchMode match_mode = MatchMode::kExact;

  bool operator==(const ApiSignature&) const = default;
};

/// Throws SignatureError when indices exceed the arity or point at
/// non-string parameters.
void validate(const ApiSignature& sig);

std::vector<ApiSignature> parse_signatures(std::string_view json_text);
std::vector<ApiSignature> load_signatures(const std::string& path);
std::string signatures_to_json(std::span<const ApiSignature> sigs);

bool owner_matches_exact(std::string_view pattern, std::string_view owner);
bool owner_matches_structural(std::string_view pattern, std::string_view owner);

struct SignatureMatch {
  CallSite site;
  std::size_t signature = 0;
  /// Set when only the structural heuristic matched (possible false match).
  bool fuzzy = false;

  bool operator==(const SignatureMatch&) const = default;
};

std::vector<SignatureMatch> match_signatures(const IrApp& app,
                                             std::span<const ApiSignature> sigs);

struct SliceBudget {
  std::size_t max_depth = 5;          // call-site ascents + descents
  std::size_t max_statements = 200000;
  std::size_t max_fanout = 8;         // alternative values per argument
};

/// Env-file lookups: calls to `callees` (as `owner.method`) whose first
/// argument resolves to a key are answered from `files` (path -> key -> value).
struct EnvHook {
  std::set<std::string> callees{"java.util.Properties.getProperty",
                                "android.content.res.Resources.getString"};
  std::map<std::string, std::map<std::string, std::string>> files;
};

struct SliceOptions {
  SliceBudget budget;
  EnvHook env;
};

enum class SliceStatus { kResolved, kPartial, kUnresolved };
enum class HoleReason { kNoDefinition, kRecursive, kNonConstant, kBudget, kFanout };

std::string_view to_string(SliceStatus s);
std::string_view to_string(HoleReason r);

struct Fragment {
  bool hole = false;
  std::string text;  // constant text, or a description of the hole
  HoleReason reason = HoleReason::kNonConstant;

  bool operator==(const Fragment&) const = default;
};

/// One feasible definition path for the sliced argument.
struct SlicePath {
  SliceStatus status = SliceStatus::kUnresolved;
  std::string value;                 // resolved value (status == kResolved)
  std::vector<Fragment> fragments;   // concatenation of consts and holes
  std::optional<HoleReason> reason;  // set when unresolved
  std::vector<TraceStep> trace;

  bool operator==(const SlicePath&) const = default;
};

struct SliceResult {
  std::vector<SlicePath> paths;
  std::size_t depth_used = 0;

  /// Resolved iff every path resolved; unresolved iff every path unresolved.
  SliceStatus status() const;
  std::vector<std::string> resolved_values() const;
  bool operator==(const SliceResult&) const = default;
};

/// Walks definitions backward from argument `arg_index` of the call at `site`
/// and folds the string value that reaches it.
SliceResult backward_slice(const IrApp& app, CallSite site, std::size_t arg_index,
                           const SliceOptions& options = {});

struct SliceDiagnostic {
  CallSite site;
  std::string callsite;  // human-readable location
  std::string provider;
  std::size_t arg_index = 0;
  bool fuzzy = false;
  SlicePath path;
};

struct SigFlowResult {
  std::vector<SecretFinding> findings;
  std::vector<SliceDiagnostic> diagnostics;
};

SigFlowResult run_sig_flow(const IrApp& app, std::span<const ApiSignature> sigs,
                           const SliceOptions& options = {});

}  // namespace secretsieve
