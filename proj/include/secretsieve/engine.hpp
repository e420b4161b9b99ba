#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "secretsieve/finding.hpp"
#include "secretsieve/ir_text.hpp"
#include "secretsieve/learned.hpp"
#include "secretsieve/sig_flow.hpp"
#include "secretsieve/three_layer.hpp"

namespace secretsieve {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CorpusUnreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownFormat : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class OutputFormat { kJson, kCsv, kTable };

std::string_view to_string(OutputFormat f);
OutputFormat parse_output_format(std::string_view name);

/// Directory holding the bundled rules, signatures and dictionary.
std::string default_data_dir();

struct ScanConfig {
  std::set<Detector> detectors{std::begin(kAllDetectors), std::end(kAllDetectors)};
  std::string rules_path;
  std::string signatures_path;
  std::string dictionary_path;
  /// Empty paths fall back to models trained on a built-in synthetic corpus.
  std::string intrinsic_model_path;
  std::string context_model_path;
  std::string string_group_model_path;
  SliceBudget budget;
  ThreeLayerConfig three_layer;
  OutputFormat format = OutputFormat::kJson;
  bool mask = true;
  std::size_t jobs = 1;
  /// Shortest string the learned detectors report.
  std::size_t ml_min_length = 16;
  std::size_t context_radius = 6;

  /// Defaults with bundled data files.
  static ScanConfig defaults();
  /// Throws ConfigError: no detector enabled, missing file, zero jobs.
  void validate() const;
};

/// Applies the keys present in a JSON config object on top of `base`.
ScanConfig apply_config_json(ScanConfig base, std::string_view json_text);

struct AppInput {
  std::string app_id;
  std::vector<IrSourceFile> files;
  std::map<std::string, std::map<std::string, std::string>> env;
};

/// One app per subdirectory holding *.jir files (plus optional env.json),
/// sorted by app id. Throws CorpusUnreadable when `dir` is not a readable
/// directory.
std::vector<AppInput> load_corpus_dir(const std::string& dir);

struct AppError {
  std::string app_id;
  std::string message;

  bool operator==(const AppError&) const = default;
};

struct ScanDiagnostic {
  std::string app_id;
  std::string callsite;
  std::string provider;
  std::size_t arg_index = 0;
  std::string status;
  std::string reason;
  std::string partial;  // constant text known so far, holes as "?"

  bool operator==(const ScanDiagnostic&) const = default;
};

struct ScanReport {
  static constexpr int kSchemaVersion = 1;

  std::size_t apps_scanned = 0;
  std::vector<SecretFinding> findings;  // merged per (app, value, provider), sorted
  std::vector<ScanDiagnostic> diagnostics;
  std::vector<AppError> errors;

  /// provider -> detector -> unique values found by it.
  std::map<std::string, std::map<std::string, std::size_t>> per_provider() const;
  /// Unique (value, provider) pairs keyed by the exact set of detectors that found them.
  std::map<std::string, std::size_t> overlap() const;

  bool operator==(const ScanReport&) const = default;
};

/// The learned models the ML detectors use.
struct ModelSet {
  std::shared_ptr<const TrainedModel> intrinsic;
  std::shared_ptr<const TrainedModel> context;
  std::shared_ptr<const TrainedModel> string_group;
};

/// Models fitted on a fixed synthetic corpus; computed once per process.
const ModelSet& default_models();

class Engine {
 public:
  /// Loads every referenced file; throws ConfigError.
  explicit Engine(ScanConfig config);

  const ScanConfig& config() const noexcept { return config_; }

  ScanReport scan(std::span<const AppInput> apps) const;
  ScanReport scan(const std::string& corpus_dir) const;

 private:
  struct AppResult;
  AppResult scan_app(const AppInput& input) const;

  ScanConfig config_;
  std::vector<DetectionRule> rules_;
  std::vector<ApiSignature> signatures_;
  std::shared_ptr<const Dictionary> dictionary_;
  ModelSet models_;
};

/// "AIza…(39)": first four characters, an ellipsis and the length.
std::string mask_value(std::string_view value);

std::string emit_report(const ScanReport& report, OutputFormat format, bool mask = true);
/// Parses the JSON form back.
ScanReport parse_report_json(std::string_view json_text);

/// Provider a learned detector attributes `value` to: precise rule match,
/// else whole-string loose rule match, else "unknown".
std::string attribute_provider(const std::string& value, std::span<const DetectionRule> rules);

/// Process-wide dictionary cache keyed by path.
std::shared_ptr<const Dictionary> shared_dictionary(const std::string& path);

}  // namespace secretsieve
