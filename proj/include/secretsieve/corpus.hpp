#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secretsieve/finding.hpp"
#include "secretsieve/ir.hpp"
#include "secretsieve/ir_text.hpp"
#include "secretsieve/learned.hpp"
#include "secretsieve/sig_flow.hpp"
#include "secretsieve/three_layer.hpp"

namespace secretsieve {

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Placement {
  kLiteralArg,
  kSplitBuilder,
  kSplitConcat,
  kStaticField,
  kArrayAssembly,
  kEnvFile,
  kUnusedLiteral,
};

inline constexpr Placement kAllPlacements[] = {
    Placement::kLiteralArg,    Placement::kSplitBuilder, Placement::kSplitConcat,
    Placement::kStaticField,   Placement::kArrayAssembly, Placement::kEnvFile,
    Placement::kUnusedLiteral};

std::string_view to_string(Placement p);
Placement parse_placement(std::string_view name);
/// True for placements whose value reaches a signed API call.
bool reaches_api(Placement p);

/// Providers the generator can seed.
const std::vector<std::string>& seedable_providers();

struct SeedSpec {
  std::string provider;
  Placement placement = Placement::kLiteralArg;
  /// Empty means the provider's default format.
  std::string key_format;
  std::size_t count = 1;  // per app
  /// Helper levels between the defining method and the API call (0..2).
  std::size_t call_depth = 0;
};

struct NoiseProfile {
  std::string name = "default";
  std::size_t filler_methods = 3;       // per app
  std::size_t strings_per_filler = 5;
  std::size_t distractors = 0;          // random alnum strings per app
  std::size_t context_terms = 3;        // secret-context vocabulary near each seed
  std::size_t arithmetic_methods = 1;

  /// "default", "none", "loose-twitter", "rich".
  static NoiseProfile named(std::string_view name);
};

struct CorpusSpec {
  std::vector<SeedSpec> seeds;
  std::size_t n_apps = 1;
  NoiseProfile noise;
  std::uint64_t seed = 0;
};

CorpusSpec parse_corpus_spec(std::string_view json_text);
CorpusSpec load_corpus_spec(const std::string& path);

struct ManifestEntry {
  std::string app_id;
  std::string value;
  std::string provider;
  Placement placement = Placement::kLiteralArg;
  std::string class_name;  // "env.json" for env-file seeds
  std::string method;
  std::optional<std::size_t> index;
  std::size_t call_depth = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct GroundTruthManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;

  bool operator==(const GroundTruthManifest&) const = default;
};

std::string manifest_to_jsonl(const GroundTruthManifest& manifest);
GroundTruthManifest parse_manifest_jsonl(std::string_view text);
GroundTruthManifest load_manifest(const std::string& path);

struct GeneratedApp {
  std::string app_id;
  std::vector<IrSourceFile> files;
  std::map<std::string, std::string> env;  // env.json contents (key -> value)
  /// (class, method) of every method whose strings include seeded material.
  std::set<std::pair<std::string, std::string>> secret_methods;
};

struct Corpus {
  std::vector<GeneratedApp> apps;
  GroundTruthManifest manifest;
};

/// Deterministic for a fixed spec. When `dictionary` is given, seeded keys
/// are resampled until they hold no dictionary word of `min_word_len` or
/// more letters; keys never hold runs that pattern_filter rejects, and their
/// entropy stays within two standard deviations of their format's typical value.
Corpus gen_corpus(const CorpusSpec& spec, const Dictionary* dictionary = nullptr,
                  std::size_t min_word_len = 5);

/// Random key in `format` ("google", "stripe", "alnum:MIN-MAX", ...).
std::string generate_key(std::string_view format, std::uint64_t seed);
std::string default_key_format(std::string_view provider);

IrApp to_ir(const GeneratedApp& app);
/// Env-hook file map for an app: {"env.json": contents}.
std::map<std::string, std::map<std::string, std::string>> env_files(const GeneratedApp& app);

/// Writes `<dir>/<app_id>/*.jir`, optional env.json, and `<dir>/manifest.jsonl`.
void write_corpus(const Corpus& corpus, const std::string& dir);

/// Labeled string groups: a group is secret when its method holds seeded
/// material. Group ids are `<app>/<class>/<method>`.
std::vector<LabeledGroup> labeled_groups(const Corpus& corpus, std::size_t min_size = 2);

/// Renamed identifiers. Keys of `methods` and `fields` are `owner#name`
/// with the old owner.
struct RenameMap {
  std::map<std::string, std::string> classes;
  std::map<std::string, std::string> methods;
  std::map<std::string, std::string> fields;

  std::string type(std::string_view t) const;
  MethodSig remap(const MethodSig& sig) const;
};

/// Renames program classes, methods, fields and locals plus non-platform
/// external owners and their methods. String literals are untouched.
std::pair<IrApp, RenameMap> obfuscate(const IrApp& app, std::uint64_t seed);

ApiSignature remap_signature(const ApiSignature& sig, const RenameMap& map);

struct DetectorScore {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  static DetectorScore from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
};

struct ScoreReport {
  /// Keyed by detector name, plus "combined".
  std::map<std::string, DetectorScore> per_detector;
  /// detector name -> provider -> score.
  std::map<std::string, std::map<std::string, DetectorScore>> per_provider;
  /// Unique (app, value, provider) findings per exact detector set.
  std::map<std::set<Detector>, std::size_t> overlap;
};

/// A finding matches a manifest entry when app, value and provider agree.
ScoreReport score(std::span<const SecretFinding> findings, const GroundTruthManifest& manifest);

std::string overlap_key(const std::set<Detector>& detectors);

}  // namespace secretsieve
