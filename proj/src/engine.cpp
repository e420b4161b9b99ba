#include "secretsieve/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "secretsieve/corpus.hpp"
#include "secretsieve/strings.hpp"

namespace secretsieve {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::kJson: return "json";
    case OutputFormat::kCsv: return "csv";
    case OutputFormat::kTable: return "table";
  }
  return "json";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "json") return OutputFormat::kJson;
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "table" || name == "text" || name == "text-table") return OutputFormat::kTable;
  throw UnknownFormat("unknown output format '" + std::string(name) + "'");
}

std::string default_data_dir() {
  if (const char* env = std::getenv("SECRETSIEVE_DATA")) return env;
  return SECRETSIEVE_DATA_DIR;
}

ScanConfig ScanConfig::defaults() {
  ScanConfig c;
  const fs::path data = default_data_dir();
  c.rules_path = (data / "rules.json").string();
  c.signatures_path = (data / "signatures.json").string();
  c.dictionary_path = (data / "dictionary.txt").string();
  return c;
}

void ScanConfig::validate() const {
  if (detectors.empty()) throw ConfigError("at least one detector must be enabled");
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  auto need = [](const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " path is not set");
    if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " file not found: " + path);
  };
  if (detectors.contains(Detector::kThreeLayer)) {
    need(rules_path, "rules");
    need(dictionary_path, "dictionary");
  }
  if (detectors.contains(Detector::kSigFlow)) need(signatures_path, "signatures");
  if (detectors.contains(Detector::kIntrinsic) || detectors.contains(Detector::kContext) ||
      detectors.contains(Detector::kStringGroup)) {
    need(rules_path, "rules");
  }
  for (const auto* p : {&intrinsic_model_path, &context_model_path, &string_group_model_path}) {
    if (!p->empty()) need(*p, "model");
  }
}

ScanConfig apply_config_json(ScanConfig c, std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (j.contains("detectors")) {
      c.detectors.clear();
      for (const auto& d : j.at("detectors")) c.detectors.insert(parse_detector(d.get<std::string>()));
    }
    c.rules_path = j.value("rules", c.rules_path);
    c.signatures_path = j.value("signatures", c.signatures_path);
    c.dictionary_path = j.value("dictionary", c.dictionary_path);
    if (j.contains("models")) {
      const auto& m = j.at("models");
      c.intrinsic_model_path = m.value("intrinsic", c.intrinsic_model_path);
      c.context_model_path = m.value("context", c.context_model_path);
      c.string_group_model_path = m.value("string_group", c.string_group_model_path);
    }
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      c.budget.max_depth = b.value("max_depth", c.budget.max_depth);
      c.budget.max_statements = b.value("max_statements", c.budget.max_statements);
      c.budget.max_fanout = b.value("max_fanout", c.budget.max_fanout);
    }
    if (j.contains("format")) c.format = parse_output_format(j.at("format").get<std::string>());
    c.mask = j.value("mask", c.mask);
    c.jobs = j.value("jobs", c.jobs);
    c.three_layer.per_app_entropy = j.value("per_app_entropy", c.three_layer.per_app_entropy);
    c.three_layer.min_word_len = j.value("min_word_len", c.three_layer.min_word_len);
    c.three_layer.run_len = j.value("run_len", c.three_layer.run_len);
    if (j.contains("entropy_sided")) {
      const auto s = j.at("entropy_sided").get<std::string>();
      if (s == "two_sided") c.three_layer.entropy_sided = EntropySided::kTwoSided;
      else if (s == "low_only") c.three_layer.entropy_sided = EntropySided::kLowOnly;
      else throw ConfigError("entropy_sided must be two_sided or low_only");
    }
    c.ml_min_length = j.value("ml_min_length", c.ml_min_length);
    c.context_radius = j.value("context_radius", c.context_radius);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  } catch (const UnknownFormat& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(e.what());
  }
  return c;
}

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorpusUnreadable("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

AppInput load_app_dir(const fs::path& dir, std::string app_id) {
  AppInput app;
  app.app_id = std::move(app_id);
  for (const auto& p : sorted_entries(dir)) {
    if (!fs::is_regular_file(p)) continue;
    if (p.extension() == ".jir") {
      app.files.push_back(IrSourceFile{p.filename().string(), slurp(p)});
    } else if (p.filename() == "env.json") {
      try {
        app.env[p.filename().string()] =
            json::parse(slurp(p)).get<std::map<std::string, std::string>>();
      } catch (const json::exception&) {
        // unreadable env file: the app scans without it
      }
    }
  }
  return app;
}

}  // namespace

std::vector<AppInput> load_corpus_dir(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw CorpusUnreadable("corpus is not a readable directory: " + dir);
  std::vector<AppInput> apps;
  try {
    bool flat = false;
    for (const auto& p : sorted_entries(dir)) {
      if (fs::is_directory(p)) {
        auto app = load_app_dir(p, p.filename().string());
        if (!app.files.empty()) apps.push_back(std::move(app));
      } else if (p.extension() == ".jir") {
        flat = true;
      }
    }
    if (flat) apps.push_back(load_app_dir(dir, fs::path(dir).lexically_normal().filename().string()));
  } catch (const fs::filesystem_error& e) {
    throw CorpusUnreadable(e.what());
  }
  std::sort(apps.begin(), apps.end(),
            [](const AppInput& a, const AppInput& b) { return a.app_id < b.app_id; });
  return apps;
}

std::shared_ptr<const Dictionary> shared_dictionary(const std::string& path) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const Dictionary>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[path];
  if (!slot) slot = std::make_shared<const Dictionary>(Dictionary::load(path));
  return slot;
}

std::string attribute_provider(const std::string& value, std::span<const DetectionRule> rules) {
  for (const auto& r : rules) {
    if (r.precision() == PrecisionClass::kPrecise && r.matches(value)) return r.provider();
  }
  for (const auto& r : rules) {
    if (r.precision() != PrecisionClass::kLoose) continue;
    const auto hits = r.extract(value);
    if (std::find(hits.begin(), hits.end(), value) != hits.end()) return r.provider();
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Default models

namespace {

std::vector<std::string> window_lines(const IrMethod& m, std::size_t index, std::size_t radius) {
  std::vector<std::string> out;
  for (const auto& s : method_window(m, index, radius)) out.push_back(print_statement(s));
  return out;
}

bool is_key_material(const std::string& s, const std::set<std::string>& keys) {
  if (s.size() < 4) return false;
  for (const auto& k : keys) {
    if (k.find(s) != std::string::npos) return true;
  }
  return false;
}

// Natural-language and identifier-shaped strings built from dictionary words.
std::vector<std::string> synthetic_ordinary(std::size_t n, std::uint64_t seed) {
  std::vector<std::string> words;
  {
    std::ifstream in(ScanConfig::defaults().dictionary_path);
    std::string w;
    for (std::size_t i = 0; std::getline(in, w); ++i) {
      if (i % 7 == 0 && w.size() >= 3 && w.size() <= 10) words.push_back(w);
    }
  }
  if (words.empty()) return {};
  std::mt19937_64 rng(seed);
  auto word = [&] { return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)]; };
  auto cap = [](std::string w) {
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
  };
  std::vector<std::string> out;
  while (out.size() < n) {
    const std::size_t k = 2 + rng() % 4;
    std::string s;
    switch (rng() % 6) {
      case 0:
        for (std::size_t i = 0; i < k; ++i) s += (i ? " " : "") + (i ? word() : cap(word()));
        break;
      case 1:
        for (std::size_t i = 0; i < k; ++i) s += (i ? "_" : "") + word();
        break;
      case 2:
        for (std::size_t i = 0; i < k; ++i) s += i ? cap(word()) : word();
        break;
      case 3:
        s = "com." + word() + "." + word() + "." + cap(word());
        break;
      case 4:
        s = "https://www." + word() + ".com/" + word() + "/" + word();
        break;
      default:
        for (std::size_t i = 0; i < k; ++i) s += (i ? " " : "") + word();
        s += rng() % 2 ? ": %s" : "...";
        break;
    }
    out.push_back(std::move(s));
  }
  return out;
}

ModelSet train_default_models() {
  CorpusSpec spec;
  spec.n_apps = 60;
  spec.seed = 0x5ec2e7;
  spec.noise = NoiseProfile::named("default");
  std::size_t depth = 0;
  for (const auto& provider : seedable_providers()) {
    for (auto p : kAllPlacements) {
      spec.seeds.push_back(SeedSpec{provider, p, "", 1, depth});
      depth = (depth + 1) % 3;
    }
  }
  const Corpus corpus = gen_corpus(spec);

  LabeledGroupDataset strings_ds, windows_ds, groups_ds;
  std::size_t positives = 0;
  for (const auto& gen : corpus.apps) {
    std::set<std::string> keys;
    for (const auto& e : corpus.manifest.entries) {
      if (e.app_id == gen.app_id) keys.insert(e.value);
    }
    const IrApp app = to_ir(gen);
    for (const auto& occ : extract_occurrences(app)) {
      if (occ.value.empty()) continue;
      const bool secret = keys.contains(occ.value);
      if (secret) {
        strings_ds.entries.push_back(LabeledGroup{occ.app_id + ":" + occ.value, {occ.value}, true});
        ++positives;
      } else if (!is_key_material(occ.value, keys)) {
        strings_ds.entries.push_back(LabeledGroup{occ.app_id + ":" + occ.value, {occ.value}, false});
      }
      if (!occ.method || !occ.statement_index) continue;
      // A window is positive when its method handles seeded material.
      const bool secret_context = gen.secret_methods.contains({occ.class_name, *occ.method_name});
      windows_ds.entries.push_back(LabeledGroup{
          occ.app_id + ":" + occ.class_name + ":" + std::to_string(*occ.statement_index),
          window_lines(app.method(*occ.method), *occ.statement_index, 6), secret_context});
    }
    // Code without any string literal still needs negative windows.
    app.for_each_method([&](MethodRef ref, const IrMethod& m) {
      for (const auto& s : m.body) {
        if (!statement_strings(s).empty()) return;
      }
      for (std::size_t i = 0; i < m.body.size(); i += 6) {
        windows_ds.entries.push_back(LabeledGroup{
            gen.app_id + ":" + app.describe(ref) + ":" + std::to_string(i), window_lines(m, i, 6), false});
      }
    });
  }
  for (auto& s : synthetic_ordinary(positives, spec.seed)) {
    strings_ds.entries.push_back(LabeledGroup{"synthetic:" + s, {s}, false});
  }
  groups_ds.entries = labeled_groups(corpus, 2);

  ModelSet set;
  FitOptions intrinsic;
  intrinsic.kind = ModelKind::kLogisticRegression;
  intrinsic.scheme = Scheme::kCharNgram;
  intrinsic.seed = spec.seed;
  set.intrinsic = std::make_shared<const TrainedModel>(fit_all(strings_ds, intrinsic));

  FitOptions context;
  context.kind = ModelKind::kLogisticRegression;
  context.scheme = Scheme::kCountFrequency;
  context.seed = spec.seed;
  set.context = std::make_shared<const TrainedModel>(fit_all(windows_ds, context));

  FitOptions groups;
  groups.kind = ModelKind::kLinearSvc;
  groups.scheme = Scheme::kCountFrequency;
  groups.seed = spec.seed;
  set.string_group = std::make_shared<const TrainedModel>(fit_all(groups_ds, groups));
  return set;
}

}  // namespace

const ModelSet& default_models() {
  static const ModelSet models = train_default_models();
  return models;
}

// ---------------------------------------------------------------------------
// Engine

struct Engine::AppResult {
  std::vector<StringOccurrence> occurrences;
  std::vector<SecretFinding> findings;
  std::vector<ScanDiagnostic> diagnostics;
  std::optional<AppError> error;
};

Engine::Engine(ScanConfig config) : config_(std::move(config)) {
  config_.validate();
  try {
    const bool ml = config_.detectors.contains(Detector::kIntrinsic) ||
                    config_.detectors.contains(Detector::kContext) ||
                    config_.detectors.contains(Detector::kStringGroup);
    if (config_.detectors.contains(Detector::kThreeLayer) || ml) rules_ = load_rules(config_.rules_path);
    if (config_.detectors.contains(Detector::kThreeLayer)) {
      dictionary_ = shared_dictionary(config_.dictionary_path);
    }
    if (config_.detectors.contains(Detector::kSigFlow)) {
      signatures_ = load_signatures(config_.signatures_path);
    }
    auto model = [&](Detector d, const std::string& path,
                     std::shared_ptr<const TrainedModel> ModelSet::*slot) {
      if (!config_.detectors.contains(d)) return;
      models_.*slot = path.empty() ? default_models().*slot
                                   : std::make_shared<const TrainedModel>(load_model(path));
    };
    model(Detector::kIntrinsic, config_.intrinsic_model_path, &ModelSet::intrinsic);
    model(Detector::kContext, config_.context_model_path, &ModelSet::context);
    model(Detector::kStringGroup, config_.string_group_model_path, &ModelSet::string_group);
    if (models_.intrinsic && models_.intrinsic->vectorizer.scheme() != Scheme::kCharNgram) {
      throw ConfigError("intrinsic model must use the char_ngram scheme");
    }
    if (models_.context && (models_.context->vectorizer.scheme() == Scheme::kCharNgram ||
                            models_.context->vectorizer.scheme() == Scheme::kCharHistogram)) {
      throw ConfigError("context model must use a token scheme");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::string partial_text(const SlicePath& p) {
  std::string out;
  for (const auto& f : p.fragments) out += f.hole ? "?" : f.text;
  return out;
}

double entropy_length(const std::string& s) {
  return shannon_entropy(s) * static_cast<double>(s.size());
}

}  // namespace

Engine::AppResult Engine::scan_app(const AppInput& input) const {
  AppResult r;
  try {
    const IrApp app = parse_app(input.app_id, input.files);
    r.occurrences = extract_occurrences(app);

    if (config_.detectors.contains(Detector::kSigFlow)) {
      SliceOptions opts;
      opts.budget = config_.budget;
      opts.env.files = input.env;
      auto flow = run_sig_flow(app, signatures_, opts);
      for (auto& f : flow.findings) r.findings.push_back(std::move(f));
      for (const auto& d : flow.diagnostics) {
        r.diagnostics.push_back(ScanDiagnostic{
            input.app_id, d.callsite, d.provider, d.arg_index, std::string(to_string(d.path.status)),
            d.path.reason ? std::string(to_string(*d.path.reason)) : "", partial_text(d.path)});
      }
    }

    auto ml_finding = [&](Detector d, const std::string& value, FindingLocation loc, double score) {
      SecretFinding f;
      f.app_id = input.app_id;
      f.value = value;
      f.provider = attribute_provider(value, rules_);
      f.detectors = {d};
      f.locations = {std::move(loc)};
      f.confidence[d] = score;
      r.findings.push_back(std::move(f));
    };
    auto location_of = [](const StringOccurrence& o) {
      return FindingLocation{o.class_name, o.method_name.value_or(""), o.statement_index};
    };

    if (models_.intrinsic) {
      for (const auto& o : r.occurrences) {
        if (o.value.size() < config_.ml_min_length) continue;
        const auto p = intrinsic_classify(o.value, *models_.intrinsic);
        if (p.positive) ml_finding(Detector::kIntrinsic, o.value, location_of(o), p.score);
      }
    }
    if (models_.context) {
      for (const auto& o : r.occurrences) {
        if (o.value.size() < config_.ml_min_length || !o.method || !o.statement_index) continue;
        const auto lines = window_lines(app.method(*o.method), *o.statement_index, config_.context_radius);
        const auto p = context_classify(lines, *models_.context);
        if (p.positive) ml_finding(Detector::kContext, o.value, location_of(o), p.score);
      }
    }
    if (models_.string_group) {
      for (const auto& g : build_string_groups(app, 2)) {
        const auto p = predict_group(*models_.string_group, g.strings);
        if (!p.positive) continue;
        const std::string* best = nullptr;
        for (const auto& s : g.strings) {
          if (s.size() < config_.ml_min_length) continue;
          if (!best || entropy_length(s) > entropy_length(*best)) best = &s;
        }
        if (!best) continue;
        std::optional<std::size_t> index;
        for (const auto& s : app.method(g.method).body) {
          const auto strs = statement_strings(s);
          if (std::find(strs.begin(), strs.end(), *best) != strs.end()) {
            index = s.index;
            break;
          }
        }
        ml_finding(Detector::kStringGroup, *best, FindingLocation{g.class_name, g.method_name, index},
                   p.score);
      }
    }
  } catch (const std::exception& e) {
    r = AppResult{};
    r.error = AppError{input.app_id, e.what()};
  }
  return r;
}

ScanReport Engine::scan(std::span<const AppInput> apps) const {
  std::vector<AppResult> results(apps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < apps.size(); i = next++) results[i] = scan_app(apps[i]);
  };
  const std::size_t n = std::min(config_.jobs, std::max<std::size_t>(apps.size(), 1));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  // Barrier: the entropy filter needs every app's candidates at once.
  ScanReport report;
  report.apps_scanned = apps.size();
  std::vector<StringOccurrence> all;
  std::vector<SecretFinding> findings;
  for (auto& r : results) {
    if (r.error) {
      report.errors.push_back(*r.error);
      continue;
    }
    for (auto& o : r.occurrences) all.push_back(std::move(o));
    for (auto& f : r.findings) findings.push_back(std::move(f));
    for (auto& d : r.diagnostics) report.diagnostics.push_back(std::move(d));
  }
  if (config_.detectors.contains(Detector::kThreeLayer)) {
    for (auto& f : run_three_layer(all, rules_, *dictionary_, config_.three_layer)) {
      findings.push_back(std::move(f));
    }
  }
  report.findings = merge_findings(std::move(findings));
  return report;
}

ScanReport Engine::scan(const std::string& corpus_dir) const {
  const auto apps = load_corpus_dir(corpus_dir);
  return scan(apps);
}

std::map<std::string, std::map<std::string, std::size_t>> ScanReport::per_provider() const {
  std::map<std::string, std::map<std::string, std::set<std::string>>> values;
  for (const auto& f : findings) {
    auto& by_det = values[f.provider];
    for (auto d : f.detectors) by_det[std::string(to_string(d))].insert(f.value);
    by_det["combined"].insert(f.value);
  }
  std::map<std::string, std::map<std::string, std::size_t>> out;
  for (const auto& [provider, by_det] : values) {
    auto& row = out[provider];
    for (auto d : kAllDetectors) row[std::string(to_string(d))] = 0;
    for (const auto& [det, vals] : by_det) row[det] = vals.size();
  }
  return out;
}

std::map<std::string, std::size_t> ScanReport::overlap() const {
  std::map<std::pair<std::string, std::string>, std::set<Detector>> unique;
  for (const auto& f : findings) {
    auto& ds = unique[{f.value, f.provider}];
    ds.insert(f.detectors.begin(), f.detectors.end());
  }
  std::map<std::string, std::size_t> out;
  for (const auto& [_, ds] : unique) ++out[overlap_key(ds)];
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string mask_value(std::string_view value) {
  return std::string(value.substr(0, 4)) + "…(" + std::to_string(value.size()) + ")";
}

namespace {

std::string mask_quoted(const std::string& text) {
  static const std::regex quoted(R"re("((?:[^"\\]|\\.)*)")re");
  std::string out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), quoted);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    out += text.substr(last, static_cast<std::size_t>(it->position()) - last);
    out += "\"" + mask_value((*it)[1].str()) + "\"";
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  return out + text.substr(last);
}

json finding_to_json(const SecretFinding& f, bool mask) {
  json dets = json::array();
  for (auto d : f.detectors) dets.push_back(to_string(d));
  json locs = json::array();
  for (const auto& l : f.locations) {
    locs.push_back({{"class", l.class_name},
                    {"method", l.method_name},
                    {"index", l.statement_index ? json(*l.statement_index) : json(nullptr)}});
  }
  json conf = json::object();
  for (const auto& [d, c] : f.confidence) conf[std::string(to_string(d))] = c;
  json trace = json::array();
  for (const auto& t : f.trace) {
    trace.push_back({{"method", t.method},
                     {"index", t.index},
                     {"transfer", mask ? mask_quoted(t.transfer) : t.transfer}});
  }
  json verdict = nullptr;
  if (f.verdict) {
    verdict = {{"rule", f.verdict->matched_rule},
               {"passed", f.verdict->passed},
               {"entropy_bits", f.verdict->entropy_bits},
               {"accepted", f.verdict->accepted}};
  }
  return {{"app_id", f.app_id},
          {"value", mask ? mask_value(f.value) : f.value},
          {"provider", f.provider},
          {"detectors", dets},
          {"locations", locs},
          {"confidence", conf},
          {"multiplicity", f.multiplicity},
          {"trace", trace},
          {"verdict", verdict}};
}

SecretFinding finding_from_json(const json& j) {
  SecretFinding f;
  f.app_id = j.at("app_id").get<std::string>();
  f.value = j.at("value").get<std::string>();
  f.provider = j.at("provider").get<std::string>();
  for (const auto& d : j.at("detectors")) f.detectors.insert(parse_detector(d.get<std::string>()));
  for (const auto& l : j.at("locations")) {
    FindingLocation loc{l.at("class").get<std::string>(), l.at("method").get<std::string>(), std::nullopt};
    if (!l.at("index").is_null()) loc.statement_index = l.at("index").get<std::size_t>();
    f.locations.push_back(std::move(loc));
  }
  for (const auto& [d, c] : j.at("confidence").items()) f.confidence[parse_detector(d)] = c.get<double>();
  f.multiplicity = j.at("multiplicity").get<std::size_t>();
  for (const auto& t : j.at("trace")) {
    f.trace.push_back(TraceStep{t.at("method").get<std::string>(), t.at("index").get<std::size_t>(),
                                t.at("transfer").get<std::string>()});
  }
  if (!j.at("verdict").is_null()) {
    const auto& v = j.at("verdict");
    f.verdict = FilterVerdict{v.at("rule").get<std::string>(),
                              v.at("passed").get<std::map<std::string, bool>>(),
                              v.at("entropy_bits").get<double>(), v.at("accepted").get<bool>()};
  }
  return f;
}

std::string to_json(const ScanReport& report, bool mask) {
  json findings = json::array();
  for (const auto& f : report.findings) findings.push_back(finding_to_json(f, mask));
  json diags = json::array();
  for (const auto& d : report.diagnostics) {
    diags.push_back({{"app_id", d.app_id},
                     {"callsite", d.callsite},
                     {"provider", d.provider},
                     {"arg_index", d.arg_index},
                     {"status", d.status},
                     {"reason", d.reason},
                     {"partial", mask && !d.partial.empty() ? mask_value(d.partial) : d.partial}});
  }
  json errors = json::array();
  for (const auto& e : report.errors) errors.push_back({{"app_id", e.app_id}, {"message", e.message}});
  json j{{"schema_version", ScanReport::kSchemaVersion},
         {"masked", mask},
         {"apps_scanned", report.apps_scanned},
         {"findings", findings},
         {"per_provider", report.per_provider()},
         {"overlap", report.overlap()},
         {"diagnostics", diags},
         {"errors", errors}};
  return j.dump(2) + "\n";
}

std::string to_csv(const ScanReport& report, bool mask) {
  std::string out = "app_id,provider,value,detectors,class,method,index,multiplicity\n";
  for (const auto& f : report.findings) {
    std::string dets;
    for (auto d : f.detectors) {
      if (!dets.empty()) dets += ";";
      dets += to_string(d);
    }
    const FindingLocation loc = f.locations.empty() ? FindingLocation{} : f.locations.front();
    out += csv_escape(f.app_id) + "," + csv_escape(f.provider) + "," +
           csv_escape(mask ? mask_value(f.value) : f.value) + "," + csv_escape(dets) + "," +
           csv_escape(loc.class_name) + "," + csv_escape(loc.method_name) + "," +
           (loc.statement_index ? std::to_string(*loc.statement_index) : "") + "," +
           std::to_string(f.multiplicity) + "\n";
  }
  return out;
}

std::string to_table(const ScanReport& report, bool mask) {
  std::ostringstream o;
  o << "apps scanned: " << report.apps_scanned << "  findings: " << report.findings.size()
    << "  diagnostics: " << report.diagnostics.size() << "  errors: " << report.errors.size() << "\n\n";
  std::vector<std::string> cols;
  for (auto d : kAllDetectors) cols.emplace_back(to_string(d));
  cols.emplace_back("combined");
  o << std::left << std::setw(24) << "provider";
  for (const auto& c : cols) o << std::right << std::setw(14) << c;
  o << "\n";
  for (const auto& [provider, row] : report.per_provider()) {
    o << std::left << std::setw(24) << provider;
    for (const auto& c : cols) {
      auto it = row.find(c);
      o << std::right << std::setw(14) << (it == row.end() ? 0 : it->second);
    }
    o << "\n";
  }
  o << "\ndetector overlap (unique value, provider)\n";
  const auto overlap = report.overlap();
  std::size_t width = 8;
  for (const auto& [key, _] : overlap) width = std::max(width, key.size() + 2);
  for (const auto& [key, n] : overlap) o << "  " << std::left << std::setw(static_cast<int>(width)) << key << n << "\n";
  if (!report.findings.empty()) o << "\nfindings\n";
  for (const auto& f : report.findings) {
    std::string dets;
    for (auto d : f.detectors) dets += (dets.empty() ? "" : ",") + std::string(to_string(d));
    o << "  " << f.app_id << "  " << f.provider << "  " << (mask ? mask_value(f.value) : f.value) << "  "
      << dets;
    if (!f.locations.empty()) {
      const auto& l = f.locations.front();
      o << "  " << l.class_name << (l.method_name.empty() ? "" : "." + l.method_name);
      if (l.statement_index) o << "#" << *l.statement_index;
    }
    o << "\n";
  }
  for (const auto& e : report.errors) o << "error: " << e.app_id << ": " << e.message << "\n";
  return o.str();
}

}  // namespace

std::string emit_report(const ScanReport& report, OutputFormat format, bool mask) {
  switch (format) {
    case OutputFormat::kJson: return to_json(report, mask);
    case OutputFormat::kCsv: return to_csv(report, mask);
    case OutputFormat::kTable: return to_table(report, mask);
  }
  throw UnknownFormat("unknown output format");
}

ScanReport parse_report_json(std::string_view json_text) {
  try {
    const auto j = json::parse(json_text);
    if (j.at("schema_version").get<int>() != ScanReport::kSchemaVersion) {
      throw std::invalid_argument("unsupported report schema version");
    }
    ScanReport r;
    r.apps_scanned = j.at("apps_scanned").get<std::size_t>();
    for (const auto& f : j.at("findings")) r.findings.push_back(finding_from_json(f));
    for (const auto& d : j.at("diagnostics")) {
      r.diagnostics.push_back(ScanDiagnostic{
          d.at("app_id").get<std::string>(), d.at("callsite").get<std::string>(),
          d.at("provider").get<std::string>(), d.at("arg_index").get<std::size_t>(),
          d.at("status").get<std::string>(), d.at("reason").get<std::string>(),
          d.at("partial").get<std::string>()});
    }
    for (const auto& e : j.at("errors")) {
      r.errors.push_back(AppError{e.at("app_id").get<std::string>(), e.at("message").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

}  // namespace secretsieve
