#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "secretsieve/corpus.hpp"
#include "secretsieve/engine.hpp"

using namespace secretsieve;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kUnreadable = 2;

std::set<Detector> parse_detector_list(const std::string& list) {
  std::set<Detector> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.insert(parse_detector(item));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

ScanConfig with_env_config(ScanConfig c) {
  if (const char* path = std::getenv("SECRETSIEVE_CONFIG"); path && *path) {
    c = apply_config_json(std::move(c), read_file(path));
  }
  return c;
}

json score_to_json(const DetectorScore& s) {
  return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json metrics_to_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"accuracy", m.accuracy}, {"f1", m.f1},
          {"tp", m.tp}, {"fp", m.fp}, {"tn", m.tn}, {"fn", m.fn}};
}

struct ScanFlags {
  std::string rules, sigs, dict, detectors, format = "json", out, dump_strings;
  std::string intrinsic_model, context_model, group_model;
  bool unmask = false, ack_unmasked = false;
  std::size_t jobs = 1;
  std::size_t max_depth = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--rules", rules, "Detection rules JSON");
    cmd->add_option("--sigs", sigs, "API signature catalog JSON");
    cmd->add_option("--dict", dict, "Dictionary word list");
    cmd->add_option("--detectors", detectors, "Comma-separated detector names");
    cmd->add_option("--intrinsic-model", intrinsic_model, "Intrinsic (char n-gram) model JSON");
    cmd->add_option("--context-model", context_model, "Context model JSON");
    cmd->add_option("--group-model", group_model, "String-group model JSON");
    cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--max-depth", max_depth, "Slicer call depth budget");
  }

  ScanConfig config() const {
    ScanConfig c = ScanConfig::defaults();
    if (!rules.empty()) c.rules_path = rules;
    if (!sigs.empty()) c.signatures_path = sigs;
    if (!dict.empty()) c.dictionary_path = dict;
    if (!detectors.empty()) c.detectors = parse_detector_list(detectors);
    c.intrinsic_model_path = intrinsic_model;
    c.context_model_path = context_model;
    c.string_group_model_path = group_model;
    c.jobs = jobs;
    if (max_depth > 0) c.budget.max_depth = max_depth;
    c.format = parse_output_format(format);
    c.mask = !unmask;
    return with_env_config(std::move(c));
  }
};

int run_scan(const std::string& corpus, const ScanFlags& flags) {
  ScanConfig cfg = flags.config();
  if (!cfg.mask && !flags.ack_unmasked) {
    throw ConfigError("--unmask prints live secrets; confirm with --ack-unmasked");
  }
  const auto apps = load_corpus_dir(corpus);
  Engine engine(cfg);
  const auto report = engine.scan(apps);
  write_output(flags.out, emit_report(report, cfg.format, cfg.mask));
  if (!flags.dump_strings.empty()) {
    std::vector<StringOccurrence> all;
    for (const auto& a : apps) {
      try {
        for (auto& o : extract_occurrences(parse_app(a.app_id, a.files))) all.push_back(std::move(o));
      } catch (const FileSyntaxError&) {
        // already listed in report.errors
      }
    }
    write_output(flags.dump_strings, occurrences_to_csv(all));
  }
  for (const auto& e : report.errors) std::cerr << "warning: " << e.app_id << ": " << e.message << "\n";
  return kOk;
}

int run_eval(const std::string& corpus, const std::string& manifest_path, const ScanFlags& flags) {
  ScanConfig cfg = flags.config();
  const auto apps = load_corpus_dir(corpus);
  const auto manifest = load_manifest(manifest_path);
  Engine engine(cfg);
  const auto report = engine.scan(apps);
  const auto scores = score(report.findings, manifest);
  if (cfg.format == OutputFormat::kTable) {
    std::ostringstream o;
    o << std::left << std::setw(16) << "detector" << std::right << std::setw(6) << "tp" << std::setw(6)
      << "fp" << std::setw(6) << "fn" << std::setw(11) << "precision" << std::setw(9) << "recall"
      << std::setw(8) << "f1" << "\n";
    for (const auto& [name, s] : scores.per_detector) {
      o << std::left << std::setw(16) << name << std::right << std::setw(6) << s.tp << std::setw(6) << s.fp
        << std::setw(6) << s.fn << std::fixed << std::setprecision(3) << std::setw(11) << s.precision
        << std::setw(9) << s.recall << std::setw(8) << s.f1 << "\n";
    }
    o << "\noverlap\n";
    std::size_t width = 8;
    for (const auto& [set, _] : scores.overlap) width = std::max(width, overlap_key(set).size() + 2);
    for (const auto& [set, n] : scores.overlap)
      o << "  " << std::left << std::setw(static_cast<int>(width)) << overlap_key(set) << n << "\n";
    write_output(flags.out, o.str());
    return kOk;
  }
  json j{{"per_detector", json::object()}, {"per_provider", json::object()}, {"overlap", json::object()}};
  for (const auto& [name, s] : scores.per_detector) j["per_detector"][name] = score_to_json(s);
  for (const auto& [name, by_p] : scores.per_provider) {
    for (const auto& [p, s] : by_p) j["per_provider"][name][p] = score_to_json(s);
  }
  for (const auto& [set, n] : scores.overlap) j["overlap"][overlap_key(set)] = n;
  write_output(flags.out, j.dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checked-in secret detection over textual Android IR"};
  app.require_subcommand(1);

  ScanFlags scan_flags;
  std::string scan_corpus;
  auto* scan = app.add_subcommand("scan", "Run detectors over a corpus directory");
  scan->add_option("corpus", scan_corpus, "Corpus directory")->required();
  scan_flags.add(scan);
  auto* mask = scan->add_flag("--mask", "Mask secret values (default)");
  scan->add_flag("--unmask", scan_flags.unmask, "Print full secret values")->excludes(mask);
  scan->add_flag("--ack-unmasked", scan_flags.ack_unmasked, "Acknowledge printing unmasked secrets");
  scan->add_option("--format", scan_flags.format, "json, csv or table");
  scan->add_option("--out", scan_flags.out, "Output file (default stdout)");
  scan->add_option("--dump-strings", scan_flags.dump_strings,
                   "Write every extracted string literal (unmasked) as CSV to this file");

  ScanFlags eval_flags;
  eval_flags.format = "json";
  std::string eval_corpus, eval_manifest;
  auto* eval = app.add_subcommand("eval", "Score detectors against a ground-truth manifest");
  eval->add_option("corpus", eval_corpus, "Corpus directory")->required();
  eval->add_option("manifest", eval_manifest, "manifest.jsonl")->required();
  eval_flags.add(eval);
  eval->add_option("--format", eval_flags.format, "json or table");
  eval->add_option("--out", eval_flags.out, "Output file (default stdout)");

  std::string train_data, train_kind = "linear_svc", train_scheme = "count_frequency",
                          train_variant = "case_sensitive", train_out, train_dict;
  std::uint64_t train_seed = 0;
  double train_fraction = 0.8;
  bool train_all = false;
  auto* train = app.add_subcommand("train", "Fit a string-group classifier");
  train->add_option("dataset", train_data, "Labeled groups (JSON lines)")->required();
  train->add_option("--model-kind", train_kind, "logistic_regression, naive_bayes or linear_svc");
  train->add_option("--scheme", train_scheme, "char_ngram, tfidf or count_frequency");
  train->add_option("--variant", train_variant, "case_sensitive, case_insensitive or english_word_extraction");
  train->add_option("--seed", train_seed, "Split and training seed");
  train->add_option("--train-fraction", train_fraction, "Training share of the split")->check(CLI::Range(0.05, 0.95));
  train->add_flag("--all", train_all, "Fit on every entry after reporting held-out metrics");
  train->add_option("--dict", train_dict, "Dictionary for english_word_extraction");
  train->add_option("--out", train_out, "Model output path")->required();

  std::string gen_spec, gen_out;
  std::optional<std::uint64_t> gen_seed;
  bool gen_no_dict = false;
  auto* gen = app.add_subcommand("gen-corpus", "Generate a seeded synthetic corpus");
  gen->add_option("spec", gen_spec, "Corpus spec JSON")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", gen_seed, "Override the spec seed");
  gen->add_flag("--no-dict", gen_no_dict, "Skip dictionary-word rejection of generated keys");

  std::string study_secret, study_nosecret, study_variant = "case_sensitive", study_dict;
  std::size_t study_max_pairs = 0;
  std::uint64_t study_seed = 0;
  auto* study = app.add_subcommand("study", "Secret vs non-secret string-group separability");
  study->add_option("secret", study_secret, "Secret groups (JSON lines)")->required();
  study->add_option("nosecret", study_nosecret, "Non-secret groups (JSON lines)")->required();
  study->add_option("--variant", study_variant, "Preprocessing variant");
  study->add_option("--dict", study_dict, "Dictionary for english_word_extraction");
  study->add_option("--max-pairs", study_max_pairs, "Cap on sampled pairs per population (0 = all)");
  study->add_option("--seed", study_seed, "Pair sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*scan) return run_scan(scan_corpus, scan_flags);
    if (*eval) return run_eval(eval_corpus, eval_manifest, eval_flags);
    if (*train) {
      const Variant variant = parse_variant(train_variant);
      std::shared_ptr<const Dictionary> dict;
      if (variant == Variant::kEnglishWords) {
        dict = shared_dictionary(train_dict.empty() ? ScanConfig::defaults().dictionary_path : train_dict);
      }
      LabeledGroupDataset ds{load_dataset_jsonl(train_data), variant};
      FitOptions opts;
      opts.kind = parse_model_kind(train_kind);
      opts.scheme = parse_scheme(train_scheme);
      opts.seed = train_seed;
      opts.train_fraction = train_fraction;
      auto fitted = fit(ds, opts, dict.get());
      const TrainedModel model = train_all ? fit_all(ds, opts, dict.get()) : fitted.model;
      save_model(model, train_out);
      std::cout << json{{"model", train_out}, {"held_out", metrics_to_json(fitted.metrics)}}.dump(2) << "\n";
      return kOk;
    }
    if (*gen) {
      CorpusSpec spec = load_corpus_spec(gen_spec);
      if (gen_seed) spec.seed = *gen_seed;
      std::shared_ptr<const Dictionary> dict;
      if (!gen_no_dict) dict = shared_dictionary(ScanConfig::defaults().dictionary_path);
      const Corpus corpus = gen_corpus(spec, dict.get());
      write_corpus(corpus, gen_out);
      const auto groups = labeled_groups(corpus, 2);
      std::vector<LabeledGroup> secret, nosecret;
      for (const auto& g : groups) (g.secret ? secret : nosecret).push_back(g);
      const std::size_t n = std::min(secret.size(), nosecret.size());
      secret.resize(n);
      nosecret.resize(n);
      const std::filesystem::path out(gen_out);
      write_output((out / "groups.jsonl").string(), dataset_to_jsonl(groups));
      write_output((out / "secret.jsonl").string(), dataset_to_jsonl(secret));
      write_output((out / "nosecret.jsonl").string(), dataset_to_jsonl(nosecret));
      std::cout << json{{"apps", corpus.apps.size()},
                        {"seeded", corpus.manifest.entries.size()},
                        {"groups", groups.size()},
                        {"balanced_per_class", n}}.dump(2)
                << "\n";
      return kOk;
    }
    if (*study) {
      const Variant variant = parse_variant(study_variant);
      std::shared_ptr<const Dictionary> dict;
      if (variant == Variant::kEnglishWords) {
        dict = shared_dictionary(study_dict.empty() ? ScanConfig::defaults().dictionary_path : study_dict);
      }
      auto strings_of = [](const std::vector<LabeledGroup>& gs) {
        std::vector<std::vector<std::string>> out;
        for (const auto& g : gs) out.push_back(g.strings);
        return out;
      };
      const auto s = strings_of(load_dataset_jsonl(study_secret));
      const auto n = strings_of(load_dataset_jsonl(study_nosecret));
      const auto r = separability_study(s, n, variant, dict.get(), study_max_pairs, study_seed);
      std::cout << json{{"variant", study_variant},
                        {"mean_ss", r.mean_ss}, {"mean_sn", r.mean_sn},
                        {"var_ss", r.var_ss}, {"var_sn", r.var_sn},
                        {"pairs_ss", r.pairs_ss}, {"pairs_sn", r.pairs_sn},
                        {"skipped_groups", r.skipped_groups},
                        {"f_statistic", r.f_statistic}, {"f_p", r.f_p},
                        {"z_statistic", r.z_statistic}, {"z_p", r.z_p},
                        {"warnings", r.warnings}}.dump(2)
                << "\n";
      return kOk;
    }
  } catch (const CorpusUnreadable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnreadable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
