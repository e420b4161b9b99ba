#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "oracle/interpreter.hpp"
#include "secretsieve/corpus.hpp"
#include "secretsieve/engine.hpp"
#include "secretsieve/ir_text.hpp"
#include "secretsieve/strings.hpp"

using namespace secretsieve;
namespace fs = std::filesystem;

namespace {

const std::vector<ApiSignature>& catalog() {
  static const auto s = load_signatures(default_data_dir() + "/signatures.json");
  return s;
}

const std::vector<DetectionRule>& rules() {
  static const auto r = load_rules(default_data_dir() + "/rules.json");
  return r;
}

bool provider_matches(std::string_view provider, const std::string& value) {
  for (const auto& r : rules())
    if (r.provider() == provider && r.matches(value)) return true;
  return false;
}

CorpusSpec all_placements(std::size_t n, std::uint64_t seed, const char* noise = "rich") {
  CorpusSpec spec;
  spec.n_apps = n;
  spec.seed = seed;
  spec.noise = NoiseProfile::named(noise);
  std::size_t depth = 0;
  for (const auto& p : seedable_providers()) {
    for (auto pl : kAllPlacements) {
      spec.seeds.push_back(SeedSpec{p, pl, "", 1, depth});
      depth = (depth + 1) % 3;
    }
  }
  return spec;
}

std::vector<std::vector<std::string>> sorted_groups(const IrApp& app) {
  std::vector<std::vector<std::string>> out;
  for (const auto& g : build_string_groups(app, 1)) out.push_back(g.strings);
  std::sort(out.begin(), out.end());
  return out;
}

SecretFinding finding_for(const ManifestEntry& e, Detector d) {
  SecretFinding f;
  f.app_id = e.app_id;
  f.value = e.value;
  f.provider = e.provider;
  f.detectors = {d};
  return f;
}

}  // namespace

TEST(GenCorpus, MinimalLiteralSeed) {
  CorpusSpec spec;
  spec.seeds.push_back(SeedSpec{"google_api_key", Placement::kLiteralArg, "", 1, 0});
  const Corpus c = gen_corpus(spec);
  ASSERT_EQ(c.apps.size(), 1u);
  ASSERT_EQ(c.manifest.entries.size(), 1u);
  const auto& e = c.manifest.entries[0];
  EXPECT_EQ(e.placement, Placement::kLiteralArg);
  EXPECT_TRUE(provider_matches("google_api_key", e.value));
  const auto r = run_sig_flow(to_ir(c.apps[0]), catalog());
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].value, e.value);
}

TEST(GenCorpus, ByteIdenticalUnderSeed) {
  const Corpus a = gen_corpus(all_placements(4, 10));
  const Corpus b = gen_corpus(all_placements(4, 10));
  ASSERT_EQ(a.apps.size(), b.apps.size());
  for (std::size_t i = 0; i < a.apps.size(); ++i) {
    EXPECT_EQ(a.apps[i].files, b.apps[i].files);
    EXPECT_EQ(a.apps[i].env, b.apps[i].env);
  }
  EXPECT_EQ(manifest_to_jsonl(a.manifest), manifest_to_jsonl(b.manifest));
  EXPECT_NE(manifest_to_jsonl(gen_corpus(all_placements(4, 11)).manifest), manifest_to_jsonl(a.manifest));
}

TEST(GenCorpus, KeysMatchProviderFormats) {
  for (const char* fmt : {"google", "stripe", "aws", "alnum:18-25", "alnum:40-50"}) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const std::string k = generate_key(fmt, s);
      EXPECT_TRUE(pattern_filter(k)) << k;
      bool any = false;
      for (const auto& r : rules()) any = any || r.matches(k);
      EXPECT_TRUE(any) << fmt << " " << k;
    }
  }
  EXPECT_THROW(generate_key("nonsense", 1), InvalidSpec);
}

TEST(GenCorpus, SplitBuilderHasNoFullLiteral) {
  CorpusSpec spec;
  spec.n_apps = 5;
  spec.seed = 31;
  for (const auto& p : seedable_providers()) spec.seeds.push_back(SeedSpec{p, Placement::kSplitBuilder, "", 2, 0});
  const Corpus c = gen_corpus(spec);
  for (const auto& e : c.manifest.entries) {
    for (const auto& gen : c.apps) {
      for (const auto& f : gen.files) EXPECT_EQ(f.text.find(quote_string(e.value)), std::string::npos) << e.value;
    }
  }
}

TEST(GenCorpus, LooseTwitterDistractors) {
  CorpusSpec spec;
  spec.n_apps = 10;
  spec.seed = 5;
  spec.noise = NoiseProfile::named("loose-twitter");
  spec.seeds.push_back(SeedSpec{"google_api_key", Placement::kLiteralArg, "", 1, 0});
  const Corpus c = gen_corpus(spec);
  std::set<std::string> manifest;
  for (const auto& e : c.manifest.entries) manifest.insert(e.value);
  std::size_t shaped = 0;
  for (const auto& gen : c.apps) {
    for (const auto& o : extract_occurrences(to_ir(gen))) {
      if ((provider_matches("twitter_client_id", o.value) || provider_matches("twitter_client_secret", o.value)) && !manifest.contains(o.value)) ++shaped;
    }
  }
  EXPECT_GE(shaped, 10 * spec.noise.distractors);
}

TEST(GenCorpus, ManifestMatchesInterpreter) {
  const Corpus c = gen_corpus(all_placements(6, 2));
  for (const auto& gen : c.apps) {
    const IrApp app = to_ir(gen);
    std::set<CallSite> signed_sites;
    std::map<CallSite, std::set<std::size_t>> secret_args;
    for (const auto& m : match_signatures(app, catalog()))
      for (auto i : catalog()[m.signature].secret_param_indices) secret_args[m.site].insert(i);
    std::set<std::string> observed;
    for (const auto& o : oracle::Interpreter(app, env_files(gen)).run()) {
      auto it = secret_args.find(o.site);
      if (it == secret_args.end()) continue;
      for (auto i : it->second)
        if (i < o.args.size() && o.args[i] && !o.args[i]->empty()) observed.insert(*o.args[i]);
    }
    std::set<std::string> expected;
    for (const auto& e : c.manifest.entries)
      if (e.app_id == gen.app_id && reaches_api(e.placement)) expected.insert(e.value);
    EXPECT_EQ(observed, expected) << gen.app_id;
  }
}

TEST(GenCorpus, SecretMethodsHoldMaterial) {
  const Corpus c = gen_corpus(all_placements(2, 9));
  for (const auto& gen : c.apps) EXPECT_FALSE(gen.secret_methods.empty());
  const auto groups = labeled_groups(c, 2);
  EXPECT_TRUE(std::any_of(groups.begin(), groups.end(), [](const LabeledGroup& g) { return g.secret; }));
  EXPECT_TRUE(std::any_of(groups.begin(), groups.end(), [](const LabeledGroup& g) { return !g.secret; }));
}

TEST(GenCorpus, InvalidSpecs) {
  EXPECT_THROW(parse_corpus_spec("{"), InvalidSpec);
  EXPECT_THROW(parse_corpus_spec(R"({"seeds":[{"provider":"google_api_key","placement":"teleport"}]})"),
               InvalidSpec);
  CorpusSpec deep;
  deep.seeds.push_back(SeedSpec{"google_api_key", Placement::kLiteralArg, "", 1, 3});
  EXPECT_THROW(gen_corpus(deep), InvalidSpec);
  const auto ok = parse_corpus_spec(
      R"({"n_apps":3,"seed":4,"noise":"rich","seeds":[{"provider":"stripe","placement":"split_concat","call_depth":1}]})");
  EXPECT_EQ(ok.n_apps, 3u);
  EXPECT_EQ(ok.seeds.at(0).placement, Placement::kSplitConcat);
}

TEST(Manifest, JsonlRoundTrip) {
  const Corpus c = gen_corpus(all_placements(2, 3));
  EXPECT_EQ(parse_manifest_jsonl(manifest_to_jsonl(c.manifest)), c.manifest);
}

TEST(WriteCorpus, LoadsBack) {
  const fs::path dir = fs::temp_directory_path() / "secretsieve_corpus_test";
  fs::remove_all(dir);
  const Corpus c = gen_corpus(all_placements(3, 8));
  write_corpus(c, dir.string());
  EXPECT_EQ(load_manifest((dir / "manifest.jsonl").string()), c.manifest);
  const auto inputs = load_corpus_dir(dir.string());
  ASSERT_EQ(inputs.size(), 3u);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    EXPECT_EQ(inputs[i].app_id, c.apps[i].app_id);
    EXPECT_EQ(parse_app(inputs[i].app_id, inputs[i].files), to_ir(c.apps[i]));
    EXPECT_EQ(inputs[i].env, env_files(c.apps[i]));
  }
  fs::remove_all(dir);
}

TEST(Obfuscate, RenamesIdentifiersKeepsLiterals) {
  const IrApp app = parse_app("a", {{"a.jir", R"(class com.example.Login
method void configure() {
    r0 := @this: com.example.Login
    $r1 = new com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder
    specialinvoke $r1.<com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder: void <init>()>()
    $r2 = virtualinvoke $r1.<com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder: com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder requestIdToken(java.lang.String)>("")
    virtualinvoke $r2.<com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder: com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder requestEmail()>()
    return
}
)"}});
  const auto [obf, map] = obfuscate(app, 1);
  std::string text;
  for (const auto& f : print_app(obf)) text += f.text;
  EXPECT_EQ(text.find("requestIdToken"), std::string::npos);
  EXPECT_EQ(text.find("com.example.Login"), std::string::npos);
  EXPECT_NE(text.find("(\"\")"), std::string::npos);
  EXPECT_EQ(extract_occurrences(obf).at(0).value, "");
  const MethodSig sig{"com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder",
                      "com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder",
                      "requestIdToken", {"java.lang.String"}, false};
  EXPECT_NE(map.remap(sig).name, "requestIdToken");
}

TEST(Obfuscate, DeterministicParseableAndGroupPreserving) {
  const Corpus c = gen_corpus(all_placements(4, 14));
  for (const auto& gen : c.apps) {
    const IrApp app = to_ir(gen);
    const auto a = obfuscate(app, 77);
    const auto b = obfuscate(app, 77);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(print_app(a.first), print_app(b.first));
    EXPECT_EQ(parse_app(gen.app_id, print_app(a.first)), a.first);
    EXPECT_EQ(sorted_groups(a.first), sorted_groups(app));
  }
}

TEST(Score, PerfectDetector) {
  const Corpus c = gen_corpus(all_placements(2, 1));
  std::vector<SecretFinding> findings;
  for (const auto& e : c.manifest.entries) findings.push_back(finding_for(e, Detector::kSigFlow));
  const auto r = score(findings, c.manifest);
  EXPECT_EQ(r.per_detector.at("sig_flow").precision, 1.0);
  EXPECT_EQ(r.per_detector.at("sig_flow").recall, 1.0);
  EXPECT_EQ(r.per_detector.at("combined").f1, 1.0);
  EXPECT_EQ(r.per_detector.at("three_layer").recall, 0.0);
}

TEST(Score, OverlapCounts) {
  const Corpus c = gen_corpus(all_placements(1, 1));
  std::vector<SecretFinding> findings;
  const auto& e = c.manifest.entries;
  findings.push_back(finding_for(e[0], Detector::kSigFlow));
  findings.push_back(finding_for(e[0], Detector::kThreeLayer));
  findings.push_back(finding_for(e[1], Detector::kThreeLayer));
  SecretFinding wrong = finding_for(e[2], Detector::kThreeLayer);
  wrong.value += "x";
  findings.push_back(wrong);
  const auto r = score(findings, c.manifest);
  EXPECT_EQ((r.overlap.at({Detector::kSigFlow, Detector::kThreeLayer})), 1u);
  EXPECT_EQ(r.overlap.at({Detector::kThreeLayer}), 2u);
  const auto& tl = r.per_detector.at("three_layer");
  EXPECT_EQ(tl.tp, 2u);
  EXPECT_EQ(tl.fp, 1u);
  EXPECT_EQ(tl.fn, e.size() - 2);
  EXPECT_EQ(DetectorScore::from_counts(0, 0, 0).precision, 0.0);
}
