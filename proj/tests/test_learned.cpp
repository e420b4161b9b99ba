#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "secretsieve/corpus.hpp"
#include "secretsieve/engine.hpp"
#include "secretsieve/ir_text.hpp"
#include "secretsieve/learned.hpp"

using namespace secretsieve;

namespace {

const std::vector<std::string> kTokenGroup{"grant_type", "refresh_token", "client_id", "client_secret",
                                           "refresh_token"};

const Dictionary& dictionary() { return *shared_dictionary(default_data_dir() + "/dictionary.txt"); }

FeatureVector histogram(std::map<char, double> counts, Variant v = Variant::kCaseSensitive) {
  FeatureVector f;
  f.variant = v;
  f.values.resize(256);
  for (auto [c, n] : counts) f.values.coeffRef(static_cast<unsigned char>(c)) = n;
  return f;
}

FeatureVector random_vector(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 5);
  std::map<char, double> m;
  for (char c = 'a'; c <= 'h'; ++c) m[c] = count(rng);
  m['z'] = 1 + count(rng);
  return histogram(m);
}

// Secret groups carry long random alphanumerics; the others carry prose.
LabeledGroupDataset separable(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabeledGroupDataset d;
  const std::vector<std::string> prose{"title", "welcome back", "settings", "share", "open_menu",
                                       "cancel", "user_name", "retry later"};
  for (std::size_t i = 0; i < per_class; ++i) {
    d.entries.push_back({"s" + std::to_string(i),
                         {"api_key", generate_key("alnum:30-40", rng()), "sdk_config"},
                         true});
    d.entries.push_back({"n" + std::to_string(i), {prose[rng() % 8], prose[rng() % 8], prose[rng() % 8]}, false});
  }
  return d;
}

}  // namespace

TEST(CharVector, Counts) {
  const std::vector<std::string> a{"aa", "b"};
  const auto v = char_vector(a, Variant::kCaseSensitive);
  EXPECT_EQ(v['a'], 2.0);
  EXPECT_EQ(v['b'], 1.0);
  EXPECT_EQ(v.values.nonZeros(), 2);
  const std::vector<std::string> b{"Ab"};
  const auto w = char_vector(b, Variant::kCaseInsensitive);
  EXPECT_EQ(w['a'], 1.0);
  EXPECT_EQ(w['b'], 1.0);
  EXPECT_EQ(w['A'], 0.0);
  EXPECT_THROW(char_vector(std::vector<std::string>{}, Variant::kCaseSensitive), EmptyGroup);
}

TEST(CharVector, TokenGroupIsLowercaseAndUnderscore) {
  const auto v = char_vector(kTokenGroup, Variant::kCaseSensitive);
  double lower = 0, total = 0;
  for (int c = 0; c < 256; ++c) {
    total += v[c];
    if ((c >= 'a' && c <= 'z') || c == '_') lower += v[c];
  }
  EXPECT_EQ(lower, total);
  EXPECT_EQ(v['_'], 5.0);
}

TEST(CharVector, CaseInsensitiveEqualsLowercased) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::string s(1 + rng() % 30, ' ');
    for (char& c : s) c = static_cast<char>('0' + rng() % 75);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::vector<std::string> a{s}, b{lower};
    EXPECT_TRUE(char_vector(a, Variant::kCaseInsensitive).values.isApprox(
        char_vector(b, Variant::kCaseSensitive).values));
  }
}

TEST(EnglishWords, SplitsAndFilters) {
  const Dictionary d(std::vector<std::string>{"user", "name", "token"});
  EXPECT_EQ(english_words("userName_tokenXq9", d), (std::vector<std::string>{"user", "name", "token"}));
  EXPECT_TRUE(english_words("Xq9Zk", d).empty());
}

TEST(Cosine, HandValues) {
  const auto x = histogram({{'a', 1}, {'b', 1}});
  EXPECT_NEAR(cosine_similarity(x, x), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(histogram({{'a', 1}}), histogram({{'b', 3}})), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(x, histogram({{'a', 1}})), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_THROW(cosine_similarity(x, histogram({})), ZeroVector);
  EXPECT_THROW(cosine_similarity(x, histogram({{'a', 1}}, Variant::kCaseInsensitive)), SchemeMismatch);
}

TEST(Cosine, RandomPairProperties) {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_vector(rng), y = random_vector(rng);
    const double c = cosine_similarity(x, y);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    EXPECT_NEAR(c, cosine_similarity(y, x), 1e-12);
    FeatureVector sx = x;
    sx.values *= scale(rng);
    EXPECT_NEAR(cosine_similarity(sx, y), c, 1e-12);
    EXPECT_NEAR(cosine_similarity(sx, x), 1.0, 1e-12);
  }
}

TEST(TermWeights, Identities) {
  EXPECT_EQ(tf("refresh_token", kTokenGroup), 2.0);
  const std::vector<std::vector<std::string>> every(4, {"x", "y"});
  EXPECT_EQ(idf("x", every), 0.0);
  std::vector<std::vector<std::string>> ten(10, {"common"});
  ten[3].push_back("rare");
  EXPECT_NEAR(idf("rare", ten), 1.0, 1e-12);
}

TEST(TermWeights, TfIdfNonNegativeAndUbiquitousTermsVanish) {
  std::mt19937_64 rng(12);
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 30; ++i) docs.push_back({"shared_term", "w" + std::to_string(rng() % 7), "v" + std::to_string(rng() % 5)});
  Vectorizer v(Scheme::kTfIdf, Variant::kCaseSensitive);
  v.fit(docs, nullptr);
  const auto shared = v.vocabulary().at("shared_term");
  for (const auto& d : docs) {
    const auto f = v.transform(d, nullptr);
    EXPECT_EQ(f[static_cast<Eigen::Index>(shared)], 0.0);
    for (SparseVec::InnerIterator it(f.values); it; ++it) EXPECT_GE(it.value(), 0.0);
  }
  const std::vector<std::string> unseen{"never_seen_before"};
  EXPECT_EQ(v.transform(unseen, nullptr).values.nonZeros(), 0);
}

TEST(Tokenize, UnderscoreTermsKept) {
  EXPECT_EQ(tokenize("grant_type=refresh_token&x=1"),
            (std::vector<std::string>{"grant_type", "refresh_token"}));
}

TEST(Fit, SeparableDatasetPerfect) {
  for (auto kind : {ModelKind::kLinearSvc, ModelKind::kLogisticRegression, ModelKind::kNaiveBayes}) {
    FitOptions o;
    o.kind = kind;
    o.scheme = Scheme::kCountFrequency;
    o.seed = 7;
    const auto r = fit(separable(60, 1), o);
    EXPECT_EQ(r.metrics.f1, 1.0) << to_string(kind);
    EXPECT_EQ(r.metrics.tp + r.metrics.fn, 12u);
  }
}

TEST(Fit, DeterministicUnderSeed) {
  FitOptions o;
  o.scheme = Scheme::kTfIdf;
  o.seed = 99;
  const auto a = fit(separable(40, 2), o);
  const auto b = fit(separable(40, 2), o);
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.model.bias, b.model.bias);
  EXPECT_EQ(a.metrics, b.metrics);
  EXPECT_EQ(model_to_json(a.model), model_to_json(b.model));
}

TEST(Fit, DegenerateDataset) {
  LabeledGroupDataset d = separable(20, 3);
  std::erase_if(d.entries, [](const LabeledGroup& g) { return !g.secret; });
  EXPECT_THROW(fit(d, FitOptions{}), DegenerateDataset);
  EXPECT_THROW(fit(separable(3, 3), FitOptions{}), DegenerateDataset);
}

TEST(Model, JsonRoundTrip) {
  for (auto scheme : {Scheme::kCountFrequency, Scheme::kTfIdf, Scheme::kCharHistogram, Scheme::kCharNgram}) {
    FitOptions o;
    o.kind = ModelKind::kNaiveBayes;
    o.scheme = scheme;
    const auto m = fit_all(separable(20, 4), o);
    const auto back = model_from_json(model_to_json(m));
    EXPECT_EQ(model_to_json(back), model_to_json(m));
    for (const auto& g : separable(5, 9).entries)
      EXPECT_NEAR(back.predict(g.strings, nullptr).score, m.predict(g.strings, nullptr).score, 1e-12);
  }
  EXPECT_THROW(model_from_json("{\"kind\": 3}"), ModelFormatError);
}

TEST(Dataset, JsonlRoundTrip) {
  const auto d = separable(5, 5);
  const auto back = parse_dataset_jsonl(dataset_to_jsonl(d.entries));
  ASSERT_EQ(back.size(), d.entries.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].strings, d.entries[i].strings);
    EXPECT_EQ(back[i].secret, d.entries[i].secret);
  }
  const auto parsed = parse_dataset_jsonl(R"({"group_id":"g","strings":["a"],"label":1})");
  EXPECT_TRUE(parsed.at(0).secret);
}

TEST(Statistics, TestsAgreeWithClosedForms) {
  double z = 0;
  const double p = z_test_p(1.0, 1.0, 100, 1.0, 1.0, 100, &z);
  EXPECT_EQ(z, 0.0);
  EXPECT_NEAR(p, 1.0, 1e-12);
  // z = 1.96 gives p close to 0.05.
  const double p196 = z_test_p(0.196, 1.0, 200, 0.0, 1.0, 200, &z);
  EXPECT_NEAR(z, 1.96, 1e-9);
  EXPECT_NEAR(p196, 0.04999579, 1e-7);
  double f = 0;
  EXPECT_NEAR(f_test_p(2.0, 50, 2.0, 50, &f), 1.0, 1e-9);
  EXPECT_EQ(f, 1.0);
  EXPECT_GE(z_test_p(10.0, 1e-6, 1000, 0.0, 1e-6, 1000), kMinPValue);
}

TEST(Study, IdenticalCollectionsShowNoEffect) {
  std::vector<std::vector<std::string>> groups;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 30; ++i) groups.push_back({generate_key("alnum:10-20", rng()), "x_y"});
  const auto r = separability_study(groups, groups, Variant::kCaseSensitive);
  EXPECT_DOUBLE_EQ(r.mean_ss, r.mean_sn);
  EXPECT_DOUBLE_EQ(r.var_ss, r.var_sn);
  EXPECT_GT(r.z_p, 0.99);
  EXPECT_GT(r.f_p, 0.99);
}

TEST(DefaultModels, IntrinsicRejectsConstantString) {
  const auto& m = *default_models().intrinsic;
  EXPECT_FALSE(intrinsic_classify("aaaaaaaa", m).positive);
  EXPECT_TRUE(intrinsic_classify(generate_key("google", 123456), m).positive);
  EXPECT_THROW(intrinsic_classify("", m), EmptyString);
}

TEST(DefaultModels, ContextWindows) {
  const auto& m = *default_models().context;
  EXPECT_THROW(context_classify(std::vector<std::string>{}, m), EmptyWindow);

  CorpusSpec spec;
  spec.seed = 0xabcdef;
  spec.seeds.push_back(SeedSpec{"google_api_key", Placement::kLiteralArg, "", 1, 0});
  const IrApp app = to_ir(gen_corpus(spec).apps[0]);
  const auto sites = find_callsites(app, [](const MethodSig& s) { return s.name == "requestIdToken"; });
  ASSERT_FALSE(sites.empty());
  std::vector<std::string> window;
  for (const auto& s : method_window(app.method(sites[0].method), sites[0].index, 6))
    window.push_back(print_statement(s));
  EXPECT_TRUE(context_classify(window, m).positive);

  const std::vector<std::string> arithmetic{"i0 := @parameter0: int", "i1 = i0 * 31", "i2 = i1 + 7",
                                            "i3 = i2 % 1000", "i4 = i3 >> 2", "return i4"};
  EXPECT_FALSE(context_classify(arithmetic, m).positive);
}
