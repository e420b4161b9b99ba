#include <gtest/gtest.h>

#include <algorithm>

#include "secretsieve/corpus.hpp"
#include "secretsieve/ir_text.hpp"
#include "secretsieve/strings.hpp"

using namespace secretsieve;

namespace {

const char* kArrayField = R"(class jp.b
staticfield java.lang.String[] c
method static void <clinit>() {
    $r0 = newarray (java.lang.String)[3]
    $r0[0] = ""
    $r0[1] = "67"
    $r0[2] = ""
    <jp.b: java.lang.String[] c> = $r0
}
)";

const char* kTokenRequest = R"(class com.example.auth.TokenClient
staticfield java.lang.String ENDPOINT = "https://oauth.example.com/token"
method void refresh(java.util.Map) {
    r0 := @this: com.example.auth.TokenClient
    p0 := @parameter0: java.util.Map
    interfaceinvoke p0.<java.util.Map: java.lang.Object put(java.lang.Object,java.lang.Object)>("grant_type", "refresh_token")
    interfaceinvoke p0.<java.util.Map: java.lang.Object put(java.lang.Object,java.lang.Object)>("client_id", r0)
    interfaceinvoke p0.<java.util.Map: java.lang.Object put(java.lang.Object,java.lang.Object)>("client_secret", r0)
    $r1 = "refresh_token"
    return
}
method void single() {
    $r1 = "only"
    return
}
method void none() {
    return
}
)";

IrApp one(const char* text) { return parse_app("app", {IrSourceFile{"a.jir", text}}); }

std::vector<std::string> values(const std::vector<StringOccurrence>& occ) {
  std::vector<std::string> out;
  for (const auto& o : occ) out.push_back(o.value);
  return out;
}

Corpus sample_corpus(std::size_t n, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_apps = n;
  spec.seed = seed;
  spec.noise = NoiseProfile::named("rich");
  for (const auto& p : seedable_providers()) {
    for (auto pl : kAllPlacements) spec.seeds.push_back(SeedSpec{p, pl, "", 1, 1});
  }
  return gen_corpus(spec);
}

}  // namespace

TEST(ExtractOccurrences, ShortFormLiteralFound) {
  const IrApp app = one(R"(class a.M
method void f() {
    r7.ggh(context, "AIza------")
}
)");
  const auto occ = extract_occurrences(app);
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_EQ(occ[0].value, "AIza------");
  EXPECT_EQ(occ[0].method_name, "f");
  EXPECT_EQ(occ[0].statement_index, 0u);
}

TEST(ExtractOccurrences, NoStrings) {
  EXPECT_TRUE(extract_occurrences(one("class a.B\nmethod void f() {\n    i0 = 1 + 2\n}\n")).empty());
  EXPECT_TRUE(extract_occurrences(one("")).empty());
}

TEST(ExtractOccurrences, ArrayAssemblyKeepsDuplicatesInOrder) {
  const auto occ = extract_occurrences(one(kArrayField));
  EXPECT_EQ(values(occ), (std::vector<std::string>{"", "67", ""}));
  EXPECT_EQ(occ[0].statement_index, 1u);
  EXPECT_EQ(occ[2].statement_index, 3u);
}

TEST(ExtractOccurrences, StaticFieldsFirst) {
  const auto occ = extract_occurrences(one(kTokenRequest));
  ASSERT_FALSE(occ.empty());
  EXPECT_EQ(occ[0].origin, StringOrigin::kStaticField);
  EXPECT_EQ(occ[0].value, "https://oauth.example.com/token");
  EXPECT_FALSE(occ[0].method_name.has_value());
  EXPECT_EQ(occ.size(), 7u);
}

TEST(StatementStrings, LeftToRight) {
  const IrStatement s = parse_statement(
      R"(virtualinvoke $r1.<a.B: void f(java.lang.String,java.lang.String)>("x", "y"))", 0);
  EXPECT_EQ(statement_strings(s), (std::vector<std::string>{"x", "y"}));
}

TEST(StringGroups, TokenRequestGroup) {
  const auto groups = build_string_groups(one(kTokenRequest), 2);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].method_name, "refresh");
  EXPECT_EQ(groups[0].strings, (std::vector<std::string>{"grant_type", "refresh_token", "client_id",
                                                         "client_secret", "refresh_token"}));
}

TEST(StringGroups, SizeThresholds) {
  const IrApp app = one(kTokenRequest);
  const auto ones = build_string_groups(app, 1);
  ASSERT_EQ(ones.size(), 2u);
  EXPECT_EQ(ones[1].method_name, "single");
  EXPECT_TRUE(build_string_groups(one("class a.B\nmethod void f() {\n}\n"), 1).empty());
  EXPECT_TRUE(build_string_groups(one(kTokenRequest), 6).empty());
}

TEST(StringGroups, SizesSumToMethodOccurrences) {
  for (const auto& gen : sample_corpus(6, 4).apps) {
    const IrApp app = to_ir(gen);
    std::size_t in_methods = 0;
    for (const auto& o : extract_occurrences(app)) in_methods += o.origin == StringOrigin::kMethodBody;
    std::size_t grouped = 0;
    for (const auto& g : build_string_groups(app, 1)) grouped += g.strings.size();
    EXPECT_EQ(grouped, in_methods) << gen.app_id;
  }
}

TEST(ExtractOccurrences, ObfuscationKeepsMultiset) {
  std::uint64_t seed = 1;
  for (const auto& gen : sample_corpus(8, 21).apps) {
    const IrApp app = to_ir(gen);
    auto before = values(extract_occurrences(app));
    auto after = values(extract_occurrences(obfuscate(app, seed++).first));
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    EXPECT_EQ(before, after) << gen.app_id;
  }
}

TEST(Csv, QuotingFollowsRfc4180) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
  const auto csv = occurrences_to_csv(extract_occurrences(one(kArrayField)));
  EXPECT_EQ(csv,
            "app_id,class,method,index,value\r\n"
            "app,jp.b,<clinit>,1,\r\n"
            "app,jp.b,<clinit>,2,67\r\n"
            "app,jp.b,<clinit>,3,\r\n");
}
