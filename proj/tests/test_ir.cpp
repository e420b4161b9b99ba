#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "secretsieve/corpus.hpp"
#include "secretsieve/ir.hpp"
#include "secretsieve/ir_text.hpp"

using namespace secretsieve;

namespace {

const char* kMapsActivity = R"(class com.example.MapsActivity
method void onStart() {
    r0 := @this: com.example.MapsActivity
    task.addOnSuccessListener(listener)
    context = r0.getApplicationContext()>()
    r7.ggh(context, "AIza------")
    r0.setupLifecycleListener()
    return
}
)";

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

const char* kAzure = R"(class com.example.Storage
method void connect(java.lang.String) {
    r0 := @this: com.example.Storage
    p0 := @parameter0: java.lang.String
    $r1 = staticinvoke <com.microsoft.azure.storage.CloudStorageAccount: com.microsoft.azure.storage.CloudStorageAccount parse(java.lang.String)>(p0)
    $r2 = virtualinvoke $r1.<com.microsoft.azure.storage.CloudStorageAccount: java.lang.String toString()>()
    return
}
)";

IrApp one(const char* text, const std::string& path = "a.jir") {
  return parse_app("app", {IrSourceFile{path, text}});
}

IrMethod method_of_size(std::size_t n) {
  IrMethod m;
  m.owner = "x.Y";
  m.name = "f";
  m.return_type = "void";
  for (std::size_t i = 0; i < n; ++i) m.body.push_back(parse_statement("$r" + std::to_string(i) + " = " + std::to_string(i), i));
  return m;
}

}  // namespace

TEST(ParseApp, ShortFormCallKeepsLiteral) {
  const IrApp app = one(kMapsActivity);
  const IrMethod& m = app.classes().at(0).methods.at(0);
  const IrStatement& s = m.body.at(3);
  ASSERT_EQ(s.kind, StmtKind::kInvoke);
  const Call* c = s.call();
  ASSERT_NE(c, nullptr);
  EXPECT_TRUE(c->callee.short_form);
  EXPECT_EQ(c->callee.name, "ggh");
  ASSERT_EQ(c->args.size(), 2u);
  EXPECT_EQ(std::get<StringConst>(c->args[1].node).value, "AIza------");
}

TEST(ParseApp, DamagedStatementDegradesToUnknown) {
  const IrApp app = one(kMapsActivity);
  const IrStatement& s = app.classes()[0].methods[0].body.at(2);
  EXPECT_TRUE(s.is_unknown());
  EXPECT_EQ(s.kind, StmtKind::kAssign);
  EXPECT_EQ(s.rhs.as<Unknown>()->raw, "context = r0.getApplicationContext()>()");
  EXPECT_EQ(app.classes()[0].methods[0].body.size(), 6u);
}

TEST(ParseApp, EmptyFileHasNoClasses) {
  EXPECT_TRUE(one("").classes().empty());
  EXPECT_TRUE(one("\n\n// nothing here\n").classes().empty());
}

TEST(ParseApp, ArrayAssemblySnippet) {
  const IrApp app = one(kArrayField);
  const auto& body = app.classes()[0].methods[0].body;
  ASSERT_EQ(body.size(), 5u);
  EXPECT_TRUE(body[0].rhs.is<NewArray>());
  EXPECT_EQ(body[0].rhs.as<NewArray>()->elem_type, "java.lang.String");
  for (std::size_t i = 1; i <= 3; ++i) EXPECT_EQ(body[i].kind, StmtKind::kArrayStore);
  EXPECT_EQ(body[4].kind, StmtKind::kFieldStore);
  EXPECT_EQ(body[4].lhs->as<FieldRef>()->name, "c");
  EXPECT_EQ(body[2].rhs.as<StringConst>()->value, "67");
}

TEST(ParseApp, MalformedHeaderReportsPathAndLine) {
  try {
    one("class a.B\nmethod void broken( {\n}\n", "broken.jir");
    FAIL() << "expected FileSyntaxError";
  } catch (const FileSyntaxError& e) {
    EXPECT_EQ(e.path(), "broken.jir");
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(one("class a.B\nmethod void f() {\n    return\n"), FileSyntaxError);
  EXPECT_THROW(one("staticfield int x\n"), FileSyntaxError);
  EXPECT_THROW(parse_app("a", {{"x.jir", "class a.B\n"}, {"y.jir", "class a.B\n"}}), FileSyntaxError);
}

TEST(ParseApp, StringConstantsKeptRaw) {
  const IrApp app = one(R"(class a.B
staticfield java.lang.String K = "  Mixed Case \"q\" \\ é "
method void f() {
    $r1 = ""
    $r2 = "  AIza  "
}
)");
  EXPECT_EQ(*app.classes()[0].static_fields[0].initializer, "  Mixed Case \"q\" \\ \xc3\xa9 ");
  EXPECT_EQ(app.classes()[0].methods[0].body[0].rhs.as<StringConst>()->value, "");
  EXPECT_EQ(app.classes()[0].methods[0].body[1].rhs.as<StringConst>()->value, "  AIza  ");
}

TEST(ParseApp, IdentityAndBinopForms) {
  const IrApp app = one(R"(class a.B
method static int g(int) {
    i0 := @parameter0: int
    i1 = i0 * 31
    i2 = i1 >>> 2
    return i2
}
)");
  const auto& body = app.classes()[0].methods[0].body;
  EXPECT_TRUE(body[0].identity);
  EXPECT_EQ(body[0].rhs.as<ParamRef>()->index, 0u);
  EXPECT_EQ(body[1].rhs.as<BinOp>()->op, "*");
  EXPECT_EQ(body[2].rhs.as<BinOp>()->op, ">>>");
  EXPECT_EQ(body[3].kind, StmtKind::kReturn);
  EXPECT_TRUE(app.classes()[0].methods[0].is_static);
}

TEST(FindCallsites, MatchesOwnerAndName) {
  const IrApp app = one(kAzure);
  auto parse_sites = find_callsites(app, [](const MethodSig& s) {
    return s.owner == "com.microsoft.azure.storage.CloudStorageAccount" && s.name == "parse";
  });
  ASSERT_EQ(parse_sites.size(), 1u);
  EXPECT_EQ(parse_sites[0].index, 2u);
  EXPECT_TRUE(find_callsites(app, [](const MethodSig&) { return false; }).empty());
  EXPECT_TRUE(find_callsites(one(kArrayField), [](const MethodSig& s) { return s.name == "append"; }).empty());
}

TEST(FindCallsites, IndependentOfFileOrder) {
  const std::vector<IrSourceFile> files{{"a.jir", kAzure}, {"b.jir", kMapsActivity}, {"c.jir", kArrayField}};
  std::vector<IrSourceFile> reversed(files.rbegin(), files.rend());
  auto any = [](const MethodSig&) { return true; };
  const IrApp a = parse_app("x", files);
  const IrApp b = parse_app("x", reversed);
  EXPECT_EQ(a, b);
  EXPECT_EQ(find_callsites(a, any), find_callsites(b, any));
  EXPECT_EQ(find_callsites(a, any), find_callsites(a, any));
}

TEST(MethodWindow, ClipsToBody) {
  EXPECT_EQ(method_window(method_of_size(13), 6, 6).size(), 13u);
  const auto small = method_window(method_of_size(4), 0, 6);
  ASSERT_EQ(small.size(), 4u);
  EXPECT_EQ(small.front().index, 0u);
  EXPECT_EQ(small.back().index, 3u);
  const auto single = method_window(method_of_size(9), 5, 0);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].index, 5u);
  EXPECT_EQ(method_window(method_of_size(20), 10, 3).front().index, 7u);
  EXPECT_THROW(method_window(method_of_size(4), 4, 1), IndexOutOfRange);
  EXPECT_THROW(method_window(method_of_size(0), 0, 1), IndexOutOfRange);
}

TEST(IrApp, ResolveAndExternal) {
  const IrApp app = parse_app("x", {{"a.jir", kAzure}, {"b.jir", kArrayField}});
  MethodSig clinit{"jp.b", "void", "<clinit>", {}, false};
  EXPECT_TRUE(app.resolve(clinit).has_value());
  MethodSig parse{"com.microsoft.azure.storage.CloudStorageAccount",
                  "com.microsoft.azure.storage.CloudStorageAccount", "parse", {"java.lang.String"}, false};
  EXPECT_TRUE(app.is_external(parse));
  EXPECT_NE(app.find_class("jp.b"), nullptr);
  EXPECT_EQ(app.find_class("jp.c"), nullptr);
  EXPECT_EQ(app.source_manifest().at("b.jir"), std::vector<std::string>{"jp.b"});
}

TEST(RoundTrip, HandWrittenFiles) {
  for (const char* text : {kMapsActivity, kArrayField, kAzure}) {
    const IrApp a = one(text);
    const IrApp b = parse_app("app", print_app(a));
    EXPECT_EQ(a, b);
  }
}

TEST(RoundTrip, RandomStringConstants) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    std::string s;
    const std::size_t n = rng() % 24;
    for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>(1 + rng() % 126));
    IrClassUnit unit{"r.T", {StaticField{"F", "java.lang.String", s}}, {}};
    IrMethod m;
    m.owner = "r.T";
    m.name = "f";
    m.return_type = "void";
    m.body.push_back(IrStatement{0, StmtKind::kAssign, IrExpr{LocalRef{"$r1"}}, IrExpr{StringConst{s}}, false});
    m.locals = {"$r1"};
    unit.methods.push_back(m);
    const IrApp a("x", {unit}, {{"r.T.jir", {"r.T"}}});
    const IrApp b = parse_app("x", print_app(a));
    ASSERT_EQ(a, b) << "constant " << quote_string(s);
  }
}

TEST(RoundTrip, GeneratedCorpusParsesTotallyAndReprints) {
  CorpusSpec spec;
  spec.n_apps = 12;
  spec.seed = 99;
  spec.noise = NoiseProfile::named("rich");
  for (const auto& p : seedable_providers()) {
    for (auto pl : kAllPlacements) spec.seeds.push_back(SeedSpec{p, pl, "", 1, static_cast<std::size_t>(pl) % 3});
  }
  const Corpus corpus = gen_corpus(spec);
  for (const auto& gen : corpus.apps) {
    const IrApp app = to_ir(gen);
    std::size_t unknown = 0;
    app.for_each_method([&](MethodRef, const IrMethod& m) {
      for (std::size_t i = 0; i < m.body.size(); ++i) {
        EXPECT_EQ(m.body[i].index, i);
        if (m.body[i].is_unknown()) ++unknown;
      }
    });
    EXPECT_EQ(unknown, 0u) << gen.app_id;
    EXPECT_EQ(app, parse_app(gen.app_id, print_app(app)));
  }
}

TEST(IrMethod, LocalsCoverEveryReference) {
  const IrApp app = one(kAzure);
  const IrMethod& m = app.classes()[0].methods[0];
  for (const char* l : {"r0", "p0", "$r1", "$r2"}) EXPECT_TRUE(m.locals.contains(l)) << l;
}
