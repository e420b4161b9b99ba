#include "secretsieve/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace secretsieve {

namespace {

constexpr Placement kPlacementOrder[] = {
    Placement::kLiteralArg,    Placement::kSplitBuilder, Placement::kSplitConcat,
    Placement::kStaticField,   Placement::kArrayAssembly, Placement::kEnvFile,
    Placement::kUnusedLiteral};

const char* const kContextTerms[] = {
    "grant_type",    "refresh_token", "client_id",    "client_secret", "access_token",
    "api_key",       "Authorization", "Bearer ",      "oauth_token",   "token_type",
    "redirect_uri",  "response_type", "id_token",     "x-api-key",     "scope",
    "oauth_signature", "consumer_key", "consumer_secret", "auth_token", "secret_key"};

const char* const kOrdinary[] = {
    "Loading...",
    "Please wait",
    "Settings",
    "user_name",
    "Unable to connect to server",
    "%d items selected",
    "https://www.example.com/help",
    "yyyy-MM-dd HH:mm:ss",
    "onResume called",
    "Cancel",
    "Are you sure you want to delete this item?",
    "android.intent.action.VIEW",
    "com.example.preferences",
    "fonts/Roboto-Regular.ttf",
    "image/png",
    "UTF-8",
    "Network error, please try again later",
    "last_sync_time",
    "Welcome back!",
    "notification_channel_default",
    "Share via",
    "text/plain",
    "dark_mode_enabled",
    "Invalid email address",
    "Saved successfully",
    "profile_picture.jpg",
    "Page %1$s of %2$s",
    "content://media/external/images",
    "https://play.google.com/store/apps/details?id=",
    "Swipe to refresh",
    "session_count",
    "No results found",
    "application/json",
    "Terms of Service",
    "Retry",
    "isFirstLaunch",
    "Downloading update",
    "Tap to continue",
    "cache_size_limit",
    "Location permission denied",
};

const char* const kTags[] = {"MainActivity", "SyncService", "Analytics", "NetworkClient",
                             "ImageLoader",  "Database",    "Billing",   "PushReceiver"};

const char* const kVendors[] = {"acme",  "zenith", "orbit",  "lumen", "nimbus", "vertex",
                                "cobalt", "ember", "harbor", "quartz", "tundra", "willow"};

const char* const kFeatures[] = {"Maps",    "Payment", "Social", "Cloud",   "Auth",
                                 "Places",  "Checkout", "Share", "Storage", "Login"};

const char* const kScreens[] = {"Home",  "Profile", "Settings", "Detail", "Search",
                                "Cart",  "Gallery", "Feed",     "Inbox",  "About"};

const std::string kCtx = "android.content.Context";
const std::string kStr = "java.lang.String";
const std::string kSb = "java.lang.StringBuilder";

struct ProviderInfo {
  std::string provider;
  std::string format;
  std::string env_key;
};

const std::vector<ProviderInfo>& provider_table() {
  static const std::vector<ProviderInfo> table{
      {"google_api_key", "google", "google_maps_key"},
      {"stripe", "stripe", "stripe_publishable_key"},
      {"twitter_client_id", "alnum:18-25", "twitter_consumer_key"},
      {"twitter_client_secret", "alnum:40-50", "twitter_consumer_secret"},
  };
  return table;
}

const ProviderInfo& provider_info(std::string_view provider) {
  for (const auto& p : provider_table()) {
    if (p.provider == provider) return p;
  }
  throw InvalidSpec("provider '" + std::string(provider) + "' cannot be seeded");
}

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const T (&items)[N]) {
  return items[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

std::size_t between(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string random_from(std::mt19937_64& rng, std::string_view alphabet, std::size_t n) {
  std::string out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[between(rng, 0, alphabet.size() - 1)]);
  return out;
}

constexpr std::string_view kAlnum =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kGoogleAlphabet =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz-_";

std::string key_in_format(std::string_view format, std::mt19937_64& rng) {
  if (format == "google") return "AIza" + random_from(rng, kGoogleAlphabet, 35);
  if (format == "stripe") return "sk_live_" + random_from(rng, kAlnum, 24);
  if (format == "aws") {
    return "AKIA" + random_from(rng, "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789", 16);
  }
  if (format.starts_with("alnum:")) {
    const auto range = format.substr(6);
    const auto dash = range.find('-');
    try {
      const std::size_t lo = std::stoul(std::string(range.substr(0, dash)));
      const std::size_t hi =
          dash == std::string_view::npos ? lo : std::stoul(std::string(range.substr(dash + 1)));
      if (lo == 0 || hi < lo) throw InvalidSpec("bad length range in '" + std::string(format) + "'");
      return random_from(rng, kAlnum, between(rng, lo, hi));
    } catch (const std::logic_error&) {
      throw InvalidSpec("bad key format '" + std::string(format) + "'");
    }
  }
  throw InvalidSpec("unknown key format '" + std::string(format) + "'");
}

// Collects the statements of one method as IR text and parses each line,
// so the generator can only ever emit statements the grammar accepts.
class MethodBuilder {
 public:
  MethodBuilder(std::string owner, std::string name, std::vector<std::string> params,
                std::string ret, bool is_static)
      : method_{} {
    method_.owner = std::move(owner);
    method_.name = std::move(name);
    method_.param_types = std::move(params);
    method_.return_type = std::move(ret);
    method_.is_static = is_static;
    if (!method_.is_static) {
      emit("r0 := @this: " + method_.owner);
      ++next_;
    }
    for (std::size_t i = 0; i < method_.param_types.size(); ++i) {
      const std::string p = "p" + std::to_string(i);
      emit(p + " := @parameter" + std::to_string(i) + ": " + method_.param_types[i]);
    }
  }

  std::size_t emit(const std::string& line) {
    const std::size_t index = method_.body.size();
    auto stmt = parse_statement(line, index);
    if (stmt.rhs.is<Unknown>() && !(stmt.kind == StmtKind::kReturn && line == "return")) {
      throw std::logic_error("generator emitted unparseable IR: " + line);
    }
    if (auto l = stmt.defined_local()) method_.locals.insert(*l);
    for (const auto& local : referenced(stmt)) method_.locals.insert(local);
    method_.body.push_back(std::move(stmt));
    return index;
  }

  std::string fresh(const std::string& prefix = "$r") { return prefix + std::to_string(next_++); }

  const std::string& owner() const { return method_.owner; }
  const std::string& name() const { return method_.name; }
  std::size_t size() const { return method_.body.size(); }

  IrMethod finish() {
    if (method_.body.empty() || method_.body.back().kind != StmtKind::kReturn) {
      if (method_.return_type == "void") emit("return");
    }
    return std::move(method_);
  }

 private:
  IrMethod method_;
  std::size_t next_ = 1;

  static std::vector<std::string> referenced(const IrStatement& s) {
    std::vector<std::string> out;
    auto imm = [&](const Immediate& i) {
      if (const auto* l = std::get_if<LocalRef>(&i.node)) out.push_back(l->name);
    };
    auto expr = [&](const IrExpr& e) {
      if (const auto* l = e.as<LocalRef>()) out.push_back(l->name);
      if (const auto* c = e.as<Call>()) {
        if (c->receiver) out.push_back(*c->receiver);
        for (const auto& a : c->args) imm(a);
      }
      if (const auto* a = e.as<ArrayRef>()) {
        out.push_back(a->base);
        imm(a->index);
      }
      if (const auto* f = e.as<FieldRef>(); f && f->base) out.push_back(*f->base);
      if (const auto* b = e.as<BinOp>()) {
        imm(b->lhs);
        imm(b->rhs);
      }
      if (const auto* n = e.as<NewArray>()) imm(n->length);
    };
    if (s.lhs) expr(*s.lhs);
    expr(s.rhs);
    return out;
  }
};

std::string q(std::string_view s) { return quote_string(s); }

struct ClassBuilder {
  IrClassUnit unit;
  std::vector<std::string> clinit;  // statements of <clinit>, emitted at the end
};

struct AppBuilder {
  std::string app_id;
  std::string package;
  std::map<std::string, ClassBuilder> classes;
  std::map<std::string, std::string> env;
  std::set<std::pair<std::string, std::string>> secret_methods;
  std::vector<ManifestEntry> manifest;
  // <clinit> builders are created lazily, one per class.
  std::map<std::string, MethodBuilder> clinits;

  ClassBuilder& cls(const std::string& name) {
    auto& c = classes[name];
    c.unit.qualified_name = name;
    return c;
  }

  MethodBuilder& clinit(const std::string& owner) {
    cls(owner);
    auto it = clinits.find(owner);
    if (it == clinits.end()) {
      it = clinits.emplace(owner, MethodBuilder(owner, "<clinit>", {}, "void", true)).first;
    }
    return it->second;
  }

  void add(MethodBuilder& mb) { cls(mb.owner()).unit.methods.push_back(mb.finish()); }
};

struct ValueSite {
  std::string imm;  // immediate text holding the value in the producer
  std::string class_name;
  std::string method;
  std::optional<std::size_t> index;
};

std::vector<std::string> split_key(const std::string& key, std::mt19937_64& rng) {
  const std::size_t parts = key.size() >= 6 ? between(rng, 2, 3) : 2;
  std::set<std::size_t> cuts;
  while (cuts.size() + 1 < parts) cuts.insert(between(rng, 1, key.size() - 1));
  std::vector<std::string> out;
  std::size_t prev = 0;
  for (auto c : cuts) {
    out.push_back(key.substr(prev, c - prev));
    prev = c;
  }
  out.push_back(key.substr(prev));
  return out;
}

void emit_context(MethodBuilder& mb, std::mt19937_64& rng, std::size_t n) {
  if (n == 0) return;
  const std::string map = mb.fresh();
  mb.emit(map + " = new java.util.HashMap");
  mb.emit("specialinvoke " + map + ".<java.util.HashMap: void <init>()>()");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string term = pick(rng, kContextTerms);
    if (between(rng, 0, 1) == 0) {
      mb.emit("virtualinvoke " + map +
              ".<java.util.HashMap: java.lang.Object put(java.lang.Object,java.lang.Object)>(" +
              q(term) + ", " + q(pick(rng, kContextTerms)) + ")");
    } else {
      const std::string l = mb.fresh();
      mb.emit(l + " = " + q(term));
      mb.emit("virtualinvoke " + map +
              ".<java.util.HashMap: java.lang.Object get(java.lang.Object)>(" + l + ")");
    }
  }
}

// Emits statements computing the seeded value inside `mb` and returns where
// the key material was written.
ValueSite emit_value(AppBuilder& app, MethodBuilder& mb, const std::string& key,
                     Placement placement, const std::string& provider, std::size_t seed_no,
                     std::mt19937_64& rng) {
  ValueSite site;
  site.class_name = mb.owner();
  site.method = mb.name();
  switch (placement) {
    case Placement::kLiteralArg:
    case Placement::kUnusedLiteral: {
      const std::string l = mb.fresh();
      site.index = mb.emit(l + " = " + q(key));
      site.imm = l;
      if (placement == Placement::kLiteralArg && between(rng, 0, 1) == 0) {
        // Literal used straight as the argument, as in decompiled code.
        site.imm = q(key);
      }
      break;
    }
    case Placement::kSplitBuilder: {
      const auto pieces = split_key(key, rng);
      const std::string b = mb.fresh();
      mb.emit(b + " = new " + kSb);
      std::size_t first = 0;
      if (between(rng, 0, 1) == 0) {
        site.index = mb.emit("specialinvoke " + b + ".<" + kSb + ": void <init>(java.lang.String)>(" +
                             q(pieces[0]) + ")");
        first = 1;
      } else {
        mb.emit("specialinvoke " + b + ".<" + kSb + ": void <init>()>()");
      }
      std::string cur = b;
      for (std::size_t i = first; i < pieces.size(); ++i) {
        std::string arg = q(pieces[i]);
        if (between(rng, 0, 2) == 0) {
          const std::string l = mb.fresh();
          const auto at = mb.emit(l + " = " + arg);
          if (!site.index) site.index = at;
          arg = l;
        }
        const std::string call = "virtualinvoke " + cur + ".<" + kSb +
                                 ": java.lang.StringBuilder append(java.lang.String)>(" + arg + ")";
        std::size_t at;
        if (between(rng, 0, 1) == 0) {
          const std::string next = mb.fresh();
          at = mb.emit(next + " = " + call);
          cur = next;
        } else {
          at = mb.emit(call);
        }
        if (!site.index) site.index = at;
      }
      const std::string out = mb.fresh();
      mb.emit(out + " = virtualinvoke " + cur + ".<" + kSb + ": java.lang.String toString()>()");
      site.imm = out;
      break;
    }
    case Placement::kSplitConcat: {
      const auto pieces = split_key(key, rng);
      std::string cur = mb.fresh();
      site.index = mb.emit(cur + " = " + q(pieces[0]));
      for (std::size_t i = 1; i < pieces.size(); ++i) {
        const std::string next = mb.fresh();
        mb.emit(next + " = virtualinvoke " + cur +
                ".<java.lang.String: java.lang.String concat(java.lang.String)>(" + q(pieces[i]) +
                ")");
        cur = next;
      }
      site.imm = cur;
      break;
    }
    case Placement::kStaticField: {
      const std::string config = app.package + ".Config";
      const std::string field = std::string(pick(rng, kFeatures)) + "_KEY_" + std::to_string(seed_no);
      std::string upper = field;
      for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      auto& cls = app.cls(config);
      if (between(rng, 0, 1) == 0) {
        cls.unit.static_fields.push_back(StaticField{upper, kStr, key});
        site.class_name = config;
        site.method = "";
      } else {
        cls.unit.static_fields.push_back(StaticField{upper, kStr, std::nullopt});
        auto& init = app.clinit(config);
        site.index = init.emit("<" + config + ": java.lang.String " + upper + "> = " + q(key));
        site.class_name = config;
        site.method = "<clinit>";
      }
      const std::string l = mb.fresh();
      mb.emit(l + " = <" + config + ": java.lang.String " + upper + ">");
      site.imm = l;
      break;
    }
    case Placement::kArrayAssembly: {
      const std::string config = app.package + ".Config";
      const std::string field = "PARTS_" + std::to_string(seed_no);
      auto& cls = app.cls(config);
      cls.unit.static_fields.push_back(StaticField{field, "java.lang.String[]", std::nullopt});
      auto& init = app.clinit(config);
      const std::size_t n = between(rng, 2, 4);
      const std::size_t slot = between(rng, 0, n - 1);
      const std::string arr = init.fresh("$a");
      init.emit(arr + " = newarray (java.lang.String)[" + std::to_string(n) + "]");
      for (std::size_t i = 0; i < n; ++i) {
        const std::string value = i == slot ? key : (between(rng, 0, 1) ? "" : std::string(pick(rng, kOrdinary)));
        const auto at = init.emit(arr + "[" + std::to_string(i) + "] = " + q(value));
        if (i == slot) site.index = at;
      }
      init.emit("<" + config + ": java.lang.String[] " + field + "> = " + arr);
      site.class_name = config;
      site.method = "<clinit>";
      const std::string a = mb.fresh();
      mb.emit(a + " = <" + config + ": java.lang.String[] " + field + ">");
      const std::string l = mb.fresh();
      mb.emit(l + " = " + a + "[" + std::to_string(slot) + "]");
      site.imm = l;
      break;
    }
    case Placement::kEnvFile: {
      const std::string name = provider_info(provider).env_key + "_" + std::to_string(seed_no);
      app.env[name] = key;
      const std::string p = mb.fresh();
      mb.emit(p + " = new java.util.Properties");
      mb.emit("specialinvoke " + p + ".<java.util.Properties: void <init>()>()");
      const std::string l = mb.fresh();
      mb.emit(l + " = virtualinvoke " + p +
              ".<java.util.Properties: java.lang.String getProperty(java.lang.String)>(" + q(name) + ")");
      site.imm = l;
      site.class_name = "env.json";
      site.method = "";
      break;
    }
  }
  return site;
}

void emit_sink(MethodBuilder& mb, const std::string& provider, const std::string& ctx,
               const std::string& value, std::mt19937_64& rng) {
  if (provider == "google_api_key") {
    if (between(rng, 0, 1) == 0) {
      mb.emit("staticinvoke <com.google.android.libraries.places.api.Places: void "
              "initialize(android.content.Context,java.lang.String)>(" + ctx + ", " + value + ")");
    } else {
      const std::string b = mb.fresh();
      const std::string t = "com.google.firebase.FirebaseOptions$Builder";
      mb.emit(b + " = new " + t);
      mb.emit("specialinvoke " + b + ".<" + t + ": void <init>()>()");
      const std::string r = mb.fresh();
      mb.emit(r + " = virtualinvoke " + b + ".<" + t + ": " + t + " setApiKey(java.lang.String)>(" +
              value + ")");
    }
  } else if (provider == "stripe") {
    const std::string s = mb.fresh();
    mb.emit(s + " = new com.stripe.android.Stripe");
    mb.emit("specialinvoke " + s +
            ".<com.stripe.android.Stripe: void <init>(android.content.Context,java.lang.String)>(" +
            ctx + ", " + value + ")");
  } else {
    const std::string t = "twitter4j.conf.ConfigurationBuilder";
    const std::string method =
        provider == "twitter_client_id" ? "setOAuthConsumerKey" : "setOAuthConsumerSecret";
    const std::string c = mb.fresh();
    mb.emit(c + " = new " + t);
    mb.emit("specialinvoke " + c + ".<" + t + ": void <init>()>()");
    const std::string r = mb.fresh();
    mb.emit(r + " = virtualinvoke " + c + ".<" + t + ": " + t + " " + method +
            "(java.lang.String)>(" + value + ")");
  }
}

void emit_oauth_context(MethodBuilder& mb, const std::string& ctx) {
  const std::string t = "com.google.android.gms.auth.api.signin.GoogleSignInOptions$Builder";
  const std::string b = mb.fresh();
  mb.emit(b + " = new " + t);
  mb.emit("specialinvoke " + b + ".<" + t + ": void <init>()>()");
  const std::string id = mb.fresh();
  mb.emit(id + " = virtualinvoke " + ctx +
          ".<android.content.Context: java.lang.String getString(int)>(2131755040)");
  const std::string r = mb.fresh();
  mb.emit(r + " = virtualinvoke " + b + ".<" + t + ": " + t + " requestIdToken(java.lang.String)>(" +
          id + ")");
}

struct SeedPlan {
  SeedSpec spec;
  std::string key;
};

void emit_seed(AppBuilder& app, const SeedPlan& plan, std::size_t seed_no, std::size_t context_terms,
               std::mt19937_64& rng, MethodBuilder& main) {
  const std::string provider = plan.spec.provider;
  const std::string cls = app.package + "." + pick(rng, kFeatures) + "Manager" + std::to_string(seed_no);
  app.cls(cls);
  const std::size_t depth = std::min<std::size_t>(plan.spec.call_depth, 2);
  const bool through_return = depth > 0 && between(rng, 0, 1) == 0;

  MethodBuilder init(cls, "init", {kCtx}, "void", false);
  const std::string ctx = "p0";
  emit_context(init, rng, context_terms);
  if (provider == "google_api_key") emit_oauth_context(init, ctx);

  ValueSite site;
  std::string value;
  if (through_return && plan.spec.placement != Placement::kUnusedLiteral) {
    // init <- key1() <- key2(): the value is assembled in the deepest getter.
    std::vector<MethodBuilder> getters;
    for (std::size_t d = 1; d <= depth; ++d) {
      getters.emplace_back(cls, "key" + std::to_string(d), std::vector<std::string>{}, kStr, true);
    }
    auto& deepest = getters.back();
    emit_context(deepest, rng, 1);
    site = emit_value(app, deepest, plan.key, plan.spec.placement, provider, seed_no, rng);
    deepest.emit("return " + site.imm);
    for (std::size_t d = depth - 1; d >= 1; --d) {
      auto& g = getters[d - 1];
      const std::string l = g.fresh();
      g.emit(l + " = staticinvoke <" + cls + ": java.lang.String key" + std::to_string(d + 1) + "()>()");
      g.emit("return " + l);
    }
    value = init.fresh();
    init.emit(value + " = staticinvoke <" + cls + ": java.lang.String key1()>()");
    emit_sink(init, provider, ctx, value, rng);
    for (auto& g : getters) app.add(g);
  } else {
    site = emit_value(app, init, plan.key, plan.spec.placement, provider, seed_no, rng);
    value = site.imm;
    if (plan.spec.placement == Placement::kUnusedLiteral) {
      init.emit("staticinvoke <android.util.Log: int d(java.lang.String,java.lang.String)>(" +
                q(pick(rng, kTags)) + ", " + value + ")");
    } else if (depth == 0) {
      emit_sink(init, provider, ctx, value, rng);
    } else {
      // init -> apply1(ctx, v) -> apply2(ctx, v) -> API
      const std::string sig_tail = "(android.content.Context,java.lang.String)>";
      init.emit("staticinvoke <" + cls + ": void apply1" + sig_tail + "(" + ctx + ", " + value + ")");
      for (std::size_t d = 1; d <= depth; ++d) {
        MethodBuilder helper(cls, "apply" + std::to_string(d), {kCtx, kStr}, "void", true);
        if (d < depth) {
          helper.emit("staticinvoke <" + cls + ": void apply" + std::to_string(d + 1) + sig_tail +
                      "(p0, p1)");
        } else {
          emit_sink(helper, provider, "p0", "p1", rng);
        }
        app.add(helper);
      }
    }
  }
  app.add(init);

  const std::string obj = main.fresh();
  main.emit(obj + " = new " + cls);
  main.emit("specialinvoke " + obj + ".<" + cls + ": void <init>()>()");
  main.emit("virtualinvoke " + obj + ".<" + cls + ": void init(android.content.Context)>(r0)");

  if (site.class_name != "env.json" && !site.method.empty()) {
    app.secret_methods.emplace(site.class_name, site.method);
  }
  app.secret_methods.emplace(cls, "init");
  app.manifest.push_back(ManifestEntry{app.app_id, plan.key, provider, plan.spec.placement,
                                       site.class_name, site.method, site.index, depth});
}

void emit_filler(AppBuilder& app, const NoiseProfile& noise, std::mt19937_64& rng, std::size_t k) {
  const std::string cls = app.package + ".ui." + pick(rng, kScreens) + "Fragment" + std::to_string(k);
  MethodBuilder mb(cls, between(rng, 0, 1) ? "render" : "bind", {"android.view.View"}, "void", false);
  const std::string tag = q(pick(rng, kTags));
  for (std::size_t i = 0; i < noise.strings_per_filler; ++i) {
    const std::string s = q(pick(rng, kOrdinary));
    switch (between(rng, 0, 2)) {
      case 0:
        mb.emit("staticinvoke <android.util.Log: int d(java.lang.String,java.lang.String)>(" + tag +
                ", " + s + ")");
        break;
      case 1: {
        const std::string v = mb.fresh();
        mb.emit(v + " = virtualinvoke p0.<android.view.View: android.view.View findViewById(int)>(" +
                std::to_string(2131230000 + between(rng, 0, 999)) + ")");
        mb.emit("virtualinvoke " + v + ".<android.widget.TextView: void setText(java.lang.CharSequence)>(" +
                s + ")");
        break;
      }
      default: {
        const std::string l = mb.fresh();
        mb.emit(l + " = " + s);
        mb.emit("virtualinvoke r0.<" + cls + ": void show(java.lang.String)>(" + l + ")");
        break;
      }
    }
  }
  app.add(mb);
  MethodBuilder show(cls, "show", {kStr}, "void", false);
  show.emit("staticinvoke <android.util.Log: int i(java.lang.String,java.lang.String)>(" + tag + ", p0)");
  app.add(show);
}

void emit_distractors(AppBuilder& app, const NoiseProfile& noise, std::mt19937_64& rng) {
  if (noise.distractors == 0) return;
  const std::string cls = app.package + ".data.CacheStore";
  MethodBuilder mb(cls, "warm", {}, "void", true);
  for (std::size_t i = 0; i < noise.distractors; ++i) {
    const bool long_form = between(rng, 0, 1) == 1;
    const std::string s = long_form ? random_from(rng, kAlnum, between(rng, 40, 50))
                                    : random_from(rng, kAlnum, between(rng, 18, 25));
    const std::string l = mb.fresh();
    mb.emit(l + " = " + q(s));
    mb.emit("staticinvoke <android.util.Log: int v(java.lang.String,java.lang.String)>(\"cache\", " + l + ")");
  }
  app.add(mb);
}

void emit_arithmetic(AppBuilder& app, std::mt19937_64& rng, std::size_t k) {
  const std::string cls = app.package + ".util.MathUtil";
  MethodBuilder mb(cls, "compute" + std::to_string(k), {"int"}, "int", true);
  std::string cur = "p0";
  const char* ops[] = {"+", "-", "*"};
  const std::size_t steps = between(rng, 3, 6);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::string next = mb.fresh("i");
    mb.emit(next + " = " + cur + " " + pick(rng, ops) + " " + std::to_string(between(rng, 1, 97)));
    cur = next;
  }
  mb.emit("return " + cur);
  app.add(mb);
}

std::string app_id_for(std::size_t i) {
  std::ostringstream o;
  o << "app" << std::setw(4) << std::setfill('0') << i;
  return o.str();
}

// Entropy range (mean +- 2 sd) of keys in `format`, from a fixed reference sample.
std::pair<double, double> entropy_band(const std::string& format) {
  static std::mutex lock;
  static std::map<std::string, std::pair<double, double>> cache;
  const std::scoped_lock guard(lock);
  if (auto it = cache.find(format); it != cache.end()) return it->second;
  std::mt19937_64 rng(0xe27);
  std::vector<double> h(4096);
  for (auto& e : h) e = shannon_entropy(key_in_format(format, rng));
  const double mean = std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
  double var = 0.0;
  for (double e : h) var += (e - mean) * (e - mean);
  const double sd = std::sqrt(var / static_cast<double>(h.size()));
  return cache[format] = {mean - 2 * sd, mean + 2 * sd};
}

bool acceptable_key(const std::string& key, const std::string& format, const Dictionary* dictionary,
                    std::size_t min_word_len) {
  if (!pattern_filter(key, 4)) return false;
  const auto [lo, hi] = entropy_band(format);
  const double h = shannon_entropy(key);
  if (h < lo || h > hi) return false;
  return dictionary == nullptr || word_filter(key, *dictionary, min_word_len);
}

}  // namespace

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::kLiteralArg: return "literal_arg";
    case Placement::kSplitBuilder: return "split_builder";
    case Placement::kSplitConcat: return "split_concat";
    case Placement::kStaticField: return "static_field";
    case Placement::kArrayAssembly: return "array_assembly";
    case Placement::kEnvFile: return "env_file";
    case Placement::kUnusedLiteral: return "unused_literal";
  }
  return "unknown";
}

Placement parse_placement(std::string_view name) {
  for (auto p : kPlacementOrder) {
    if (to_string(p) == name) return p;
  }
  throw InvalidSpec("unknown placement '" + std::string(name) + "'");
}

bool reaches_api(Placement p) { return p != Placement::kUnusedLiteral; }

const std::vector<std::string>& seedable_providers() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : provider_table()) out.push_back(p.provider);
    return out;
  }();
  return names;
}

std::string default_key_format(std::string_view provider) { return provider_info(provider).format; }

std::string generate_key(std::string_view format, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return key_in_format(format, rng);
}

NoiseProfile NoiseProfile::named(std::string_view name) {
  NoiseProfile p;
  p.name = std::string(name);
  if (name == "default") return p;
  if (name == "none") {
    p.filler_methods = 0;
    p.strings_per_filler = 0;
    p.context_terms = 0;
    p.arithmetic_methods = 0;
    return p;
  }
  if (name == "loose-twitter") {
    p.distractors = 8;
    return p;
  }
  if (name == "rich") {
    p.filler_methods = 5;
    p.strings_per_filler = 6;
    p.distractors = 2;
    p.context_terms = 4;
    p.arithmetic_methods = 2;
    return p;
  }
  throw InvalidSpec("unknown noise profile '" + std::string(name) + "'");
}

CorpusSpec parse_corpus_spec(std::string_view json_text) {
  CorpusSpec spec;
  try {
    const auto j = nlohmann::json::parse(json_text);
    spec.n_apps = j.value("n_apps", std::size_t{1});
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      if (n.is_string()) {
        spec.noise = NoiseProfile::named(n.get<std::string>());
      } else {
        spec.noise = NoiseProfile::named(n.value("profile", "default"));
        spec.noise.filler_methods = n.value("filler_methods", spec.noise.filler_methods);
        spec.noise.strings_per_filler = n.value("strings_per_filler", spec.noise.strings_per_filler);
        spec.noise.distractors = n.value("distractors", spec.noise.distractors);
        spec.noise.context_terms = n.value("context_terms", spec.noise.context_terms);
        spec.noise.arithmetic_methods = n.value("arithmetic_methods", spec.noise.arithmetic_methods);
      }
    }
    for (const auto& s : j.value("seeds", nlohmann::json::array())) {
      SeedSpec seed;
      seed.provider = s.at("provider").get<std::string>();
      seed.placement = parse_placement(s.at("placement").get<std::string>());
      seed.key_format = s.value("key_format", "");
      seed.count = s.value("count", std::size_t{1});
      seed.call_depth = s.value("call_depth", std::size_t{0});
      spec.seeds.push_back(std::move(seed));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("malformed corpus spec: ") + e.what());
  }
  return spec;
}

CorpusSpec load_corpus_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open corpus spec " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus_spec(buf.str());
}

Corpus gen_corpus(const CorpusSpec& spec, const Dictionary* dictionary, std::size_t min_word_len) {
  for (const auto& s : spec.seeds) {
    provider_info(s.provider);
    if (s.call_depth > 2) throw InvalidSpec("call_depth must be 0, 1 or 2");
    if (!s.key_format.empty()) {
      std::mt19937_64 probe(0);
      key_in_format(s.key_format, probe);
    }
  }
  Corpus corpus;
  corpus.manifest.seed = spec.seed;
  std::set<std::string> used_keys;
  for (std::size_t a = 0; a < spec.n_apps; ++a) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(a), 0x5eedu};
    std::mt19937_64 rng(seq);
    AppBuilder app;
    app.app_id = app_id_for(a);
    app.package = "com." + std::string(pick(rng, kVendors)) + std::to_string(a) + ".app";

    const std::string main_cls = app.package + ".MainActivity";
    MethodBuilder main(main_cls, "onCreate", {"android.os.Bundle"}, "void", false);
    main.emit("specialinvoke r0.<android.app.Activity: void onCreate(android.os.Bundle)>(p0)");

    std::size_t seed_no = 0;
    for (const auto& s : spec.seeds) {
      const std::string format = s.key_format.empty() ? default_key_format(s.provider) : s.key_format;
      for (std::size_t c = 0; c < s.count; ++c) {
        std::string key;
        for (int attempt = 0;; ++attempt) {
          key = key_in_format(format, rng);
          if (!used_keys.contains(key) && acceptable_key(key, format, dictionary, min_word_len)) break;
          if (attempt > 10000) throw InvalidSpec("cannot sample a clean key in format " + format);
        }
        used_keys.insert(key);
        emit_seed(app, SeedPlan{s, key}, seed_no++, spec.noise.context_terms, rng, main);
      }
    }
    app.add(main);
    for (std::size_t k = 0; k < spec.noise.filler_methods; ++k) emit_filler(app, spec.noise, rng, k);
    emit_distractors(app, spec.noise, rng);
    for (std::size_t k = 0; k < spec.noise.arithmetic_methods; ++k) emit_arithmetic(app, rng, k);
    for (auto& [owner, mb] : app.clinits) {
      app.cls(owner).unit.methods.push_back(mb.finish());
    }

    GeneratedApp out;
    out.app_id = app.app_id;
    out.env = app.env;
    out.secret_methods = app.secret_methods;
    for (auto& [name, cb] : app.classes) {
      out.files.push_back(IrSourceFile{name + ".jir", print_class(cb.unit)});
    }
    for (auto& m : app.manifest) corpus.manifest.entries.push_back(std::move(m));
    corpus.apps.push_back(std::move(out));
  }
  return corpus;
}

IrApp to_ir(const GeneratedApp& app) { return parse_app(app.app_id, app.files); }

std::map<std::string, std::map<std::string, std::string>> env_files(const GeneratedApp& app) {
  if (app.env.empty()) return {};
  return {{"env.json", app.env}};
}

void write_corpus(const Corpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& app : corpus.apps) {
    const fs::path base = fs::path(dir) / app.app_id;
    fs::create_directories(base);
    for (const auto& f : app.files) {
      std::ofstream out(base / f.path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (base / f.path).string());
      out << f.text;
    }
    if (!app.env.empty()) {
      std::ofstream out(base / "env.json", std::ios::binary);
      out << nlohmann::json(app.env).dump(2) << '\n';
    }
  }
  std::ofstream out(fs::path(dir) / "manifest.jsonl", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << manifest_to_jsonl(corpus.manifest);
}

std::string manifest_to_jsonl(const GroundTruthManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    nlohmann::json j{{"app_id", e.app_id},
                     {"value", e.value},
                     {"provider", e.provider},
                     {"placement", to_string(e.placement)},
                     {"class", e.class_name},
                     {"method", e.method},
                     {"index", e.index ? nlohmann::json(*e.index) : nlohmann::json(nullptr)},
                     {"call_depth", e.call_depth},
                     {"seed", manifest.seed}};
    out += j.dump() + "\n";
  }
  return out;
}

GroundTruthManifest parse_manifest_jsonl(std::string_view text) {
  GroundTruthManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.app_id = j.at("app_id").get<std::string>();
      e.value = j.at("value").get<std::string>();
      e.provider = j.at("provider").get<std::string>();
      e.placement = parse_placement(j.at("placement").get<std::string>());
      e.class_name = j.value("class", "");
      e.method = j.value("method", "");
      if (j.contains("index") && !j.at("index").is_null()) e.index = j.at("index").get<std::size_t>();
      e.call_depth = j.value("call_depth", std::size_t{0});
      m.seed = j.value("seed", m.seed);
      m.entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return m;
}

GroundTruthManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest_jsonl(buf.str());
}

std::vector<LabeledGroup> labeled_groups(const Corpus& corpus, std::size_t min_size) {
  std::vector<LabeledGroup> out;
  for (const auto& app : corpus.apps) {
    const IrApp ir = to_ir(app);
    for (auto& g : build_string_groups(ir, min_size)) {
      LabeledGroup lg;
      lg.group_id = app.app_id + "/" + g.class_name + "/" + g.method_name;
      lg.secret = app.secret_methods.contains({g.class_name, g.method_name});
      lg.strings = std::move(g.strings);
      out.push_back(std::move(lg));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Obfuscation

namespace {

bool is_platform(std::string_view owner) {
  return owner.starts_with("java.") || owner.starts_with("javax.") ||
         owner.starts_with("android.") || owner.starts_with("kotlin.") ||
         owner.starts_with("dalvik.");
}

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words{
      "class", "method", "static", "staticfield", "return", "new", "newarray", "null",
      "virtualinvoke", "specialinvoke", "staticinvoke", "interfaceinvoke", "do", "if",
      "in", "int", "for", "try", "goto", "case", "void", "byte", "char", "long"};
  return words;
}

class NameSource {
 public:
  explicit NameSource(std::uint64_t seed) : rng_(seed) {}

  std::string next(std::set<std::string>& taken, std::size_t min_len = 1) {
    for (std::size_t len = min_len;; ++len) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        std::string name = random_from(rng_, "abcdefghijklmnopqrstuvwxyz", len);
        if (reserved_words().contains(name) || taken.contains(name)) continue;
        taken.insert(name);
        return name;
      }
    }
  }

 private:
  std::mt19937_64 rng_;
};

struct Renamer {
  RenameMap map;
  std::map<std::string, std::string> locals;

  std::string local(const std::string& n) const {
    auto it = locals.find(n);
    return it == locals.end() ? n : it->second;
  }

  Immediate imm(Immediate i) const {
    if (auto* l = std::get_if<LocalRef>(&i.node)) l->name = local(l->name);
    return i;
  }

  FieldRef field(FieldRef f) const {
    if (auto it = map.fields.find(f.owner + "#" + f.name); it != map.fields.end()) f.name = it->second;
    f.owner = map.type(f.owner);
    f.type = map.type(f.type);
    if (f.base) f.base = local(*f.base);
    return f;
  }

  IrExpr expr(const IrExpr& e) const {
    return std::visit(
        [&](const auto& node) -> IrExpr {
          using T = std::decay_t<decltype(node)>;
          T v = node;
          if constexpr (std::is_same_v<T, LocalRef>) {
            v.name = local(v.name);
          } else if constexpr (std::is_same_v<T, FieldRef>) {
            v = field(v);
          } else if constexpr (std::is_same_v<T, Call>) {
            v.callee = map.remap(v.callee);
            if (v.receiver) v.receiver = local(*v.receiver);
            for (auto& a : v.args) a = imm(a);
          } else if constexpr (std::is_same_v<T, NewArray>) {
            v.elem_type = map.type(v.elem_type);
            v.length = imm(v.length);
          } else if constexpr (std::is_same_v<T, NewObject>) {
            v.type = map.type(v.type);
          } else if constexpr (std::is_same_v<T, ArrayRef>) {
            v.base = local(v.base);
            v.index = imm(v.index);
          } else if constexpr (std::is_same_v<T, ParamRef> || std::is_same_v<T, ThisRef>) {
            v.type = map.type(v.type);
          } else if constexpr (std::is_same_v<T, BinOp>) {
            v.lhs = imm(v.lhs);
            v.rhs = imm(v.rhs);
          }
          return IrExpr{v};
        },
        e.node);
  }
};

}  // namespace

std::string RenameMap::type(std::string_view t) const {
  std::string_view base = t;
  std::string suffix;
  while (base.ends_with("[]")) {
    base.remove_suffix(2);
    suffix += "[]";
  }
  auto it = classes.find(std::string(base));
  return (it == classes.end() ? std::string(base) : it->second) + suffix;
}

MethodSig RenameMap::remap(const MethodSig& sig) const {
  MethodSig out = sig;
  if (auto it = methods.find(sig.owner + "#" + sig.name); it != methods.end()) out.name = it->second;
  out.owner = sig.owner.empty() ? sig.owner : type(sig.owner);
  out.return_type = type(sig.return_type);
  for (auto& p : out.param_types) p = type(p);
  return out;
}

std::pair<IrApp, RenameMap> obfuscate(const IrApp& app, std::uint64_t seed) {
  NameSource names(seed ^ 0x0bf05ca7e5eedULL);
  Renamer r;

  // Owners to rename, in sorted order so names depend only on the seed.
  std::set<std::string> owners;
  std::set<std::pair<std::string, std::string>> method_names;
  std::set<std::pair<std::string, std::string>> field_names;
  for (const auto& c : app.classes()) {
    owners.insert(c.qualified_name);
    for (const auto& f : c.static_fields) field_names.emplace(c.qualified_name, f.name);
    for (const auto& m : c.methods) method_names.emplace(c.qualified_name, m.name);
  }
  app.for_each_method([&](MethodRef, const IrMethod& m) {
    for (const auto& s : m.body) {
      auto visit_field = [&](const IrExpr& e) {
        if (const auto* f = e.as<FieldRef>(); f && !is_platform(f->owner)) {
          owners.insert(f->owner);
          field_names.emplace(f->owner, f->name);
        }
      };
      if (s.lhs) visit_field(*s.lhs);
      visit_field(s.rhs);
      if (const Call* c = s.call(); c && !c->callee.owner.empty() && !is_platform(c->callee.owner)) {
        owners.insert(c->callee.owner);
        method_names.emplace(c->callee.owner, c->callee.name);
      }
    }
  });

  std::set<std::string> taken_pkgs, taken_classes;
  const std::string pkgs[] = {names.next(taken_pkgs), names.next(taken_pkgs), names.next(taken_pkgs)};
  std::size_t turn = 0;
  for (const auto& o : owners) {
    r.map.classes[o] = pkgs[turn++ % 3] + "." + names.next(taken_classes);
  }
  std::map<std::string, std::set<std::string>> taken_methods, taken_fields;
  for (const auto& [owner, name] : method_names) {
    if (name.starts_with("<")) continue;
    r.map.methods[owner + "#" + name] = names.next(taken_methods[owner]);
  }
  for (const auto& [owner, name] : field_names) {
    r.map.fields[owner + "#" + name] = names.next(taken_fields[owner]);
  }

  std::vector<IrClassUnit> classes;
  std::map<std::string, std::vector<std::string>> manifest;
  for (const auto& c : app.classes()) {
    IrClassUnit u;
    u.qualified_name = r.map.type(c.qualified_name);
    for (const auto& f : c.static_fields) {
      u.static_fields.push_back(
          StaticField{r.map.fields.at(c.qualified_name + "#" + f.name), r.map.type(f.type), f.initializer});
    }
    for (const auto& m : c.methods) {
      IrMethod nm;
      nm.owner = u.qualified_name;
      auto it = r.map.methods.find(c.qualified_name + "#" + m.name);
      nm.name = it == r.map.methods.end() ? m.name : it->second;
      nm.return_type = r.map.type(m.return_type);
      for (const auto& p : m.param_types) nm.param_types.push_back(r.map.type(p));
      nm.is_static = m.is_static;
      std::set<std::string> taken_locals;
      r.locals.clear();
      for (const auto& l : m.locals) {
        const std::string fresh = names.next(taken_locals, 2);
        r.locals[l] = (l.starts_with("$") ? "$" : "") + fresh;
      }
      for (const auto& [old, fresh] : r.locals) nm.locals.insert(fresh);
      for (const auto& s : m.body) {
        IrStatement ns = s;
        if (s.lhs) ns.lhs = r.expr(*s.lhs);
        ns.rhs = r.expr(s.rhs);
        nm.body.push_back(std::move(ns));
      }
      u.methods.push_back(std::move(nm));
    }
    manifest[u.qualified_name + ".jir"].push_back(u.qualified_name);
    classes.push_back(std::move(u));
  }
  return {IrApp(app.app_id(), std::move(classes), std::move(manifest)), std::move(r.map)};
}

ApiSignature remap_signature(const ApiSignature& sig, const RenameMap& map) {
  ApiSignature out = sig;
  if (!sig.owner_pattern.ends_with(".*")) {
    if (auto it = map.methods.find(sig.owner_pattern + "#" + sig.method_name); it != map.methods.end()) {
      out.method_name = it->second;
    }
    out.owner_pattern = map.type(sig.owner_pattern);
  }
  for (auto& p : out.param_types) p = map.type(p);
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

DetectorScore DetectorScore::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  DetectorScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

std::string overlap_key(const std::set<Detector>& detectors) {
  std::string out;
  for (auto d : detectors) {
    if (!out.empty()) out += "+";
    out += to_string(d);
  }
  return out;
}

ScoreReport score(std::span<const SecretFinding> findings, const GroundTruthManifest& manifest) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::set<Key> truth;
  std::map<std::string, std::set<Key>> truth_by_provider;
  for (const auto& e : manifest.entries) {
    truth.emplace(e.app_id, e.value, e.provider);
    truth_by_provider[e.provider].emplace(e.app_id, e.value, e.provider);
  }

  std::map<Key, std::set<Detector>> found;
  for (const auto& f : findings) {
    auto& ds = found[{f.app_id, f.value, f.provider}];
    ds.insert(f.detectors.begin(), f.detectors.end());
  }

  ScoreReport report;
  auto score_set = [&](const std::set<Key>& hits, const std::set<Key>& expected) {
    std::size_t tp = 0;
    for (const auto& k : hits) tp += expected.contains(k) ? 1 : 0;
    return DetectorScore::from_counts(tp, hits.size() - tp, expected.size() - tp);
  };

  std::map<std::string, std::set<Key>> by_detector;
  std::set<Key> all;
  for (const auto& [key, ds] : found) {
    all.insert(key);
    for (auto d : ds) by_detector[std::string(to_string(d))].insert(key);
    ++report.overlap[ds];
  }
  for (auto d : kAllDetectors) by_detector[std::string(to_string(d))];
  by_detector["combined"] = all;

  std::set<std::string> providers;
  for (const auto& [p, _] : truth_by_provider) providers.insert(p);
  for (const auto& [key, _] : found) providers.insert(std::get<2>(key));

  for (const auto& [name, hits] : by_detector) {
    report.per_detector[name] = score_set(hits, truth);
    for (const auto& p : providers) {
      std::set<Key> subset;
      for (const auto& k : hits) {
        if (std::get<2>(k) == p) subset.insert(k);
      }
      const auto it = truth_by_provider.find(p);
      report.per_provider[name][p] = score_set(subset, it == truth_by_provider.end() ? std::set<Key>{} : it->second);
    }
  }
  return report;
}

}  // namespace secretsieve
