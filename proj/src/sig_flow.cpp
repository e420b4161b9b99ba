#include "secretsieve/sig_flow.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace secretsieve {

std::string_view to_string(SliceStatus s) {
  switch (s) {
    case SliceStatus::kResolved: return "resolved";
    case SliceStatus::kPartial: return "partial";
    case SliceStatus::kUnresolved: return "unresolved";
  }
  return "unknown";
}

std::string_view to_string(HoleReason r) {
  switch (r) {
    case HoleReason::kNoDefinition: return "no_definition";
    case HoleReason::kRecursive: return "recursive";
    case HoleReason::kNonConstant: return "non_constant";
    case HoleReason::kBudget: return "budget_exceeded";
    case HoleReason::kFanout: return "fanout";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Signatures

namespace {

bool string_typed(std::string_view t) {
  return t == "java.lang.String" || t == "String" || t == "java.lang.CharSequence" ||
         t == "CharSequence";
}

std::string_view simple_name(std::string_view dotted) {
  const auto dot = dotted.rfind('.');
  return dot == std::string_view::npos ? dotted : dotted.substr(dot + 1);
}

std::vector<std::string_view> segments(std::string_view dotted) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto dot = dotted.find('.', start);
    const auto end = dot == std::string_view::npos ? dotted.size() : dot;
    out.push_back(dotted.substr(start, end - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

bool is_wildcard(std::string_view pattern) { return pattern.ends_with(".*"); }

bool params_equal_exact(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return a == b;
}

bool params_equal_simple(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (simple_name(a[i]) != simple_name(b[i])) return false;
  }
  return true;
}

}  // namespace

void validate(const ApiSignature& sig) {
  const std::string where = sig.owner_pattern + "." + sig.method_name;
  if (sig.provider.empty()) throw SignatureError(where + ": empty provider");
  if (sig.owner_pattern.empty() || sig.method_name.empty()) {
    throw SignatureError(where + ": owner and method are required");
  }
  if (sig.secret_param_indices.empty()) throw SignatureError(where + ": no secret parameters");
  for (auto i : sig.secret_param_indices) {
    if (i >= sig.param_types.size()) {
      throw SignatureError(where + ": secret parameter " + std::to_string(i) +
                           " exceeds arity " + std::to_string(sig.param_types.size()));
    }
    if (!string_typed(sig.param_types[i])) {
      throw SignatureError(where + ": secret parameter " + std::to_string(i) + " has type " +
                           sig.param_types[i] + ", expected a string type");
    }
  }
}

std::vector<ApiSignature> parse_signatures(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SignatureError(std::string("signatures file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw SignatureError("signatures file must be a JSON array");
  std::vector<ApiSignature> out;
  for (const auto& entry : doc) {
    ApiSignature sig;
    try {
      sig.provider = entry.at("provider").get<std::string>();
      sig.owner_pattern = entry.at("owner").get<std::string>();
      sig.method_name = entry.at("method").get<std::string>();
      sig.param_types = entry.at("params").get<std::vector<std::string>>();
      for (const auto& i : entry.at("secret_params")) {
        sig.secret_param_indices.insert(i.get<std::size_t>());
      }
      const auto mode = entry.value("match_mode", "exact");
      if (mode == "exact") sig.match_mode = MatchMode::kExact;
      else if (mode == "structural") sig.match_mode = MatchMode::kStructural;
      else throw SignatureError("unknown match_mode '" + mode + "'");
    } catch (const nlohmann::json::exception& e) {
      throw SignatureError(std::string("malformed signature entry: ") + e.what());
    }
    validate(sig);
    out.push_back(std::move(sig));
  }
  return out;
}

std::vector<ApiSignature> load_signatures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SignatureError("cannot open signatures file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_signatures(buf.str());
}

std::string signatures_to_json(std::span<const ApiSignature> sigs) {
  auto doc = nlohmann::json::array();
  for (const auto& s : sigs) {
    doc.push_back({{"provider", s.provider},
                   {"owner", s.owner_pattern},
                   {"method", s.method_name},
                   {"params", s.param_types},
                   {"secret_params", s.secret_param_indices},
                   {"match_mode", s.match_mode == MatchMode::kExact ? "exact" : "structural"}});
  }
  return doc.dump(2) + "\n";
}

bool owner_matches_exact(std::string_view pattern, std::string_view owner) {
  if (is_wildcard(pattern)) {
    const auto prefix = pattern.substr(0, pattern.size() - 1);  // keeps the dot
    return owner.size() > prefix.size() && owner.starts_with(prefix);
  }
  return pattern == owner;
}

bool owner_matches_structural(std::string_view pattern, std::string_view owner) {
  if (owner.empty() || pattern.empty()) return false;
  if (is_wildcard(pattern)) {
    const auto package = segments(pattern.substr(0, pattern.size() - 2));
    const auto owner_segs = segments(owner);
    if (package.empty() || owner_segs.size() < 2) return false;
    return std::find(owner_segs.begin(), owner_segs.end() - 1, package.back()) !=
           owner_segs.end() - 1;
  }
  return simple_name(pattern) == simple_name(owner);
}

std::vector<SignatureMatch> match_signatures(const IrApp& app,
                                             std::span<const ApiSignature> sigs) {
  std::vector<SignatureMatch> out;
  if (sigs.empty()) return out;
  const auto sites = find_callsites(app, [](const MethodSig& s) { return !s.short_form; });
  for (const auto& site : sites) {
    const Call& call = *app.method(site.method).body[site.index].call();
    const MethodSig& callee = call.callee;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      const auto& sig = sigs[i];
      if (callee.name != sig.method_name) continue;
      const bool exact = owner_matches_exact(sig.owner_pattern, callee.owner) &&
                         params_equal_exact(callee.param_types, sig.param_types);
      if (exact) {
        out.push_back(SignatureMatch{site, i, false});
      } else if (sig.match_mode == MatchMode::kStructural &&
                 owner_matches_structural(sig.owner_pattern, callee.owner) &&
                 params_equal_simple(callee.param_types, sig.param_types)) {
        out.push_back(SignatureMatch{site, i, true});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slicing

namespace {

struct Alt {
  std::vector<Fragment> pieces;
  std::vector<TraceStep> trace;
};
using Alts = std::vector<Alt>;

void append_pieces(std::vector<Fragment>& into, const std::vector<Fragment>& from) {
  for (const auto& f : from) {
    if (!f.hole && !into.empty() && !into.back().hole) {
      into.back().text += f.text;
    } else if (!f.hole && f.text.empty() && !into.empty()) {
      continue;
    } else {
      into.push_back(f);
    }
  }
}

Alt constant(std::string text) { return Alt{{Fragment{false, std::move(text)}}, {}}; }

Alt hole(HoleReason reason, std::string why) {
  return Alt{{Fragment{true, std::move(why), reason}}, {}};
}

bool has_holes(const Alt& a) {
  return std::any_of(a.pieces.begin(), a.pieces.end(), [](const Fragment& f) { return f.hole; });
}

Alts with_step(Alts alts, const TraceStep& step) {
  for (auto& a : alts) a.trace.insert(a.trace.begin(), step);
  return alts;
}

bool is_builder_type(std::string_view t) {
  return t == "java.lang.StringBuilder" || t == "java.lang.StringBuffer";
}

std::string in_quotes(std::string_view s) { return "\"" + std::string(s) + "\""; }

std::string value_of_pieces(const std::vector<Fragment>& pieces) {
  std::string v;
  for (const auto& f : pieces) v += f.text;
  return v;
}

class Slicer {
 public:
  Slicer(const IrApp& app, const SliceOptions& options) : app_(app), opt_(options) {
    app_.for_each_method([&](MethodRef ref, const IrMethod& m) {
      for (const auto& s : m.body) {
        if (s.kind == StmtKind::kFieldStore) {
          const auto* f = s.lhs->as<FieldRef>();
          field_stores_[f->owner + "." + f->name].push_back(CallSite{ref, s.index});
        } else if (s.kind == StmtKind::kArrayStore) {
          array_stores_.push_back(CallSite{ref, s.index});
        }
        if (const Call* c = s.call()) {
          if (auto target = app_.resolve(c->callee)) callers_[*target].push_back({ref, s.index});
        }
      }
    });
  }

  SliceResult run(CallSite site, std::size_t arg_index) {
    const IrStatement& stmt = app_.method(site.method).body.at(site.index);
    const Call* call = stmt.call();
    if (call == nullptr) throw std::invalid_argument("slice start is not a call statement");
    if (arg_index >= call->args.size()) {
      throw std::out_of_range("argument " + std::to_string(arg_index) + " exceeds call arity " +
                              std::to_string(call->args.size()));
    }
    active_.push_back(site.method);
    auto alts = immediate(site.method, site.index, call->args[arg_index], Ctx{}, 0);
    const TraceStep start{app_.describe(site.method), site.index,
                          "argument " + std::to_string(arg_index) + " of " +
                              call->callee.to_string()};
    alts = with_step(std::move(alts), start);

    SliceResult result;
    result.depth_used = max_depth_seen_;
    for (auto& a : alts) result.paths.push_back(to_path(std::move(a)));
    return result;
  }

 private:
  struct Ctx {
    std::vector<CallSite> stack;  // call sites descended through, innermost last
  };

  const IrApp& app_;
  const SliceOptions& opt_;
  std::map<std::string, std::vector<CallSite>> field_stores_;
  std::vector<CallSite> array_stores_;
  std::map<MethodRef, std::vector<CallSite>> callers_;
  std::vector<MethodRef> active_;
  std::set<std::string> active_fields_;
  std::size_t statements_ = 0;
  std::size_t max_depth_seen_ = 0;

  static SlicePath to_path(Alt a) {
    SlicePath p;
    p.fragments = std::move(a.pieces);
    p.trace = std::move(a.trace);
    const bool holes = std::any_of(p.fragments.begin(), p.fragments.end(),
                                   [](const Fragment& f) { return f.hole; });
    if (!holes) {
      p.status = SliceStatus::kResolved;
      p.value = value_of_pieces(p.fragments);
      return p;
    }
    bool budget = false, any_const = false;
    const Fragment* first_hole = nullptr;
    for (const auto& f : p.fragments) {
      if (f.hole) {
        if (!first_hole) first_hole = &f;
        budget |= f.reason == HoleReason::kBudget || f.reason == HoleReason::kFanout;
      } else if (!f.text.empty()) {
        any_const = true;
      }
    }
    if (budget || any_const) {
      p.status = SliceStatus::kPartial;
    } else {
      p.status = SliceStatus::kUnresolved;
      p.reason = first_hole->reason;
    }
    return p;
  }

  bool tick() {
    ++statements_;
    return statements_ <= opt_.budget.max_statements;
  }

  bool deeper(std::size_t depth) {
    if (depth > opt_.budget.max_depth) return false;
    max_depth_seen_ = std::max(max_depth_seen_, depth);
    return true;
  }

  void cap(Alts& alts) const {
    const auto limit = std::max<std::size_t>(opt_.budget.max_fanout, 1);
    if (alts.size() <= limit) return;
    alts.resize(limit);
    alts.push_back(hole(HoleReason::kFanout, "more than " + std::to_string(limit) +
                                                 " alternative definitions"));
  }

  Alts product(const Alts& a, const Alts& b) const {
    Alts out;
    for (const auto& x : a) {
      for (const auto& y : b) {
        Alt c = x;
        append_pieces(c.pieces, y.pieces);
        c.trace.insert(c.trace.end(), y.trace.begin(), y.trace.end());
        out.push_back(std::move(c));
      }
    }
    cap(out);
    return out;
  }

  void unite(Alts& into, Alts more) const {
    for (auto& a : more) into.push_back(std::move(a));
    cap(into);
  }

  // Index of the statement defining `local` most recently before `before`.
  // Nullopt when there is none; throws nothing. Budget exhaustion is
  // signalled through `exhausted`.
  std::optional<std::size_t> reaching_def(const IrMethod& m, std::size_t before,
                                          const std::string& local, bool& exhausted) {
    for (std::size_t k = std::min(before, m.body.size()); k-- > 0;) {
      if (!tick()) {
        exhausted = true;
        return std::nullopt;
      }
      const auto& s = m.body[k];
      if (s.defined_local() == local) return k;
      if (s.is_unknown()) {
        const auto& raw = s.rhs.as<Unknown>()->raw;
        if (raw.starts_with(local)) {
          const auto rest = std::string_view(raw).substr(local.size());
          const auto p = rest.find_first_not_of(" \t");
          if (p != std::string_view::npos && (rest[p] == '=' || rest[p] == ':')) return k;
        }
      }
    }
    return std::nullopt;
  }

  Alts immediate(MethodRef m, std::size_t at, const Immediate& imm, const Ctx& ctx,
                 std::size_t depth) {
    return expr(m, at, to_expr(imm), ctx, depth);
  }

  // Value of `local` just before statement `before` of `m`.
  Alts local(MethodRef m, std::size_t before, const std::string& name, const Ctx& ctx,
             std::size_t depth) {
    const IrMethod& method = app_.method(m);
    bool exhausted = false;
    const auto k = reaching_def(method, before, name, exhausted);
    if (exhausted) return {hole(HoleReason::kBudget, "statement budget exhausted")};
    if (!k) return {hole(HoleReason::kNoDefinition, "local " + name + " has no definition")};
    const IrStatement& s = method.body[*k];
    const std::string where = app_.describe(m);
    if (s.is_unknown()) {
      return with_step({hole(HoleReason::kNonConstant, "unparsed definition of " + name)},
                       TraceStep{where, *k, "unparsed statement"});
    }
    if (const auto* obj = s.rhs.as<NewObject>()) {
      if (is_builder_type(obj->type) || obj->type == "java.lang.String") {
        return with_step(object_contents(m, *k, before, ctx, depth),
                         TraceStep{where, *k, "new " + obj->type});
      }
    }
    return with_step(expr(m, *k, s.rhs, ctx, depth), TraceStep{where, *k, transfer_of(s)});
  }

  static std::string transfer_of(const IrStatement& s) {
    return std::visit(
        [](const auto& node) -> std::string {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, StringConst>) return "constant " + in_quotes(node.value);
          else if constexpr (std::is_same_v<T, IntConst>) return "constant " + std::to_string(node.value);
          else if constexpr (std::is_same_v<T, LocalRef>) return "copy of " + node.name;
          else if constexpr (std::is_same_v<T, FieldRef>) return "load of field " + node.owner + "." + node.name;
          else if constexpr (std::is_same_v<T, Call>) return "result of " + node.callee.to_string();
          else if constexpr (std::is_same_v<T, ArrayRef>) return "array element of " + node.base;
          else if constexpr (std::is_same_v<T, ParamRef>) return "parameter " + std::to_string(node.index);
          else return "definition";
        },
        s.rhs.node);
  }

  Alts expr(MethodRef m, std::size_t k, const IrExpr& e, const Ctx& ctx, std::size_t depth) {
    if (const auto* c = e.as<StringConst>()) return {constant(c->value)};
    if (const auto* c = e.as<IntConst>()) return {constant(std::to_string(c->value))};
    if (const auto* l = e.as<LocalRef>()) return local(m, k, l->name, ctx, depth);
    if (const auto* p = e.as<ParamRef>()) return param(m, p->index, ctx, depth);
    if (const auto* f = e.as<FieldRef>()) return field(*f, depth);
    if (const auto* a = e.as<ArrayRef>()) return array_element(m, k, *a, ctx, depth);
    if (const auto* c = e.as<Call>()) return call_result(m, k, *c, ctx, depth);
    if (e.is<ThisRef>()) return {hole(HoleReason::kNonConstant, "receiver object")};
    if (e.is<BinOp>()) return {hole(HoleReason::kNonConstant, "arithmetic result")};
    if (e.is<NewArray>() || e.is<NewObject>()) {
      return {hole(HoleReason::kNonConstant, "object is not a string")};
    }
    return {hole(HoleReason::kNonConstant, "unsupported expression")};
  }

  // Formal parameter: bind to the caller we descended from, or ascend to
  // every call site of the enclosing method.
  Alts param(MethodRef m, std::size_t index, const Ctx& ctx, std::size_t depth) {
    if (!ctx.stack.empty()) {
      const CallSite cs = ctx.stack.back();
      Ctx outer = ctx;
      outer.stack.pop_back();
      const Call* c = app_.method(cs.method).body[cs.index].call();
      if (index >= c->args.size()) {
        return {hole(HoleReason::kNoDefinition, "missing argument " + std::to_string(index))};
      }
      const MethodRef saved = active_.back();
      active_.pop_back();
      auto alts = immediate(cs.method, cs.index, c->args[index], outer, depth);
      active_.push_back(saved);
      return with_step(std::move(alts),
                       TraceStep{app_.describe(cs.method), cs.index,
                                 "parameter " + std::to_string(index) + " bound at call"});
    }
    const auto it = callers_.find(m);
    if (it == callers_.end() || it->second.empty()) {
      return {hole(HoleReason::kNoDefinition,
                   "parameter " + std::to_string(index) + " of " + app_.describe(m) +
                       " has no callers")};
    }
    if (!deeper(depth + 1)) return {hole(HoleReason::kBudget, "call depth budget exhausted")};
    Alts out;
    for (const auto& cs : it->second) {
      const TraceStep step{app_.describe(cs.method), cs.index,
                           "parameter " + std::to_string(index) + " from call site"};
      if (std::find(active_.begin(), active_.end(), cs.method) != active_.end()) {
        unite(out, with_step({hole(HoleReason::kRecursive, "recursive call chain")}, step));
        continue;
      }
      const Call* c = app_.method(cs.method).body[cs.index].call();
      if (index >= c->args.size()) continue;
      active_.push_back(cs.method);
      auto alts = immediate(cs.method, cs.index, c->args[index], Ctx{}, depth + 1);
      active_.pop_back();
      unite(out, with_step(std::move(alts), step));
    }
    if (out.empty()) return {hole(HoleReason::kNoDefinition, "no usable call site")};
    return out;
  }

  Alts field(const FieldRef& f, std::size_t depth) {
    const std::string key = f.owner + "." + f.name;
    if (active_fields_.contains(key)) {
      return {hole(HoleReason::kRecursive, "field " + key + " depends on itself")};
    }
    Alts out;
    if (const auto* cls = app_.find_class(f.owner)) {
      if (const auto* sf = cls->find_field(f.name); sf && sf->initializer) {
        auto init = constant(*sf->initializer);
        init.trace.push_back(TraceStep{key, 0, "static field initializer"});
        out.push_back(std::move(init));
      }
    }
    const auto it = field_stores_.find(key);
    if (it != field_stores_.end()) {
      if (!deeper(depth + 1)) {
        unite(out, {hole(HoleReason::kBudget, "call depth budget exhausted")});
        return out;
      }
      active_fields_.insert(key);
      for (const auto& st : it->second) {
        const IrStatement& s = app_.method(st.method).body[st.index];
        active_.push_back(st.method);
        auto alts = expr(st.method, st.index, s.rhs, Ctx{}, depth + 1);
        active_.pop_back();
        unite(out, with_step(std::move(alts), TraceStep{app_.describe(st.method), st.index,
                                                        "store to field " + key}));
      }
      active_fields_.erase(key);
    }
    if (out.empty()) {
      return {hole(HoleReason::kNoDefinition, "field " + key + " has no constant definition")};
    }
    return out;
  }

  std::optional<std::int64_t> int_value(MethodRef m, std::size_t at, const Immediate& imm) {
    if (const auto* c = std::get_if<IntConst>(&imm.node)) return c->value;
    const auto* l = std::get_if<LocalRef>(&imm.node);
    if (!l) return std::nullopt;
    const IrMethod& method = app_.method(m);
    std::string name = l->name;
    std::size_t before = at;
    for (int hops = 0; hops < 64; ++hops) {
      bool exhausted = false;
      const auto k = reaching_def(method, before, name, exhausted);
      if (!k) return std::nullopt;
      const auto& rhs = method.body[*k].rhs;
      if (const auto* c = rhs.as<IntConst>()) return c->value;
      const auto* copy = rhs.as<LocalRef>();
      if (!copy) return std::nullopt;
      name = copy->name;
      before = *k;
    }
    return std::nullopt;
  }

  using AllocSite = CallSite;

  // Allocation sites that `local` may point to just before `before`.
  std::set<AllocSite> array_allocs(MethodRef m, std::size_t before, const std::string& name,
                                   std::size_t hops) {
    std::set<AllocSite> out;
    if (hops > 16) return out;
    const IrMethod& method = app_.method(m);
    bool exhausted = false;
    const auto k = reaching_def(method, before, name, exhausted);
    if (!k) return out;
    const auto& rhs = method.body[*k].rhs;
    if (rhs.is<NewArray>()) {
      out.insert(AllocSite{m, *k});
    } else if (const auto* copy = rhs.as<LocalRef>()) {
      out = array_allocs(m, *k, copy->name, hops + 1);
    } else if (const auto* f = rhs.as<FieldRef>()) {
      const auto it = field_stores_.find(f->owner + "." + f->name);
      if (it == field_stores_.end()) return out;
      for (const auto& st : it->second) {
        const IrStatement& s = app_.method(st.method).body[st.index];
        if (const auto* src = s.rhs.as<LocalRef>()) {
          auto more = array_allocs(st.method, st.index, src->name, hops + 1);
          out.insert(more.begin(), more.end());
        }
      }
    }
    return out;
  }

  Alts array_element(MethodRef m, std::size_t k, const ArrayRef& ref, const Ctx& ctx,
                     std::size_t depth) {
    const auto idx = int_value(m, k, ref.index);
    if (!idx) return {hole(HoleReason::kNonConstant, "array index is not constant")};
    const auto allocs = array_allocs(m, k, ref.base, 0);
    if (allocs.empty()) {
      return {hole(HoleReason::kNoDefinition, "array " + ref.base + " has unknown origin")};
    }
    Alts out;
    for (const auto& st : array_stores_) {
      if (!tick()) {
        unite(out, {hole(HoleReason::kBudget, "statement budget exhausted")});
        break;
      }
      const IrStatement& s = app_.method(st.method).body[st.index];
      const auto* target = s.lhs->as<ArrayRef>();
      if (int_value(st.method, st.index, target->index) != idx) continue;
      const auto targets = array_allocs(st.method, st.index, target->base, 0);
      const bool aliased = std::any_of(targets.begin(), targets.end(),
                                       [&](const AllocSite& a) { return allocs.contains(a); });
      if (!aliased) continue;
      // Stores in another method are evaluated in that method's own context.
      const Ctx& store_ctx = st.method == m ? ctx : Ctx{};
      auto alts = expr(st.method, st.index, s.rhs, store_ctx, depth);
      unite(out, with_step(std::move(alts),
                           TraceStep{app_.describe(st.method), st.index,
                                     "store to " + target->base + "[" + std::to_string(*idx) +
                                         "]"}));
    }
    if (out.empty()) {
      return {hole(HoleReason::kNoDefinition,
                   "no store to element " + std::to_string(*idx) + " of " + ref.base)};
    }
    return out;
  }

  // Allocation site of the builder/string object `name` refers to.
  std::optional<std::size_t> object_alloc(const IrMethod& method, std::size_t before,
                                          std::string name) {
    for (int hops = 0; hops < 256; ++hops) {
      bool exhausted = false;
      const auto k = reaching_def(method, before, name, exhausted);
      if (!k) return std::nullopt;
      const auto& rhs = method.body[*k].rhs;
      if (rhs.is<NewObject>()) return *k;
      if (const auto* copy = rhs.as<LocalRef>()) {
        name = copy->name;
      } else if (const auto* c = rhs.as<Call>();
                 c && c->receiver && is_builder_type(c->callee.owner) &&
                 is_builder_type(c->callee.return_type)) {
        name = *c->receiver;  // append() returns its receiver
      } else {
        return std::nullopt;
      }
      before = *k;
    }
    return std::nullopt;
  }

  // Contents of the object allocated at `alloc` just before `before`.
  Alts object_contents(MethodRef m, std::size_t alloc, std::size_t before, const Ctx& ctx,
                       std::size_t depth) {
    const IrMethod& method = app_.method(m);
    const std::string where = app_.describe(m);
    Alts value{constant("")};
    for (std::size_t s = alloc + 1; s < before && s < method.body.size(); ++s) {
      if (!tick()) return product(value, {hole(HoleReason::kBudget, "statement budget exhausted")});
      const IrStatement& st = method.body[s];
      const Call* c = st.call();
      if (!c || !c->receiver) continue;
      if (object_alloc(method, s, *c->receiver) != alloc) continue;
      const std::string& op = c->callee.name;
      if (op == "<init>") {
        if (c->args.size() == 1 && !c->callee.param_types.empty() &&
            string_typed(c->callee.param_types[0])) {
          value = with_step(immediate(m, s, c->args[0], ctx, depth), TraceStep{where, s, "<init>"});
        }
      } else if (op == "append") {
        Alts piece;
        const auto& ptype = c->callee.param_types.empty() ? std::string{} : c->callee.param_types[0];
        if (ptype == "char") {
          if (auto v = int_value(m, s, c->args[0])) {
            piece = {constant(std::string(1, static_cast<char>(*v)))};
          } else {
            piece = {hole(HoleReason::kNonConstant, "non-constant char")};
          }
        } else {
          piece = immediate(m, s, c->args[0], ctx, depth);
        }
        value = product(value, with_step(std::move(piece), TraceStep{where, s, "append"}));
      } else if (op == "toString" || op == "length" || op == "charAt" || op == "hashCode") {
        continue;
      } else {
        value = product(value, {hole(HoleReason::kNonConstant, "builder operation " + op)});
      }
    }
    return value;
  }

  Alts call_result(MethodRef m, std::size_t k, const Call& c, const Ctx& ctx, std::size_t depth) {
    const auto& callee = c.callee;
    const IrMethod& method = app_.method(m);
    if (is_builder_type(callee.owner) && c.receiver) {
      const auto alloc = object_alloc(method, k, *c.receiver);
      if (!alloc) return {hole(HoleReason::kNonConstant, "builder of unknown origin")};
      if (callee.name == "toString") return object_contents(m, *alloc, k, ctx, depth);
      if (is_builder_type(callee.return_type)) return object_contents(m, *alloc, k + 1, ctx, depth);
    }
    if (callee.owner == "java.lang.String") {
      if (callee.name == "concat" && c.receiver && c.args.size() == 1) {
        return product(local(m, k, *c.receiver, ctx, depth), immediate(m, k, c.args[0], ctx, depth));
      }
      if ((callee.name == "toString" || callee.name == "intern") && c.receiver) {
        return local(m, k, *c.receiver, ctx, depth);
      }
      if (callee.name == "valueOf" && c.args.size() == 1) {
        const auto& ptype = callee.param_types.empty() ? std::string{} : callee.param_types[0];
        if (ptype == "char") {
          if (auto v = int_value(m, k, c.args[0])) return {constant(std::string(1, static_cast<char>(*v)))};
          return {hole(HoleReason::kNonConstant, "non-constant char")};
        }
        return immediate(m, k, c.args[0], ctx, depth);
      }
    }
    if (opt_.env.callees.contains(callee.owner + "." + callee.name) && !c.args.empty()) {
      return env_lookup(m, k, c, ctx, depth);
    }
    if (const auto target = app_.resolve(callee)) return descend(m, k, *target, ctx, depth);
    return {hole(HoleReason::kNonConstant, "result of external " + callee.to_string())};
  }

  Alts env_lookup(MethodRef m, std::size_t k, const Call& c, const Ctx& ctx, std::size_t depth) {
    const std::string where = app_.describe(m);
    Alts out;
    for (auto& key : immediate(m, k, c.args.front(), ctx, depth)) {
      if (has_holes(key)) {
        out.push_back(hole(HoleReason::kNonConstant, "env key is not constant"));
        continue;
      }
      const std::string name = value_of_pieces(key.pieces);
      std::optional<Alt> found;
      for (const auto& [path, entries] : opt_.env.files) {
        if (auto it = entries.find(name); it != entries.end()) {
          found = constant(it->second);
          found->trace = key.trace;
          found->trace.push_back(TraceStep{where, k, "env file " + path + " key " + name});
          break;
        }
      }
      if (found) {
        out.push_back(std::move(*found));
      } else {
        out.push_back(hole(HoleReason::kNoDefinition, "env key " + name + " not found"));
      }
    }
    cap(out);
    return out;
  }

  Alts descend(MethodRef m, std::size_t k, MethodRef target, const Ctx& ctx, std::size_t depth) {
    if (std::find(active_.begin(), active_.end(), target) != active_.end()) {
      return {hole(HoleReason::kRecursive, "recursive call to " + app_.describe(target))};
    }
    if (!deeper(depth + 1)) return {hole(HoleReason::kBudget, "call depth budget exhausted")};
    const IrMethod& callee = app_.method(target);
    Ctx inner = ctx;
    inner.stack.push_back(CallSite{m, k});
    active_.push_back(target);
    Alts out;
    for (const auto& s : callee.body) {
      if (s.kind != StmtKind::kReturn || s.rhs.is<Unknown>()) continue;
      unite(out, with_step(expr(target, s.index, s.rhs, inner, depth + 1),
                           TraceStep{app_.describe(target), s.index, "return value"}));
    }
    active_.pop_back();
    if (out.empty()) {
      return {hole(HoleReason::kNoDefinition, app_.describe(target) + " returns no value")};
    }
    return out;
  }
};

}  // namespace

SliceStatus SliceResult::status() const {
  if (paths.empty()) return SliceStatus::kUnresolved;
  const bool all_resolved = std::all_of(paths.begin(), paths.end(), [](const SlicePath& p) {
    return p.status == SliceStatus::kResolved;
  });
  if (all_resolved) return SliceStatus::kResolved;
  const bool all_unresolved = std::all_of(paths.begin(), paths.end(), [](const SlicePath& p) {
    return p.status == SliceStatus::kUnresolved;
  });
  return all_unresolved ? SliceStatus::kUnresolved : SliceStatus::kPartial;
}

std::vector<std::string> SliceResult::resolved_values() const {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (p.status == SliceStatus::kResolved) out.push_back(p.value);
  }
  return out;
}

SliceResult backward_slice(const IrApp& app, CallSite site, std::size_t arg_index,
                           const SliceOptions& options) {
  Slicer slicer(app, options);
  return slicer.run(site, arg_index);
}

SigFlowResult run_sig_flow(const IrApp& app, std::span<const ApiSignature> sigs,
                           const SliceOptions& options) {
  SigFlowResult result;
  for (const auto& match : match_signatures(app, sigs)) {
    const ApiSignature& sig = sigs[match.signature];
    const IrMethod& method = app.method(match.site.method);
    const Call* call = method.body[match.site.index].call();
    for (const auto arg : sig.secret_param_indices) {
      if (arg >= call->args.size()) continue;
      const auto slice = backward_slice(app, match.site, arg, options);
      std::set<std::string> seen;
      for (const auto& path : slice.paths) {
        if (path.status != SliceStatus::kResolved || path.value.empty()) {
          result.diagnostics.push_back(SliceDiagnostic{
              match.site, app.describe(match.site.method) + "#" + std::to_string(match.site.index),
              sig.provider, arg, match.fuzzy, path});
          continue;
        }
        if (!seen.insert(path.value).second) continue;
        SecretFinding f;
        f.app_id = app.app_id();
        f.value = path.value;
        f.provider = sig.provider;
        f.detectors = {Detector::kSigFlow};
        f.locations = {FindingLocation{method.owner, method.name, match.site.index}};
        f.confidence[Detector::kSigFlow] = match.fuzzy ? 0.5 : 1.0;
        f.trace = path.trace;
        result.findings.push_back(std::move(f));
      }
    }
  }
  result.findings = collapse_findings(std::move(result.findings));
  return result;
}

}  // namespace secretsieve
