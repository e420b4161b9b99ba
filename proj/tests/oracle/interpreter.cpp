#include "oracle/interpreter.hpp"

#include <set>
#include <stdexcept>

namespace oracle {

using namespace secretsieve;

namespace {

constexpr std::size_t kMaxDepth = 64;

bool is_builder(const std::string& owner) {
  return owner == "java.lang.StringBuilder" || owner == "java.lang.StringBuffer";
}

}  // namespace

Interpreter::Interpreter(const IrApp& app, Env env) : app_(app), env_(std::move(env)) {}

std::optional<std::string> Interpreter::as_text(const Value& v, const std::string& type,
                                                const std::vector<Object>& heap) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    if (type == "char") return std::string(1, static_cast<char>(*i));
    return std::to_string(*i);
  }
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* r = std::get_if<Ref>(&v)) return heap.at(r->id).text;
  return std::nullopt;
}

Interpreter::Value Interpreter::imm(const Immediate& i, const Frame& frame) const {
  if (const auto* l = std::get_if<LocalRef>(&i.node)) {
    auto it = frame.find(l->name);
    return it == frame.end() ? Value{Opaque{}} : it->second;
  }
  if (const auto* n = std::get_if<IntConst>(&i.node)) return n->value;
  return std::get<StringConst>(i.node).value;
}

Interpreter::Value Interpreter::eval(const IrExpr& e, Frame& frame, CallSite site,
                                     std::size_t depth) {
  if (const auto* s = e.as<StringConst>()) return s->value;
  if (const auto* n = e.as<IntConst>()) return n->value;
  if (const auto* l = e.as<LocalRef>()) return imm(Immediate{*l}, frame);
  if (const auto* f = e.as<FieldRef>()) {
    if (!f->base) {
      auto it = statics_.find(f->owner + "." + f->name);
      return it == statics_.end() ? Value{Opaque{}} : it->second;
    }
    const Value base = imm(Immediate{LocalRef{*f->base}}, frame);
    if (const auto* r = std::get_if<Ref>(&base)) {
      auto& fields = heap_.at(r->id).fields;
      auto it = fields.find(f->name);
      if (it != fields.end()) return it->second;
    }
    return Opaque{};
  }
  if (const auto* c = e.as<Call>()) return call(*c, site, frame, depth);
  if (const auto* a = e.as<NewArray>()) {
    const Value len = imm(a->length, frame);
    Object obj{a->elem_type + "[]", std::nullopt, {}, {}};
    if (const auto* n = std::get_if<std::int64_t>(&len); n && *n >= 0 && *n < 1'000'000) {
      obj.elems.assign(static_cast<std::size_t>(*n), Value{Opaque{}});
    }
    heap_.push_back(std::move(obj));
    return Ref{heap_.size() - 1};
  }
  if (const auto* o = e.as<NewObject>()) {
    heap_.push_back(Object{o->type, std::nullopt, {}, {}});
    return Ref{heap_.size() - 1};
  }
  if (const auto* a = e.as<ArrayRef>()) {
    const Value base = imm(Immediate{LocalRef{a->base}}, frame);
    const Value idx = imm(a->index, frame);
    const auto* r = std::get_if<Ref>(&base);
    const auto* i = std::get_if<std::int64_t>(&idx);
    if (r && i && *i >= 0 && static_cast<std::size_t>(*i) < heap_.at(r->id).elems.size()) {
      return heap_.at(r->id).elems[static_cast<std::size_t>(*i)];
    }
    return Opaque{};
  }
  if (const auto* b = e.as<BinOp>()) {
    const Value x = imm(b->lhs, frame);
    const Value y = imm(b->rhs, frame);
    const auto* l = std::get_if<std::int64_t>(&x);
    const auto* r = std::get_if<std::int64_t>(&y);
    if (!l || !r) return Opaque{};
    if (b->op == "+") return *l + *r;
    if (b->op == "-") return *l - *r;
    if (b->op == "*") return *l * *r;
    if (b->op == "/" && *r != 0) return *l / *r;
    if (b->op == "%" && *r != 0) return *l % *r;
    return Opaque{};
  }
  return Opaque{};
}

Interpreter::Value Interpreter::call(const Call& c, CallSite site, Frame& frame,
                                     std::size_t depth) {
  if (!c.callee.short_form) {
    if (auto target = app_.resolve(c.callee)) {
      std::optional<Value> self;
      if (c.receiver) self = imm(Immediate{LocalRef{*c.receiver}}, frame);
      std::vector<Value> args;
      for (const auto& a : c.args) args.push_back(imm(a, frame));
      return invoke(*target, self, std::move(args), depth + 1);
    }
  }
  return external(c, site, frame);
}

Interpreter::Value Interpreter::external(const Call& c, CallSite site, Frame& frame) {
  const MethodSig& sig = c.callee;
  auto arg_text = [&](std::size_t i) -> std::optional<std::string> {
    if (i >= c.args.size()) return std::nullopt;
    const std::string type = i < sig.param_types.size() ? sig.param_types[i] : "";
    return as_text(imm(c.args[i], frame), type, heap_);
  };
  Value self = Opaque{};
  if (c.receiver) self = imm(Immediate{LocalRef{*c.receiver}}, frame);

  if (is_builder(sig.owner) || (sig.owner == "java.lang.String" && sig.name == "<init>")) {
    auto* r = std::get_if<Ref>(&self);
    if (sig.name == "<init>") {
      if (r) {
        if (c.args.empty()) {
          heap_.at(r->id).text = "";
        } else if (sig.param_types.size() == 1 && sig.param_types[0] == "java.lang.String") {
          heap_.at(r->id).text = arg_text(0);
        } else {
          heap_.at(r->id).text = std::nullopt;  // capacity or other constructor
          if (sig.param_types.size() == 1 && sig.param_types[0] == "int") heap_.at(r->id).text = "";
        }
      }
      return Opaque{};
    }
    if (sig.name == "append") {
      if (r) {
        auto& text = heap_.at(r->id).text;
        const auto piece = arg_text(0);
        if (text && piece) {
          *text += *piece;
        } else {
          text = std::nullopt;
        }
      }
      return self;
    }
    if (sig.name == "toString") {
      if (r && heap_.at(r->id).text) return *heap_.at(r->id).text;
      return Opaque{};
    }
  }
  if (sig.owner == "java.lang.String") {
    const auto recv = as_text(self, "java.lang.String", heap_);
    if (sig.name == "concat") {
      const auto arg = arg_text(0);
      if (recv && arg) return *recv + *arg;
      return Opaque{};
    }
    if (sig.name == "toString" || sig.name == "intern") {
      if (recv) return *recv;
      return Opaque{};
    }
    if (sig.name == "valueOf") {
      if (auto t = arg_text(0)) return *t;
      return Opaque{};
    }
  }
  const std::string hook = sig.owner + "." + sig.name;
  if (hook == "java.util.Properties.getProperty" || hook == "android.content.res.Resources.getString") {
    if (const auto key = arg_text(0)) {
      for (const auto& [file, entries] : env_) {
        if (auto it = entries.find(*key); it != entries.end()) return it->second;
      }
    }
    return Opaque{};
  }

  Observation obs{site, sig, {}};
  for (std::size_t i = 0; i < c.args.size(); ++i) obs.args.push_back(arg_text(i));
  observed_.push_back(std::move(obs));
  return Opaque{};
}

Interpreter::Value Interpreter::invoke(MethodRef ref, std::optional<Value> self,
                                       std::vector<Value> args, std::size_t depth) {
  if (depth > kMaxDepth) return Opaque{};
  const IrMethod& m = app_.method(ref);
  Frame frame;
  for (const auto& s : m.body) {
    const CallSite site{ref, s.index};
    if (s.identity) {
      if (const auto* p = s.rhs.as<ParamRef>()) {
        frame[*s.defined_local()] = p->index < args.size() ? args[p->index] : Value{Opaque{}};
      } else if (self) {
        frame[*s.defined_local()] = *self;
      } else {
        heap_.push_back(Object{m.owner, std::nullopt, {}, {}});
        frame[*s.defined_local()] = Ref{heap_.size() - 1};
      }
      continue;
    }
    switch (s.kind) {
      case StmtKind::kReturn:
        if (s.rhs.is<Unknown>()) return Opaque{};
        return eval(s.rhs, frame, site, depth);
      case StmtKind::kInvoke:
        eval(s.rhs, frame, site, depth);
        break;
      case StmtKind::kAssign: {
        Value v = eval(s.rhs, frame, site, depth);
        if (auto l = s.defined_local()) frame[*l] = std::move(v);
        break;
      }
      case StmtKind::kFieldStore: {
        Value v = eval(s.rhs, frame, site, depth);
        const auto& f = *s.lhs->as<FieldRef>();
        if (!f.base) {
          statics_[f.owner + "." + f.name] = std::move(v);
        } else if (const auto* r = std::get_if<Ref>(&frame[*f.base])) {
          heap_.at(r->id).fields[f.name] = std::move(v);
        }
        break;
      }
      case StmtKind::kArrayStore: {
        Value v = eval(s.rhs, frame, site, depth);
        const auto& a = *s.lhs->as<ArrayRef>();
        const Value base = imm(Immediate{LocalRef{a.base}}, frame);
        const Value idx = imm(a.index, frame);
        const auto* r = std::get_if<Ref>(&base);
        const auto* i = std::get_if<std::int64_t>(&idx);
        if (r && i && *i >= 0 && static_cast<std::size_t>(*i) < heap_.at(r->id).elems.size()) {
          heap_.at(r->id).elems[static_cast<std::size_t>(*i)] = std::move(v);
        }
        break;
      }
    }
  }
  return Opaque{};
}

std::vector<Observation> Interpreter::run() {
  observed_.clear();
  heap_.clear();
  statics_.clear();
  for (const auto& c : app_.classes()) {
    for (const auto& f : c.static_fields) {
      if (f.initializer) statics_[c.qualified_name + "." + f.name] = *f.initializer;
    }
  }
  std::set<MethodRef> called;
  std::vector<MethodRef> clinits, all;
  app_.for_each_method([&](MethodRef ref, const IrMethod& m) {
    all.push_back(ref);
    if (m.name == "<clinit>") clinits.push_back(ref);
    for (const auto& s : m.body) {
      if (const Call* c = s.call(); c && !c->callee.short_form) {
        if (auto t = app_.resolve(c->callee)) called.insert(*t);
      }
    }
  });
  for (auto ref : clinits) invoke(ref, std::nullopt, {}, 0);
  for (auto ref : all) {
    if (called.contains(ref) || app_.method(ref).name == "<clinit>") continue;
    invoke(ref, std::nullopt, {}, 0);
  }
  return observed_;
}

}  // namespace oracle
