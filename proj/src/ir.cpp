#include "secretsieve/ir.hpp"

#include <algorithm>
#include <sstream>

namespace secretsieve {

FileSyntaxError::FileSyntaxError(std::string path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
      path_(std::move(path)),
      line_(line) {}

std::string MethodSig::to_string() const {
  if (short_form) return name + "(…)";
  std::ostringstream out;
  out << '<' << owner << ": " << return_type << ' ' << name << '(';
  for (std::size_t i = 0; i < param_types.size(); ++i) {
    if (i) out << ',';
    out << param_types[i];
  }
  out << ")>";
  return out.str();
}

IrExpr to_expr(const Immediate& imm) {
  return std::visit([](const auto& v) { return IrExpr{v}; }, imm.node);
}

const Call* IrStatement::call() const { return rhs.as<Call>(); }

std::optional<std::string> IrStatement::defined_local() const {
  if (kind != StmtKind::kAssign || !lhs) return std::nullopt;
  if (const auto* local = lhs->as<LocalRef>()) return local->name;
  return std::nullopt;
}

bool IrStatement::is_unknown() const {
  return kind == StmtKind::kAssign && rhs.is<Unknown>();
}

MethodSig IrMethod::signature() const {
  return MethodSig{owner, return_type, name, param_types, false};
}

const StaticField* IrClassUnit::find_field(const std::string& field_name) const {
  for (const auto& f : static_fields) {
    if (f.name == field_name) return &f;
  }
  return nullptr;
}

IrApp::IrApp(std::string app_id, std::vector<IrClassUnit> classes,
             std::map<std::string, std::vector<std::string>> source_manifest)
    : app_id_(std::move(app_id)),
      classes_(std::move(classes)),
      source_manifest_(std::move(source_manifest)) {
  std::stable_sort(classes_.begin(), classes_.end(),
                   [](const IrClassUnit& a, const IrClassUnit& b) {
                     return a.qualified_name < b.qualified_name;
                   });
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    class_index_.emplace(classes_[c].qualified_name, c);
    for (std::size_t m = 0; m < classes_[c].methods.size(); ++m) {
      method_index_.emplace(classes_[c].methods[m].signature(), MethodRef{c, m});
    }
  }
}

const IrClassUnit* IrApp::find_class(const std::string& qualified_name) const {
  auto it = class_index_.find(qualified_name);
  return it == class_index_.end() ? nullptr : &classes_[it->second];
}

std::optional<MethodRef> IrApp::resolve(const MethodSig& sig) const {
  if (sig.short_form) return std::nullopt;
  auto it = method_index_.find(sig);
  if (it == method_index_.end()) return std::nullopt;
  return it->second;
}

const IrMethod& IrApp::method(MethodRef ref) const {
  return classes_.at(ref.class_index).methods.at(ref.method_index);
}

std::string IrApp::describe(MethodRef ref) const { return method(ref).signature().to_string(); }

void IrApp::for_each_method(const std::function<void(MethodRef, const IrMethod&)>& fn) const {
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    for (std::size_t m = 0; m < classes_[c].methods.size(); ++m) {
      fn(MethodRef{c, m}, classes_[c].methods[m]);
    }
  }
}

std::vector<CallSite> find_callsites(const IrApp& app, const CalleeMatcher& matcher) {
  std::vector<CallSite> out;
  app.for_each_method([&](MethodRef ref, const IrMethod& method) {
    for (const auto& stmt : method.body) {
      if (const Call* call = stmt.call(); call && matcher(call->callee)) {
        out.push_back(CallSite{ref, stmt.index});
      }
    }
  });
  return out;
}

std::vector<IrStatement> method_window(const IrMethod& method, std::size_t center,
                                       std::size_t radius) {
  if (center >= method.body.size()) {
    throw IndexOutOfRange("window center " + std::to_string(center) +
                          " outside method body of " + std::to_string(method.body.size()));
  }
  const std::size_t first = center > radius ? center - radius : 0;
  const std::size_t tail = method.body.size() - 1 - center;
  const std::size_t last = center + std::min(radius, tail);
  return {method.body.begin() + static_cast<std::ptrdiff_t>(first),
          method.body.begin() + static_cast<std::ptrdiff_t>(last) + 1};
}

}  // namespace secretsieve
