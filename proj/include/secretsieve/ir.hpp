#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace secretsieve {

/// Raised when a class, field or method header cannot be parsed.
class FileSyntaxError : public std::runtime_error {
 public:
  FileSyntaxError(std::string path, std::size_t line, const std::string& what);

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Fully qualified callee as written at a call site. Short-form calls
/// (`r7.ggh(ctx, "x")`) carry an empty owner and no declared parameter types.
struct MethodSig {
  std::string owner;
  std::string return_type;
  std::string name;
  std::vector<std::string> param_types;
  bool short_form = false;

  bool operator==(const MethodSig&) const = default;
  auto operator<=>(const MethodSig&) const = default;

  std::string to_string() const;
};

struct StringConst {
  std::string value;
  bool operator==(const StringConst&) const = default;
};
struct IntConst {
  std::int64_t value = 0;
  bool operator==(const IntConst&) const = default;
};
struct LocalRef {
  std::string name;
  bool operator==(const LocalRef&) const = default;
};

/// Jimple immediates: the only operand forms allowed in call arguments,
/// array indices and binary operations.
struct Immediate {
  std::variant<LocalRef, IntConst, StringConst> node;
  bool operator==(const Immediate&) const = default;
};

/// Static field when `base` is empty, instance field otherwise.
struct FieldRef {
  std::string owner;
  std::string type;
  std::string name;
  std::optional<std::string> base;
  bool operator==(const FieldRef&) const = default;
};

enum class InvokeKind { kVirtual, kSpecial, kInterface, kStatic, kShort };

struct Call {
  InvokeKind kind = InvokeKind::kVirtual;
  MethodSig callee;
  std::optional<std::string> receiver;
  std::vector<Immediate> args;
  bool operator==(const Call&) const = default;
};

struct NewArray {
  std::string elem_type;
  Immediate length;
  bool operator==(const NewArray&) const = default;
};
struct NewObject {
  std::string type;
  bool operator==(const NewObject&) const = default;
};
struct ArrayRef {
  std::string base;
  Immediate index;
  bool operator==(const ArrayRef&) const = default;
};
struct ParamRef {
  std::size_t index = 0;
  std::string type;
  bool operator==(const ParamRef&) const = default;
};
struct ThisRef {
  std::string type;
  bool operator==(const ThisRef&) const = default;
};
struct BinOp {
  std::string op;
  Immediate lhs;
  Immediate rhs;
  bool operator==(const BinOp&) const = default;
};
/// Anything outside the supported grammar; `raw` keeps the source text.
struct Unknown {
  std::string raw;
  bool operator==(const Unknown&) const = default;
};

struct IrExpr {
  std::variant<StringConst, IntConst, LocalRef, FieldRef, Call, NewArray,
               NewObject, ArrayRef, ParamRef, ThisRef, BinOp, Unknown>
      node;

  bool operator==(const IrExpr&) const = default;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

IrExpr to_expr(const Immediate& imm);

enum class StmtKind { kAssign, kInvoke, kReturn, kFieldStore, kArrayStore };

/// One statement. `lhs` is a LocalRef for assign, FieldRef for field_store,
/// ArrayRef for array_store, and absent for invoke/return. A void `return`
/// has an Unknown rhs with empty raw text.
struct IrStatement {
  std::size_t index = 0;
  StmtKind kind = StmtKind::kAssign;
  std::optional<IrExpr> lhs;
  IrExpr rhs;
  bool identity = false;  // `:=` form binding @this / @parameterN

  bool operator==(const IrStatement&) const = default;

  /// The call carried by this statement (bare invoke or `x = invoke`).
  const Call* call() const;
  /// Local defined by this statement, if it is an assignment to a local.
  std::optional<std::string> defined_local() const;
  /// True for statements the parser could not understand.
  bool is_unknown() const;
};

struct IrMethod {
  std::string owner;
  std::string name;
  std::vector<std::string> param_types;
  std::string return_type;
  bool is_static = false;
  std::vector<IrStatement> body;
  std::set<std::string> locals;

  bool operator==(const IrMethod&) const = default;

  MethodSig signature() const;
};

struct StaticField {
  std::string name;
  std::string type;
  std::optional<std::string> initializer;
  bool operator==(const StaticField&) const = default;
};

struct IrClassUnit {
  std::string qualified_name;
  std::vector<StaticField> static_fields;
  std::vector<IrMethod> methods;

  bool operator==(const IrClassUnit&) const = default;

  const StaticField* find_field(const std::string& name) const;
};

/// Stable handle to a method inside an IrApp.
struct MethodRef {
  std::size_t class_index = 0;
  std::size_t method_index = 0;
  bool operator==(const MethodRef&) const = default;
  auto operator<=>(const MethodRef&) const = default;
};

struct CallSite {
  MethodRef method;
  std::size_t index = 0;
  bool operator==(const CallSite&) const = default;
  auto operator<=>(const CallSite&) const = default;
};

/// Parsed model of one app. Immutable after construction; classes are kept
/// sorted by qualified name so lookups and iteration never depend on the
/// order input files were supplied in.
class IrApp {
 public:
  IrApp() = default;
  IrApp(std::string app_id, std::vector<IrClassUnit> classes,
        std::map<std::string, std::vector<std::string>> source_manifest);

  const std::string& app_id() const noexcept { return app_id_; }
  const std::vector<IrClassUnit>& classes() const noexcept { return classes_; }
  const std::map<std::string, std::vector<std::string>>& source_manifest() const noexcept {
    return source_manifest_;
  }

  const IrClassUnit* find_class(const std::string& qualified_name) const;
  std::optional<MethodRef> resolve(const MethodSig& sig) const;
  bool is_external(const MethodSig& sig) const { return !resolve(sig).has_value(); }

  const IrMethod& method(MethodRef ref) const;
  const IrClassUnit& owner_of(MethodRef ref) const { return classes_.at(ref.class_index); }
  std::string describe(MethodRef ref) const;

  /// Visits every method in (class, method) order.
  void for_each_method(const std::function<void(MethodRef, const IrMethod&)>& fn) const;

  bool operator==(const IrApp& other) const {
    return app_id_ == other.app_id_ && classes_ == other.classes_;
  }

 private:
  std::string app_id_;
  std::vector<IrClassUnit> classes_;
  std::map<std::string, std::vector<std::string>> source_manifest_;
  std::map<std::string, std::size_t> class_index_;
  std::map<MethodSig, MethodRef> method_index_;
};

using CalleeMatcher = std::function<bool(const MethodSig&)>;

/// Every statement carrying a call whose callee satisfies `matcher`, in
/// (class, method, index) order.
std::vector<CallSite> find_callsites(const IrApp& app, const CalleeMatcher& matcher);

/// Statements [center - radius, center + radius] clipped to the body.
std::vector<IrStatement> method_window(const IrMethod& method, std::size_t center,
                                       std::size_t radius);

}  // namespace secretsieve
