#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "secretsieve/ir.hpp"

namespace oracle {

/// Argument values one external call received during concrete execution.
struct Observation {
  secretsieve::CallSite site;
  secretsieve::MethodSig callee;
  std::vector<std::optional<std::string>> args;  // string rendering, nullopt when unknown
};

/// Forward concrete interpreter over straight-line IR. Runs static
/// initializers and every <clinit>, then each method nobody in the app
/// calls, with unknown parameters. StringBuilder, String, arrays, fields and
/// env-file lookups are emulated; every other external call is observed.
class Interpreter {
 public:
  using Env = std::map<std::string, std::map<std::string, std::string>>;

  Interpreter(const secretsieve::IrApp& app, Env env = {});

  std::vector<Observation> run();

 private:
  struct Opaque {};
  struct Ref {
    std::size_t id;
  };
  using Value = std::variant<Opaque, std::int64_t, std::string, Ref>;
  struct Object {
    std::string type;
    std::optional<std::string> text;  // builders and boxed strings
    std::vector<Value> elems;
    std::map<std::string, Value> fields;
  };
  using Frame = std::map<std::string, Value>;

  Value invoke(secretsieve::MethodRef ref, std::optional<Value> self, std::vector<Value> args,
               std::size_t depth);
  Value call(const secretsieve::Call& c, secretsieve::CallSite site, Frame& frame,
             std::size_t depth);
  Value external(const secretsieve::Call& c, secretsieve::CallSite site, Frame& frame);
  Value eval(const secretsieve::IrExpr& e, Frame& frame, secretsieve::CallSite site,
             std::size_t depth);
  Value imm(const secretsieve::Immediate& i, const Frame& frame) const;
  static std::optional<std::string> as_text(const Value& v, const std::string& type,
                                            const std::vector<Object>& heap);

  const secretsieve::IrApp& app_;
  Env env_;
  std::vector<Object> heap_;
  std::map<std::string, Value> statics_;
  std::vector<Observation> observed_;
};

}  // namespace oracle
