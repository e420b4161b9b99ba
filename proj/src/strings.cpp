#include "secretsieve/strings.hpp"

#include <stdexcept>

namespace secretsieve {
namespace {

void push_imm(const Immediate& imm, std::vector<std::string>& out) {
  if (const auto* s = std::get_if<StringConst>(&imm.node)) out.push_back(s->value);
}

void push_expr(const IrExpr& expr, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, StringConst>) {
          out.push_back(node.value);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : node.args) push_imm(a, out);
        } else if constexpr (std::is_same_v<T, NewArray>) {
          push_imm(node.length, out);
        } else if constexpr (std::is_same_v<T, ArrayRef>) {
          push_imm(node.index, out);
        } else if constexpr (std::is_same_v<T, BinOp>) {
          push_imm(node.lhs, out);
          push_imm(node.rhs, out);
        }
      },
      expr.node);
}

}  // namespace

std::vector<std::string> statement_strings(const IrStatement& stmt) {
  std::vector<std::string> out;
  if (stmt.lhs) push_expr(*stmt.lhs, out);
  push_expr(stmt.rhs, out);
  return out;
}

std::vector<StringOccurrence> extract_occurrences(const IrApp& app) {
  std::vector<StringOccurrence> out;
  for (std::size_t c = 0; c < app.classes().size(); ++c) {
    const auto& unit = app.classes()[c];
    for (const auto& field : unit.static_fields) {
      if (!field.initializer) continue;
      out.push_back(StringOccurrence{*field.initializer, app.app_id(), unit.qualified_name,
                                     std::nullopt, std::nullopt, StringOrigin::kStaticField,
                                     std::nullopt});
    }
    for (std::size_t m = 0; m < unit.methods.size(); ++m) {
      const auto& method = unit.methods[m];
      for (const auto& stmt : method.body) {
        for (auto& value : statement_strings(stmt)) {
          out.push_back(StringOccurrence{std::move(value), app.app_id(), unit.qualified_name,
                                         method.name, stmt.index, StringOrigin::kMethodBody,
                                         MethodRef{c, m}});
        }
      }
    }
  }
  return out;
}

std::vector<StringGroup> build_string_groups(const IrApp& app, std::size_t min_size) {
  if (min_size < 1) throw std::invalid_argument("min_size must be at least 1");
  std::vector<StringGroup> out;
  app.for_each_method([&](MethodRef ref, const IrMethod& method) {
    StringGroup group{app.app_id(), method.owner, method.name, ref, {}};
    for (const auto& stmt : method.body) {
      for (auto& s : statement_strings(stmt)) group.strings.push_back(std::move(s));
    }
    if (group.strings.size() >= min_size) out.push_back(std::move(group));
  });
  return out;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string occurrences_to_csv(const std::vector<StringOccurrence>& occurrences) {
  std::string out = "app_id,class,method,index,value\r\n";
  for (const auto& occ : occurrences) {
    out += csv_escape(occ.app_id) + ',' + csv_escape(occ.class_name) + ',' +
           csv_escape(occ.method_name.value_or("")) + ',' +
           (occ.statement_index ? std::to_string(*occ.statement_index) : std::string{}) + ',' +
           csv_escape(occ.value) + "\r\n";
  }
  return out;
}

}  // namespace secretsieve
