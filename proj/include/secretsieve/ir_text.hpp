#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secretsieve/ir.hpp"

namespace secretsieve {

struct IrSourceFile {
  std::string path;
  std::string text;

  bool operator==(const IrSourceFile&) const = default;
};

/// Parses one app from its `.jir` files. Malformed headers throw
/// FileSyntaxError; malformed statements degrade to Unknown.
IrApp parse_app(std::string app_id, const std::vector<IrSourceFile>& files);

/// Parses the classes of a single file (zero or one class).
std::vector<IrClassUnit> parse_file(const IrSourceFile& file);

/// Parses one statement line. Never throws; unparseable text yields an
/// assign statement with an Unknown rhs.
IrStatement parse_statement(std::string_view line, std::size_t index);

std::string print_class(const IrClassUnit& unit);
std::string print_statement(const IrStatement& stmt);
std::string print_expr(const IrExpr& expr);
std::string print_immediate(const Immediate& imm);

/// Jimple-style quoting: `"` and `\` are escaped, control bytes use \uXXXX.
std::string quote_string(std::string_view raw);

/// Pretty-prints every class of `app` to one file per class.
std::vector<IrSourceFile> print_app(const IrApp& app);

}  // namespace secretsieve
