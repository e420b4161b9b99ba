#include "secretsieve/ir_text.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace secretsieve {
namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_type_char(char c) { return is_ident_char(c) || c == '.' || c == '[' || c == ']'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_keyword(std::string_view word) {
  static constexpr std::string_view kKeywords[] = {
      "return", "new", "newarray", "staticinvoke", "virtualinvoke", "specialinvoke",
      "interfaceinvoke", "null", "class", "method", "staticfield"};
  for (auto k : kKeywords) {
    if (word == k) return true;
  }
  return false;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Minimal cursor over one line; every `parse_*` returns false and leaves
/// the position unspecified on failure, so callers save/restore `pos`.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  std::size_t pos = 0;

  bool at_end() const { return pos >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos]; }
  std::string_view rest() const { return text_.substr(std::min(pos, text_.size())); }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (peek() != c) return false;
    ++pos;
    return true;
  }
  bool eat_word(std::string_view word) {
    skip_ws();
    if (text_.substr(pos, word.size()) != word) return false;
    const std::size_t end = pos + word.size();
    if (end < text_.size() && is_ident_char(text_[end])) return false;
    pos = end;
    return true;
  }
  bool eat_literal(std::string_view lit) {
    skip_ws();
    if (text_.substr(pos, lit.size()) != lit) return false;
    pos += lit.size();
    return true;
  }
  bool done() {
    skip_ws();
    return at_end();
  }

  bool identifier(std::string& out) {
    skip_ws();
    if (!is_ident_start(peek())) return false;
    const std::size_t start = pos;
    while (!at_end() && is_ident_char(text_[pos])) ++pos;
    out.assign(text_.substr(start, pos - start));
    return true;
  }

  bool local(std::string& out) {
    const std::size_t save = pos;
    if (!identifier(out) || is_keyword(out)) {
      pos = save;
      return false;
    }
    return true;
  }

  bool type_name(std::string& out) {
    skip_ws();
    const std::size_t start = pos;
    while (!at_end() && is_type_char(text_[pos])) ++pos;
    if (pos == start) return false;
    out.assign(text_.substr(start, pos - start));
    return true;
  }

  /// Member name inside a signature: plain identifier or `<init>`/`<clinit>`.
  bool member_name(std::string& out) {
    skip_ws();
    const std::size_t start = pos;
    if (peek() == '<') {
      ++pos;
      while (!at_end() && is_ident_char(text_[pos])) ++pos;
      if (peek() != '>') return false;
      ++pos;
    } else {
      while (!at_end() && is_ident_char(text_[pos])) ++pos;
    }
    if (pos == start) return false;
    out.assign(text_.substr(start, pos - start));
    return true;
  }

  bool string_literal(std::string& out) {
    skip_ws();
    if (peek() != '"') return false;
    ++pos;
    out.clear();
    while (!at_end()) {
      const char c = text_[pos++];
      if (c == '"') return true;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) return false;
      const char e = text_[pos++];
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'u': {
          if (pos + 4 > text_.size()) return false;
          std::uint32_t cp = 0;
          auto [ptr, ec] = std::from_chars(text_.data() + pos, text_.data() + pos + 4, cp, 16);
          if (ec != std::errc{} || ptr != text_.data() + pos + 4) return false;
          pos += 4;
          append_utf8(out, cp);
          break;
        }
        default: return false;
      }
    }
    return false;
  }

  bool int_literal(std::int64_t& out) {
    skip_ws();
    const std::size_t start = pos;
    if (peek() == '-') ++pos;
    const std::size_t digits = pos;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos]))) ++pos;
    if (pos == digits || (!at_end() && is_ident_char(text_[pos]))) {
      pos = start;
      return false;
    }
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos, out);
    if (ec != std::errc{}) {
      pos = start;
      return false;
    }
    return true;
  }

  bool immediate(Immediate& out) {
    const std::size_t save = pos;
    std::string s;
    if (string_literal(s)) {
      out.node = StringConst{std::move(s)};
      return true;
    }
    pos = save;
    std::int64_t v = 0;
    if (int_literal(v)) {
      out.node = IntConst{v};
      return true;
    }
    pos = save;
    if (local(s)) {
      // `r0.<...>` and `r0[...]` are not immediates.
      const std::size_t after = pos;
      skip_ws();
      if (peek() == '.' || peek() == '[' || peek() == '(') {
        pos = save;
        return false;
      }
      pos = after;
      out.node = LocalRef{std::move(s)};
      return true;
    }
    pos = save;
    return false;
  }

  /// `<owner: type name>` (field) or `<owner: ret name(types)>` (method).
  bool signature(FieldRef* field, MethodSig* method) {
    const std::size_t save = pos;
    std::string owner, type, name;
    if (!eat('<') || !type_name(owner) || !eat(':') || !type_name(type) || !member_name(name)) {
      pos = save;
      return false;
    }
    skip_ws();
    if (peek() == '(') {
      if (!method) {
        pos = save;
        return false;
      }
      ++pos;
      std::vector<std::string> params;
      skip_ws();
      if (peek() != ')') {
        do {
          std::string t;
          if (!type_name(t)) {
            pos = save;
            return false;
          }
          params.push_back(std::move(t));
        } while (eat(','));
      }
      if (!eat(')') || !eat('>')) {
        pos = save;
        return false;
      }
      *method = MethodSig{std::move(owner), std::move(type), std::move(name), std::move(params),
                          false};
      return true;
    }
    if (!field || !eat('>')) {
      pos = save;
      return false;
    }
    *field = FieldRef{std::move(owner), std::move(type), std::move(name), std::nullopt};
    return true;
  }

  bool args(std::vector<Immediate>& out) {
    if (!eat('(')) return false;
    skip_ws();
    if (peek() == ')') {
      ++pos;
      return true;
    }
    do {
      Immediate imm;
      if (!immediate(imm)) return false;
      out.push_back(std::move(imm));
    } while (eat(','));
    return eat(')');
  }

  bool invoke(Call& out) {
    const std::size_t save = pos;
    static constexpr std::pair<std::string_view, InvokeKind> kKinds[] = {
        {"virtualinvoke", InvokeKind::kVirtual},
        {"specialinvoke", InvokeKind::kSpecial},
        {"interfaceinvoke", InvokeKind::kInterface},
    };
    if (eat_word("staticinvoke")) {
      out = Call{InvokeKind::kStatic, {}, std::nullopt, {}};
      if (signature(nullptr, &out.callee) && args(out.args)) return true;
      pos = save;
      return false;
    }
    for (const auto& [word, kind] : kKinds) {
      if (!eat_word(word)) continue;
      std::string recv;
      out = Call{kind, {}, std::nullopt, {}};
      if (local(recv) && eat('.') && signature(nullptr, &out.callee) && args(out.args)) {
        out.receiver = std::move(recv);
        return true;
      }
      pos = save;
      return false;
    }
    // Short form `recv.name(args)` as printed by decompilers.
    std::string recv, name;
    if (local(recv) && eat('.') && identifier(name)) {
      skip_ws();
      if (peek() == '(') {
        out = Call{InvokeKind::kShort, MethodSig{"", "", name, {}, true}, recv, {}};
        if (args(out.args)) return true;
      }
    }
    pos = save;
    return false;
  }

  bool field_ref(FieldRef& out) {
    const std::size_t save = pos;
    skip_ws();
    if (peek() == '<') {
      if (signature(&out, nullptr)) return true;
      pos = save;
      return false;
    }
    std::string base;
    if (local(base) && eat('.')) {
      skip_ws();
      if (peek() == '<' && signature(&out, nullptr)) {
        out.base = std::move(base);
        return true;
      }
    }
    pos = save;
    return false;
  }

  bool array_ref(ArrayRef& out) {
    const std::size_t save = pos;
    std::string base;
    Immediate idx;
    if (local(base) && eat('[') && immediate(idx) && eat(']')) {
      out = ArrayRef{std::move(base), std::move(idx)};
      return true;
    }
    pos = save;
    return false;
  }

  bool rhs(IrExpr& out) {
    const std::size_t save = pos;
    std::string type;
    if (eat_word("newarray")) {
      Immediate len;
      if (eat('(') && type_name(type) && eat(')') && eat('[') && immediate(len) && eat(']')) {
        out.node = NewArray{std::move(type), std::move(len)};
        return true;
      }
      pos = save;
      return false;
    }
    if (eat_word("new")) {
      if (type_name(type)) {
        out.node = NewObject{std::move(type)};
        return true;
      }
      pos = save;
      return false;
    }
    Call call;
    if (invoke(call)) {
      out.node = std::move(call);
      return true;
    }
    FieldRef field;
    if (field_ref(field)) {
      out.node = std::move(field);
      return true;
    }
    ArrayRef arr;
    if (array_ref(arr)) {
      out.node = std::move(arr);
      return true;
    }
    Immediate lhs;
    if (!immediate(lhs)) return false;
    const std::size_t after_lhs = pos;
    skip_ws();
    static constexpr std::string_view kOps[] = {">>>", "<<", ">>", "+", "-", "*",
                                                "/",   "%",  "&",  "|", "^"};
    for (auto op : kOps) {
      if (rest().substr(0, op.size()) != op) continue;
      pos += op.size();
      Immediate rhs_imm;
      if (immediate(rhs_imm)) {
        out.node = BinOp{std::string(op), std::move(lhs), std::move(rhs_imm)};
        return true;
      }
      return false;
    }
    pos = after_lhs;
    out = to_expr(lhs);
    return true;
  }

 private:
  std::string_view text_;
};

IrStatement unknown_statement(std::string_view line, std::size_t index) {
  return IrStatement{index, StmtKind::kAssign, std::nullopt, IrExpr{Unknown{std::string(line)}},
                     false};
}

std::optional<IrStatement> try_parse_statement(std::string_view line, std::size_t index) {
  if (!line.empty() && line.back() == ';') line.remove_suffix(1);
  Cursor cur(line);

  if (cur.eat_word("return")) {
    if (cur.done()) {
      return IrStatement{index, StmtKind::kReturn, std::nullopt, IrExpr{Unknown{""}}, false};
    }
    Immediate value;
    if (cur.immediate(value) && cur.done()) {
      return IrStatement{index, StmtKind::kReturn, std::nullopt, to_expr(value), false};
    }
    return std::nullopt;
  }

  {
    Call call;
    Cursor probe(line);
    if (probe.invoke(call) && probe.done()) {
      return IrStatement{index, StmtKind::kInvoke, std::nullopt, IrExpr{std::move(call)}, false};
    }
  }

  IrExpr target;
  StmtKind kind = StmtKind::kAssign;
  FieldRef field;
  ArrayRef arr;
  std::string local;
  if (cur.field_ref(field)) {
    target.node = std::move(field);
    kind = StmtKind::kFieldStore;
  } else if (cur.array_ref(arr)) {
    target.node = std::move(arr);
    kind = StmtKind::kArrayStore;
  } else if (cur.local(local)) {
    target.node = LocalRef{std::move(local)};
  } else {
    return std::nullopt;
  }

  if (kind == StmtKind::kAssign && cur.eat_literal(":=")) {
    std::string type;
    if (cur.eat_literal("@this")) {
      if (cur.eat(':') && cur.type_name(type) && cur.done()) {
        return IrStatement{index, kind, std::move(target), IrExpr{ThisRef{std::move(type)}}, true};
      }
      return std::nullopt;
    }
    if (cur.eat_literal("@parameter")) {
      std::int64_t n = -1;
      if (cur.int_literal(n) && n >= 0 && cur.eat(':') && cur.type_name(type) && cur.done()) {
        return IrStatement{index, kind, std::move(target),
                           IrExpr{ParamRef{static_cast<std::size_t>(n), std::move(type)}}, true};
      }
    }
    return std::nullopt;
  }
  if (!cur.eat('=')) return std::nullopt;
  IrExpr value;
  if (!cur.rhs(value) || !cur.done()) return std::nullopt;
  return IrStatement{index, kind, std::move(target), std::move(value), false};
}

void collect_locals(const Immediate& imm, std::set<std::string>& out) {
  if (const auto* l = std::get_if<LocalRef>(&imm.node)) out.insert(l->name);
}

void collect_locals(const IrExpr& expr, std::set<std::string>& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, LocalRef>) {
          out.insert(node.name);
        } else if constexpr (std::is_same_v<T, FieldRef>) {
          if (node.base) out.insert(*node.base);
        } else if constexpr (std::is_same_v<T, Call>) {
          if (node.receiver) out.insert(*node.receiver);
          for (const auto& a : node.args) collect_locals(a, out);
        } else if constexpr (std::is_same_v<T, NewArray>) {
          collect_locals(node.length, out);
        } else if constexpr (std::is_same_v<T, ArrayRef>) {
          out.insert(node.base);
          collect_locals(node.index, out);
        } else if constexpr (std::is_same_v<T, BinOp>) {
          collect_locals(node.lhs, out);
          collect_locals(node.rhs, out);
        }
      },
      expr.node);
}

struct MethodHeader {
  bool is_static = false;
  std::string return_type;
  std::string name;
  std::vector<std::string> params;
};

std::optional<MethodHeader> parse_method_header(std::string_view line) {
  Cursor cur(line);
  MethodHeader h;
  if (!cur.eat_word("method")) return std::nullopt;
  h.is_static = cur.eat_word("static");
  if (!cur.type_name(h.return_type) || !cur.member_name(h.name) || !cur.eat('(')) {
    return std::nullopt;
  }
  cur.skip_ws();
  if (cur.peek() != ')') {
    do {
      std::string t;
      if (!cur.type_name(t)) return std::nullopt;
      h.params.push_back(std::move(t));
    } while (cur.eat(','));
  }
  if (!cur.eat(')') || !cur.eat('{') || !cur.done()) return std::nullopt;
  return h;
}

std::optional<StaticField> parse_static_field(std::string_view line) {
  Cursor cur(line);
  StaticField f;
  if (!cur.eat_word("staticfield") || !cur.type_name(f.type) || !cur.identifier(f.name)) {
    return std::nullopt;
  }
  if (cur.eat('=')) {
    std::string value;
    if (!cur.string_literal(value)) return std::nullopt;
    f.initializer = std::move(value);
  }
  if (!cur.done()) return std::nullopt;
  return f;
}

std::optional<std::string> parse_class_header(std::string_view line) {
  Cursor cur(line);
  std::string name;
  if (!cur.eat_word("class") || !cur.type_name(name) || !cur.done()) return std::nullopt;
  if (name.front() == '.' || name.back() == '.' || name.find("..") != std::string::npos) {
    return std::nullopt;
  }
  return name;
}

bool starts_with_word(std::string_view line, std::string_view word) {
  return line.substr(0, word.size()) == word &&
         (line.size() == word.size() || !is_ident_char(line[word.size()]));
}

void finish_method(IrMethod& m) {
  for (const auto& stmt : m.body) {
    if (stmt.lhs) collect_locals(*stmt.lhs, m.locals);
    collect_locals(stmt.rhs, m.locals);
  }
}

}  // namespace

IrStatement parse_statement(std::string_view line, std::size_t index) {
  line = trim(line);
  if (auto stmt = try_parse_statement(line, index)) return *std::move(stmt);
  return unknown_statement(line, index);
}

std::vector<IrClassUnit> parse_file(const IrSourceFile& file) {
  std::vector<IrClassUnit> out;
  std::optional<IrMethod> current;
  std::size_t method_line = 0;
  std::size_t line_no = 0;
  std::istringstream in(file.text);
  std::string raw;

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view line = trim(raw);
    if (line.empty() || line.substr(0, 2) == "//") continue;

    if (current) {
      if (line == "}") {
        finish_method(*current);
        out.back().methods.push_back(std::move(*current));
        current.reset();
      } else {
        current->body.push_back(parse_statement(line, current->body.size()));
      }
      continue;
    }

    if (starts_with_word(line, "class")) {
      if (!out.empty()) throw FileSyntaxError(file.path, line_no, "more than one class in file");
      auto name = parse_class_header(line);
      if (!name) throw FileSyntaxError(file.path, line_no, "malformed class header");
      out.push_back(IrClassUnit{*name, {}, {}});
      continue;
    }
    if (out.empty()) throw FileSyntaxError(file.path, line_no, "expected class header");

    if (starts_with_word(line, "staticfield")) {
      auto field = parse_static_field(line);
      if (!field) throw FileSyntaxError(file.path, line_no, "malformed staticfield");
      if (out.back().find_field(field->name)) {
        throw FileSyntaxError(file.path, line_no, "duplicate field " + field->name);
      }
      out.back().static_fields.push_back(std::move(*field));
      continue;
    }
    if (starts_with_word(line, "method")) {
      auto header = parse_method_header(line);
      if (!header) throw FileSyntaxError(file.path, line_no, "malformed method header");
      current = IrMethod{out.back().qualified_name, header->name, std::move(header->params),
                         header->return_type, header->is_static, {}, {}};
      method_line = line_no;
      continue;
    }
    throw FileSyntaxError(file.path, line_no, "unexpected text outside a method");
  }
  if (current) throw FileSyntaxError(file.path, method_line, "unterminated method body");
  return out;
}

IrApp parse_app(std::string app_id, const std::vector<IrSourceFile>& files) {
  std::vector<IrClassUnit> classes;
  std::map<std::string, std::vector<std::string>> manifest;
  std::map<std::string, std::string> seen;
  for (const auto& file : files) {
    auto units = parse_file(file);
    auto& names = manifest[file.path];
    for (auto& unit : units) {
      if (auto [it, inserted] = seen.emplace(unit.qualified_name, file.path); !inserted) {
        throw FileSyntaxError(file.path, 1,
                              "class " + unit.qualified_name + " already defined in " + it->second);
      }
      names.push_back(unit.qualified_name);
      classes.push_back(std::move(unit));
    }
  }
  return IrApp(std::move(app_id), std::move(classes), std::move(manifest));
}

std::string quote_string(std::string_view raw) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(raw.size() + 2);
  out.push_back('"');
  for (const char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (ch == '"' || ch == '\\') {
      out.push_back('\\');
      out.push_back(ch);
    } else if (c < 0x20 || c == 0x7f) {
      out += "\\u00";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    } else {
      out.push_back(ch);
    }
  }
  out.push_back('"');
  return out;
}

std::string print_immediate(const Immediate& imm) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StringConst>) return quote_string(v.value);
        else if constexpr (std::is_same_v<T, IntConst>) return std::to_string(v.value);
        else return v.name;
      },
      imm.node);
}

namespace {

std::string print_sig(const MethodSig& sig) {
  std::string out = "<" + sig.owner + ": " + sig.return_type + " " + sig.name + "(";
  for (std::size_t i = 0; i < sig.param_types.size(); ++i) {
    if (i) out += ",";
    out += sig.param_types[i];
  }
  return out + ")>";
}

std::string print_args(const std::vector<Immediate>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += print_immediate(args[i]);
  }
  return out + ")";
}

}  // namespace

std::string print_expr(const IrExpr& expr) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, StringConst>) {
          return quote_string(v.value);
        } else if constexpr (std::is_same_v<T, IntConst>) {
          return std::to_string(v.value);
        } else if constexpr (std::is_same_v<T, LocalRef>) {
          return v.name;
        } else if constexpr (std::is_same_v<T, FieldRef>) {
          std::string sig = "<" + v.owner + ": " + v.type + " " + v.name + ">";
          return v.base ? *v.base + "." + sig : sig;
        } else if constexpr (std::is_same_v<T, Call>) {
          switch (v.kind) {
            case InvokeKind::kStatic: return "staticinvoke " + print_sig(v.callee) + print_args(v.args);
            case InvokeKind::kShort: return *v.receiver + "." + v.callee.name + print_args(v.args);
            case InvokeKind::kVirtual:
              return "virtualinvoke " + *v.receiver + "." + print_sig(v.callee) + print_args(v.args);
            case InvokeKind::kSpecial:
              return "specialinvoke " + *v.receiver + "." + print_sig(v.callee) + print_args(v.args);
            case InvokeKind::kInterface:
              return "interfaceinvoke " + *v.receiver + "." + print_sig(v.callee) +
                     print_args(v.args);
          }
          return {};
        } else if constexpr (std::is_same_v<T, NewArray>) {
          return "newarray (" + v.elem_type + ")[" + print_immediate(v.length) + "]";
        } else if constexpr (std::is_same_v<T, NewObject>) {
          return "new " + v.type;
        } else if constexpr (std::is_same_v<T, ArrayRef>) {
          return v.base + "[" + print_immediate(v.index) + "]";
        } else if constexpr (std::is_same_v<T, ParamRef>) {
          return "@parameter" + std::to_string(v.index) + ": " + v.type;
        } else if constexpr (std::is_same_v<T, ThisRef>) {
          return "@this: " + v.type;
        } else if constexpr (std::is_same_v<T, BinOp>) {
          return print_immediate(v.lhs) + " " + v.op + " " + print_immediate(v.rhs);
        } else {
          return v.raw;
        }
      },
      expr.node);
}

std::string print_statement(const IrStatement& stmt) {
  if (stmt.is_unknown()) return stmt.rhs.as<Unknown>()->raw;
  switch (stmt.kind) {
    case StmtKind::kReturn:
      if (const auto* u = stmt.rhs.as<Unknown>(); u && u->raw.empty()) return "return";
      return "return " + print_expr(stmt.rhs);
    case StmtKind::kInvoke:
      return print_expr(stmt.rhs);
    default:
      return print_expr(*stmt.lhs) + (stmt.identity ? " := " : " = ") + print_expr(stmt.rhs);
  }
}

std::string print_class(const IrClassUnit& unit) {
  std::ostringstream out;
  out << "class " << unit.qualified_name << '\n';
  for (const auto& f : unit.static_fields) {
    out << "staticfield " << f.type << ' ' << f.name;
    if (f.initializer) out << " = " << quote_string(*f.initializer);
    out << '\n';
  }
  for (const auto& m : unit.methods) {
    out << '\n' << "method " << (m.is_static ? "static " : "") << m.return_type << ' ' << m.name
        << '(';
    for (std::size_t i = 0; i < m.param_types.size(); ++i) {
      if (i) out << ',';
      out << m.param_types[i];
    }
    out << ") {\n";
    for (const auto& stmt : m.body) out << "    " << print_statement(stmt) << '\n';
    out << "}\n";
  }
  return out.str();
}

std::vector<IrSourceFile> print_app(const IrApp& app) {
  std::vector<IrSourceFile> files;
  for (const auto& unit : app.classes()) {
    files.push_back(IrSourceFile{unit.qualified_name + ".jir", print_class(unit)});
  }
  return files;
}

}  // namespace secretsieve
