#include <array>
#include <cctype>
#include <functional>
#include <optional>
#include <set>

#include "blamestyle/syntax.hpp"

namespace blamestyle {

namespace {

constexpr std::array<std::string_view, kNodeKindCount> kKindNames = {
    "TranslationUnit", "FunctionDef", "Block",  "If",          "Else",    "For",         "While",
    "DoWhile",         "Switch",      "Case",   "Return",      "Decl",    "Assign",      "Call",
    "BinaryOp",        "UnaryOp",     "Literal", "Identifier", "Index",   "Member",      "TemplateRef",
    "Preproc",         "Label",       "ExprStatement", "Unknown",
};

enum class TokKind { Ident, Number, String, Char, Punct, Preproc, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

constexpr std::array<std::string_view, 4> kPunct3 = {"<<=", ">>=", "...", "->*"};
constexpr std::array<std::string_view, 21> kPunct2 = {"::", "->", "++", "--", "==", "!=", "<=",
                                                      ">=", "&&", "||", "+=", "-=", "*=", "/=",
                                                      "%=", "&=", "|=", "^=", "<<", ">>", ".*"};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  bool line_start = true;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      const std::size_t end = s.find("*/", i + 2);
      i = end == std::string_view::npos ? s.size() : end + 2;
      continue;
    }
    if (c == '#' && line_start) {
      std::size_t j = i;
      while (j < s.size() && !(s[j] == '\n' && (j == 0 || s[j - 1] != '\\'))) ++j;
      std::string_view text = s.substr(i, j - i);
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
      out.push_back({TokKind::Preproc, std::string(text)});
      i = j;
      continue;
    }
    line_start = false;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      // Raw string literal R"delim( ... )delim".
      if ((word == "R" || word == "u8R" || word == "LR") && j < s.size() && s[j] == '"') {
        const std::size_t open = s.find('(', j);
        if (open != std::string_view::npos) {
          const std::string close = ")" + std::string(s.substr(j + 1, open - j - 1)) + "\"";
          const std::size_t end = s.find(close, open);
          i = end == std::string_view::npos ? s.size() : end + close.size();
          out.push_back({TokKind::String, "STR"});
          continue;
        }
      }
      out.push_back({TokKind::Ident, std::move(word)});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size()) {
        const char d = s[j];
        if (ident_char(d) || d == '.' || d == '\'') {
          ++j;
        } else if ((d == '+' || d == '-') && j > i &&
                   (s[j - 1] == 'e' || s[j - 1] == 'E' || s[j - 1] == 'p' || s[j - 1] == 'P')) {
          ++j;
        } else {
          break;
        }
      }
      out.push_back({TokKind::Number, std::string(s.substr(i, j - i))});
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != c && s[j] != '\n') j += (s[j] == '\\') ? 2 : 1;
      i = j < s.size() && s[j] == c ? j + 1 : std::min(j, s.size());
      out.push_back({c == '"' ? TokKind::String : TokKind::Char, c == '"' ? "STR" : "CHR"});
      continue;
    }
    std::string_view rest = s.substr(i);
    std::size_t len = 1;
    for (auto p : kPunct3) {
      if (rest.starts_with(p)) len = 3;
    }
    if (len == 1) {
      for (auto p : kPunct2) {
        if (rest.starts_with(p)) len = 2;
      }
    }
    out.push_back({TokKind::Punct, std::string(rest.substr(0, len))});
    i += len;
  }
  out.push_back({TokKind::End, ""});
  return out;
}

const std::set<std::string_view> kTypeKeywords = {
    "int",      "char",     "short",    "long",      "float",    "double",       "bool",
    "void",     "unsigned", "signed",   "auto",      "const",    "static",       "constexpr",
    "volatile", "extern",   "register", "inline",    "mutable",  "thread_local", "wchar_t",
    "char8_t",  "char16_t", "char32_t", "typename",  "virtual",  "explicit",     "friend",
    "consteval", "constinit",
};

// Words that qualify a type without naming it.
const std::set<std::string_view> kTypeModifiers = {
    "const",  "static",   "constexpr", "volatile", "extern",   "register",  "inline",    "mutable",
    "thread_local", "typename", "virtual", "explicit", "friend", "consteval", "constinit", "unsigned",
    "signed", "long",     "short",
};

const std::set<std::string_view> kNotTypeStart = {
    "if",    "for",    "while",  "switch",  "return", "else",  "do",       "case",    "default",
    "break", "continue", "goto", "new",     "delete", "throw", "sizeof",   "try",     "catch",
    "this",  "true",   "false",  "nullptr", "using",  "typedef", "template", "operator", "co_return",
    "static_cast", "dynamic_cast", "const_cast", "reinterpret_cast", "alignof", "decltype", "typeid",
};

const std::set<std::string_view> kAssignOps = {"=",  "+=", "-=", "*=", "/=", "%=",
                                               "&=", "|=", "^=", "<<=", ">>="};

int binary_precedence(const Token& t) {
  if (t.kind != TokKind::Punct) return -1;
  const std::string& op = t.text;
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
  if (op == "<<" || op == ">>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  if (op == ".*" || op == "->*") return 11;
  return -1;
}

SyntaxNode leaf(NodeKind kind, std::optional<std::string> text = std::nullopt) {
  SyntaxNode n;
  n.kind = kind;
  n.token_text = std::move(text);
  return n;
}

SyntaxNode node(NodeKind kind, std::vector<SyntaxNode> children = {}) {
  SyntaxNode n;
  n.kind = kind;
  n.children = std::move(children);
  return n;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  SyntaxNode parse_unit() {
    SyntaxNode unit = node(NodeKind::TranslationUnit);
    while (!at_end()) unit.children.push_back(parse_item());
    return unit;
  }

 private:
  static constexpr int kMaxDepth = 200;

  struct DepthGuard {
    explicit DepthGuard(int& d) : depth(d) { ++depth; }
    ~DepthGuard() { --depth; }
    int& depth;
  };

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t idx = pos_ + ahead;
    return idx < toks_.size() ? toks_[idx] : toks_.back();
  }
  bool at_end() const { return peek().kind == TokKind::End; }
  bool is(std::string_view text, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return (t.kind == TokKind::Punct || t.kind == TokKind::Ident) && t.text == text;
  }
  Token take() {
    Token t = peek();
    if (!at_end()) ++pos_;
    return t;
  }
  SyntaxNode take_unknown() { return leaf(NodeKind::Unknown, take().text); }

  /// Consumes `text` if present. A missing token is marked with a text-less
  /// Unknown leaf unless input simply ran out.
  void expect(std::string_view text, std::vector<SyntaxNode>& into) {
    if (is(text)) {
      ++pos_;
    } else if (!at_end()) {
      into.push_back(leaf(NodeKind::Unknown));
    }
  }

  // Skips a balanced (), [], {} or <> group starting at `i`; returns the index after it.
  std::optional<std::size_t> skip_group(std::size_t i, std::string_view open, std::string_view close) const {
    int level = 0;
    for (; i < toks_.size() && toks_[i].kind != TokKind::End; ++i) {
      const Token& t = toks_[i];
      if (t.kind != TokKind::Punct) continue;
      if (t.text == open) {
        ++level;
      } else if (t.text == close) {
        if (--level == 0) return i + 1;
      } else if (open == "<" && t.text == ">>") {
        level -= 2;
        if (level <= 0) return i + 1;
      } else if (open == "<" && (t.text == ";" || t.text == "{" || t.text == "}")) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  /// Template argument list at `i` (pointing at '<'): balanced, short, type-like.
  std::optional<std::size_t> template_args_end(std::size_t i) const {
    int level = 0;
    for (std::size_t j = i; j < toks_.size() && j < i + 24; ++j) {
      const Token& t = toks_[j];
      if (t.kind == TokKind::Ident || t.kind == TokKind::Number) continue;
      if (t.kind != TokKind::Punct) return std::nullopt;
      if (t.text == "<") {
        ++level;
      } else if (t.text == ">" || t.text == ">>") {
        level -= t.text == ">" ? 1 : 2;
        if (level <= 0) {
          if (level < 0) return std::nullopt;
          const Token& after = toks_[std::min(j + 1, toks_.size() - 1)];
          const bool ok = after.kind == TokKind::Ident || after.kind == TokKind::End ||
                          (after.kind == TokKind::Punct &&
                           std::set<std::string_view>{"(", "::", "{", ";", ")", ",", ">", "&", "*", "=", "&&", "[",
                                                      ">>"}
                               .contains(after.text));
          return ok ? std::optional<std::size_t>(j + 1) : std::nullopt;
        }
      } else if (t.text != "::" && t.text != "," && t.text != "*" && t.text != "&" && t.text != "&&") {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  /// Type-name run at `i`: qualified identifiers, template args, cv/sign
  /// keywords, pointer/reference markers. Returns the index after it.
  std::size_t skip_type(std::size_t i) const {
    bool any = false;
    bool have_base = false;
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (t.kind == TokKind::Ident && !kNotTypeStart.contains(t.text)) {
        const bool after_scope = i > 0 && toks_[i - 1].text == "::";
        if (have_base && !kTypeKeywords.contains(t.text) && !after_scope) break;  // declarator name
        if (!kTypeModifiers.contains(t.text)) have_base = true;
        any = true;
        ++i;
      } else if (t.kind == TokKind::Punct && t.text == "::") {
        ++i;
      } else if (t.kind == TokKind::Punct && t.text == "<" && any) {
        const auto end = template_args_end(i);
        if (!end) break;
        i = *end;
      } else {
        break;
      }
    }
    while (i < toks_.size() && toks_[i].kind == TokKind::Punct &&
           (toks_[i].text == "*" || toks_[i].text == "&" || toks_[i].text == "&&")) {
      ++i;
    }
    return i;
  }

  bool looks_like_function_def() const {
    const Token& first = peek();
    if (first.kind != TokKind::Ident || kNotTypeStart.contains(first.text)) {
      if (!(first.kind == TokKind::Punct && first.text == "~")) return false;
    }
    std::size_t i = pos_;
    std::size_t idents = 0;
    bool qualified = false;
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (t.kind == TokKind::Ident && !kNotTypeStart.contains(t.text)) {
        ++idents;
        ++i;
      } else if (t.kind == TokKind::Ident && t.text == "operator") {
        ++idents;
        i += 2;  // operator and its symbol
      } else if (t.kind == TokKind::Punct && (t.text == "::" || t.text == "~")) {
        qualified = qualified || t.text == "::";
        ++i;
      } else if (t.kind == TokKind::Punct && (t.text == "*" || t.text == "&" || t.text == "&&")) {
        ++i;
      } else if (t.kind == TokKind::Punct && t.text == "<") {
        const auto end = template_args_end(i);
        if (!end) return false;
        i = *end;
      } else {
        break;
      }
    }
    if (i >= toks_.size() || !(toks_[i].kind == TokKind::Punct && toks_[i].text == "(")) return false;
    if (idents < 2 && !qualified) return false;
    const auto after_params = skip_group(i, "(", ")");
    if (!after_params) return false;
    i = *after_params;
    // Qualifiers, trailing return types and constructor initializer lists.
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (t.kind == TokKind::End) return false;
      if (t.kind == TokKind::Punct && t.text == "{") return true;
      if (t.kind == TokKind::Punct && (t.text == ";" || t.text == "=" || t.text == "}")) return false;
      if (t.kind == TokKind::Punct && t.text == "(") {
        const auto end = skip_group(i, "(", ")");
        if (!end) return false;
        i = *end;
        continue;
      }
      ++i;
    }
    return false;
  }

  bool looks_like_declaration() const {
    const Token& first = peek();
    if (first.kind != TokKind::Ident) return false;
    if (kTypeKeywords.contains(first.text)) return true;
    if (kNotTypeStart.contains(first.text)) return false;
    const std::size_t after_type = skip_type(pos_);
    if (after_type == pos_ || after_type >= toks_.size()) return false;
    const Token& name = toks_[after_type];
    if (name.kind != TokKind::Ident || kNotTypeStart.contains(name.text)) return false;
    const Token& next = toks_[std::min(after_type + 1, toks_.size() - 1)];
    if (next.kind == TokKind::End) return true;
    if (next.kind != TokKind::Punct) return false;
    return next.text == "=" || next.text == ";" || next.text == "," || next.text == "[" || next.text == "(" ||
           next.text == "{" || next.text == ":";
  }

  SyntaxNode parse_item() {
    DepthGuard guard(depth_);
    if (depth_ > kMaxDepth) return take_unknown();
    if (looks_like_function_def()) return parse_function_def();
    return parse_statement();
  }

  SyntaxNode parse_function_def() {
    while (!at_end() && !is("(")) ++pos_;
    if (const auto end = skip_group(pos_, "(", ")")) pos_ = *end;
    while (!at_end() && !is("{")) {
      if (is("(")) {
        if (const auto end = skip_group(pos_, "(", ")")) {
          pos_ = *end;
          continue;
        }
      }
      ++pos_;
    }
    return node(NodeKind::FunctionDef, {parse_block()});
  }

  /// Body of a control statement; a closing brace or end of input means it is missing.
  SyntaxNode parse_body() {
    if (at_end() || is("}")) return leaf(NodeKind::Unknown);
    return parse_item();
  }

  SyntaxNode parse_block() {
    SyntaxNode block = node(NodeKind::Block);
    if (!is("{")) return block;
    ++pos_;
    while (!at_end() && !is("}")) block.children.push_back(parse_item());
    if (is("}")) ++pos_;
    return block;
  }

  SyntaxNode parse_paren_condition(std::vector<SyntaxNode>& into) {
    expect("(", into);
    SyntaxNode cond = looks_like_declaration() ? parse_declaration(false) : expression_or_unknown();
    expect(")", into);
    return cond;
  }

  SyntaxNode expression_or_unknown() {
    if (auto e = parse_expression()) return std::move(*e);
    return leaf(NodeKind::Unknown);
  }

  SyntaxNode parse_statement() {
    const Token& t = peek();
    if (t.kind == TokKind::Preproc) return leaf(NodeKind::Preproc, take().text);
    if (is("{")) return parse_block();
    if (is(";")) {
      ++pos_;
      return node(NodeKind::ExprStatement);
    }
    if (t.kind == TokKind::Ident) {
      const std::string& w = t.text;
      if (w == "if") return parse_if();
      if (w == "else") {
        ++pos_;
        return node(NodeKind::Else, {parse_body()});
      }
      if (w == "for") return parse_for();
      if (w == "while") {
        ++pos_;
        SyntaxNode n = node(NodeKind::While);
        SyntaxNode cond = parse_paren_condition(n.children);
        n.children.insert(n.children.begin(), std::move(cond));
        n.children.push_back(parse_body());
        return n;
      }
      if (w == "do") {
        ++pos_;
        SyntaxNode n = node(NodeKind::DoWhile, {parse_body()});
        if (is("while")) {
          ++pos_;
          SyntaxNode cond = parse_paren_condition(n.children);
          n.children.push_back(std::move(cond));
          expect(";", n.children);
        }
        return n;
      }
      if (w == "switch") {
        ++pos_;
        SyntaxNode n = node(NodeKind::Switch);
        SyntaxNode cond = parse_paren_condition(n.children);
        n.children.insert(n.children.begin(), std::move(cond));
        n.children.push_back(parse_body());
        return n;
      }
      if (w == "case") {
        ++pos_;
        SyntaxNode n = node(NodeKind::Case);
        if (auto e = parse_ternary()) n.children.push_back(std::move(*e));
        expect(":", n.children);
        return n;
      }
      if (w == "default" && is(":", 1)) {
        pos_ += 2;
        return node(NodeKind::Case);
      }
      if (w == "return" || w == "co_return") {
        ++pos_;
        SyntaxNode n = node(NodeKind::Return);
        if (auto e = parse_expression()) n.children.push_back(std::move(*e));
        expect(";", n.children);
        return n;
      }
      if (w == "break" || w == "continue") {
        ++pos_;
        SyntaxNode n = node(NodeKind::ExprStatement);
        expect(";", n.children);
        return n;
      }
      if (w == "goto") {
        ++pos_;
        SyntaxNode n = node(NodeKind::ExprStatement);
        if (peek().kind == TokKind::Ident) n.children.push_back(leaf(NodeKind::Identifier, take().text));
        expect(";", n.children);
        return n;
      }
      if (w == "try") {
        ++pos_;
        return parse_block();
      }
      if (w == "catch") {
        ++pos_;
        if (is("(")) {
          if (const auto end = skip_group(pos_, "(", ")")) pos_ = *end;
        }
        return leaf(NodeKind::Unknown, "catch");
      }
      if (w == "template") {
        ++pos_;
        std::string text = "template";
        if (is("<")) {
          const std::size_t start = pos_;
          const auto end = skip_group(pos_, "<", ">");
          pos_ = end ? *end : pos_ + 1;
          for (std::size_t i = start; i < pos_; ++i) text += toks_[i].text;
        }
        SyntaxNode n = leaf(NodeKind::TemplateRef, std::move(text));
        if (!at_end()) {
          n.token_text.reset();
          n.children.push_back(parse_item());
        }
        return n;
      }
      if (w == "class" || w == "struct" || w == "union" || w == "enum" || w == "namespace") {
        return parse_record();
      }
      if (w == "using" || w == "typedef") {
        ++pos_;
        SyntaxNode n = node(NodeKind::Decl);
        while (!at_end() && !is(";") && !is("{") && !is("}")) {
          const Token tok = take();
          if (tok.kind == TokKind::Ident) n.children.push_back(leaf(NodeKind::Identifier, tok.text));
        }
        expect(";", n.children);
        return n;
      }
      if ((w == "public" || w == "private" || w == "protected") && is(":", 1)) {
        pos_ += 2;
        return leaf(NodeKind::Label, w);
      }
      if (is(":", 1) && !kNotTypeStart.contains(w)) {
        std::string label = take().text;
        ++pos_;
        return leaf(NodeKind::Label, std::move(label));
      }
      if (looks_like_declaration()) return parse_declaration(true);
    }
    if (auto e = parse_expression()) {
      SyntaxNode n = node(NodeKind::ExprStatement, {std::move(*e)});
      expect(";", n.children);
      return n;
    }
    return take_unknown();
  }

  SyntaxNode parse_if() {
    ++pos_;
    if (is("constexpr")) ++pos_;
    SyntaxNode n = node(NodeKind::If);
    SyntaxNode cond = parse_paren_condition(n.children);
    n.children.insert(n.children.begin(), std::move(cond));
    n.children.push_back(parse_body());
    if (is("else")) {
      ++pos_;
      n.children.push_back(node(NodeKind::Else, {parse_body()}));
    }
    return n;
  }

  SyntaxNode parse_for() {
    ++pos_;
    SyntaxNode n = node(NodeKind::For);
    if (!is("(")) {
      if (!at_end()) n.children.push_back(leaf(NodeKind::Unknown));
    } else {
      ++pos_;
      // Up to three clauses separated by ';' (or a range-for ':').
      while (!at_end() && !is(")")) {
        if (is(";") || is(":")) {
          ++pos_;
          continue;
        }
        const std::size_t before = pos_;
        if (looks_like_declaration()) {
          n.children.push_back(parse_declaration(false));
        } else if (auto e = parse_expression()) {
          n.children.push_back(std::move(*e));
        }
        if (pos_ == before) {
          if (is("{")) break;
          n.children.push_back(take_unknown());
        }
      }
      expect(")", n.children);
    }
    n.children.push_back(parse_body());
    return n;
  }

  SyntaxNode parse_record() {
    ++pos_;
    SyntaxNode n = node(NodeKind::Decl);
    while (!at_end() && !is("{") && !is(";") && !is("}")) {
      const Token tok = take();
      if (tok.kind == TokKind::Ident && n.children.empty()) {
        n.children.push_back(leaf(NodeKind::Identifier, tok.text));
      }
    }
    if (is("{")) n.children.push_back(parse_block());
    while (peek().kind == TokKind::Ident) n.children.push_back(leaf(NodeKind::Identifier, take().text));
    expect(";", n.children);
    return n;
  }

  /// Declaration starting at the type; `statement` also consumes the ';'.
  SyntaxNode parse_declaration(bool statement) {
    SyntaxNode n = node(NodeKind::Decl);
    const std::size_t type_start = pos_;
    const std::size_t type_end = skip_type(pos_);
    for (std::size_t i = type_start; i < type_end; ++i) {
      if (toks_[i].kind == TokKind::Punct && toks_[i].text == "<") {
        std::string text;
        for (std::size_t j = type_start; j < type_end; ++j) text += toks_[j].text;
        n.children.push_back(leaf(NodeKind::TemplateRef, std::move(text)));
        break;
      }
    }
    pos_ = type_end == pos_ ? pos_ + 1 : type_end;
    while (!at_end()) {
      while (is("*") || is("&") || is("&&")) ++pos_;
      if (peek().kind == TokKind::Ident) {
        n.children.push_back(leaf(NodeKind::Identifier, take().text));
      } else {
        break;
      }
      while (is("[")) {
        ++pos_;
        SyntaxNode idx = node(NodeKind::Index);
        if (auto e = parse_expression()) idx.children.push_back(std::move(*e));
        expect("]", idx.children);
        n.children.push_back(std::move(idx));
      }
      if (is("=")) {
        ++pos_;
        if (auto e = parse_assignment()) {
          n.children.push_back(std::move(*e));
        } else if (!at_end()) {
          n.children.push_back(leaf(NodeKind::Unknown));
        }
      } else if (is("(")) {
        ++pos_;
        parse_arguments(n.children, ")");
      } else if (is("{")) {
        n.children.push_back(parse_brace_list());
      } else if (is(":") && !statement) {
        break;  // range-for
      }
      if (!is(",")) break;
      ++pos_;
    }
    if (statement) expect(";", n.children);
    return n;
  }

  void parse_arguments(std::vector<SyntaxNode>& into, std::string_view close) {
    while (!at_end() && !is(close)) {
      if (is(",")) {
        ++pos_;
        continue;
      }
      if (auto e = parse_assignment()) {
        into.push_back(std::move(*e));
      } else if (is(";") || is("{") || is("}")) {
        break;
      } else {
        into.push_back(take_unknown());
      }
    }
    expect(close, into);
  }

  SyntaxNode parse_brace_list() {
    SyntaxNode n = node(NodeKind::Block);
    ++pos_;  // '{'
    parse_arguments(n.children, "}");
    return n;
  }

  std::optional<SyntaxNode> parse_expression() {
    auto lhs = parse_assignment();
    if (!lhs) return lhs;
    while (is(",")) {
      ++pos_;
      auto rhs = parse_assignment();
      lhs = node(NodeKind::BinaryOp, {std::move(*lhs), rhs ? std::move(*rhs) : leaf(NodeKind::Unknown)});
    }
    return lhs;
  }

  std::optional<SyntaxNode> parse_assignment() {
    DepthGuard guard(depth_);
    if (depth_ > kMaxDepth) {
      if (at_end()) return std::nullopt;
      return take_unknown();
    }
    auto lhs = parse_ternary();
    if (!lhs) return lhs;
    if (peek().kind == TokKind::Punct && kAssignOps.contains(peek().text)) {
      ++pos_;
      auto rhs = parse_assignment();
      return node(NodeKind::Assign, {std::move(*lhs), rhs ? std::move(*rhs) : leaf(NodeKind::Unknown)});
    }
    return lhs;
  }

  std::optional<SyntaxNode> parse_ternary() {
    auto cond = parse_binary(1);
    if (!cond || !is("?")) return cond;
    ++pos_;
    SyntaxNode n = node(NodeKind::BinaryOp, {std::move(*cond)});
    n.children.push_back(expression_or_unknown());
    expect(":", n.children);
    auto other = parse_assignment();
    n.children.push_back(other ? std::move(*other) : leaf(NodeKind::Unknown));
    return n;
  }

  std::optional<SyntaxNode> parse_binary(int min_prec) {
    auto lhs = parse_unary();
    if (!lhs) return lhs;
    for (;;) {
      const int prec = binary_precedence(peek());
      if (prec < min_prec) break;
      ++pos_;
      auto rhs = parse_binary(prec + 1);
      lhs = node(NodeKind::BinaryOp, {std::move(*lhs), rhs ? std::move(*rhs) : leaf(NodeKind::Unknown)});
    }
    return lhs;
  }

  bool looks_like_cast() const {
    if (!is("(")) return false;
    const Token& first = peek(1);
    if (first.kind != TokKind::Ident || kNotTypeStart.contains(first.text)) return false;
    const std::size_t end = skip_type(pos_ + 1);
    if (end >= toks_.size() || !(toks_[end].kind == TokKind::Punct && toks_[end].text == ")")) return false;
    const bool builtin = kTypeKeywords.contains(first.text);
    const bool pointer = end > pos_ + 1 && (toks_[end - 1].text == "*" || toks_[end - 1].text == "&");
    const Token& after = toks_[std::min(end + 1, toks_.size() - 1)];
    const bool operand = after.kind == TokKind::Ident || after.kind == TokKind::Number ||
                         after.kind == TokKind::String || after.kind == TokKind::Char ||
                         (after.kind == TokKind::Punct && after.text == "(");
    return operand && (builtin || pointer || end - (pos_ + 1) > 1);
  }

  std::optional<SyntaxNode> parse_unary() {
    DepthGuard guard(depth_);
    if (depth_ > kMaxDepth) {
      if (at_end()) return std::nullopt;
      return take_unknown();
    }
    const Token& t = peek();
    const bool prefix_op =
        t.kind == TokKind::Punct && (t.text == "!" || t.text == "~" || t.text == "-" || t.text == "+" ||
                                     t.text == "*" || t.text == "&" || t.text == "++" || t.text == "--" ||
                                     t.text == "&&");
    const bool prefix_kw = t.kind == TokKind::Ident && (t.text == "sizeof" || t.text == "new" ||
                                                        t.text == "delete" || t.text == "throw" ||
                                                        t.text == "co_await" || t.text == "alignof");
    if (prefix_op || prefix_kw) {
      const bool may_be_empty = t.text == "throw";
      ++pos_;
      if (t.text == "delete" && is("[")) pos_ = std::min(pos_ + 2, toks_.size() - 1);
      auto operand = parse_unary();
      if (!operand && may_be_empty) return node(NodeKind::UnaryOp);
      return node(NodeKind::UnaryOp, {operand ? std::move(*operand) : leaf(NodeKind::Unknown)});
    }
    if (looks_like_cast()) {
      pos_ = skip_type(pos_ + 1) + 1;
      auto operand = parse_unary();
      return node(NodeKind::UnaryOp, {operand ? std::move(*operand) : leaf(NodeKind::Unknown)});
    }
    return parse_postfix();
  }

  std::optional<SyntaxNode> parse_postfix() {
    auto base = parse_primary();
    if (!base) return base;
    for (;;) {
      if (is("(")) {
        ++pos_;
        SyntaxNode call = node(NodeKind::Call, {std::move(*base)});
        parse_arguments(call.children, ")");
        base = std::move(call);
      } else if (is("[")) {
        ++pos_;
        SyntaxNode idx = node(NodeKind::Index, {std::move(*base)});
        idx.children.push_back(expression_or_unknown());
        expect("]", idx.children);
        base = std::move(idx);
      } else if (is(".") || is("->")) {
        ++pos_;
        SyntaxNode member = node(NodeKind::Member, {std::move(*base)});
        if (is("template")) ++pos_;
        if (peek().kind == TokKind::Ident) {
          member.children.push_back(leaf(NodeKind::Identifier, take().text));
          if (is("<")) {
            if (const auto end = template_args_end(pos_)) pos_ = *end;
          }
        } else if (!at_end()) {
          member.children.push_back(leaf(NodeKind::Unknown));
        }
        base = std::move(member);
      } else if (is("++") || is("--")) {
        ++pos_;
        base = node(NodeKind::UnaryOp, {std::move(*base)});
      } else {
        break;
      }
    }
    return base;
  }

  std::optional<SyntaxNode> parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Number:
      case TokKind::String:
      case TokKind::Char: {
        Token tok = take();
        while (peek().kind == TokKind::String && tok.kind == TokKind::String) ++pos_;  // "a" "b"
        return leaf(NodeKind::Literal, tok.text);
      }
      case TokKind::Ident: {
        if (t.text == "true" || t.text == "false" || t.text == "nullptr") return leaf(NodeKind::Literal, take().text);
        if (kNotTypeStart.contains(t.text) && t.text != "this" && t.text != "static_cast" &&
            t.text != "dynamic_cast" && t.text != "const_cast" && t.text != "reinterpret_cast" &&
            t.text != "decltype" && t.text != "typeid" && t.text != "operator") {
          return std::nullopt;
        }
        return parse_name();
      }
      case TokKind::Punct: {
        if (t.text == "::" && peek(1).kind == TokKind::Ident) return parse_name();
        if (t.text == "(") {
          ++pos_;
          auto inner = parse_expression();
          std::vector<SyntaxNode> extra;
          expect(")", extra);
          if (!inner) inner = leaf(NodeKind::Unknown);
          if (!extra.empty()) inner = node(NodeKind::UnaryOp, {std::move(*inner), std::move(extra.front())});
          return inner;
        }
        if (t.text == "{") return parse_brace_list();
        if (t.text == "[") return parse_lambda();
        return std::nullopt;
      }
      case TokKind::Preproc:
      case TokKind::End:
        return std::nullopt;
    }
    return std::nullopt;
  }

  SyntaxNode parse_name() {
    std::string name;
    if (is("::")) name = take().text;
    name += take().text;
    while (is("::") && peek(1).kind == TokKind::Ident) {
      name += take().text;
      name += take().text;
    }
    if (is("<")) {
      if (const auto end = template_args_end(pos_)) {
        for (std::size_t i = pos_; i < *end; ++i) name += toks_[i].text;
        pos_ = *end;
        while (is("::") && peek(1).kind == TokKind::Ident) {
          name += take().text;
          name += take().text;
        }
        return leaf(NodeKind::TemplateRef, std::move(name));
      }
    }
    return leaf(NodeKind::Identifier, std::move(name));
  }

  SyntaxNode parse_lambda() {
    const auto capture_end = skip_group(pos_, "[", "]");
    if (!capture_end) return take_unknown();
    pos_ = *capture_end;
    if (is("(")) {
      if (const auto end = skip_group(pos_, "(", ")")) pos_ = *end;
    }
    while (!at_end() && !is("{") && !is(";") && !is(")") && !is(",")) ++pos_;
    if (!is("{")) return leaf(NodeKind::Unknown, "lambda");
    return node(NodeKind::FunctionDef, {parse_block()});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

void sexpr_into(const SyntaxNode& n, std::string& out) {
  out += '(';
  out += to_string(n.kind);
  if (n.token_text) {
    out += " \"";
    for (char c : *n.token_text) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  }
  for (const SyntaxNode& c : n.children) {
    out += ' ';
    sexpr_into(c, out);
  }
  out += ')';
}

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::size_t SyntaxNode::node_count() const {
  std::size_t n = 1;
  for (const SyntaxNode& c : children) n += c.node_count();
  return n;
}

SyntaxNode fuzzy_parse(std::string_view source) {
  Parser parser(lex(source));
  return parser.parse_unit();
}

std::string to_sexpr(const SyntaxNode& node) {
  std::string out;
  sexpr_into(node, out);
  return out;
}

std::map<std::string, std::size_t> node_unigrams(const SyntaxNode& root) {
  std::map<std::string, std::size_t> counts;
  std::function<void(const SyntaxNode&)> walk = [&](const SyntaxNode& n) {
    ++counts[std::string(to_string(n.kind))];
    for (const SyntaxNode& c : n.children) walk(c);
  };
  walk(root);
  return counts;
}

std::map<std::string, std::size_t> node_bigrams(const SyntaxNode& root) {
  std::map<std::string, std::size_t> counts;
  std::function<void(const SyntaxNode&)> walk = [&](const SyntaxNode& n) {
    for (const SyntaxNode& c : n.children) {
      std::string key(to_string(n.kind));
      key += '>';
      key += to_string(c.kind);
      ++counts[key];
      walk(c);
    }
  };
  walk(root);
  return counts;
}

}  // namespace blamestyle
