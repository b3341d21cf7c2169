#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blamestyle {

enum class NodeKind : std::uint8_t {
  TranslationUnit,
  FunctionDef,
  Block,
  If,
  Else,
  For,
  While,
  DoWhile,
  Switch,
  Case,
  Return,
  Decl,
  Assign,
  Call,
  BinaryOp,
  UnaryOp,
  Literal,
  Identifier,
  Index,
  Member,
  TemplateRef,
  Preproc,
  Label,
  ExprStatement,
  Unknown,
};

inline constexpr std::size_t kNodeKindCount = static_cast<std::size_t>(NodeKind::Unknown) + 1;

std::string_view to_string(NodeKind kind);

struct SyntaxNode {
  NodeKind kind = NodeKind::Unknown;
  std::vector<SyntaxNode> children;
  std::optional<std::string> token_text;  // leaves only

  std::size_t node_count() const;
};

/// Word tokens: maximal [A-Za-z0-9_] runs, any other non-space byte alone,
/// string and character literals collapsed to STR / CHR.
std::vector<std::string> tokenize_words(std::string_view source);

/// Best-effort parse of (possibly truncated or unbalanced) C++ text. Never
/// throws; the root is always a TranslationUnit. Tokens that fit no construct
/// become Unknown leaves, and a missing closing token inside a construct is
/// marked by an Unknown leaf without text.
SyntaxNode fuzzy_parse(std::string_view source);

/// Compact S-expression, e.g. (Block (ExprStatement (UnaryOp (Identifier "x")))).
std::string to_sexpr(const SyntaxNode& node);

std::map<std::string, std::size_t> node_unigrams(const SyntaxNode& root);
/// Keys are "Parent>Child", one count per edge.
std::map<std::string, std::size_t> node_bigrams(const SyntaxNode& root);

}  // namespace blamestyle
