#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace absforge::sexpr {

/// One node of a parsed s-expression: either a symbol or a parenthesised list.
/// Symbols are lowercased, matching PDDL's case-insensitive names.
struct Node {
  bool is_list = false;
  std::string symbol;
  std::vector<Node> items;
  int line = 0;
  int col = 0;

  bool is_symbol() const { return !is_list; }
  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  /// True when this is a list whose first element is the symbol `head`.
  bool has_head(std::string_view head) const;
  std::size_t size() const { return items.size(); }
  const Node& operator[](std::size_t i) const { return items[i]; }
};

/// Parses every top-level form in `text`. `file` is used only in error
/// messages. `;` starts a comment that runs to the end of the line.
std::vector<Node> parse_all(std::string_view text, std::string_view file);

/// Parses exactly one top-level form.
Node parse_one(std::string_view text, std::string_view file);

/// Renders a node back to compact s-expression text.
std::string to_string(const Node& node);

}  // namespace absforge::sexpr
