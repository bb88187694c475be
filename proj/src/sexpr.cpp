#include "absforge/sexpr.hpp"

#include <cctype>

#include "absforge/error.hpp"

namespace absforge::sexpr {

bool Node::has_head(std::string_view head) const {
  return is_list && !items.empty() && items.front().is_symbol(head);
}

namespace {

class Reader {
 public:
  Reader(std::string_view text, std::string_view file) : text_(text), file_(file) {}

  std::vector<Node> read_all() {
    std::vector<Node> out;
    skip_space();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip_space();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(int line, int col, const std::string& msg) const {
    throw ParseError(ParseErrorKind::Syntax, std::string(file_), line, col, msg);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Node read() {
    Node node;
    node.line = line_;
    node.col = col_;
    char c = text_[pos_];
    if (c == ')') fail(line_, col_, "unexpected ')'");
    if (c == '(') {
      node.is_list = true;
      advance();
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) fail(node.line, node.col, "unterminated list");
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    while (pos_ < text_.size()) {
      c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      node.symbol.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      advance();
    }
    return node;
  }

  std::string_view text_;
  std::string_view file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Node> parse_all(std::string_view text, std::string_view file) {
  return Reader(text, file).read_all();
}

Node parse_one(std::string_view text, std::string_view file) {
  auto nodes = parse_all(text, file);
  if (nodes.empty()) throw ParseError(ParseErrorKind::Syntax, std::string(file), 1, 1, "empty input");
  if (nodes.size() > 1) {
    throw ParseError(ParseErrorKind::Syntax, std::string(file), nodes[1].line, nodes[1].col,
                     "trailing input after expression");
  }
  return std::move(nodes.front());
}

std::string to_string(const Node& node) {
  if (!node.is_list) return node.symbol;
  std::string out = "(";
  for (std::size_t i = 0; i < node.items.size(); ++i) {
    if (i) out += ' ';
    out += to_string(node.items[i]);
  }
  out += ')';
  return out;
}

}  // namespace absforge::sexpr
