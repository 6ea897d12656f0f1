#pragma once

#include "stlplan/stl/formula.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stlplan::stl {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_)
      : std::runtime_error(msg + " at line " + std::to_string(line_) + ", column " +
                           std::to_string(column_)),
        line(line_),
        column(column_) {}
};

namespace detail {

/// Recursive-descent parser for the formula DSL.
///
/// Grammar (loosest to tightest binding):
///   implication := disjunction ('->' disjunction)*     right associative
///   disjunction := conjunction ('|' conjunction)*      n-ary
///   conjunction := until ('&' until)*                  n-ary
///   until       := unary ('U' interval unary)*         left associative
///   unary       := ('!' | 'G' iv | 'F' iv | 'X' iv) unary | atom
///   atom        := 'true' | predicate-name | '(' implication ')'
///   interval    := '[' number ',' number ']'
class Parser {
 public:
  Parser(std::string_view text, const PredicateTable& table) : text_(text), table_(table) {}

  FormulaPtr parse() {
    skip_ws();
    FormulaPtr f = parse_implication();
    skip_ws();
    if (pos_ < text_.size()) {
      fail("unexpected trailing input");
    }
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  void advance(size_t n) {
    for (size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      advance(1);
    }
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      advance(1);
      return true;
    }
    return false;
  }

  bool consume_arrow() {
    skip_ws();
    if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
      advance(2);
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  std::optional<std::string> peek_word() {
    skip_ws();
    size_t end = pos_;
    while (end < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
      ++end;
    }
    if (end == pos_) return std::nullopt;
    return std::string(text_.substr(pos_, end - pos_));
  }

  double parse_number() {
    skip_ws();
    size_t end = pos_;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
            text_[end] == '-' || text_[end] == '+' || text_[end] == 'e' || text_[end] == 'E')) {
      ++end;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, value);
    if (ec != std::errc() || ptr == text_.data() + pos_) {
      fail("expected a number");
    }
    advance(static_cast<size_t>(ptr - (text_.data() + pos_)));
    return value;
  }

  Interval parse_interval() {
    if (!consume('[')) fail("expected '[' to open a time interval");
    const int iv_line = line_, iv_col = col_;
    const double lo = parse_number();
    if (!consume(',')) fail("expected ',' in time interval");
    const double hi = parse_number();
    if (!consume(']')) fail("expected ']' to close a time interval");
    try {
      return Interval(lo, hi);
    } catch (const FormulaError& e) {
      throw ParseError(e.what(), iv_line, iv_col);
    }
  }

  FormulaPtr parse_implication() {
    FormulaPtr lhs = parse_disjunction();
    if (consume_arrow()) {
      // Right associative: a -> b -> c reads as a -> (b -> c).
      FormulaPtr rhs = parse_implication();
      return Formula::implies(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_disjunction() {
    std::vector<FormulaPtr> kids;
    kids.push_back(parse_conjunction());
    while (consume('|')) {
      kids.push_back(parse_conjunction());
    }
    if (kids.size() == 1) return kids[0];
    return Formula::disj(std::move(kids));
  }

  FormulaPtr parse_conjunction() {
    std::vector<FormulaPtr> kids;
    kids.push_back(parse_until());
    while (consume('&')) {
      kids.push_back(parse_until());
    }
    if (kids.size() == 1) return kids[0];
    return Formula::conj(std::move(kids));
  }

  bool at_until_keyword() {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != 'U') return false;
    // 'U' must be followed by '[' so that predicates starting with U survive.
    return pos_ + 1 < text_.size() && text_[pos_ + 1] == '[';
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_unary();
    while (at_until_keyword()) {
      advance(1);
      Interval iv = parse_interval();
      FormulaPtr rhs = parse_unary();
      lhs = Formula::until(iv, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '!') {
      advance(1);
      return Formula::negate(parse_unary());
    }
    if ((c == 'G' || c == 'F' || c == 'X') && pos_ + 1 < text_.size() &&
        text_[pos_ + 1] == '[') {
      advance(1);
      Interval iv = parse_interval();
      FormulaPtr child = parse_unary();
      switch (c) {
        case 'G': return Formula::always(iv, std::move(child));
        case 'F': return Formula::eventually(iv, std::move(child));
        default: return Formula::next(iv, std::move(child));
      }
    }
    return parse_atom();
  }

  FormulaPtr parse_atom() {
    if (peek() == '(') {
      consume('(');
      FormulaPtr inner = parse_implication();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    auto word = peek_word();
    if (!word) fail("expected a predicate name, 'true', or '('");
    if (*word == "true") {
      advance(word->size());
      return Formula::truth();
    }
    if (!table_.contains(*word)) {
      fail("unknown predicate id '" + *word + "'");
    }
    FormulaPtr f = Formula::pred(table_, *word);
    advance(word->size());
    return f;
  }

  std::string_view text_;
  const PredicateTable& table_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

/// Parse the textual DSL into a formula over predicates registered in table.
inline FormulaPtr parse_formula(std::string_view text, const PredicateTable& table) {
  return detail::Parser(text, table).parse();
}

}  // namespace stlplan::stl
