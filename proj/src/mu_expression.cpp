// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "rcm/mu_expression.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace rcm {

struct MuExpressionParser {
  const std::string& s;
  std::size_t pos = 0;
  MuExpression out;

  explicit MuExpressionParser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("coefficient expression '" + s + "': " + what +
                                " at position " + std::to_string(pos));
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void emit(MuExpression::Instr i) { out.prog_.push_back(i); }

  void expr() {
    term();
    for (;;) {
      if (eat('+')) {
        term();
        emit({MuExpression::Op::kAdd});
      } else if (eat('-')) {
        term();
        emit({MuExpression::Op::kSub});
      } else {
        return;
      }
    }
  }

  void term() {
    factor();
    for (;;) {
      if (eat('*')) {
        factor();
        emit({MuExpression::Op::kMul});
      } else if (eat('/')) {
        factor();
        emit({MuExpression::Op::kDiv});
      } else {
        return;
      }
    }
  }

  void factor() {
    skip_ws();
    if (eat('-')) {
      factor();
      emit({MuExpression::Op::kNeg});
      return;
    }
    if (eat('+')) {
      factor();
      return;
    }
    if (eat('(')) {
      expr();
      if (!eat(')')) fail("missing ')'");
      return;
    }
    skip_ws();
    if (pos >= s.size()) fail("unexpected end");
    if (s.compare(pos, 2, "mu") == 0) {
      pos += 2;
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == start) fail("mu needs a 1-based index");
      int idx = std::atoi(s.substr(start, pos - start).c_str());
      if (idx < 1) fail("mu indices are 1-based");
      if (idx > out.max_index_) out.max_index_ = idx;
      emit({MuExpression::Op::kMu, 0, idx});
      return;
    }
    char* end = nullptr;
    double v = std::strtod(s.c_str() + pos, &end);
    if (end == s.c_str() + pos) fail("expected number, muN or '('");
    pos = static_cast<std::size_t>(end - s.c_str());
    emit({MuExpression::Op::kConst, v});
  }
};

MuExpression MuExpression::parse(const std::string& text) {
  MuExpressionParser p(text);
  p.out.text_ = text;
  p.expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return p.out;
}

double MuExpression::operator()(const Eigen::VectorXd& mu) const {
  if (prog_.empty()) throw std::logic_error("MuExpression: empty program");
  if (max_index_ > mu.size())
    throw std::invalid_argument("coefficient expression '" + text_ + "' references mu" +
                                std::to_string(max_index_) + " but parameter has " +
                                std::to_string(mu.size()) + " components");
  double stack[32];
  int top = -1;
  for (const Instr& i : prog_) {
    switch (i.op) {
      case Op::kConst:
        stack[++top] = i.value;
        break;
      case Op::kMu:
        stack[++top] = mu[i.index - 1];
        break;
      case Op::kAdd:
        --top;
        stack[top] = stack[top] + stack[top + 1];
        break;
      case Op::kSub:
        --top;
        stack[top] = stack[top] - stack[top + 1];
        break;
      case Op::kMul:
        --top;
        stack[top] = stack[top] * stack[top + 1];
        break;
      case Op::kDiv:
        --top;
        stack[top] = stack[top] / stack[top + 1];
        break;
      case Op::kNeg:
        stack[top] = -stack[top];
        break;
    }
    if (top >= 31) throw std::logic_error("MuExpression: expression too deep");
  }
  return stack[0];
}

}  // namespace rcm
