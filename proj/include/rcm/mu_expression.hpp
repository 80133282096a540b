// Copyright (c) the rcm project developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef RCM_MU_EXPRESSION_HPP
#define RCM_MU_EXPRESSION_HPP

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace rcm {

// Tiny arithmetic expressions over parameter components, used for the affine
// coefficient functions a_q(mu). Grammar: + - * /, unary sign, parentheses,
// floating literals and mu1..muD (1-based). Parsed once, evaluated as a small
// stack program.
class MuExpression {
 public:
  MuExpression() = default;

  static MuExpression parse(const std::string& text);

  double operator()(const Eigen::VectorXd& mu) const;

  const std::string& text() const { return text_; }
  // Highest parameter index referenced (1-based); 0 for constants.
  int max_mu_index() const { return max_index_; }

 private:
  enum class Op : std::uint8_t { kConst, kMu, kAdd, kSub, kMul, kDiv, kNeg };
  struct Instr {
    Op op;
    double value = 0;
    int index = 0;
  };

  std::string text_;
  std::vector<Instr> prog_;
  int max_index_ = 0;

  friend struct MuExpressionParser;
};

}  // namespace rcm

#endif  // RCM_MU_EXPRESSION_HPP
