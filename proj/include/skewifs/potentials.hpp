#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewifs/circle.hpp"

namespace skewifs {

// Polynomial with coefficients in ascending powers of x.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(Eigen::VectorXd coeffs);

  double operator()(double x) const noexcept;
  Polynomial derivative() const;
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }

  // Real roots in [lo, hi], from the eigenvalues of the companion matrix
  // polished by Newton steps.
  std::vector<double> real_roots(double lo, double hi) const;
  // min and max over [lo, hi] (endpoints plus critical points).
  std::pair<double, double> range(double lo, double hi) const;

 private:
  Eigen::VectorXd coeffs_{Eigen::VectorXd::Zero(1)};
};

// A continuous piecewise-polynomial function on [0, 1] with matching values at
// 0 and 1, i.e. a continuous function on the circle.
class Potential {
 public:
  Potential(std::string label, std::vector<double> breakpoints, std::vector<Polynomial> pieces);

  static Potential quad();   // (x - 1/2)^2
  static Potential tent();   // 2x on [0, 1/2], 2 - 2x on [1/2, 1]
  static Potential constant(double k);

  double operator()(double x) const noexcept;
  double sup_norm() const noexcept { return sup_norm_; }
  double lipschitz() const noexcept { return lipschitz_; }
  double min_value() const noexcept { return min_; }
  double max_value() const noexcept { return max_; }
  bool is_constant() const noexcept { return lipschitz_ == 0.0; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Polynomial>& pieces() const noexcept { return pieces_; }

 private:
  std::string label_;
  std::vector<double> breakpoints_;
  std::vector<Polynomial> pieces_;
  double sup_norm_ = 0.0;
  double lipschitz_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

class PotentialParseError : public std::runtime_error {
 public:
  PotentialParseError(int line, int column, const std::string& what);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

// The family {A_c : c in C}, C = {0, ..., m-1}.
class PotentialFamily {
 public:
  PotentialFamily() = default;
  explicit PotentialFamily(std::vector<Potential> members, std::string source = {});

  int size() const noexcept { return static_cast<int>(members_.size()); }
  const Potential& operator[](int c) const;
  const std::vector<Potential>& members() const noexcept { return members_; }
  const std::string& source() const noexcept { return source_; }

  double eval(int c, double x) const;
  double eval(int c, const CirclePoint& x) const { return eval(c, x.to_double()); }
  // max_c A_c(x) and min_c A_c(x).
  double upper_envelope(double x) const noexcept;
  double lower_envelope(double x) const noexcept;

  double sup_norm() const noexcept { return sup_norm_; }
  double lipschitz() const noexcept { return lipschitz_; }
  double min_value() const noexcept { return min_; }
  double max_value() const noexcept { return max_; }
  Eigen::VectorXd member_sup_norms() const;
  Eigen::VectorXd member_lipschitz() const;
  bool all_constant() const noexcept;

 private:
  std::vector<Potential> members_;
  std::string source_;
  double sup_norm_ = 0.0;
  double lipschitz_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

// Grammar:
//   family    := potential (";" potential)*
//   potential := "quad" | "tent" | "const" number | "piecewise" segment+
//   segment   := "[" number "," number "]" poly
//   poly      := "(" number ("," number)* ")"      ascending powers of x
PotentialFamily parse_family(std::string_view text);

}  // namespace skewifs
