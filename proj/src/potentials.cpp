#include "skewifs/potentials.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace skewifs {

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {
  Eigen::Index n = coeffs_.size();
  while (n > 1 && coeffs_(n - 1) == 0.0) --n;
  if (n == 0) {
    coeffs_ = Eigen::VectorXd::Zero(1);
  } else {
    coeffs_.conservativeResize(n);
  }
}

double Polynomial::operator()(double x) const noexcept {
  double acc = 0.0;
  for (Eigen::Index i = coeffs_.size() - 1; i >= 0; --i) acc = acc * x + coeffs_(i);
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial{};
  Eigen::VectorXd d(coeffs_.size() - 1);
  for (Eigen::Index i = 1; i < coeffs_.size(); ++i) d(i - 1) = static_cast<double>(i) * coeffs_(i);
  return Polynomial{std::move(d)};
}

std::vector<double> Polynomial::real_roots(double lo, double hi) const {
  const int d = degree();
  std::vector<double> roots;
  if (d <= 0) return roots;
  if (d == 1) {
    const double r = -coeffs_(0) / coeffs_(1);
    if (r >= lo && r <= hi) roots.push_back(r);
    return roots;
  }
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  companion.diagonal(-1).setOnes();
  companion.col(d - 1) = -coeffs_.head(d) / coeffs_(d);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const Polynomial dp = derivative();
  for (const auto& z : solver.eigenvalues()) {
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z.real()))) continue;
    double r = z.real();
    for (int it = 0; it < 4; ++it) {
      const double slope = dp(r);
      if (slope == 0.0) break;
      r -= (*this)(r) / slope;
    }
    if (r >= lo - 1e-12 && r <= hi + 1e-12) roots.push_back(std::clamp(r, lo, hi));
  }
  return roots;
}

std::pair<double, double> Polynomial::range(double lo, double hi) const {
  double mn = std::min((*this)(lo), (*this)(hi));
  double mx = std::max((*this)(lo), (*this)(hi));
  for (double r : derivative().real_roots(lo, hi)) {
    const double v = (*this)(r);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return {mn, mx};
}

// ---------------------------------------------------------------------------
// Potential

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

}  // namespace

Potential::Potential(std::string label, std::vector<double> breakpoints, std::vector<Polynomial> pieces)
    : label_(std::move(label)), breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (pieces_.empty() || breakpoints_.size() != pieces_.size() + 1)
    throw std::invalid_argument("potential needs k pieces and k+1 breakpoints");
  if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
    throw std::invalid_argument("breakpoints must start at 0 and end at 1");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] > breakpoints_[i - 1])) throw std::invalid_argument("breakpoints must be strictly increasing");
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    const double t = breakpoints_[i];
    if (!close(pieces_[i - 1](t), pieces_[i](t)))
      throw std::invalid_argument("potential is discontinuous at breakpoint " + std::to_string(t));
  }
  if (!close(pieces_.front()(0.0), pieces_.back()(1.0)))
    throw std::invalid_argument("potential is discontinuous across the circle seam (A(0) != A(1))");

  min_ = pieces_.front()(0.0);
  max_ = min_;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double lo = breakpoints_[i];
    const double hi = breakpoints_[i + 1];
    const auto [mn, mx] = pieces_[i].range(lo, hi);
    min_ = std::min(min_, mn);
    max_ = std::max(max_, mx);
    const auto [dmn, dmx] = pieces_[i].derivative().range(lo, hi);
    lipschitz_ = std::max({lipschitz_, std::abs(dmn), std::abs(dmx)});
  }
  sup_norm_ = std::max(std::abs(min_), std::abs(max_));
}

Potential Potential::quad() {
  return Potential("quad", {0.0, 1.0}, {Polynomial{Eigen::Vector3d(0.25, -1.0, 1.0)}});
}

Potential Potential::tent() {
  return Potential("tent", {0.0, 0.5, 1.0},
                   {Polynomial{Eigen::Vector2d(0.0, 2.0)}, Polynomial{Eigen::Vector2d(2.0, -2.0)}});
}

Potential Potential::constant(double k) {
  Eigen::VectorXd c(1);
  c(0) = k;
  return Potential("const", {0.0, 1.0}, {Polynomial{std::move(c)}});
}

double Potential::operator()(double x) const noexcept {
  if (x < 0.0 || x > 1.0) x -= std::floor(x);
  const auto inner_begin = breakpoints_.begin() + 1;
  const auto inner_end = breakpoints_.end() - 1;
  const auto idx = static_cast<std::size_t>(std::upper_bound(inner_begin, inner_end, x) - inner_begin);
  return pieces_[idx](x);
}

// ---------------------------------------------------------------------------
// PotentialFamily

PotentialParseError::PotentialParseError(int line, int column, const std::string& what)
    : std::runtime_error("potential DSL " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

PotentialFamily::PotentialFamily(std::vector<Potential> members, std::string source)
    : members_(std::move(members)), source_(std::move(source)) {
  if (members_.empty()) throw std::invalid_argument("a potential family needs at least one member");
  min_ = members_.front().min_value();
  max_ = members_.front().max_value();
  for (const auto& p : members_) {
    sup_norm_ = std::max(sup_norm_, p.sup_norm());
    lipschitz_ = std::max(lipschitz_, p.lipschitz());
    min_ = std::min(min_, p.min_value());
    max_ = std::max(max_, p.max_value());
  }
}

const Potential& PotentialFamily::operator[](int c) const {
  if (c < 0 || c >= size()) throw std::out_of_range("potential index " + std::to_string(c) + " out of range");
  return members_[static_cast<std::size_t>(c)];
}

double PotentialFamily::eval(int c, double x) const { return (*this)[c](x); }

double PotentialFamily::upper_envelope(double x) const noexcept {
  double best = members_.front()(x);
  for (std::size_t c = 1; c < members_.size(); ++c) best = std::max(best, members_[c](x));
  return best;
}

double PotentialFamily::lower_envelope(double x) const noexcept {
  double best = members_.front()(x);
  for (std::size_t c = 1; c < members_.size(); ++c) best = std::min(best, members_[c](x));
  return best;
}

Eigen::VectorXd PotentialFamily::member_sup_norms() const {
  Eigen::VectorXd out(size());
  for (int c = 0; c < size(); ++c) out(c) = members_[static_cast<std::size_t>(c)].sup_norm();
  return out;
}

Eigen::VectorXd PotentialFamily::member_lipschitz() const {
  Eigen::VectorXd out(size());
  for (int c = 0; c < size(); ++c) out(c) = members_[static_cast<std::size_t>(c)].lipschitz();
  return out;
}

bool PotentialFamily::all_constant() const noexcept {
  return std::all_of(members_.begin(), members_.end(), [](const Potential& p) { return p.is_constant(); });
}

// ---------------------------------------------------------------------------
// DSL

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PotentialFamily parse() {
    std::vector<Potential> members;
    members.push_back(potential());
    skip_space();
    while (!at_end()) {
      expect(';');
      members.push_back(potential());
      skip_space();
    }
    return PotentialFamily(std::move(members), std::string(text_));
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw PotentialParseError(line_, col_, msg); }
  [[noreturn]] void fail_at(int line, int col, const std::string& msg) const {
    throw PotentialParseError(line, col, msg);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

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
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void expect(char ch) {
    skip_space();
    if (peek() != ch) fail(std::string("expected '") + ch + "'" + (at_end() ? " but reached end of input" : ""));
    advance();
  }

  std::string word() {
    skip_space();
    std::string w;
    while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) {
      w.push_back(peek());
      advance();
    }
    return w;
  }

  double number() {
    skip_space();
    const std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') advance();
    while (!at_end()) {
      const char ch = peek();
      const bool exp_sign = (ch == '+' || ch == '-') && pos_ > start &&
                            (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == 'e' || ch == 'E' || exp_sign) {
        advance();
      } else {
        break;
      }
    }
    std::string_view tok = text_.substr(start, pos_ - start);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) fail("expected a number");
    return value;
  }

  Polynomial poly() {
    expect('(');
    std::vector<double> c{number()};
    skip_space();
    while (peek() == ',') {
      advance();
      c.push_back(number());
      skip_space();
    }
    expect(')');
    return Polynomial{Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()))};
  }

  Potential potential() {
    skip_space();
    const int line = line_;
    const int col = col_;
    const std::string kw = word();
    try {
      if (kw == "quad") return Potential::quad();
      if (kw == "tent") return Potential::tent();
      if (kw == "const") return Potential::constant(number());
      if (kw == "piecewise") return piecewise();
    } catch (const std::invalid_argument& e) {
      fail_at(line, col, e.what());
    }
    fail_at(line, col, kw.empty() ? "expected a potential" : "unknown potential '" + kw + "'");
  }

  Potential piecewise() {
    std::vector<double> breaks;
    std::vector<Polynomial> pieces;
    skip_space();
    while (peek() == '[') {
      const int line = line_;
      const int col = col_;
      advance();
      const double lo = number();
      expect(',');
      const double hi = number();
      expect(']');
      if (!(hi > lo)) fail_at(line, col, "non-monotone breakpoints in segment");
      if (breaks.empty()) {
        if (lo != 0.0) fail_at(line, col, "first segment must start at 0");
        breaks.push_back(lo);
      } else if (lo != breaks.back()) {
        fail_at(line, col, lo < breaks.back() ? "non-monotone breakpoints" : "segments must be contiguous");
      }
      breaks.push_back(hi);
      pieces.push_back(poly());
      skip_space();
    }
    if (pieces.empty()) fail("expected at least one segment '[lo,hi] (coeffs)'");
    if (breaks.back() != 1.0) fail("last segment must end at 1");
    return Potential("piecewise", std::move(breaks), std::move(pieces));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

PotentialFamily parse_family(std::string_view text) { return Parser(text).parse(); }

}  // namespace skewifs
