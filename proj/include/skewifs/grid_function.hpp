#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

namespace skewifs {

// Values at the nodes x_i = i/N of the circle, extended by periodic linear
// interpolation. A GridFunction approximating a known function carries `tol`
// with ||grid - target||_inf <= tol over the whole circle.
template <typename Scalar = double>
class GridFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridFunction() = default;
  explicit GridFunction(Vector values, std::optional<Scalar> tol = std::nullopt, std::size_t iterations = 0)
      : values_(std::move(values)), tol_(tol), iterations_(iterations) {
    if (values_.size() < 1) throw std::invalid_argument("grid function needs at least one node");
  }

  static GridFunction constant(Eigen::Index n, Scalar k) { return GridFunction(Vector::Constant(n, k)); }
  static GridFunction zero(Eigen::Index n) { return constant(n, Scalar(0)); }
  template <typename Fn>
  static GridFunction sample(Eigen::Index n, Fn&& fn) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = fn(node(i, n));
    return GridFunction(std::move(v));
  }

  static Scalar node(Eigen::Index i, Eigen::Index n) { return Scalar(i) / Scalar(n); }

  Eigen::Index n_points() const noexcept { return values_.size(); }
  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }
  Scalar operator[](Eigen::Index i) const { return values_(i); }

  // Periodic linear interpolation; exact at nodes.
  Scalar operator()(Scalar x) const {
    const Eigen::Index n = n_points();
    Scalar s = (x - std::floor(x)) * Scalar(n);
    const Scalar r = std::round(s);
    // i/N * N need not round-trip for N that is not a power of two
    if (std::abs(s - r) <= Scalar(8) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + r)) s = r;
    Eigen::Index i = static_cast<Eigen::Index>(std::floor(s));
    const Scalar t = s - Scalar(i);
    i %= n;
    if (t == Scalar(0)) return values_(i);
    return values_(i) * (Scalar(1) - t) + values_((i + 1) % n) * t;
  }

  Scalar max() const { return values_.maxCoeff(); }
  Scalar min() const { return values_.minCoeff(); }
  Eigen::Index argmax() const {
    Eigen::Index i = 0;
    values_.maxCoeff(&i);
    return i;
  }
  // Integral over the circle against Lebesgue measure; exact for the
  // interpolant.
  Scalar mean() const { return values_.mean(); }
  // Largest slope of the interpolant, seam included.
  Scalar lipschitz() const {
    const Eigen::Index n = n_points();
    if (n == 1) return Scalar(0);
    Scalar worst = std::abs(values_(0) - values_(n - 1));
    if (n > 1) worst = std::max(worst, (values_.tail(n - 1) - values_.head(n - 1)).cwiseAbs().maxCoeff());
    return worst * Scalar(n);
  }

  std::optional<Scalar> tol() const noexcept { return tol_; }
  void set_tol(std::optional<Scalar> tol) noexcept { tol_ = tol; }
  std::size_t iterations() const noexcept { return iterations_; }
  void set_iterations(std::size_t k) noexcept { iterations_ = k; }

 private:
  Vector values_;
  std::optional<Scalar> tol_;
  std::size_t iterations_ = 0;
};

}  // namespace skewifs
