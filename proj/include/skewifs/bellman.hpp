#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "skewifs/circle.hpp"
#include "skewifs/control.hpp"
#include "skewifs/grid_function.hpp"
#include "skewifs/potentials.hpp"

namespace skewifs {

enum class Extremum { max, min };

// (L f)(x_i) = ext_{(c,a)} A_c(tau_a x_i) + lambda f(tau_a x_i) on the grid
// x_i = i/N. The branch images tau_a(x_i) = (i + aN)/(2N) land on a node or
// halfway between two, so f(tau_a x_i) = (P_a f)_i for a sparse averaging
// matrix P_a, and the extremum over c collapses into a reward vector R_a:
//   L f = ext(R_0 + lambda P_0 f, R_1 + lambda P_1 f).
template <typename Scalar = double>
class BellmanOperator {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  BellmanOperator(const PotentialFamily& f, double lambda, Extremum sign, Eigen::Index n)
      : lambda_(static_cast<Scalar>(lambda)), sign_(sign), n_(n) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
    if (n < 2) throw std::invalid_argument("grid must have at least two nodes");
    for (int a = 0; a < 2; ++a) {
      std::vector<Eigen::Triplet<Scalar>> triplets;
      triplets.reserve(static_cast<std::size_t>(2 * n));
      Vector reward(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index twice = i + a * n;  // tau_a(x_i) in half-node units
        const Eigen::Index k = twice / 2;
        if (twice % 2 == 0) {
          triplets.emplace_back(i, k % n, Scalar(1));
        } else {
          triplets.emplace_back(i, k % n, Scalar(0.5));
          triplets.emplace_back(i, (k + 1) % n, Scalar(0.5));
        }
        const double x = static_cast<double>(twice) / static_cast<double>(2 * n);
        reward(i) = static_cast<Scalar>(sign == Extremum::max ? f.upper_envelope(x) : f.lower_envelope(x));
      }
      interp_[a].resize(n, n);
      interp_[a].setFromTriplets(triplets.begin(), triplets.end());
      reward_[a] = std::move(reward);
    }
  }

  Vector apply(const Vector& f) const {
    if (f.size() != n_) throw std::invalid_argument("grid size does not match the operator");
    Vector branch0 = reward_[0] + lambda_ * (interp_[0] * f);
    Vector branch1 = reward_[1] + lambda_ * (interp_[1] * f);
    if (sign_ == Extremum::max) return branch0.cwiseMax(branch1);
    return branch0.cwiseMin(branch1);
  }
  GridFunction<Scalar> operator()(const GridFunction<Scalar>& g) const { return GridFunction<Scalar>(apply(g.values())); }

  const Sparse& interpolation(int a) const { return interp_.at(static_cast<std::size_t>(a)); }
  const Vector& reward(int a) const { return reward_.at(static_cast<std::size_t>(a)); }
  Scalar lambda() const noexcept { return lambda_; }
  Extremum sign() const noexcept { return sign_; }
  Eigen::Index n_points() const noexcept { return n_; }

 private:
  Scalar lambda_;
  Extremum sign_;
  Eigen::Index n_;
  std::array<Sparse, 2> interp_;
  std::array<Vector, 2> reward_;
};

template <typename Scalar>
GridFunction<Scalar> bellman_step(const GridFunction<Scalar>& g, const PotentialFamily& f, double lambda,
                                  Extremum sign) {
  return BellmanOperator<Scalar>(f, lambda, sign, g.n_points())(g);
}

// Lip(v_lambda) <= max Lip(A_c) / (2 - lambda).
double value_lipschitz_bound(const PotentialFamily& f, double lambda);
// Sup distance between the grid fixed point (interpolated) and v_lambda.
double interpolation_tol(const PotentialFamily& f, double lambda, Eigen::Index n);

struct SolveOptions {
  Eigen::Index n = 8192;
  std::optional<Eigen::VectorXd> warm_start;
  std::size_t max_iter = 0;  // 0: derived from lambda and tol
};

// Value iteration until the sup-change is <= tol (1 - lambda). The result's
// tol field is change lambda/(1 - lambda) + interpolation_tol.
GridFunction<double> solve_value(const PotentialFamily& f, double lambda, Extremum sign, double tol,
                                 const SolveOptions& opts = {});

// Shifts a solution at lambda_prev so that (1 - lambda) max v is preserved.
Eigen::VectorXd warm_start_from(const GridFunction<double>& prev, double lambda_prev, double lambda);

// sup over nodes of |(L v)(x_i) - v(x_i)|.
double bellman_residual_sup(const GridFunction<double>& v, const PotentialFamily& f, double lambda, Extremum sign);

struct Action {
  int c = 0;
  int a = 0;
  friend bool operator==(const Action&, const Action&) = default;
};

// Per-node extremizing pair, ties broken towards the smallest (c, a).
std::vector<Action> policy(const GridFunction<double>& v, const PotentialFamily& f, double lambda,
                           Extremum sign = Extremum::max);

struct OptimalPath {
  ControlWord ctrl;                // finite words of length n
  std::vector<CirclePoint> orbit;  // x_0 .. x_n, x_{i+1} = tau_{a_i}(x_i)
};

// Greedy backward orbit choosing the extremizing (c, a) at each exact point.
OptimalPath optimal_sequences(const GridFunction<double>& v, const PotentialFamily& f, double lambda,
                              const CirclePoint& x0, std::size_t n, Extremum sign = Extremum::max);

struct Subaction {
  GridFunction<double> b;  // v - max v
  double u_est = 0.0;      // (1 - lambda) max v
  // sup over nodes of |max_{(c,a)} [A_c(tau_a x) - u_est + b(tau_a x)] - b(x)|
  double residual = 0.0;
};

Subaction subaction(const GridFunction<double>& v, const PotentialFamily& f, double lambda);

// A_c(tau_a x) + lambda v(tau_a x) - v(x).
double bellman_residual(const GridFunction<double>& v, const PotentialFamily& f, double lambda, double x, int c,
                        int a);

}  // namespace skewifs
