#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "skewifs/circle.hpp"
#include "skewifs/control.hpp"
#include "skewifs/potentials.hpp"

namespace skewifs {

// Rounding slack added to y-values per 100 floating-point steps.
inline constexpr double kFloatSlackPer100 = 1e-12;

struct SkewPoint {
  CirclePoint x;
  double y = 0.0;
};

// Finite sample of the cylinder. Rows of `points` are (x, y).
struct PointCloud {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  // Every point lies within this distance (in y) of the target set.
  double error_radius = 0.0;
  std::map<std::string, std::string> meta;

  Eigen::Index size() const noexcept { return points.rows(); }
};

// G_c(x, y) = (T(x), A_c(x) + lambda y).
SkewPoint apply_skew(const CirclePoint& x, double y, int c, const PotentialFamily& f, double lambda);

// Forward orbit under G_{c_0}, G_{c_1}, ...; keeps states i = burn_in .. n-1,
// state 0 being (x0, y0).
PointCloud orbit(const CirclePoint& x0, double y0, const SymbolStream& controls, std::size_t n,
                 std::size_t burn_in, const PotentialFamily& f, double lambda);

struct SeriesValue {
  double value = 0.0;
  double err = 0.0;  // |S - value| <= err
};

// Truncated S_x(c, a) = sum_{i<n} lambda^i A_{c_i}(x_{i+1}), x_0 = x,
// x_{i+1} = tau_{a_i}(x_i), with the geometric tail bound.
SeriesValue partial_S(const CirclePoint& x, const ControlWord& ctrl, std::size_t n, const PotentialFamily& f,
                      double lambda);

// Depth n with lambda^n max|A| / (1 - lambda) <= tol.
std::size_t truncation_depth(const PotentialFamily& f, double lambda, double tol);

// |S_{T x}(b*c, pi(x)*a) - (A_b(x) + lambda S_x(c, a))| with depths n+1 and n.
double cocycle_check(const CirclePoint& x, int b, const ControlWord& ctrl, std::size_t n, const PotentialFamily& f,
                     double lambda);

// Radius T0 > max|A| / (1 - lambda) of the absorbing annulus X x (-T0, T0).
double annulus_bound(const PotentialFamily& f, double lambda);

// Steps after which X x [-M, M] is mapped inside X x (-T0, T0).
std::size_t absorption_steps(const PotentialFamily& f, double lambda, double M, double T0);

struct PeriodicPoint {
  std::uint64_t num = 0;  // x = num / (2^n - 1)
  std::uint64_t den = 1;
  CirclePoint x;
  double y = 0.0;
};

// Points of Per_n(G_c): x = k/(2^n - 1) and
// y = (1/(1 - lambda^n)) sum_{i<n} lambda^i A_c(T^{n-1-i} x).
std::vector<PeriodicPoint> periodic_points(int c, unsigned n, const PotentialFamily& f, double lambda,
                                           unsigned cap = 20);

struct ChaosOptions {
  std::size_t n_points = 10000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 1;
  double y0 = 0.0;
};

// Chaos game: one trajectory from a Lebesgue-random x0 with iid uniform
// controls. error_radius = lambda^burn_in (|y0| + T0).
PointCloud lambda_cloud_chaos(const PotentialFamily& f, double lambda, const ChaosOptions& opts);

// Streams (x_j, S_{x_j}(c, a) truncated at `depth`) for every grid node
// x_j = j/n_grid and every pair of words of length `depth`.
void enumerate_lambda(const PotentialFamily& f, double lambda, unsigned depth, std::size_t n_grid,
                      const std::function<void(std::size_t node, double x, double y)>& visit);

// Default depth with (2m)^depth <= 2^20.
unsigned default_enumeration_depth(int m);

// Materialized enumeration; requires (2m)^depth * n_grid <= budget.
PointCloud lambda_cloud_enumerate(const PotentialFamily& f, double lambda, unsigned depth, std::size_t n_grid,
                                  std::size_t budget = std::size_t{1} << 24, unsigned workers = 1);

// State (x, y, b) of the skew system on X x R x C^N.
struct SkewState {
  CirclePoint x;
  double y = 0.0;
  SymbolStream b;
};

struct ConjugacyResult {
  SkewState lhs;  // G(Psi(x, a, c, b))
  SkewState rhs;  // Psi(theta(x, a, c, b))
  bool x_match = false;
  bool b_match = false;  // first `depth` symbols
  double y_gap = 0.0;
  double bound = 0.0;  // 2 lambda^depth max|A| / (1 - lambda)
};

// Both sides of G o Psi = Psi o theta with every S-series truncated at depth.
ConjugacyResult conjugacy_step(const CirclePoint& x, const SymbolStream& a, const SymbolStream& c,
                               const SymbolStream& b, const PotentialFamily& f, double lambda, std::size_t depth);

struct Trace {
  std::vector<CirclePoint> x;
  std::vector<double> y;
};

// Forward orbit of (1/3, y0); the x-projection stays in {1/3, 2/3}.
Trace nonattractor_trace(double y0, const SymbolStream& controls, std::size_t n, const PotentialFamily& f,
                         double lambda);

}  // namespace skewifs
