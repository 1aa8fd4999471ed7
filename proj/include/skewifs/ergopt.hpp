#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "skewifs/bellman.hpp"
#include "skewifs/circle.hpp"
#include "skewifs/control.hpp"
#include "skewifs/grid_function.hpp"
#include "skewifs/potentials.hpp"

namespace skewifs {

// Finitely supported probability on X x C x I, stored column-wise: atom j is
// (x(j), c(j), a(j)) with weight w(j).
struct EmpiricalMeasure {
  struct Birkhoff {
    std::size_t n = 0;
  };
  struct Discounted {
    double lambda = 0.0;
    std::size_t truncation = 0;
    double tail_mass = 0.0;  // lambda^truncation, before renormalization
  };
  struct Generic {};
  using Kind = std::variant<Generic, Birkhoff, Discounted>;

  Eigen::VectorXd x;
  Eigen::VectorXi c;
  Eigen::VectorXi a;
  Eigen::VectorXd w;
  Kind kind;

  Eigen::Index size() const noexcept { return x.size(); }

  // sum_j w_j g(x_j, c_j, a_j)
  template <typename G>
  double integrate(G&& g) const {
    double total = 0.0;
    for (Eigen::Index j = 0; j < size(); ++j) total += w(j) * g(x(j), c(j), a(j));
    return total;
  }
};

// Atoms (x_i, c_i, a_i), i < n, each of weight 1/n, along x_{i+1} = tau_{a_i}(x_i).
EmpiricalMeasure empirical_from_orbit(const CirclePoint& x0, const ControlWord& ctrl, std::size_t n,
                                      const PotentialFamily& f);

// Smallest N with lambda^N <= tol.
std::size_t discounted_truncation(double lambda, double tol);

// Atoms (x_i, c_i, a_i), i < N, with weights (1 - lambda) lambda^i renormalized.
EmpiricalMeasure empirical_discounted(const CirclePoint& x0, const ControlWord& ctrl, double lambda, double tol);

// Trace measure nu: a Dirac mass at z or Lebesgue measure.
struct TraceMeasure {
  enum class Kind { dirac, lebesgue };
  Kind kind = Kind::lebesgue;
  double z = 0.0;

  static TraceMeasure dirac(double z) { return TraceMeasure{Kind::dirac, z}; }
  static TraceMeasure lebesgue() { return TraceMeasure{}; }

  double integrate(const GridFunction<double>& w) const { return kind == Kind::dirac ? w(z) : w.mean(); }
};

// max over g in {1, cos 2 pi k x, sin 2 pi k x : k <= order} of
// |integral of g(tau_a x) - g(x) dmu|.
double holonomy_defect(const EmpiricalMeasure& mu, int order = 8);

// max over the same test functions of
// |integral of lambda w(tau_a x) - w(x) dmu + (1 - lambda) integral of w dnu|.
// mu must be discounted with the same lambda.
double discounted_holonomy_defect(const EmpiricalMeasure& mu, const TraceMeasure& nu, double lambda, int order = 8);

// integral of A_c(tau_a x) dmu.
double integrate_payoff(const EmpiricalMeasure& mu, const PotentialFamily& f);

struct CycleWitness {
  std::vector<int> a;      // period word; x_{i+1} = tau_{a_i}(x_i)
  std::vector<int> c;      // best potential at each step
  std::uint64_t num = 0;   // x_0 = num / den
  std::uint64_t den = 1;
  double value = 0.0;

  EmpiricalMeasure to_measure() const;
};

// Best average of max_c A_c along a periodic inverse-branch cycle of length
// <= max_len. Each cycle is a holonomic measure, so the value is a lower bound
// for the critical value.
CycleWitness cycle_oracle(const PotentialFamily& f, unsigned max_len, unsigned workers = 1);

struct DualValue {
  double value = 0.0;
  double slack = 0.0;  // the true supremum is at most value + slack
};

// psi(w) = (1 - lambda) integral of w dnu
//          + sup_{x,c,a} lambda w(tau_a x) - w(x) + A_c(tau_a x),
// with the sup taken over a grid four times finer than w's.
DualValue dual_functional(const GridFunction<double>& w, const PotentialFamily& f, double lambda,
                          const TraceMeasure& nu);

// max over atoms of |A_c(tau_a x) + lambda v(tau_a x) - v(x)|.
double support_check_discounted(const EmpiricalMeasure& mu, const GridFunction<double>& v, const PotentialFamily& f,
                                double lambda);
// max over atoms of |A_c(tau_a x) - m + b(tau_a x) - b(x)|.
double support_check_limit(const EmpiricalMeasure& mu, const GridFunction<double>& b, const PotentialFamily& f,
                           double m);

struct ScheduleOptions {
  std::vector<Eigen::Index> grid_n{8192};  // one entry, or one per lambda
  double change_tol = 1e-6;  // value iteration stops once the sup-change is below this
  unsigned oracle_len = 12;
  bool warm_start = true;
  unsigned workers = 1;
};

struct ScheduleRow {
  double lambda = 0.0;
  double umax = 0.0;       // (1 - lambda) max v
  double ulebesgue = 0.0;  // (1 - lambda) integral of v
  double oracle = 0.0;
  double gap = 0.0;        // umax - oracle
  double tol = 0.0;        // (1 - lambda) times the tol field of v
  Eigen::Index n = 0;
  std::size_t iterations = 0;
  double subaction_residual = 0.0;
};

std::vector<ScheduleRow> discount_limit_schedule(const PotentialFamily& f, const std::vector<double>& lambdas,
                                                 const ScheduleOptions& opts = {});

}  // namespace skewifs
