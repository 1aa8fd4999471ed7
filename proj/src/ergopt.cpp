#include "skewifs/ergopt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "skewifs/parallel.hpp"

namespace skewifs {

namespace {

void require_discount(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
}

void check_controls(const ControlWord& ctrl, std::size_t n, const PotentialFamily& f) {
  if (ctrl.c.available() < n || ctrl.a.available() < n)
    throw std::out_of_range("control word shorter than " + std::to_string(n));
  if (ctrl.c.alphabet() > f.size()) throw std::invalid_argument("control alphabet exceeds the potential family");
}

EmpiricalMeasure atoms_along(const CirclePoint& x0, const ControlWord& ctrl, std::size_t n) {
  EmpiricalMeasure mu;
  const auto len = static_cast<Eigen::Index>(n);
  mu.x.resize(len);
  mu.c.resize(len);
  mu.a.resize(len);
  CirclePoint x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    mu.x(j) = x.to_double();
    mu.c(j) = ctrl.c[i];
    mu.a(j) = ctrl.a[i];
    x = inverse_branch(x, mu.a(j));
  }
  return mu;
}

Eigen::ArrayXd branch_images(const EmpiricalMeasure& mu) {
  return (mu.x.array() + mu.a.cast<double>().array()) / 2.0;
}

// Evaluates `body(g_at_x, g_at_tau_x, lebesgue_integral)` for every test function.
template <typename Body>
void for_each_test_function(const EmpiricalMeasure& mu, int order, Body&& body) {
  if (order < 1) throw std::invalid_argument("test order must be at least 1");
  const Eigen::ArrayXd x = mu.x.array();
  const Eigen::ArrayXd tx = branch_images(mu);
  body(Eigen::ArrayXd::Ones(x.size()), Eigen::ArrayXd::Ones(x.size()), [](double) { return 1.0; });
  for (int k = 1; k <= order; ++k) {
    const double omega = 2.0 * std::numbers::pi * k;
    body((omega * x).cos(), (omega * tx).cos(), [omega](double z) { return std::cos(omega * z); });
    body((omega * x).sin(), (omega * tx).sin(), [omega](double z) { return std::sin(omega * z); });
  }
}

}  // namespace

EmpiricalMeasure empirical_from_orbit(const CirclePoint& x0, const ControlWord& ctrl, std::size_t n,
                                      const PotentialFamily& f) {
  if (n < 1) throw std::invalid_argument("empirical measure needs n >= 1");
  check_controls(ctrl, n, f);
  EmpiricalMeasure mu = atoms_along(x0, ctrl, n);
  mu.w = Eigen::VectorXd::Constant(mu.size(), 1.0 / static_cast<double>(n));
  mu.kind = EmpiricalMeasure::Birkhoff{n};
  return mu;
}

std::size_t discounted_truncation(double lambda, double tol) {
  require_discount(lambda);
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
  auto n = static_cast<std::size_t>(std::ceil(std::log(tol) / std::log(lambda)));
  while (std::pow(lambda, static_cast<double>(n)) > tol) ++n;
  return std::max<std::size_t>(n, 1);
}

EmpiricalMeasure empirical_discounted(const CirclePoint& x0, const ControlWord& ctrl, double lambda, double tol) {
  const std::size_t n = discounted_truncation(lambda, tol);
  if (ctrl.c.available() < n || ctrl.a.available() < n)
    throw std::out_of_range("control word shorter than the truncation depth " + std::to_string(n));
  EmpiricalMeasure mu = atoms_along(x0, ctrl, n);
  mu.w.resize(mu.size());
  double weight = 1.0 - lambda;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    mu.w(i) = weight;
    weight *= lambda;
  }
  mu.w /= mu.w.sum();
  mu.kind = EmpiricalMeasure::Discounted{lambda, n, std::pow(lambda, static_cast<double>(n))};
  return mu;
}

double holonomy_defect(const EmpiricalMeasure& mu, int order) {
  double worst = 0.0;
  for_each_test_function(mu, order, [&](const Eigen::ArrayXd& gx, const Eigen::ArrayXd& gtx, auto&&) {
    worst = std::max(worst, std::abs(mu.w.dot((gtx - gx).matrix())));
  });
  return worst;
}

double discounted_holonomy_defect(const EmpiricalMeasure& mu, const TraceMeasure& nu, double lambda, int order) {
  const auto* d = std::get_if<EmpiricalMeasure::Discounted>(&mu.kind);
  if (d == nullptr) throw std::invalid_argument("discounted holonomy defect needs a discounted measure");
  if (d->lambda != lambda) throw std::invalid_argument("measure was built with a different discount");
  double worst = 0.0;
  int index = 0;
  for_each_test_function(mu, order, [&](const Eigen::ArrayXd& gx, const Eigen::ArrayXd& gtx, auto&& g) {
    const double trace = nu.kind == TraceMeasure::Kind::dirac ? g(nu.z) : (index == 0 ? 1.0 : 0.0);
    ++index;
    worst = std::max(worst, std::abs(mu.w.dot((lambda * gtx - gx).matrix()) + (1.0 - lambda) * trace));
  });
  return worst;
}

double integrate_payoff(const EmpiricalMeasure& mu, const PotentialFamily& f) {
  return mu.integrate([&](double x, int c, int a) { return f.eval(c, (x + a) / 2.0); });
}

EmpiricalMeasure CycleWitness::to_measure() const {
  const auto k = static_cast<Eigen::Index>(a.size());
  EmpiricalMeasure mu;
  mu.x.resize(k);
  mu.c = Eigen::Map<const Eigen::VectorXi>(c.data(), k);
  mu.a = Eigen::Map<const Eigen::VectorXi>(a.data(), k);
  std::uint64_t n = num;
  for (Eigen::Index i = 0; i < k; ++i) {
    mu.x(i) = static_cast<double>(n) / static_cast<double>(den);
    n = (n + static_cast<std::uint64_t>(a[static_cast<std::size_t>(i)]) * den) / 2;
  }
  mu.w = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  mu.kind = EmpiricalMeasure::Birkhoff{static_cast<std::size_t>(k)};
  return mu;
}

CycleWitness cycle_oracle(const PotentialFamily& f, unsigned max_len, unsigned workers) {
  if (max_len < 1 || max_len > 16) throw std::invalid_argument("cycle length must lie in [1, 16]");
  if (f.size() < 1) throw std::invalid_argument("empty potential family");
  std::vector<CycleWitness> best(max_len);
  parallel_for(max_len, workers, [&](std::size_t idx) {
    const unsigned k = static_cast<unsigned>(idx) + 1;
    const std::uint64_t den = (std::uint64_t{1} << k) - 1;
    CycleWitness local;
    bool have = false;
    std::vector<int> cs(k);
    for (std::uint64_t word = 0; word <= den; ++word) {
      // The composed branches fix x_0 = sum_j a_j 2^j / (2^k - 1) in [0, 1]; every
      // cycle point is n/(2^k - 1) with tau_a(n/q) = ((n + a q)/2)/q, the
      // all-ones word giving the fixed point 1 of tau_1.
      std::uint64_t n = word;
      double total = 0.0;
      for (unsigned j = 0; j < k; ++j) {
        n = (n + ((word >> j) & 1U) * den) / 2;
        const double xv = static_cast<double>(n) / static_cast<double>(den);
        int arg = 0;
        double top = f.eval(0, xv);
        for (int c = 1; c < f.size(); ++c) {
          const double value = f.eval(c, xv);
          if (value > top) {
            top = value;
            arg = c;
          }
        }
        cs[j] = arg;
        total += top;
      }
      const double value = total / static_cast<double>(k);
      if (!have || value > local.value) {
        have = true;
        local.value = value;
        local.num = word;
        local.den = den;
        local.c = cs;
        local.a.resize(k);
        for (unsigned j = 0; j < k; ++j) local.a[j] = static_cast<int>((word >> j) & 1U);
      }
    }
    best[idx] = std::move(local);
  });
  // Longer words repeating a shorter cycle differ only by rounding; keep the shortest.
  std::size_t arg = 0;
  for (std::size_t i = 1; i < best.size(); ++i)
    if (best[i].value > best[arg].value + 1e-12) arg = i;
  return best[arg];
}

DualValue dual_functional(const GridFunction<double>& w, const PotentialFamily& f, double lambda,
                          const TraceMeasure& nu) {
  require_discount(lambda);
  const Eigen::Index n = w.n_points();
  const Eigen::Index fine = 4 * n;
  double sup = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < fine; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(fine);
    const double wx = w(x);
    for (int a = 0; a < 2; ++a) {
      const double y = (x + a) / 2.0;
      sup = std::max(sup, lambda * w(y) - wx + f.upper_envelope(y));
    }
  }
  const double lip = (1.0 + lambda / 2.0) * w.lipschitz() + f.lipschitz() / 2.0;
  return DualValue{(1.0 - lambda) * nu.integrate(w) + sup, lip / (8.0 * static_cast<double>(n))};
}

double support_check_discounted(const EmpiricalMeasure& mu, const GridFunction<double>& v, const PotentialFamily& f,
                                double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const double y = (mu.x(j) + mu.a(j)) / 2.0;
    worst = std::max(worst, std::abs(f.eval(mu.c(j), y) + lambda * v(y) - v(mu.x(j))));
  }
  return worst;
}

double support_check_limit(const EmpiricalMeasure& mu, const GridFunction<double>& b, const PotentialFamily& f,
                           double m) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const double y = (mu.x(j) + mu.a(j)) / 2.0;
    worst = std::max(worst, std::abs(f.eval(mu.c(j), y) - m + b(y) - b(mu.x(j))));
  }
  return worst;
}

std::vector<ScheduleRow> discount_limit_schedule(const PotentialFamily& f, const std::vector<double>& lambdas,
                                                 const ScheduleOptions& opts) {
  if (lambdas.empty()) throw std::invalid_argument("empty lambda schedule");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require_discount(lambdas[i]);
    if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda schedule must increase");
  }
  if (opts.grid_n.size() != 1 && opts.grid_n.size() != lambdas.size())
    throw std::invalid_argument("grid schedule needs one entry or one per lambda");

  const double oracle = cycle_oracle(f, opts.oracle_len, opts.workers).value;
  std::vector<ScheduleRow> rows;
  std::optional<GridFunction<double>> prev;
  double prev_lambda = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lambda = lambdas[i];
    SolveOptions solve;
    solve.n = opts.grid_n.size() == 1 ? opts.grid_n[0] : opts.grid_n[i];
    if (opts.warm_start && prev && prev->n_points() == solve.n) solve.warm_start = warm_start_from(*prev, prev_lambda, lambda);
    GridFunction<double> v = solve_value(f, lambda, Extremum::max, opts.change_tol / (1.0 - lambda), solve);

    ScheduleRow row;
    row.lambda = lambda;
    row.umax = (1.0 - lambda) * v.max();
    row.ulebesgue = (1.0 - lambda) * v.mean();
    row.oracle = oracle;
    row.gap = row.umax - oracle;
    row.tol = (1.0 - lambda) * v.tol().value_or(0.0);
    row.n = solve.n;
    row.iterations = v.iterations();
    row.subaction_residual = subaction(v, f, lambda).residual;
    rows.push_back(row);
    prev = std::move(v);
    prev_lambda = lambda;
  }
  return rows;
}

}  // namespace skewifs
