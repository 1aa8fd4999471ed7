#include "skewifs/skew.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "skewifs/errors.hpp"
#include "skewifs/parallel.hpp"
#include "skewifs/rng.hpp"

namespace skewifs {

namespace {

void require_discount(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SkewPoint apply_skew(const CirclePoint& x, double y, int c, const PotentialFamily& f, double lambda) {
  require_discount(lambda);
  return SkewPoint{doubling(x), f.eval(c, x) + lambda * y};
}

PointCloud orbit(const CirclePoint& x0, double y0, const SymbolStream& controls, std::size_t n,
                 std::size_t burn_in, const PotentialFamily& f, double lambda) {
  require_discount(lambda);
  if (n <= burn_in) throw std::invalid_argument("orbit: n must exceed burn_in");
  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(n - burn_in), 2);
  CirclePoint x = x0;
  double y = y0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= burn_in) cloud.points.row(static_cast<Eigen::Index>(i - burn_in)) << x.to_double(), y;
    y = f.eval(controls[i], x) + lambda * y;
    x.double_in_place();
  }
  cloud.meta["kind"] = "orbit";
  cloud.meta["lambda"] = fmt(lambda);
  cloud.meta["n"] = std::to_string(n);
  cloud.meta["burn_in"] = std::to_string(burn_in);
  cloud.meta["y0"] = fmt(y0);
  return cloud;
}

SeriesValue partial_S(const CirclePoint& x, const ControlWord& ctrl, std::size_t n, const PotentialFamily& f,
                      double lambda) {
  require_discount(lambda);
  if (ctrl.c.available() < n || ctrl.a.available() < n)
    throw std::out_of_range("partial_S: depth " + std::to_string(n) + " exceeds the available control prefix");
  CirclePoint xi = x;
  double value = 0.0;
  double weight = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    xi.prepend(ctrl.a[i]);
    value += weight * f.eval(ctrl.c[i], xi);
    weight *= lambda;
  }
  return SeriesValue{value, std::pow(lambda, static_cast<double>(n)) * f.sup_norm() / (1.0 - lambda)};
}

std::size_t truncation_depth(const PotentialFamily& f, double lambda, double tol) {
  require_discount(lambda);
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double scale = f.sup_norm() / (1.0 - lambda);
  if (scale <= tol) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(tol / scale) / std::log(lambda)));
}

double cocycle_check(const CirclePoint& x, int b, const ControlWord& ctrl, std::size_t n, const PotentialFamily& f,
                     double lambda) {
  const ControlWord shifted{ctrl.c.prepended(b), ctrl.a.prepended(address(x))};
  const double lhs = partial_S(doubling(x), shifted, n + 1, f, lambda).value;
  const double rhs = f.eval(b, x) + lambda * partial_S(x, ctrl, n, f, lambda).value;
  return std::abs(lhs - rhs);
}

double annulus_bound(const PotentialFamily& f, double lambda) {
  require_discount(lambda);
  return f.sup_norm() / (1.0 - lambda) * (1.0 + 1e-9);
}

std::size_t absorption_steps(const PotentialFamily& f, double lambda, double M, double T0) {
  require_discount(lambda);
  const double margin = T0 - f.sup_norm() / (1.0 - lambda);
  if (!(margin > 0.0)) throw std::invalid_argument("T0 must exceed max|A| / (1 - lambda)");
  const double ratio = (M + T0) / margin;
  if (ratio <= 1.0) return 0;
  return static_cast<std::size_t>(std::ceil(std::log(ratio) / std::log(1.0 / lambda)));
}

std::vector<PeriodicPoint> periodic_points(int c, unsigned n, const PotentialFamily& f, double lambda,
                                           unsigned cap) {
  require_discount(lambda);
  if (n < 1) throw std::invalid_argument("period must be at least 1");
  if (n > cap || n > 61) throw BudgetError("period " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  (void)f[c];
  const std::uint64_t den = (std::uint64_t{1} << n) - 1;
  const double norm = 1.0 / (1.0 - std::pow(lambda, static_cast<double>(n)));
  std::vector<PeriodicPoint> out;
  out.reserve(den);
  std::vector<double> orbit_values(n);
  for (std::uint64_t k = 0; k < den; ++k) {
    const CirclePoint x = CirclePoint::rational(k, den);
    CirclePoint xi = x;
    for (unsigned j = 0; j < n; ++j) {
      orbit_values[j] = f.eval(c, xi);  // A_c(T^j x)
      xi.double_in_place();
    }
    double y = 0.0;
    double weight = 1.0;
    for (unsigned i = 0; i < n; ++i) {
      y += weight * orbit_values[n - 1 - i];
      weight *= lambda;
    }
    out.push_back(PeriodicPoint{k, den, x, norm * y});
  }
  return out;
}

PointCloud lambda_cloud_chaos(const PotentialFamily& f, double lambda, const ChaosOptions& opts) {
  require_discount(lambda);
  const CirclePoint x0 = CirclePoint::random(derive_seed(opts.seed, 1, 0));
  const SymbolStream controls = SymbolStream::random(f.size(), derive_seed(opts.seed, 2, 0));
  const std::size_t total = opts.burn_in + opts.n_points;
  PointCloud cloud = orbit(x0, opts.y0, controls, total, opts.burn_in, f, lambda);
  const double t0 = annulus_bound(f, lambda);
  cloud.error_radius = std::pow(lambda, static_cast<double>(opts.burn_in)) * (std::abs(opts.y0) + t0);
  cloud.meta["kind"] = "chaos";
  cloud.meta["seed"] = std::to_string(opts.seed);
  cloud.meta["error_radius"] = fmt(cloud.error_radius);
  cloud.meta["float_slack"] = fmt(kFloatSlackPer100 * std::ceil(static_cast<double>(total) / 100.0));
  return cloud;
}

namespace {

// Depth-first walk over word pairs. Branch images are computed in floating
// point: halving is exact, and x + a only rounds once a point carries more
// than 52 significant bits, which needs depth + log2(n_grid) > 52.
template <typename Visit>
void enumerate_words(const PotentialFamily& f, double lambda, unsigned depth, double x, double acc, double weight,
                     unsigned level, Visit& visit) {
  if (level == depth) {
    visit(acc);
    return;
  }
  const int m = f.size();
  for (int a = 0; a < 2; ++a) {
    const double xa = (x + a) * 0.5;
    for (int c = 0; c < m; ++c)
      enumerate_words(f, lambda, depth, xa, acc + weight * f.eval(c, xa), weight * lambda, level + 1, visit);
  }
}

}  // namespace

void enumerate_lambda(const PotentialFamily& f, double lambda, unsigned depth, std::size_t n_grid,
                      const std::function<void(std::size_t node, double x, double y)>& visit) {
  require_discount(lambda);
  if (n_grid == 0) throw std::invalid_argument("grid must have at least one node");
  for (std::size_t j = 0; j < n_grid; ++j) {
    const double xv = CirclePoint::rational(j, n_grid).to_double();
    auto leaf = [&](double y) { visit(j, xv, y); };
    enumerate_words(f, lambda, depth, xv, 0.0, 1.0, 0, leaf);
  }
}

unsigned default_enumeration_depth(int m) {
  return static_cast<unsigned>(std::floor(20.0 / std::log2(2.0 * m)));
}

PointCloud lambda_cloud_enumerate(const PotentialFamily& f, double lambda, unsigned depth, std::size_t n_grid,
                                  std::size_t budget, unsigned workers) {
  require_discount(lambda);
  if (n_grid == 0) throw std::invalid_argument("grid must have at least one node");
  const double words = std::pow(2.0 * f.size(), static_cast<double>(depth));
  if (words * static_cast<double>(n_grid) > static_cast<double>(budget))
    throw BudgetError("enumeration of " + fmt(words * static_cast<double>(n_grid)) + " points exceeds budget " +
                      std::to_string(budget));
  const auto per_node = static_cast<Eigen::Index>(words);
  PointCloud cloud;
  cloud.points.resize(per_node * static_cast<Eigen::Index>(n_grid), 2);
  parallel_for(n_grid, workers, [&](std::size_t j) {
    const double xv = CirclePoint::rational(j, n_grid).to_double();
    Eigen::Index row = per_node * static_cast<Eigen::Index>(j);
    auto leaf = [&](double y) { cloud.points.row(row++) << xv, y; };
    enumerate_words(f, lambda, depth, xv, 0.0, 1.0, 0, leaf);
  });
  cloud.error_radius = std::pow(lambda, static_cast<double>(depth)) * f.sup_norm() / (1.0 - lambda);
  cloud.meta["kind"] = "enumerate";
  cloud.meta["depth"] = std::to_string(depth);
  cloud.meta["grid"] = std::to_string(n_grid);
  cloud.meta["error_radius"] = fmt(cloud.error_radius);
  cloud.meta["covering_radius"] =
      fmt(2.0 / (2.0 - lambda) * f.lipschitz() / (2.0 * static_cast<double>(n_grid)) + cloud.error_radius);
  return cloud;
}

ConjugacyResult conjugacy_step(const CirclePoint& x, const SymbolStream& a, const SymbolStream& c,
                               const SymbolStream& b, const PotentialFamily& f, double lambda, std::size_t depth) {
  const int b_first = b[0];
  ConjugacyResult r;

  // G(Psi(x, a, c, b)) = G(x, S_x(c, a), b)
  const double s = partial_S(x, ControlWord{c, a}, depth, f, lambda).value;
  r.lhs = SkewState{doubling(x), f.eval(b_first, x) + lambda * s, b.shifted()};

  // Psi(theta(x, a, c, b)) = Psi(T x, pi(x)*a, b_{-1}*c, sigma b)
  const CirclePoint tx = doubling(x);
  const ControlWord moved{c.prepended(b_first), a.prepended(address(x))};
  r.rhs = SkewState{tx, partial_S(tx, moved, depth, f, lambda).value, b.shifted()};

  r.x_match = r.lhs.x == r.rhs.x;
  r.b_match = true;
  const std::size_t check = std::min(depth, r.lhs.b.available());
  for (std::size_t i = 0; i < check; ++i) r.b_match = r.b_match && r.lhs.b[i] == r.rhs.b[i];
  r.y_gap = std::abs(r.lhs.y - r.rhs.y);
  r.bound = 2.0 * std::pow(lambda, static_cast<double>(depth)) * f.sup_norm() / (1.0 - lambda);
  return r;
}

Trace nonattractor_trace(double y0, const SymbolStream& controls, std::size_t n, const PotentialFamily& f,
                         double lambda) {
  require_discount(lambda);
  Trace t;
  t.x.reserve(n);
  t.y.reserve(n);
  CirclePoint x = CirclePoint::rational(1, 3);
  double y = y0;
  for (std::size_t i = 0; i < n; ++i) {
    t.x.push_back(x);
    t.y.push_back(y);
    y = f.eval(controls[i], x) + lambda * y;
    x.double_in_place();
  }
  return t;
}

}  // namespace skewifs
