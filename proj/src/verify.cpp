#include "skewifs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "skewifs/bellman.hpp"
#include "skewifs/ergopt.hpp"
#include "skewifs/rng.hpp"
#include "skewifs/srb.hpp"

namespace skewifs {

namespace {

std::string describe(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream out;
  out.precision(6);
  bool first = true;
  for (const auto& [key, value] : items) {
    out << (first ? "" : ", ") << key << "=" << value;
    first = false;
  }
  return out.str();
}

Eigen::VectorXd random_values(Eigen::Index n, double scale, std::uint64_t seed) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = scale * (2.0 * uniform_unit(hash_combine(seed, static_cast<std::uint64_t>(i))) - 1.0);
  return v;
}

}  // namespace

double sandwich_excess(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points, const GridFunction<double>& v_minus,
                       const GridFunction<double>& v_plus) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0);
    const double y = points(i, 1);
    worst = std::max({worst, v_minus(x) - y, y - v_plus(x)});
  }
  return worst;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> hutchinson_image(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
                                                          const PotentialFamily& f, double lambda) {
  const Eigen::Index n = points.rows();
  Eigen::Matrix<double, Eigen::Dynamic, 2> out(n * f.size(), 2);
  for (int c = 0; c < f.size(); ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = points(i, 0);
      const double tx = 2.0 * x - std::floor(2.0 * x);  // exact in binary floating point
      out.row(c * n + i) << tx, f.eval(c, x) + lambda * points(i, 1);
    }
  }
  return out;
}

GridFunction<double> random_perturbation(Eigen::Index n, double amplitude, std::uint64_t seed) {
  constexpr int degree = 4;
  Eigen::VectorXd coeffs = random_values(2 * degree, 1.0, seed);
  const double scale = amplitude * uniform_unit(hash_combine(seed, 1000)) / coeffs.cwiseAbs().sum();
  coeffs *= scale;
  return GridFunction<double>::sample(n, [&](double x) {
    double total = 0.0;
    for (int k = 1; k <= degree; ++k) {
      const double omega = 2.0 * std::numbers::pi * k;
      total += coeffs(2 * k - 2) * std::cos(omega * x) + coeffs(2 * k - 1) * std::sin(omega * x);
    }
    return total;
  });
}

std::vector<CheckResult> run_property_suite(const VerifyInputs& in) {
  const PotentialFamily& f = in.f;
  const double lambda = in.lambda;
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool passed, std::string detail) {
    out.push_back(CheckResult{std::move(name), passed, std::move(detail)});
  };

  {
    constexpr Eigen::Index n = 256;
    const BellmanOperator<double> op(f, lambda, Extremum::max, n);
    double contraction = 0.0;
    double additivity = 0.0;
    bool monotone = true;
    for (std::uint64_t p = 0; p < 20; ++p) {
      const Eigen::VectorXd a = random_values(n, 5.0, derive_seed(in.seed, 100, p));
      const Eigen::VectorXd b = random_values(n, 5.0, derive_seed(in.seed, 101, p));
      const Eigen::VectorXd up = a + random_values(n, 1.0, derive_seed(in.seed, 102, p)).cwiseAbs();
      const double k = 3.0 * (2.0 * uniform_unit(derive_seed(in.seed, 103, p)) - 1.0);
      const Eigen::VectorXd la = op.apply(a);
      contraction = std::max(contraction, (la - op.apply(b)).cwiseAbs().maxCoeff() - lambda * (a - b).cwiseAbs().maxCoeff());
      monotone = monotone && (op.apply(up).array() >= la.array()).all();
      const Eigen::VectorXd shifted = (a.array() + k).matrix();
      additivity = std::max(additivity, (op.apply(shifted).array() - la.array() - lambda * k).abs().maxCoeff());
    }
    add("bellman_operator", contraction <= 1e-12 && monotone && additivity <= 1e-12,
        describe({{"contraction_excess", contraction}, {"monotone", monotone ? 1.0 : 0.0}, {"additivity", additivity}}));
  }

  SolveOptions solve;
  solve.n = in.grid_n;
  const GridFunction<double> vp = solve_value(f, lambda, Extremum::max, in.tol, solve);
  const GridFunction<double> vm = solve_value(f, lambda, Extremum::min, in.tol, solve);
  const double tp = vp.tol().value_or(0.0);
  const double tm = vm.tol().value_or(0.0);
  {
    const double res_p = bellman_residual_sup(vp, f, lambda, Extremum::max);
    const double res_m = bellman_residual_sup(vm, f, lambda, Extremum::min);
    const double bound = in.tol * (1.0 - lambda) * (1.0 + lambda);
    const double order = (vm.values() - vp.values()).maxCoeff();
    add("value_functions", res_p <= bound && res_m <= bound && order <= tp + tm,
        describe({{"residual_plus", res_p}, {"residual_minus", res_m}, {"bound", bound}, {"max(v- - v+)", order},
                  {"tol_plus", tp}, {"tol_minus", tm}}));
  }

  ChaosOptions chaos;
  chaos.n_points = in.n_points;
  chaos.burn_in = in.burn_in;
  chaos.seed = in.seed;
  const PointCloud cloud = lambda_cloud_chaos(f, lambda, chaos);
  const double band = std::max(tp, tm) + cloud.error_radius + std::stod(cloud.meta.at("float_slack"));
  {
    const double excess = sandwich_excess(cloud.points, vm, vp);
    add("chaos_sandwich", excess <= band, describe({{"excess", excess}, {"tol", band}}));
  }
  {
    const double slack = band + f.lipschitz() * 0x1p-53 + 1e-12;
    const double excess = sandwich_excess(hutchinson_image(cloud.points, f, lambda), vm, vp);
    add("self_similarity", excess <= slack, describe({{"excess", excess}, {"tol", slack}}));
  }
  {
    double worst = 0.0;
    for (unsigned n = 1; n <= 8; ++n) {
      for (int c = 0; c < f.size(); ++c) {
        const auto pts = periodic_points(c, n, f, lambda);
        Eigen::Matrix<double, Eigen::Dynamic, 2> m(static_cast<Eigen::Index>(pts.size()), 2);
        for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) << pts[i].x.to_double(), pts[i].y;
        worst = std::max(worst, sandwich_excess(m, vm, vp));
      }
    }
    const double slack = std::max(tp, tm) + 1e-12;
    add("periodic_points", worst <= slack, describe({{"excess", worst}, {"tol", slack}}));
  }
  {
    constexpr std::size_t depth = 40;
    bool ok = true;
    double worst = 0.0;
    double cocycle = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
      const CirclePoint x = CirclePoint::random(derive_seed(in.seed, 200, k));
      const SymbolStream a = SymbolStream::random(2, derive_seed(in.seed, 201, k));
      const SymbolStream c = SymbolStream::random(f.size(), derive_seed(in.seed, 202, k));
      const SymbolStream b = SymbolStream::random(f.size(), derive_seed(in.seed, 203, k));
      const ConjugacyResult r = conjugacy_step(x, a, c, b, f, lambda, depth);
      ok = ok && r.x_match && r.b_match && r.y_gap <= r.bound + 1e-10;
      worst = std::max(worst, r.y_gap);
      cocycle = std::max(cocycle, cocycle_check(x, b[0], ControlWord{c, a}, depth, f, lambda));
    }
    ok = ok && cocycle <= 1e-10;
    add("conjugacy", ok, describe({{"max_y_gap", worst}, {"max_cocycle", cocycle}}));
  }

  const Eigen::Index z = vp.argmax();
  const double zx = GridFunction<double>::node(z, vp.n_points());
  {
    const TraceMeasure nu = TraceMeasure::dirac(zx);
    const DualValue at_v = dual_functional(vp, f, lambda, nu);
    const double gap = std::abs(at_v.value - (1.0 - lambda) * vp[z]);
    double worst = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k < 10; ++k) {
      GridFunction<double> w = random_perturbation(vp.n_points(), 0.5, derive_seed(in.seed, 300, k));
      w.values() += vp.values();
      const DualValue d = dual_functional(w, f, lambda, nu);
      worst = std::min(worst, d.value + d.slack + 2.0 * tp - at_v.value);
    }
    add("duality", gap <= 2.0 * tp && worst >= 0.0,
        describe({{"|psi(v) - (1-l)v(z)|", gap}, {"2tol", 2.0 * tp}, {"min weak-duality margin", worst}}));
  }
  {
    constexpr double tail = 1e-12;
    const std::size_t depth = discounted_truncation(lambda, tail);
    const CirclePoint x0 = CirclePoint::rational(static_cast<std::uint64_t>(z), static_cast<std::uint64_t>(vp.n_points()));
    const OptimalPath path = optimal_sequences(vp, f, lambda, x0, depth);
    const EmpiricalMeasure mu = empirical_discounted(x0, path.ctrl, lambda, tail);
    const double tail_mass = std::get<EmpiricalMeasure::Discounted>(mu.kind).tail_mass;
    const double payoff = integrate_payoff(mu, f);
    const double combined = 2.0 * tp + 2.0 * tail_mass * f.sup_norm() / (1.0 - tail_mass) + 1e-12;
    const double identity = std::abs(payoff - (1.0 - lambda) * vp.max());
    const double defect = discounted_holonomy_defect(mu, TraceMeasure::dirac(zx), lambda);
    const double support = support_check_discounted(mu, vp, f, lambda);
    const double support_bound = 2.0 * tp + value_lipschitz_bound(f, lambda) / (2.0 * static_cast<double>(vp.n_points()));
    add("optimal_measure", identity <= combined && defect <= 2.0 * tail_mass + 1e-8 && support <= support_bound,
        describe({{"identity_gap", identity}, {"combined_tol", combined}, {"defect", defect},
                  {"support_residual", support}, {"support_bound", support_bound}}));
  }
  {
    const CycleWitness w = cycle_oracle(f, in.oracle_len, in.workers);
    const double upper = (1.0 - lambda) * (vp.max() + tp);
    const double cycle_defect = holonomy_defect(w.to_measure());
    add("oracle_bracket", w.value <= upper + 1e-12 && cycle_defect <= 1e-12,
        describe({{"oracle", w.value}, {"upper", upper}, {"cycle_defect", cycle_defect}}));
  }
  {
    constexpr std::size_t n = 1000;
    const ControlWord ctrl{SymbolStream::random(f.size(), derive_seed(in.seed, 400, 0)),
                           SymbolStream::random(2, derive_seed(in.seed, 401, 0))};
    const EmpiricalMeasure mu = empirical_from_orbit(CirclePoint::random(derive_seed(in.seed, 402, 0)), ctrl, n, f);
    const double defect = holonomy_defect(mu);
    add("holonomy_telescoping", defect <= 2.0 / n + 1e-12, describe({{"defect", defect}, {"bound", 2.0 / n}}));
  }
  {
    const SrbEstimate est = sample_srb(f, lambda, Observable::y(), in.srb_samples, in.tol, in.seed, in.workers);
    const double margin = 3.0 * est.std_error + est.bias_bound + 1e-12;
    const double lo = vm.mean() - tm - margin;
    const double hi = vp.mean() + tp + margin;
    add("srb_sandwich", est.mean >= lo && est.mean <= hi,
        describe({{"mean", est.mean}, {"std_error", est.std_error}, {"lower", lo}, {"upper", hi}}));
  }
  {
    const SymbolStream controls = SymbolStream::random(f.size(), derive_seed(in.seed, 500, 0));
    const Trace t = nonattractor_trace(1.4, controls, 2000, f, lambda);
    const CirclePoint third = CirclePoint::rational(1, 3);
    const CirclePoint two_thirds = CirclePoint::rational(2, 3);
    const bool ok = std::all_of(t.x.begin(), t.x.end(), [&](const CirclePoint& p) { return p == third || p == two_thirds; });
    add("nonattractor", ok, "steps=2000");
  }
  return out;
}

}  // namespace skewifs
