#include "skewifs/bellman.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "skewifs/errors.hpp"

namespace skewifs {

namespace {

bool better(double candidate, double best, Extremum sign) {
  return sign == Extremum::max ? candidate > best : candidate < best;
}

double branch(double x, int a) { return (x - std::floor(x) + a) / 2.0; }

}  // namespace

double value_lipschitz_bound(const PotentialFamily& f, double lambda) { return f.lipschitz() / (2.0 - lambda); }

double interpolation_tol(const PotentialFamily& f, double lambda, Eigen::Index n) {
  return value_lipschitz_bound(f, lambda) / (2.0 * static_cast<double>(n) * (1.0 - lambda));
}

GridFunction<double> solve_value(const PotentialFamily& f, double lambda, Extremum sign, double tol,
                                 const SolveOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (opts.n < 16 || opts.n % 2 != 0) throw std::invalid_argument("grid size must be even and at least 16");
  const BellmanOperator<double> op(f, lambda, sign, opts.n);

  Eigen::VectorXd cur = Eigen::VectorXd::Zero(opts.n);
  if (opts.warm_start) {
    if (opts.warm_start->size() != opts.n) throw std::invalid_argument("warm start has the wrong grid size");
    cur = *opts.warm_start;
  }
  std::size_t cap = opts.max_iter;
  if (cap == 0) {
    const double scale = f.sup_norm() / (1.0 - lambda) + cur.cwiseAbs().maxCoeff() + 1.0;
    const double needed = std::log(tol * (1.0 - lambda) / scale) / std::log(lambda);
    cap = 2 * static_cast<std::size_t>(std::max(0.0, std::ceil(needed))) + 1000;
  }

  const double target = tol * (1.0 - lambda);
  Eigen::VectorXd next;
  for (std::size_t k = 1; k <= cap; ++k) {
    next = op.apply(cur);
    const double change = (next - cur).cwiseAbs().maxCoeff();
    if (!std::isfinite(change)) throw NumericError("value iteration produced a non-finite value");
    cur.swap(next);
    if (change <= target) {
      const double bound = change * lambda / (1.0 - lambda) + interpolation_tol(f, lambda, opts.n);
      return GridFunction<double>(std::move(cur), bound, k);
    }
  }
  throw NumericError("value iteration did not converge in " + std::to_string(cap) + " iterations");
}

Eigen::VectorXd warm_start_from(const GridFunction<double>& prev, double lambda_prev, double lambda) {
  const double top = prev.max();
  return prev.values().array() - top + top * (1.0 - lambda_prev) / (1.0 - lambda);
}

double bellman_residual_sup(const GridFunction<double>& v, const PotentialFamily& f, double lambda, Extremum sign) {
  const BellmanOperator<double> op(f, lambda, sign, v.n_points());
  return (op.apply(v.values()) - v.values()).cwiseAbs().maxCoeff();
}

std::vector<Action> policy(const GridFunction<double>& v, const PotentialFamily& f, double lambda, Extremum sign) {
  const Eigen::Index n = v.n_points();
  std::vector<Action> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = GridFunction<double>::node(i, n);
    Action best;
    double best_value = 0.0;
    bool first = true;
    for (int c = 0; c < f.size(); ++c) {
      for (int a = 0; a < 2; ++a) {
        const double y = branch(x, a);
        const double value = f.eval(c, y) + lambda * v(y);
        if (first || better(value, best_value, sign)) {
          best = Action{c, a};
          best_value = value;
          first = false;
        }
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

OptimalPath optimal_sequences(const GridFunction<double>& v, const PotentialFamily& f, double lambda,
                              const CirclePoint& x0, std::size_t n, Extremum sign) {
  if (n < 1) throw std::invalid_argument("optimal_sequences needs n >= 1");
  std::vector<int> cs(n);
  std::vector<int> as(n);
  OptimalPath path;
  path.orbit.reserve(n + 1);
  path.orbit.push_back(x0);
  for (std::size_t i = 0; i < n; ++i) {
    const CirclePoint& x = path.orbit.back();
    std::array<CirclePoint, 2> images{inverse_branch(x, 0), inverse_branch(x, 1)};
    std::array<double, 2> at{images[0].to_double(), images[1].to_double()};
    std::array<double, 2> cont{lambda * v(at[0]), lambda * v(at[1])};
    int best_c = 0;
    int best_a = 0;
    double best_value = 0.0;
    bool first = true;
    for (int c = 0; c < f.size(); ++c) {
      for (int a = 0; a < 2; ++a) {
        const double value = f.eval(c, at[a]) + cont[a];
        if (first || better(value, best_value, sign)) {
          best_c = c;
          best_a = a;
          best_value = value;
          first = false;
        }
      }
    }
    cs[i] = best_c;
    as[i] = best_a;
    path.orbit.push_back(std::move(images[best_a]));
  }
  path.ctrl = ControlWord{SymbolStream::finite(std::move(cs), f.size()), SymbolStream::finite(std::move(as), 2)};
  return path;
}

Subaction subaction(const GridFunction<double>& v, const PotentialFamily& f, double lambda) {
  const double top = v.max();
  Subaction s;
  s.b = GridFunction<double>(v.values().array() - top);
  s.u_est = (1.0 - lambda) * top;
  const BellmanOperator<double> op(f, lambda, Extremum::max, v.n_points());
  const Eigen::VectorXd& b = s.b.values();
  const Eigen::VectorXd lifted =
      (op.reward(0) + op.interpolation(0) * b).cwiseMax(op.reward(1) + op.interpolation(1) * b);
  s.residual = (lifted.array() - s.u_est - b.array()).abs().maxCoeff();
  return s;
}

double bellman_residual(const GridFunction<double>& v, const PotentialFamily& f, double lambda, double x, int c,
                        int a) {
  if (a != 0 && a != 1) throw std::invalid_argument("branch address must be 0 or 1");
  const double y = branch(x, a);
  return f.eval(c, y) + lambda * v(y) - v(x);
}

}  // namespace skewifs
