#include "skewifs/srb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skewifs/bellman.hpp"
#include "skewifs/ergopt.hpp"
#include "skewifs/parallel.hpp"
#include "skewifs/rng.hpp"
#include "skewifs/skew.hpp"

namespace skewifs {

namespace {

constexpr std::size_t kBlock = 1024;

// Streaming mean and sum of squared deviations.
struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

std::vector<double> trial_averages(const PotentialFamily& f, std::size_t n_steps, std::size_t n_trials,
                                   std::uint64_t seed, unsigned workers) {
  if (n_steps < 1000) throw std::invalid_argument("Birkhoff averages need at least 1000 steps");
  std::vector<double> out(n_trials);
  parallel_for(n_trials, workers, [&](std::size_t j) {
    CirclePoint x = CirclePoint::random(derive_seed(seed, 21, j));
    const SymbolStream b = SymbolStream::random(f.size(), derive_seed(seed, 22, j));
    double total = 0.0;
    for (std::size_t k = 1; k < n_steps; ++k) {
      total += f.eval(b[k - 1], x);
      x.double_in_place();
    }
    out[j] = total / static_cast<double>(n_steps);
  });
  return out;
}

}  // namespace

Observable Observable::y() {
  return Observable{"y", [](const CirclePoint&, double y, const SymbolStream&) { return y; }, 1.0};
}

Observable Observable::potential_of_past(const PotentialFamily& f) {
  return Observable{"A_b(x)", [f](const CirclePoint& x, double, const SymbolStream& b) { return f.eval(b[0], x); },
                    0.0};
}

Observable Observable::of_xy(std::string name, std::function<double(double x, double y)> g, double lip_y) {
  return Observable{std::move(name),
                    [g = std::move(g)](const CirclePoint& x, double y, const SymbolStream&) {
                      return g(x.to_double(), y);
                    },
                    lip_y};
}

SrbEstimate sample_srb(const PotentialFamily& f, double lambda, const Observable& g, std::size_t n_samples,
                       double tol, std::uint64_t seed, unsigned workers) {
  if (n_samples < 100) throw std::invalid_argument("sample_srb needs at least 100 samples");
  const std::size_t depth = truncation_depth(f, lambda, tol);
  const double tail_weight = std::pow(lambda, static_cast<double>(depth)) / (1.0 - lambda);
  const double midpoint = tail_weight * (f.min_value() + f.max_value()) / 2.0;
  const int m = f.size();

  const std::size_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<Moments> blocks(n_blocks);
  parallel_for(n_blocks, workers, [&](std::size_t block) {
    const std::size_t end = std::min(n_samples, (block + 1) * kBlock);
    Moments local;
    for (std::size_t i = block * kBlock; i < end; ++i) {
      const CirclePoint x = CirclePoint::random(derive_seed(seed, 11, i));
      const ControlWord ctrl{SymbolStream::random(m, derive_seed(seed, 13, i)),
                             SymbolStream::random(2, derive_seed(seed, 12, i))};
      const SymbolStream b = SymbolStream::random(m, derive_seed(seed, 14, i));
      const double y = partial_S(x, ctrl, depth, f, lambda).value + midpoint;
      local.add(g.fn(x, y, b));
    }
    blocks[block] = local;
  });
  Moments total;
  for (const Moments& b : blocks) total.merge(b);

  SrbEstimate est;
  est.statistic = g.name;
  est.mean = total.mean;
  est.std_error = std::sqrt(total.variance() / static_cast<double>(total.n));
  est.bias_bound = g.lip_y * tail_weight * (f.max_value() - f.min_value()) / 2.0;
  est.n_samples = n_samples;
  est.depth = depth;
  est.seed = seed;
  return est;
}

BirkhoffResult birkhoff_experiment(const PotentialFamily& f, double lambda, std::size_t n_steps,
                                   std::size_t n_trials, std::uint64_t seed, std::size_t ref_samples, double tol,
                                   unsigned workers) {
  if (n_trials < 2) throw std::invalid_argument("need at least two trials for a spread estimate");
  BirkhoffResult r;
  r.averages = trial_averages(f, n_steps, n_trials, seed, workers);
  r.reference_y = sample_srb(f, lambda, Observable::y(), ref_samples, tol, seed, workers);
  r.reference = (1.0 - lambda) * r.reference_y.mean;
  r.reference_se = (1.0 - lambda) * r.reference_y.std_error;
  r.reference_bias = (1.0 - lambda) * r.reference_y.bias_bound;

  Moments spread;
  for (double v : r.averages) spread.add(v);
  r.trial_sigma = std::sqrt(spread.variance());
  r.band = 3.0 * std::sqrt(r.trial_sigma * r.trial_sigma + r.reference_se * r.reference_se);
  for (double v : r.averages)
    if (std::abs(v - r.reference) > r.band + r.reference_bias) ++r.outside;
  return r;
}

AverageBoundReport average_bound_check(const PotentialFamily& f, double lambda, double epsilon, std::size_t n_trials,
                                       std::size_t n_steps, std::uint64_t seed, long grid_n, unsigned oracle_len,
                                       unsigned workers) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  SolveOptions opts;
  opts.n = grid_n;
  const GridFunction<double> v = solve_value(f, lambda, Extremum::max, 1e-6 / (1.0 - lambda), opts);

  AverageBoundReport r;
  r.averages = trial_averages(f, n_steps, n_trials, seed, workers);
  r.oracle = cycle_oracle(f, oracle_len, workers).value;
  r.upper = (1.0 - lambda) * (v.max() + v.tol().value_or(0.0));
  r.epsilon = epsilon;
  for (double avg : r.averages)
    if (avg > r.upper + epsilon) ++r.violations;
  return r;
}

}  // namespace skewifs
