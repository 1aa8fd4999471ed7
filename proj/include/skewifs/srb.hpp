#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skewifs/circle.hpp"
#include "skewifs/control.hpp"
#include "skewifs/potentials.hpp"

namespace skewifs {

// A function g(x, y, b) on X x R x C^N. lip_y bounds |g(x, y) - g(x, y')| / |y - y'|
// and turns the truncation bias of y into a bias bound for g.
struct Observable {
  std::string name;
  std::function<double(const CirclePoint& x, double y, const SymbolStream& b)> fn;
  double lip_y = 0.0;

  static Observable y();
  // A_{b_{-1}}(x): the potential selected by the first past symbol.
  static Observable potential_of_past(const PotentialFamily& f);
  static Observable of_xy(std::string name, std::function<double(double x, double y)> g, double lip_y);
};

struct SrbEstimate {
  std::string statistic;
  double mean = 0.0;
  double std_error = 0.0;   // sample stdev / sqrt(n_samples)
  double bias_bound = 0.0;  // deterministic truncation bias
  std::size_t n_samples = 0;
  std::size_t depth = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo mean of g under the random SRB measure: x has iid fair digits,
// a, c and b are iid uniform streams, and y = S_x(c, a) truncated at the depth
// given by tol. The unsampled tail is replaced by its midpoint, so
//   |E y - mean| <= lambda^depth (max A - min A) / (2 (1 - lambda)).
SrbEstimate sample_srb(const PotentialFamily& f, double lambda, const Observable& g, std::size_t n_samples,
                       double tol, std::uint64_t seed, unsigned workers = 1);

struct BirkhoffResult {
  std::vector<double> averages;  // one per trial
  SrbEstimate reference_y;       // estimate of integral of y dmu
  double reference = 0.0;        // (1 - lambda) reference_y.mean
  double reference_se = 0.0;
  double reference_bias = 0.0;
  double trial_sigma = 0.0;      // sample stdev of the trial averages
  double band = 0.0;             // 3 sqrt(trial_sigma^2 + reference_se^2)
  std::size_t outside = 0;       // trials with |average - reference| > band + reference_bias
};

// Trial j: x with iid digits and b iid; average (1/N) sum_{j=1}^{N-1} A_{b_{-j}}(T^{j-1} x).
BirkhoffResult birkhoff_experiment(const PotentialFamily& f, double lambda, std::size_t n_steps,
                                   std::size_t n_trials, std::uint64_t seed, std::size_t ref_samples = 100000,
                                   double tol = 1e-9, unsigned workers = 1);

struct AverageBoundReport {
  std::vector<double> averages;
  double oracle = 0.0;
  double upper = 0.0;  // (1 - lambda) max v_lambda + its tolerance
  double epsilon = 0.0;
  std::size_t violations = 0;
  bool passed() const noexcept { return violations == 0; }
};

// Checks every trial average against upper + epsilon, where upper brackets the
// critical value from above via the discounted solution at lambda.
AverageBoundReport average_bound_check(const PotentialFamily& f, double lambda, double epsilon, std::size_t n_trials,
                                       std::size_t n_steps, std::uint64_t seed, long grid_n = 8192,
                                       unsigned oracle_len = 12, unsigned workers = 1);

}  // namespace skewifs
