#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skewifs/grid_function.hpp"
#include "skewifs/potentials.hpp"
#include "skewifs/skew.hpp"

namespace skewifs {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyInputs {
  PotentialFamily f;
  double lambda = 0.48;
  Eigen::Index grid_n = 8192;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::size_t n_points = 10000;
  std::size_t burn_in = 1000;
  unsigned oracle_len = 12;
  std::size_t srb_samples = 20000;
  unsigned workers = 1;
};

// Largest amount by which a cloud point leaves the band v_minus <= y <= v_plus.
double sandwich_excess(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points, const GridFunction<double>& v_minus,
                       const GridFunction<double>& v_plus);

// The images G_c(x, y) of every point under every map of the family.
Eigen::Matrix<double, Eigen::Dynamic, 2> hutchinson_image(const Eigen::Matrix<double, Eigen::Dynamic, 2>& points,
                                                          const PotentialFamily& f, double lambda);

// Random trigonometric polynomial of degree <= 4 on an n-point grid with
// sup norm at most `amplitude`.
GridFunction<double> random_perturbation(Eigen::Index n, double amplitude, std::uint64_t seed);

std::vector<CheckResult> run_property_suite(const VerifyInputs& in);

}  // namespace skewifs
