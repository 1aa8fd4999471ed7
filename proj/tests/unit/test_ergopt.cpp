#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "skewifs/ergopt.hpp"
#include "skewifs/verify.hpp"

using namespace skewifs;

namespace {

constexpr double kLambda = 0.48;

const PotentialFamily& quad_tent() {
  static const PotentialFamily f = parse_family("quad; tent");
  return f;
}

ControlWord random_word(std::uint64_t seed, int m = 2) {
  return ControlWord{SymbolStream::random(m, seed), SymbolStream::random(2, seed + 1)};
}

}  // namespace

TEST_CASE("the period-two cycle through 1/3") {
  const ControlWord ctrl{SymbolStream::constant(1, 2), SymbolStream::repeating({1, 0}, 2)};
  const EmpiricalMeasure mu = empirical_from_orbit(CirclePoint::rational(1, 3), ctrl, 100, quad_tent());
  CHECK(mu.size() == 100);
  CHECK(mu.w.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate_payoff(mu, quad_tent()) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(holonomy_defect(mu) <= 1e-12);
  CHECK(mu.integrate([](double, int, int) { return 1.0; }) == doctest::Approx(1.0));
}

TEST_CASE("Birkhoff measures are nearly holonomic") {
  const EmpiricalMeasure mu = empirical_from_orbit(CirclePoint::random(2), random_word(3), 1000, quad_tent());
  CHECK(holonomy_defect(mu) <= 2.0 / 1000.0 + 1e-12);
  const EmpiricalMeasure one = empirical_from_orbit(CirclePoint{}, random_word(3), 1, quad_tent());
  CHECK(one.w(0) == 1.0);
  CHECK_THROWS(empirical_from_orbit(CirclePoint{}, random_word(3), 0, quad_tent()));
  CHECK_THROWS(empirical_from_orbit(CirclePoint{}, random_word(3, 3), 10, quad_tent()));
  CHECK_THROWS_AS(empirical_from_orbit(CirclePoint{}, ControlWord{SymbolStream::finite({0}, 2), SymbolStream::finite({0}, 2)},
                                       2, quad_tent()),
                  std::out_of_range);
}

TEST_CASE("discounted measures") {
  const double tol = 1e-12;
  const std::size_t n = discounted_truncation(kLambda, tol);
  CHECK(std::pow(kLambda, n) <= tol);
  CHECK(std::pow(kLambda, n - 1) > tol);
  const EmpiricalMeasure mu = empirical_discounted(CirclePoint::random(4), random_word(5), kLambda, tol);
  CHECK(mu.size() == static_cast<Eigen::Index>(n));
  CHECK(mu.w.sum() == doctest::Approx(1.0).epsilon(1e-14));
  for (Eigen::Index i = 1; i < mu.size(); ++i) CHECK(mu.w(i) == doctest::Approx(kLambda * mu.w(i - 1)).epsilon(1e-14));
  const auto& d = std::get<EmpiricalMeasure::Discounted>(mu.kind);
  CHECK(d.tail_mass <= tol);

  const EmpiricalMeasure sharp = empirical_discounted(CirclePoint::random(4), random_word(5), 0.01, tol);
  CHECK(sharp.w(0) == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("discounted holonomy defect") {
  const double tol = 1e-12;
  const CirclePoint z = CirclePoint::random(6);
  const EmpiricalMeasure mu = empirical_discounted(z, random_word(7), kLambda, tol);
  CHECK(discounted_holonomy_defect(mu, TraceMeasure::dirac(z.to_double()), kLambda) <= 4.0 * tol + 1e-12);
  // The plain holonomy defect does not vanish for a discounted measure.
  CHECK(holonomy_defect(mu) > 1e-3);

  // A wrong trace is detected, and by the expected amount.
  const double zp = std::fmod(z.to_double() + 0.3, 1.0);
  double expected = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double om = 2.0 * std::numbers::pi * k;
    expected = std::max({expected, std::abs(std::cos(om * z.to_double()) - std::cos(om * zp)),
                         std::abs(std::sin(om * z.to_double()) - std::sin(om * zp))});
  }
  expected *= 1.0 - kLambda;
  CHECK(discounted_holonomy_defect(mu, TraceMeasure::dirac(zp), kLambda) ==
        doctest::Approx(expected).epsilon(1e-9));
  CHECK(discounted_holonomy_defect(mu, TraceMeasure::lebesgue(), kLambda) > 0.1);

  const EmpiricalMeasure birkhoff = empirical_from_orbit(z, random_word(7), 10, quad_tent());
  CHECK_THROWS_AS(discounted_holonomy_defect(birkhoff, TraceMeasure::dirac(0.0), kLambda), std::invalid_argument);
  CHECK_THROWS_AS(discounted_holonomy_defect(mu, TraceMeasure::dirac(0.0), 0.5), std::invalid_argument);
}

TEST_CASE("integrals are invariant under permuting atoms") {
  EmpiricalMeasure mu = empirical_from_orbit(CirclePoint::random(8), random_word(9), 500, quad_tent());
  mu.w = Eigen::VectorXd::LinSpaced(500, 1.0, 2.0);
  mu.w /= mu.w.sum();
  const double payoff = integrate_payoff(mu, quad_tent());
  const double defect = holonomy_defect(mu);
  std::vector<Eigen::Index> perm(500);
  for (Eigen::Index i = 0; i < 500; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  EmpiricalMeasure p = mu;
  for (Eigen::Index i = 0; i < 500; ++i) {
    const Eigen::Index j = perm[static_cast<std::size_t>(i)];
    p.x(i) = mu.x(j);
    p.c(i) = mu.c(j);
    p.a(i) = mu.a(j);
    p.w(i) = mu.w(j);
  }
  CHECK(integrate_payoff(p, quad_tent()) == doctest::Approx(payoff).epsilon(1e-13));
  CHECK(holonomy_defect(p) == doctest::Approx(defect).epsilon(1e-10));
}

TEST_CASE("cycle oracle") {
  CHECK(cycle_oracle(parse_family("const 0.7"), 6).value == doctest::Approx(0.7).epsilon(1e-15));
  const CycleWitness l1 = cycle_oracle(quad_tent(), 1);
  CHECK(l1.value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(l1.a.size() == 1);
  const CycleWitness l2 = cycle_oracle(quad_tent(), 2);
  CHECK(l2.value >= 2.0 / 3.0 - 1e-15);
  CHECK(l2.den == 3);
  const EmpiricalMeasure m = l2.to_measure();
  CHECK(holonomy_defect(m) <= 1e-12);
  CHECK(integrate_payoff(m, quad_tent()) == doctest::Approx(l2.value).epsilon(1e-14));
  const CycleWitness l8 = cycle_oracle(quad_tent(), 8, 3);
  CHECK(l8.value >= l2.value);
  CHECK(cycle_oracle(quad_tent(), 8, 1).value == l8.value);
  CHECK_THROWS(cycle_oracle(quad_tent(), 0));
  CHECK_THROWS(cycle_oracle(quad_tent(), 17));
}

TEST_CASE("the oracle bounds the normalized value from below") {
  const double oracle = cycle_oracle(quad_tent(), 10).value;
  for (double lambda : {0.48, 0.9}) {
    const auto v = solve_value(quad_tent(), lambda, Extremum::max, 1e-8, {.n = 1024});
    CHECK(oracle <= (1.0 - lambda) * (v.max() + *v.tol()) + 1e-12);
  }
}

TEST_CASE("dual functional") {
  const auto v = solve_value(quad_tent(), kLambda, Extremum::max, 1e-10, {.n = 1024});
  const double tol = *v.tol();
  for (double z : {0.0, 0.3, 0.71}) {
    const DualValue d = dual_functional(v, quad_tent(), kLambda, TraceMeasure::dirac(z));
    CHECK(std::abs(d.value - (1.0 - kLambda) * v(z)) <= 2.0 * tol + d.slack);
  }
  const DualValue flat = dual_functional(GridFunction<double>::zero(256), quad_tent(), kLambda, TraceMeasure::lebesgue());
  CHECK(flat.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(flat.slack == doctest::Approx(1.0 / 2048.0));
  const PotentialFamily k = parse_family("const 3");
  const DualValue dk = dual_functional(GridFunction<double>::constant(64, 5.0), k, kLambda, TraceMeasure::dirac(0.2));
  CHECK(dk.value == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(dk.slack == 0.0);
}

TEST_CASE("weak duality against discounted measures") {
  std::mt19937_64 gen(13);
  for (int k = 0; k < 20; ++k) {
    const GridFunction<double> w = random_perturbation(512, 2.0, gen());
    const CirclePoint z = CirclePoint::random(gen());
    const TraceMeasure nu = TraceMeasure::dirac(z.to_double());
    const EmpiricalMeasure mu = empirical_discounted(z, random_word(gen()), kLambda, 1e-12);
    const DualValue d = dual_functional(w, quad_tent(), kLambda, nu);
    const double tail = std::get<EmpiricalMeasure::Discounted>(mu.kind).tail_mass;
    CHECK(d.value + d.slack + 4.0 * tail + 1e-12 >= integrate_payoff(mu, quad_tent()));
  }
}

TEST_CASE("support of the optimal discounted measure") {
  const auto v = solve_value(quad_tent(), kLambda, Extremum::max, 1e-10, {.n = 2048});
  const double tol = *v.tol();
  const CirclePoint z = CirclePoint::rational(3, 8);
  const OptimalPath path = optimal_sequences(v, quad_tent(), kLambda, z, discounted_truncation(kLambda, 1e-12));
  const EmpiricalMeasure mu = empirical_discounted(z, path.ctrl, kLambda, 1e-12);
  const double bound = 2.0 * tol + v.lipschitz() / (2.0 * 2048.0);
  CHECK(support_check_discounted(mu, v, quad_tent(), kLambda) <= bound);
  CHECK(std::abs(integrate_payoff(mu, quad_tent()) - (1.0 - kLambda) * v(z.to_double())) <= 2.0 * tol + 1e-9);

  const EmpiricalMeasure bad = empirical_discounted(z, random_word(99), kLambda, 1e-12);
  CHECK(support_check_discounted(bad, v, quad_tent(), kLambda) > 0.1);

  const PotentialFamily k = parse_family("const 1; const 1");
  const auto vk = solve_value(k, kLambda, Extremum::max, 1e-12, {.n = 64});
  CHECK(support_check_discounted(bad, vk, k, kLambda) <= 1e-11);
}

TEST_CASE("subaction on the oracle cycle") {
  const CycleWitness w = cycle_oracle(quad_tent(), 8);
  const auto v = solve_value(quad_tent(), 0.99, Extremum::max, 1e-8, {.n = 2048});
  const Subaction s = subaction(v, quad_tent(), 0.99);
  CHECK(support_check_limit(w.to_measure(), s.b, quad_tent(), s.u_est) < 0.05);
  CHECK(support_check_limit(w.to_measure(), GridFunction<double>::zero(8), parse_family("const 2; const 2"), 2.0) == 0.0);
}

TEST_CASE("discount-limit schedule") {
  ScheduleOptions opts;
  opts.grid_n = {256};
  opts.oracle_len = 6;
  const auto rows = discount_limit_schedule(parse_family("const 1.5; const 0.5"), {0.5, 0.9, 0.99}, opts);
  REQUIRE(rows.size() == 3);
  for (const ScheduleRow& r : rows) {
    CHECK(r.umax == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(r.ulebesgue == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(r.oracle == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(std::abs(r.gap) <= r.tol + 1e-12);
  }
  const auto zero = discount_limit_schedule(parse_family("const 0"), {0.9}, opts);
  CHECK(zero[0].umax == 0.0);
  CHECK(zero[0].gap == 0.0);

  const auto qt = discount_limit_schedule(quad_tent(), {0.9, 0.99}, opts);
  CHECK(qt[0].gap >= -qt[0].tol);
  CHECK(qt[1].gap < qt[0].gap);
  CHECK(qt[1].iterations > 0);

  CHECK_THROWS(discount_limit_schedule(quad_tent(), {0.9, 0.9}, opts));
  CHECK_THROWS(discount_limit_schedule(quad_tent(), {}, opts));
  CHECK_THROWS(discount_limit_schedule(quad_tent(), {0.9, 1.0}, opts));
  opts.grid_n = {256, 512, 1024};
  CHECK_THROWS(discount_limit_schedule(quad_tent(), {0.9, 0.99}, opts));
}
