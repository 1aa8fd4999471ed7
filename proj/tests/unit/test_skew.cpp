#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "skewifs/bellman.hpp"
#include "skewifs/errors.hpp"
#include "skewifs/skew.hpp"

using namespace skewifs;

namespace {

constexpr double kLambda = 0.48;

const PotentialFamily& quad_tent() {
  static const PotentialFamily f = parse_family("quad; tent");
  return f;
}

// Independent closed forms of the two built-in potentials.
double quad_ref(double x) { return (x - 0.5) * (x - 0.5); }
double tent_ref(double x) { return x <= 0.5 ? 2.0 * x : 2.0 - 2.0 * x; }

}  // namespace

TEST_CASE("one skew step") {
  const SkewPoint p = apply_skew(CirclePoint::from_double(0.25), 0.0, 0, quad_tent(), kLambda);
  CHECK(p.x.to_double() == 0.5);
  CHECK(p.y == 0.0625);
  const SkewPoint q = apply_skew(CirclePoint::rational(1, 3), 1.0, 1, quad_tent(), kLambda);
  CHECK(q.x == CirclePoint::rational(2, 3));
  CHECK(q.y == doctest::Approx(2.0 / 3.0 + kLambda));
  CHECK_THROWS_AS(apply_skew(CirclePoint{}, 0.0, 0, quad_tent(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_skew(CirclePoint{}, 0.0, 2, quad_tent(), kLambda), std::out_of_range);
}

TEST_CASE("orbit of the zero potential contracts to the zero section") {
  const PotentialFamily zero = parse_family("const 0");
  const PointCloud cloud = orbit(CirclePoint::random(1), 0.1, SymbolStream::constant(0, 1), 100, 60, zero, kLambda);
  REQUIRE(cloud.size() == 40);
  CHECK(cloud.points.col(1).cwiseAbs().maxCoeff() <= 0.1 * std::pow(kLambda, 60));
  CHECK_THROWS(orbit(CirclePoint{}, 0.0, SymbolStream::constant(0, 1), 10, 10, zero, kLambda));
}

TEST_CASE("orbits stay in the absorbing annulus") {
  const PointCloud cloud =
      orbit(CirclePoint::random(2), 0.0, SymbolStream::random(2, 3), 5000, 0, quad_tent(), kLambda);
  CHECK(cloud.points.col(1).cwiseAbs().maxCoeff() < annulus_bound(quad_tent(), kLambda));
  CHECK(annulus_bound(quad_tent(), kLambda) == doctest::Approx(1.0 / 0.52).epsilon(1e-8));
  CHECK(annulus_bound(quad_tent(), kLambda) > 1.0 / 0.52);
}

TEST_CASE("S-series of a constant family is a geometric sum") {
  const PotentialFamily f = parse_family("const 2; const 2");
  const ControlWord w{SymbolStream::random(2, 1), SymbolStream::random(2, 2)};
  for (std::size_t n : {1u, 5u, 40u}) {
    const SeriesValue s = partial_S(CirclePoint::random(4), w, n, f, kLambda);
    CHECK(s.value == doctest::Approx(2.0 * (1.0 - std::pow(kLambda, n)) / (1.0 - kLambda)).epsilon(1e-14));
    CHECK(s.err == doctest::Approx(std::pow(kLambda, n) * 2.0 / (1.0 - kLambda)));
  }
  const SeriesValue empty = partial_S(CirclePoint{}, w, 0, f, kLambda);
  CHECK(empty.value == 0.0);
  CHECK(empty.err == doctest::Approx(2.0 / 0.52));
}

TEST_CASE("S-series against a brute-force sum") {
  // x = 0, c = a = 1 forever: x_i = 1 - 2^-i.
  const ControlWord ones{SymbolStream::constant(1, 2), SymbolStream::constant(1, 2)};
  const SeriesValue s = partial_S(CirclePoint{}, ones, 30, quad_tent(), kLambda);
  double oracle = 0.0;
  double x = 0.0;
  for (int i = 0; i < 200; ++i) {
    x = (x + 1.0) / 2.0;
    oracle += std::pow(kLambda, i) * tent_ref(x);
  }
  CHECK(std::abs(s.value - oracle) <= 1e-8);
  CHECK(std::abs(s.value - oracle) <= s.err);

  // Random words against the same recursion.
  std::mt19937_64 gen(12);
  for (int k = 0; k < 20; ++k) {
    std::vector<int> c(60), a(60);
    for (int i = 0; i < 60; ++i) {
      c[i] = static_cast<int>(gen() % 2);
      a[i] = static_cast<int>(gen() % 2);
    }
    const double x0 = static_cast<double>(gen() % 1024) / 1024.0;
    double xi = x0, ref = 0.0;
    for (int i = 0; i < 60; ++i) {
      xi = (xi + a[i]) / 2.0;
      ref += std::pow(kLambda, i) * (c[i] == 0 ? quad_ref(xi) : tent_ref(xi));
    }
    const ControlWord w{SymbolStream::finite(c, 2), SymbolStream::finite(a, 2)};
    CHECK(partial_S(CirclePoint::from_double(x0), w, 60, quad_tent(), kLambda).value ==
          doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("S-series needs enough control symbols") {
  const ControlWord w{SymbolStream::finite({0, 1}, 2), SymbolStream::finite({0, 1, 1}, 2)};
  CHECK_NOTHROW(partial_S(CirclePoint{}, w, 2, quad_tent(), kLambda));
  CHECK_THROWS_AS(partial_S(CirclePoint{}, w, 3, quad_tent(), kLambda), std::out_of_range);
}

TEST_CASE("truncation depth") {
  const std::size_t n = truncation_depth(quad_tent(), kLambda, 1e-9);
  CHECK(std::pow(kLambda, n) / (1.0 - kLambda) <= 1e-9);
  CHECK(std::pow(kLambda, n - 1) / (1.0 - kLambda) > 1e-9);
  CHECK(truncation_depth(parse_family("const 0"), kLambda, 1e-9) == 0);
}

TEST_CASE("cocycle identity") {
  const ControlWord w{SymbolStream::random(2, 5), SymbolStream::random(2, 6)};
  CHECK(cocycle_check(CirclePoint::random(1), 1, w, 50, parse_family("const 1; const 3"), kLambda) <= 1e-12);
  std::mt19937_64 gen(8);
  const double bound = 2.0 * std::pow(kLambda, 40) / (1.0 - kLambda) + 1e-12;
  for (int k = 0; k < 100; ++k) {
    const ControlWord r{SymbolStream::random(2, gen()), SymbolStream::random(2, gen())};
    CHECK(cocycle_check(CirclePoint::random(gen()), static_cast<int>(gen() % 2), r, 40, quad_tent(), kLambda) <=
          bound);
  }
}

TEST_CASE("S is Lipschitz in x for matched controls") {
  // Pairs on the same side of the seam, so every backward step halves the gap.
  const double bound = 2.0 / (2.0 - kLambda) * quad_tent().lipschitz();
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.05, 0.95), du(-0.04, 0.04);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double x = u(gen);
    const double xp = x + du(gen);
    const ControlWord w{SymbolStream::random(2, gen()), SymbolStream::random(2, gen())};
    const double sx = partial_S(CirclePoint::from_double(x), w, 60, quad_tent(), kLambda).value;
    const double sxp = partial_S(CirclePoint::from_double(xp), w, 60, quad_tent(), kLambda).value;
    worst = std::max(worst, std::abs(sx - sxp) / std::abs(x - xp));
  }
  CHECK(worst <= bound + 1e-9);
  CHECK(worst > 0.0);
}

TEST_CASE("absorption into the annulus") {
  const double t0 = annulus_bound(quad_tent(), kLambda);
  const double target = 1.05 * t0;
  const std::size_t n = absorption_steps(quad_tent(), kLambda, 100.0, target);
  std::mt19937_64 gen(4);
  for (double y : {-100.0, 100.0, 37.0}) {
    for (int k = 0; k < 20; ++k) {
      CirclePoint x = CirclePoint::random(gen());
      const SymbolStream c = SymbolStream::random(2, gen());
      double yy = y;
      for (std::size_t i = 0; i < n; ++i) {
        yy = quad_tent().eval(c[i], x) + kLambda * yy;
        x.double_in_place();
      }
      CHECK(std::abs(yy) < target);
    }
  }
  CHECK_THROWS(absorption_steps(quad_tent(), kLambda, 100.0, 1.0));
  // One step maps the closed annulus into its interior.
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    for (int c = 0; c < 2; ++c) {
      CHECK(std::abs(quad_tent().eval(c, x) + kLambda * t0) < t0);
      CHECK(std::abs(quad_tent().eval(c, x) - kLambda * t0) < t0);
    }
  }
}

TEST_CASE("periodic points") {
  const auto p1 = periodic_points(0, 1, quad_tent(), kLambda);
  REQUIRE(p1.size() == 1);
  CHECK(p1[0].x == CirclePoint{});
  CHECK(p1[0].y == doctest::Approx(0.25 / 0.52).epsilon(1e-14));

  const auto p2 = periodic_points(1, 2, quad_tent(), kLambda);
  REQUIRE(p2.size() == 3);
  std::set<std::pair<std::uint64_t, std::uint64_t>> xs;
  for (const auto& p : p2) xs.insert(*p.x.as_rational());
  CHECK(xs == std::set<std::pair<std::uint64_t, std::uint64_t>>{{0, 1}, {1, 3}, {2, 3}});

  for (unsigned n = 1; n <= 6; ++n) {
    for (int c = 0; c < 2; ++c) {
      for (const auto& p : periodic_points(c, n, quad_tent(), kLambda)) {
        CHECK(std::abs(p.y) <= quad_tent()[c].sup_norm() / (1.0 - kLambda) + 1e-12);
        SkewPoint s{p.x, p.y};
        for (unsigned i = 0; i < n; ++i) s = apply_skew(s.x, s.y, c, quad_tent(), kLambda);
        CHECK(s.x == p.x);
        CHECK(std::abs(s.y - p.y) <= 1e-9);
      }
    }
  }
  const auto k = periodic_points(0, 3, parse_family("const 1.5"), kLambda);
  for (const auto& p : k) CHECK(p.y == doctest::Approx(1.5 / 0.52).epsilon(1e-14));
  CHECK_THROWS_AS(periodic_points(0, 21, quad_tent(), kLambda), BudgetError);
}

TEST_CASE("chaos game") {
  ChaosOptions opts;
  opts.seed = 9;
  const PointCloud a = lambda_cloud_chaos(quad_tent(), kLambda, opts);
  const PointCloud b = lambda_cloud_chaos(quad_tent(), kLambda, opts);
  REQUIRE(a.size() == 10000);
  CHECK(a.points == b.points);
  CHECK(a.error_radius < 1e-300);
  CHECK(a.meta.at("kind") == "chaos");
  CHECK(a.points.col(0).minCoeff() >= 0.0);
  CHECK(a.points.col(0).maxCoeff() < 1.0);

  const PointCloud k = lambda_cloud_chaos(parse_family("const 1; const 1"), kLambda, opts);
  CHECK((k.points.col(1).array() - 1.0 / 0.52).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("enumeration at depth one") {
  const PointCloud cloud = lambda_cloud_enumerate(quad_tent(), kLambda, 1, 8);
  REQUIRE(cloud.size() == 32);
  for (Eigen::Index j = 0; j < 8; ++j) {
    const double x = j / 8.0;
    std::multiset<double> got, want;
    for (Eigen::Index r = 4 * j; r < 4 * j + 4; ++r) {
      CHECK(cloud.points(r, 0) == x);
      got.insert(cloud.points(r, 1));
    }
    for (int a = 0; a < 2; ++a) {
      const double xa = (x + a) / 2.0;
      want.insert(quad_ref(xa));
      want.insert(tent_ref(xa));
    }
    CHECK(got == want);
  }
}

TEST_CASE("enumeration of a single constant map") {
  const PointCloud cloud = lambda_cloud_enumerate(parse_family("const 1"), kLambda, 5, 4);
  CHECK(cloud.size() == 4 * 32);
  CHECK((cloud.points.col(1).array() - (1.0 - std::pow(kLambda, 5)) / 0.52).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("enumeration is independent of the worker count and matches streaming") {
  const PointCloud one = lambda_cloud_enumerate(quad_tent(), kLambda, 4, 32, 1 << 20, 1);
  const PointCloud three = lambda_cloud_enumerate(quad_tent(), kLambda, 4, 32, 1 << 20, 3);
  CHECK(one.points == three.points);
  Eigen::Index row = 0;
  bool same = true;
  enumerate_lambda(quad_tent(), kLambda, 4, 32, [&](std::size_t, double x, double y) {
    same = same && one.points(row, 0) == x && one.points(row, 1) == y;
    ++row;
  });
  CHECK(same);
  CHECK(row == one.size());
  CHECK_THROWS_AS(lambda_cloud_enumerate(quad_tent(), kLambda, 12, 256), BudgetError);
  CHECK(default_enumeration_depth(2) == 10);
  CHECK(default_enumeration_depth(1) == 20);
}

TEST_CASE("depth-12 enumeration stays between the value functions") {
  const double tol = 1e-9;
  const GridFunction<double> vp = solve_value(quad_tent(), kLambda, Extremum::max, tol, {.n = 1024});
  const GridFunction<double> vm = solve_value(quad_tent(), kLambda, Extremum::min, tol, {.n = 1024});
  const double radius = std::pow(kLambda, 12) * quad_tent().sup_norm() / (1.0 - kLambda);
  const double slack = radius + std::max(*vp.tol(), *vm.tol()) + 1e-12;
  std::vector<double> hi(16, -1e300), lo(16, 1e300), xs(16);
  std::size_t count = 0;
  enumerate_lambda(quad_tent(), kLambda, 12, 16, [&](std::size_t j, double x, double y) {
    hi[j] = std::max(hi[j], y);
    lo[j] = std::min(lo[j], y);
    xs[j] = x;
    ++count;
  });
  CHECK(count == 16u * (1u << 24));
  for (std::size_t j = 0; j < 16; ++j) {
    CHECK(hi[j] - vp(xs[j]) <= slack);
    CHECK(vm(xs[j]) - lo[j] <= slack);
  }
}

TEST_CASE("conjugacy of the skew product with the shift") {
  std::mt19937_64 gen(77);
  for (int k = 0; k < 100; ++k) {
    const SymbolStream a = SymbolStream::random(2, gen());
    const SymbolStream c = SymbolStream::random(2, gen());
    const SymbolStream b = SymbolStream::random(2, gen());
    const ConjugacyResult r = conjugacy_step(CirclePoint::random(gen()), a, c, b, quad_tent(), kLambda, 40);
    CHECK(r.x_match);
    CHECK(r.b_match);
    CHECK(r.y_gap <= r.bound + 1e-12);
  }
  const PotentialFamily k2 = parse_family("const 1; const 2");
  const ConjugacyResult r =
      conjugacy_step(CirclePoint::rational(1, 3), SymbolStream::random(2, 1), SymbolStream::random(2, 2),
                     SymbolStream::constant(0, 2), k2, kLambda, 40);
  CHECK(r.lhs.x == CirclePoint::rational(2, 3));
  CHECK(r.y_gap <= 1e-12 + r.bound);
}

TEST_CASE("the orbit of 1/3 alternates between two fibres") {
  const SymbolStream c = SymbolStream::random(2, 3);
  for (double y0 : {0.0, 1.4}) {
    const Trace t = nonattractor_trace(y0, c, 200, quad_tent(), kLambda);
    REQUIRE(t.x.size() == 200);
    CHECK(t.y[0] == y0);
    for (std::size_t i = 0; i < t.x.size(); ++i)
      CHECK(t.x[i] == (i % 2 == 0 ? CirclePoint::rational(1, 3) : CirclePoint::rational(2, 3)));
  }
}
