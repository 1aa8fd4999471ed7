#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <variant>

namespace skewifs {

namespace circle_detail {
struct RationalTail {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  friend bool operator==(const RationalTail&, const RationalTail&) = default;
};
struct RandomTail {
  std::uint64_t seed = 0;
  std::uint64_t offset = 0;
  friend bool operator==(const RandomTail&, const RandomTail&) = default;
};
}  // namespace circle_detail

// A point of the circle X = R/Z stored as its binary expansion
//   x = sum_i b_i 2^-(i+1)
// split into a materialized prefix of digits and a tail that generates every
// digit after it. Doubling shifts the expansion, an inverse branch prepends a
// digit, so the doubling map and its inverse branches are exact for any number
// of steps.
//
// Tails are either
//  - rational: the digits of num/den (eventually periodic, computed by long
//    division), which covers 0, dyadic and periodic points such as 1/3;
//  - random: iid fair digits drawn from a counter-based hash of a seed, the
//    canonical sample of Lebesgue measure.
//
// A rational tail absorbs prefix digits while the denominator stays below
// 2^62, and a random tail takes back digits it generated before a shift, so
// equal points compare equal regardless of how they were built.
class CirclePoint {
 public:
  using RationalTail = circle_detail::RationalTail;
  using RandomTail = circle_detail::RandomTail;
  using Tail = std::variant<RationalTail, RandomTail>;

  CirclePoint() = default;

  // num/den reduced modulo 1. den must be nonzero and below 2^62.
  static CirclePoint rational(std::uint64_t num, std::uint64_t den);
  static CirclePoint dyadic(std::uint64_t num, unsigned log2_den);
  // Exact binary expansion of x mod 1.
  static CirclePoint from_double(double x);
  static CirclePoint from_bits(std::span<const std::uint8_t> bits, Tail tail = RationalTail{});
  static CirclePoint random(std::uint64_t seed);

  // Digit i of the expansion, 0 being the most significant.
  int bit(std::size_t i) const;
  std::size_t precision() const noexcept { return prefix_.size(); }
  const Tail& tail() const noexcept { return tail_; }

  // Rounded to 53 significant digits (half up); 1.0 wraps to 0.
  double to_double() const;
  // Exact value when the point is a rational that fits in 64 bits.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> as_rational() const;

  void double_in_place();
  void prepend(int digit);

  friend bool operator==(const CirclePoint&, const CirclePoint&) = default;

 private:
  std::uint64_t bits_at(std::size_t start, unsigned count) const;
  std::uint64_t tail_bits(std::uint64_t start, unsigned count) const;
  void absorb_prefix();

  std::deque<std::uint8_t> prefix_;
  Tail tail_{RationalTail{}};
};

// T(x) = 2x mod 1.
CirclePoint doubling(const CirclePoint& p);
// tau_a(x) = (x + a)/2, the inverse branch of T with address a.
CirclePoint inverse_branch(const CirclePoint& p, int a);
// pi(x): the a with tau_a(T(x)) = x.
int address(const CirclePoint& p);

double circle_distance(double x, double y) noexcept;
double circle_distance(const CirclePoint& p, const CirclePoint& q);

}  // namespace skewifs
