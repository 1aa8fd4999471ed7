#include "skewifs/circle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "skewifs/rng.hpp"

namespace skewifs {

namespace {

constexpr std::uint64_t kMaxDen = std::uint64_t{1} << 62;

using u128 = unsigned __int128;

std::uint64_t pow2_mod(std::uint64_t e, std::uint64_t m) {
  if (m == 1) return 0;
  std::uint64_t result = 1 % m;
  std::uint64_t base = 2 % m;
  while (e > 0) {
    if (e & 1) result = static_cast<std::uint64_t>(static_cast<u128>(result) * base % m);
    base = static_cast<std::uint64_t>(static_cast<u128>(base) * base % m);
    e >>= 1;
  }
  return result;
}

void reduce(CirclePoint::RationalTail& t) {
  t.num %= t.den;
  if (t.num == 0) {
    t.den = 1;
    return;
  }
  const std::uint64_t g = std::gcd(t.num, t.den);
  t.num /= g;
  t.den /= g;
}

std::uint64_t random_block(std::uint64_t seed, std::uint64_t block) {
  return hash_combine(seed, block);
}

}  // namespace

CirclePoint CirclePoint::rational(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || den >= kMaxDen) throw std::invalid_argument("CirclePoint::rational: denominator out of range");
  CirclePoint p;
  RationalTail t{num, den};
  reduce(t);
  p.tail_ = t;
  return p;
}

CirclePoint CirclePoint::dyadic(std::uint64_t num, unsigned log2_den) {
  if (log2_den > 61) throw std::invalid_argument("CirclePoint::dyadic: exponent too large");
  return rational(num, std::uint64_t{1} << log2_den);
}

CirclePoint CirclePoint::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("CirclePoint::from_double: non-finite value");
  x -= std::floor(x);
  if (x == 0.0 || x >= 1.0) return CirclePoint{};
  int e = 0;
  const double f = std::frexp(x, &e);  // x = f 2^e, f in [0.5, 1), e <= 0
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(f, 53));
  const int digits = 53 - e;  // x = mantissa / 2^digits
  if (digits <= 61) return rational(mantissa, std::uint64_t{1} << digits);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(digits), 0);
  for (int i = 0; i < 53; ++i) bits[static_cast<std::size_t>(digits - 1 - i)] = (mantissa >> i) & 1U;
  return from_bits(bits);
}

CirclePoint CirclePoint::from_bits(std::span<const std::uint8_t> bits, Tail tail) {
  CirclePoint p;
  if (auto* r = std::get_if<RationalTail>(&tail)) {
    if (r->den == 0 || r->den >= kMaxDen) throw std::invalid_argument("CirclePoint::from_bits: bad rational tail");
    reduce(*r);
  }
  p.tail_ = tail;
  for (auto b : bits) {
    if (b > 1) throw std::invalid_argument("CirclePoint::from_bits: digits must be 0 or 1");
    p.prefix_.push_back(b);
  }
  p.absorb_prefix();
  return p;
}

CirclePoint CirclePoint::random(std::uint64_t seed) {
  CirclePoint p;
  p.tail_ = RandomTail{seed, 0};
  return p;
}

std::uint64_t CirclePoint::tail_bits(std::uint64_t start, unsigned count) const {
  std::uint64_t out = 0;
  if (const auto* r = std::get_if<RationalTail>(&tail_)) {
    // Long division of num/den starting at digit `start`.
    std::uint64_t rem = static_cast<std::uint64_t>(static_cast<u128>(r->num) * pow2_mod(start, r->den) % r->den);
    for (unsigned i = 0; i < count; ++i) {
      rem <<= 1;  // rem < 2^62, no overflow
      const bool one = rem >= r->den;
      if (one) rem -= r->den;
      out = (out << 1) | static_cast<std::uint64_t>(one);
    }
    return out;
  }
  const auto& t = std::get<RandomTail>(tail_);
  for (unsigned i = 0; i < count; ++i) {
    const std::uint64_t idx = t.offset + start + i;
    const std::uint64_t block = random_block(t.seed, idx / 64);
    out = (out << 1) | ((block >> (63 - idx % 64)) & 1U);
  }
  return out;
}

int CirclePoint::bit(std::size_t i) const {
  if (i < prefix_.size()) return prefix_[i];
  return static_cast<int>(tail_bits(i - prefix_.size(), 1));
}

std::uint64_t CirclePoint::bits_at(std::size_t start, unsigned count) const {
  std::uint64_t out = 0;
  std::size_t i = start;
  for (; i < prefix_.size() && i < start + count; ++i) out = (out << 1) | prefix_[i];
  const unsigned rest = static_cast<unsigned>(start + count - i);
  if (rest > 0) out = (out << rest) | tail_bits(i - prefix_.size(), rest);
  return out;
}

double CirclePoint::to_double() const {
  // Locate the leading one, then round the 53 significant digits after it.
  std::size_t lead = 0;
  for (;; lead += 64) {
    if (lead > 1088) return 0.0;  // below the smallest double
    const std::uint64_t chunk = bits_at(lead, 64);
    if (chunk != 0) {
      lead += static_cast<std::size_t>(__builtin_clzll(chunk));
      break;
    }
  }
  const std::uint64_t v = bits_at(lead, 54);
  const std::uint64_t m = (v >> 1) + (v & 1U);
  const double x = std::ldexp(static_cast<double>(m), -static_cast<int>(lead) - 53);
  return x >= 1.0 ? 0.0 : x;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> CirclePoint::as_rational() const {
  const auto* r = std::get_if<RationalTail>(&tail_);
  if (r == nullptr) return std::nullopt;
  RationalTail t = *r;
  for (auto it = prefix_.rbegin(); it != prefix_.rend(); ++it) {
    if (t.den >= kMaxDen / 2) return std::nullopt;
    t = RationalTail{t.num + *it * t.den, 2 * t.den};
    reduce(t);
  }
  return std::make_pair(t.num, t.den);
}

void CirclePoint::absorb_prefix() {
  auto* r = std::get_if<RationalTail>(&tail_);
  if (r == nullptr) {
    // A random tail takes back digits it generated before being shifted past them.
    auto& t = std::get<RandomTail>(tail_);
    while (!prefix_.empty() && t.offset > 0) {
      --t.offset;
      if (static_cast<int>(tail_bits(0, 1)) != prefix_.back()) {
        ++t.offset;
        break;
      }
      prefix_.pop_back();
    }
    return;
  }
  while (!prefix_.empty() && r->den < kMaxDen / 2) {
    *r = RationalTail{r->num + prefix_.back() * r->den, 2 * r->den};
    reduce(*r);
    prefix_.pop_back();
  }
}

void CirclePoint::double_in_place() {
  if (!prefix_.empty()) {
    prefix_.pop_front();
    return;
  }
  if (auto* r = std::get_if<RationalTail>(&tail_)) {
    r->num <<= 1;
    reduce(*r);
    return;
  }
  std::get<RandomTail>(tail_).offset += 1;
}

void CirclePoint::prepend(int digit) {
  if (digit != 0 && digit != 1) throw std::invalid_argument("CirclePoint::prepend: digit must be 0 or 1");
  prefix_.push_front(static_cast<std::uint8_t>(digit));
  absorb_prefix();
}

CirclePoint doubling(const CirclePoint& p) {
  CirclePoint q = p;
  q.double_in_place();
  return q;
}

CirclePoint inverse_branch(const CirclePoint& p, int a) {
  CirclePoint q = p;
  q.prepend(a);
  return q;
}

int address(const CirclePoint& p) { return p.bit(0); }

double circle_distance(double x, double y) noexcept {
  double d = std::fabs(x - y);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

double circle_distance(const CirclePoint& p, const CirclePoint& q) {
  return circle_distance(p.to_double(), q.to_double());
}

}  // namespace skewifs
