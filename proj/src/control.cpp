#include "skewifs/control.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "skewifs/rng.hpp"

namespace skewifs {

void SymbolStream::check(int symbol) const {
  if (symbol < 0 || symbol >= alphabet_)
    throw std::invalid_argument("symbol " + std::to_string(symbol) + " outside alphabet of size " +
                                std::to_string(alphabet_));
}

SymbolStream SymbolStream::finite(std::vector<int> symbols, int alphabet) {
  if (alphabet < 1) throw std::invalid_argument("alphabet must be nonempty");
  SymbolStream s;
  s.alphabet_ = alphabet;
  for (int v : symbols) s.check(v);
  s.head_ = std::move(symbols);
  return s;
}

SymbolStream SymbolStream::repeating(std::vector<int> pattern, int alphabet, std::vector<int> head) {
  if (pattern.empty()) throw std::invalid_argument("repeat pattern must be nonempty");
  SymbolStream s = finite(std::move(head), alphabet);
  for (int v : pattern) s.check(v);
  s.pattern_ = std::move(pattern);
  s.generator_ = Generator::repeat;
  return s;
}

SymbolStream SymbolStream::constant(int symbol, int alphabet) { return repeating({symbol}, alphabet); }

SymbolStream SymbolStream::random(int alphabet, std::uint64_t seed) {
  SymbolStream s = finite({}, alphabet);
  s.generator_ = Generator::random;
  s.seed_ = seed;
  return s;
}

int SymbolStream::operator[](std::size_t i) const {
  if (i < head_.size()) return head_[i];
  const std::uint64_t j = offset_ + (i - head_.size());
  switch (generator_) {
    case Generator::repeat:
      return pattern_[j % pattern_.size()];
    case Generator::random:
      return uniform_below(hash_combine(seed_, j), alphabet_);
    case Generator::none:
      break;
  }
  throw std::out_of_range("symbol index " + std::to_string(i) + " exceeds finite control prefix of length " +
                          std::to_string(head_.size()));
}

std::size_t SymbolStream::available() const noexcept {
  return generator_ == Generator::none ? head_.size() : std::numeric_limits<std::size_t>::max();
}

SymbolStream SymbolStream::prepended(int symbol) const {
  check(symbol);
  SymbolStream s = *this;
  s.head_.insert(s.head_.begin(), symbol);
  return s;
}

SymbolStream SymbolStream::shifted(std::size_t n) const {
  SymbolStream s = *this;
  const std::size_t from_head = std::min(n, s.head_.size());
  s.head_.erase(s.head_.begin(), s.head_.begin() + static_cast<std::ptrdiff_t>(from_head));
  const std::size_t rest = n - from_head;
  if (rest > 0) {
    if (generator_ == Generator::none) throw std::out_of_range("shift past the end of a finite control prefix");
    s.offset_ += rest;
  }
  return s;
}

SymbolStream SymbolStream::prefix(std::size_t n) const {
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (*this)[i];
  return finite(std::move(out), alphabet_);
}

}  // namespace skewifs
