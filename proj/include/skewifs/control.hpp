#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace skewifs {

// A one-sided symbol sequence over {0, ..., alphabet-1}: a finite head
// followed by a generator (nothing, a repeated pattern, or iid uniform
// symbols from a seed). Random symbols are a pure function of (seed, index),
// so the same stream read at the same index always yields the same symbol.
class SymbolStream {
 public:
  enum class Generator { none, repeat, random };

  SymbolStream() = default;

  static SymbolStream finite(std::vector<int> symbols, int alphabet);
  // head followed by pattern repeated forever.
  static SymbolStream repeating(std::vector<int> pattern, int alphabet, std::vector<int> head = {});
  static SymbolStream constant(int symbol, int alphabet);
  static SymbolStream random(int alphabet, std::uint64_t seed);

  // Symbol at index i; throws std::out_of_range past the end of a finite stream.
  int operator[](std::size_t i) const;
  // Number of readable symbols; max() when a generator is attached.
  std::size_t available() const noexcept;
  int alphabet() const noexcept { return alphabet_; }
  Generator generator() const noexcept { return generator_; }

  // s * stream.
  SymbolStream prepended(int symbol) const;
  // sigma^n(stream).
  SymbolStream shifted(std::size_t n = 1) const;
  // First n symbols as a finite stream.
  SymbolStream prefix(std::size_t n) const;

 private:
  void check(int symbol) const;

  std::vector<int> head_;
  Generator generator_ = Generator::none;
  std::vector<int> pattern_;
  std::uint64_t seed_ = 0;
  std::uint64_t offset_ = 0;
  int alphabet_ = 1;
};

// The pair (c, a) in C^N x I^N driving a backward orbit and the S-series.
struct ControlWord {
  SymbolStream c;
  SymbolStream a;
};

}  // namespace skewifs
