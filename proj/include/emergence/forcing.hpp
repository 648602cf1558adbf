#pragma once

// Definability of Boolean predicates relative to a lens and the finite
// counting facts around it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "emergence/lens.hpp"

namespace emergence {

using BigInt = boost::multiprecision::cpp_int;

struct Predicate {
  std::vector<std::uint8_t> bits;  // 0/1 per state

  static Predicate make(std::vector<std::uint8_t> bits);
  std::size_t size() const noexcept { return bits.size(); }
};

/// Exact numerator * 2^-exponent.
struct Dyadic {
  BigInt numerator = 1;
  std::uint64_t exponent = 0;

  double to_double() const;
  std::string to_string() const;  // "2^-12", "3*2^-5", "1"
};

bool is_definable(const Predicate& h, const Lens& lens);

struct ForcingReport {
  std::size_t n = 0;
  std::size_t k = 0;
  Dyadic p_definable;
  std::vector<double> per_block_constancy;  // 2^(1 - |B_x|)
  double union_bound = 0.0;                 // sum of the above, clamped to 1
  std::optional<double> split_lower_bound;  // max(0, 1 - K 2^(1-m)) when min block m >= 2
};

ForcingReport forcing_report(const Lens& lens);

inline constexpr const char* kForcingGenerator = "mt19937_64";

struct MonteCarloResult {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double freq = 0.0;
  double expected = 0.0;
  double three_sigma = 0.0;
  double tolerance = 0.0;  // max(3 sigma, 3 / trials)
  bool consistent = false;
  std::string generator = kForcingGenerator;
  std::uint64_t seed = 0;
};

/// Samples uniform predicates from std::mt19937_64(seed). State z of a draw
/// is bit (z mod 64) of the (z div 64)-th 64-bit output of that trial.
MonteCarloResult monte_carlo_definability(const Lens& lens, std::uint64_t trials,
                                          std::uint64_t seed);

/// Predicate drawn with the same bit layout as the Monte Carlo sampler.
Predicate sample_predicate(std::size_t n, std::uint64_t seed);

inline constexpr std::size_t kEnumerationBudget = 24;

struct EnumerationResult {
  BigInt definable_count;
  BigInt total;
  bool enumerated = false;  // false in closed-form mode
};

/// Walks all 2^N predicates when N <= 24; larger N needs closed_form = true.
EnumerationResult exact_enumeration(const Lens& lens, bool closed_form = false);

/// Joint lens (f, h): blocks B_x intersected with {h = 0} and {h = 1}, empty
/// cells dropped, ordered by (old block, h value). Split blocks get labels
/// "<label>:0" and "<label>:1".
Lens extend_lens(const Lens& lens, const Predicate& h);

}  // namespace emergence
