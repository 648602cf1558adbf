#include "emergence/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "emergence/error.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "forcing_count";

void require_size(const Predicate& h, const Lens& lens) {
  if (h.size() != lens.state_count())
    raise(ErrorCode::DimensionMismatch, kModule, "predicate length differs from state count");
}

// Block masks over the low N bits, N <= 64.
std::vector<std::uint64_t> block_masks(const Lens& lens) {
  std::vector<std::uint64_t> masks(lens.block_count(), 0);
  for (std::size_t z = 0; z < lens.state_count(); ++z) masks[lens.block_of(z)] |= std::uint64_t{1} << z;
  return masks;
}

bool constant_on_blocks(std::uint64_t bits, const std::vector<std::uint64_t>& masks) {
  for (std::uint64_t m : masks) {
    const std::uint64_t v = bits & m;
    if (v != 0 && v != m) return false;
  }
  return true;
}

}  // namespace

Predicate Predicate::make(std::vector<std::uint8_t> bits) {
  for (auto b : bits)
    if (b > 1) raise(ErrorCode::InvalidArgument, kModule, "predicate bits must be 0 or 1");
  return Predicate{std::move(bits)};
}

double Dyadic::to_double() const {
  return std::ldexp(numerator.convert_to<double>(), -static_cast<int>(std::min<std::uint64_t>(exponent, 1 << 20)));
}

std::string Dyadic::to_string() const {
  if (exponent == 0) return numerator.str();
  const std::string power = "2^-" + std::to_string(exponent);
  return numerator == 1 ? power : numerator.str() + "*" + power;
}

bool is_definable(const Predicate& h, const Lens& lens) {
  require_size(h, lens);
  for (const auto& block : lens.blocks())
    for (std::size_t z : block)
      if (h.bits[z] != h.bits[block.front()]) return false;
  return true;
}

ForcingReport forcing_report(const Lens& lens) {
  ForcingReport r;
  r.n = lens.state_count();
  r.k = lens.block_count();
  r.p_definable = Dyadic{1, r.n - r.k};
  double sum = 0.0;
  std::size_t min_block = r.n;
  for (const auto& block : lens.blocks()) {
    const double c = std::ldexp(1.0, 1 - static_cast<int>(block.size()));
    r.per_block_constancy.push_back(c);
    sum += c;
    min_block = std::min(min_block, block.size());
  }
  r.union_bound = std::min(1.0, sum);
  if (min_block >= 2)
    r.split_lower_bound =
        std::max(0.0, 1.0 - static_cast<double>(r.k) * std::ldexp(1.0, 1 - static_cast<int>(min_block)));
  return r;
}

Predicate sample_predicate(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Predicate h;
  h.bits.resize(n);
  std::uint64_t word = 0;
  for (std::size_t z = 0; z < n; ++z) {
    if (z % 64 == 0) word = gen();
    h.bits[z] = static_cast<std::uint8_t>((word >> (z % 64)) & 1u);
  }
  return h;
}

MonteCarloResult monte_carlo_definability(const Lens& lens, std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) raise(ErrorCode::InvalidArgument, kModule, "trials must be >= 1");
  const std::size_t n = lens.state_count();
  const std::size_t words = (n + 63) / 64;
  std::mt19937_64 gen(seed);

  MonteCarloResult r;
  r.trials = trials;
  r.seed = seed;
  if (n <= 64) {
    const auto masks = block_masks(lens);
    const std::uint64_t low = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    for (std::uint64_t t = 0; t < trials; ++t)
      if (constant_on_blocks(gen() & low, masks)) ++r.hits;
  } else {
    std::vector<std::uint64_t> draw(words);
    for (std::uint64_t t = 0; t < trials; ++t) {
      for (auto& w : draw) w = gen();
      bool ok = true;
      for (const auto& block : lens.blocks()) {
        auto bit = [&](std::size_t z) { return (draw[z / 64] >> (z % 64)) & 1u; };
        const auto first = bit(block.front());
        for (std::size_t z : block)
          if (bit(z) != first) {
            ok = false;
            break;
          }
        if (!ok) break;
      }
      if (ok) ++r.hits;
    }
  }
  r.freq = static_cast<double>(r.hits) / static_cast<double>(trials);
  r.expected = forcing_report(lens).p_definable.to_double();
  const double sigma = std::sqrt(r.expected * (1.0 - r.expected) / static_cast<double>(trials));
  r.three_sigma = 3.0 * sigma;
  r.tolerance = std::max(r.three_sigma, 3.0 / static_cast<double>(trials));
  r.consistent = std::abs(r.freq - r.expected) <= r.tolerance;
  return r;
}

EnumerationResult exact_enumeration(const Lens& lens, bool closed_form) {
  const std::size_t n = lens.state_count(), k = lens.block_count();
  EnumerationResult r;
  r.total = BigInt(1) << n;
  if (closed_form) {
    r.definable_count = BigInt(1) << k;
    return r;
  }
  if (n > kEnumerationBudget)
    raise(ErrorCode::BudgetExceeded, kModule,
          "enumerating 2^" + std::to_string(n) + " predicates exceeds the 2^24 budget");
  const auto masks = block_masks(lens);
  std::uint64_t count = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < total; ++bits)
    if (constant_on_blocks(bits, masks)) ++count;
  if (count != (std::uint64_t{1} << k))
    raise(ErrorCode::Internal, kModule, "definable count differs from 2^K");
  r.definable_count = count;
  r.enumerated = true;
  return r;
}

Lens extend_lens(const Lens& lens, const Predicate& h) {
  require_size(h, lens);
  std::vector<std::string> labels;
  std::vector<std::size_t> assignment(lens.state_count());
  for (std::size_t x = 0; x < lens.block_count(); ++x) {
    const auto& block = lens.block(x);
    bool has[2] = {false, false};
    for (std::size_t z : block) has[h.bits[z]] = true;
    const bool split = has[0] && has[1];
    std::size_t cell[2] = {0, 0};
    for (int v = 0; v < 2; ++v) {
      if (!has[v]) continue;
      cell[v] = labels.size();
      labels.push_back(split ? lens.labels()[x] + ":" + std::to_string(v) : lens.labels()[x]);
    }
    for (std::size_t z : block) assignment[z] = cell[h.bits[z]];
  }
  Lens extended = Lens::make(std::move(labels), std::move(assignment));
  const bool strict = extended.block_count() > lens.block_count();
  if (!extended.refines(lens) || strict == is_definable(h, lens))
    raise(ErrorCode::Internal, kModule, "extension strictness disagrees with definability");
  return extended;
}

}  // namespace emergence
