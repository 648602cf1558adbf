#pragma once

// Exhaustive finite-horizon path laws, time reversal and path-space KL.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "emergence/kernel.hpp"
#include "emergence/lens.hpp"

namespace emergence {

using Path = std::vector<std::uint32_t>;

inline constexpr std::uint64_t kDefaultPathCap = 10'000'000;

/// Probability table over length-(T+1) trajectories. Zero-probability paths
/// are never stored; keys iterate in lexicographic order.
class PathLaw {
 public:
  PathLaw() = default;
  PathLaw(std::size_t horizon, std::map<Path, double> table);

  std::size_t horizon() const noexcept { return horizon_; }
  const std::map<Path, double>& table() const noexcept { return table_; }
  double probability(const Path& path) const;
  double total_mass() const;

  friend bool operator==(const PathLaw&, const PathLaw&) = default;

 private:
  std::size_t horizon_ = 0;
  std::map<Path, double> table_;
};

/// KL divergence value; +infinity is a regular outcome carrying a witness.
struct KLResult {
  bool infinite = false;
  double value = 0.0;
  std::optional<Path> witness;  // first key (in order) with p > 0 and q = 0

  double as_double() const;
};

PathLaw path_law(const Kernel& p, const Dist& rho, std::size_t horizon,
                 std::uint64_t cap = kDefaultPathCap);

PathLaw reverse_pushforward(const PathLaw& law);

/// D(p || q) with 0 log(0/q) = 0 and q = 0 < p giving +infinity.
KLResult kl(const PathLaw& p, const PathLaw& q);
/// Distribution form; an infinite result's witness holds the single index.
KLResult kl(const Dist& p, const Dist& q);

/// Path reversal asymmetry: KL between the path law and its reversal.
KLResult sigma_T(const Kernel& p, const Dist& rho, std::size_t horizon,
                 std::uint64_t cap = kDefaultPathCap);
KLResult reversal_asymmetry(const PathLaw& law);

/// Finite-horizon per-step ratio sigma_T / T.
KLResult entropy_production_rate(const Kernel& p, const Dist& pi, std::size_t horizon,
                                 std::uint64_t cap = kDefaultPathCap);

PathLaw coarse_path_pushforward(const Lens& lens, const PathLaw& law);

struct DpiAudit {
  KLResult micro;
  KLResult macro;
  std::optional<double> slack;  // micro - macro when both finite
  double commutation_defect = 0.0;  // | R(f law) - f(R law) |_inf
  bool pass = false;
};

inline constexpr double kDpiTolerance = 1e-10;
inline constexpr double kCommutationTolerance = 1e-12;

DpiAudit dpi_audit(const Kernel& p, const Dist& rho, const Lens& lens, std::size_t horizon,
                   std::uint64_t cap = kDefaultPathCap);
DpiAudit dpi_audit(const PathLaw& micro_law, const Lens& lens);

/// Number of states raised to horizon+1, saturating at UINT64_MAX.
std::uint64_t path_count(std::size_t states, std::size_t horizon);

}  // namespace emergence
