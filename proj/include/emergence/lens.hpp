#pragma once

// Coarse-graining lenses, prototype lifts and the induced empirical endomap
// E(mu) = U(Q(mu P^tau)) with its total-variation diagnostics.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "emergence/kernel.hpp"

namespace emergence {

/// Surjective block assignment state -> label index.
class Lens {
 public:
  Lens() = default;

  /// `assignment[z]` indexes into `labels`; every label must be used.
  static Lens make(std::vector<std::string> labels, std::vector<std::size_t> assignment);
  /// Labels "0".."k-1" inferred from the assignment.
  static Lens from_assignment(std::vector<std::size_t> assignment);
  static Lens identity(std::size_t n);
  static Lens single_block(std::size_t n);
  /// n states split into k contiguous blocks whose sizes differ by at most one.
  static Lens balanced(std::size_t n, std::size_t k);

  std::size_t state_count() const noexcept { return assignment_.size(); }
  std::size_t block_count() const noexcept { return labels_.size(); }
  std::size_t block_of(std::size_t z) const { return assignment_.at(z); }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// States of block x in increasing order.
  const std::vector<std::size_t>& block(std::size_t x) const { return blocks_.at(x); }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }

  /// True iff every block of `this` lies inside a block of `coarser`.
  bool refines(const Lens& coarser) const;
  /// Same partition of states, ignoring labels.
  bool same_partition(const Lens& other) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> assignment_;
  std::vector<std::vector<std::size_t>> blocks_;
};

/// Composition g after f: state z goes to g(f(z)). `g` acts on f's labels.
Lens compose(const Lens& f, const Lens& g);

/// Per-block distributions on the micro space, each supported in its block.
class PrototypeSet {
 public:
  PrototypeSet() = default;

  static PrototypeSet make(const Lens& lens, std::vector<std::vector<double>> prototypes);
  static PrototypeSet uniform(const Lens& lens);
  /// Point mass at `representatives[x]`, which must lie in block x.
  static PrototypeSet point_mass(const Lens& lens, const std::vector<std::size_t>& representatives);
  /// pi conditioned on each block; every block needs positive pi-mass.
  static PrototypeSet stationary_conditional(const Lens& lens, const Dist& pi);

  std::size_t block_count() const noexcept { return u_.size(); }
  std::size_t state_count() const noexcept { return u_.empty() ? 0 : u_.front().size(); }
  const std::vector<double>& prototype(std::size_t x) const { return u_.at(x); }
  const std::vector<std::vector<double>>& all() const noexcept { return u_; }

 private:
  std::vector<std::vector<double>> u_;
};

/// (Q mu)(x) = sum of mu over block x.
Dist pushforward(const Lens& lens, const Dist& mu);
std::vector<double> pushforward(const Lens& lens, std::span<const double> mu);
/// (U nu)(z) = sum_x nu(x) u_x(z).
Dist lift(const PrototypeSet& prototypes, const Dist& nu);

struct EmpiricalEndomap {
  Kernel matrix;  // row action of E on distributions
  std::size_t tau = 1;
  Lens lens;
  PrototypeSet prototypes;

  /// mu E computed through the three maps rather than the matrix.
  Dist apply_composed(const Kernel& p, const Dist& mu) const;
};

EmpiricalEndomap build_endomap(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes,
                               std::size_t tau);

/// (1/2) max_i sum_j |(E^2 - E)_ij|, the supremum of ||mu(E^2-E)||_TV.
double idempotence_defect_tv(const EmpiricalEndomap& e);
double idempotence_defect_tv(const Matrix& e);

/// max_x || Q(u_x P^tau) - delta_x ||_TV
double retention_error(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes,
                       std::size_t tau);

/// s(x) = || E(u_x) - u_x ||_TV per block.
std::vector<double> prototype_stability(const EmpiricalEndomap& e);

enum class RefinementDirection { Reveals, Destroys, Preserved };
const char* to_string(RefinementDirection d);

struct LensStability {
  std::vector<double> stability;
  std::size_t stable_count = 0;
  // Stable blocks whose packaged images E(u_x) are pairwise distinct; a
  // constant endomap yields at most one.
  std::size_t distinct_stable = 0;
  double retention = 0.0;
  double defect = 0.0;
};

LensStability lens_stability(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes,
                             std::size_t tau, double epsilon);

struct RefinementReport {
  LensStability coarse;
  LensStability fine;
  std::size_t stable_count_coarse = 0;
  std::size_t stable_count_fine = 0;
  RefinementDirection direction = RefinementDirection::Preserved;
};

RefinementReport refinement_report(const Kernel& p, const Lens& coarse,
                                   const PrototypeSet& coarse_prototypes, const Lens& fine,
                                   const PrototypeSet& fine_prototypes, std::size_t tau,
                                   double epsilon);

}  // namespace emergence
