#pragma once

// Autonomous phase-lifted protocol chains and the clock audit.

#include <cstddef>
#include <string>
#include <vector>

#include "emergence/kernel.hpp"
#include "emergence/lens.hpp"
#include "emergence/paths.hpp"

namespace emergence {

struct ProtocolFamily {
  Kernel phase_kernel;                // S on the m phases
  std::vector<Kernel> state_kernels;  // K_phi on X, one per phase
  double alpha = 0.5;                 // probability of a phase move

  std::size_t phase_count() const noexcept { return phase_kernel.dim(); }
  std::size_t state_count() const noexcept {
    return state_kernels.empty() ? 0 : state_kernels.front().dim();
  }
  void validate() const;
};

/// Flat index of (x, phi) is x * m + phi.
struct LiftedChain {
  Kernel kernel;
  std::size_t state_count = 0;
  std::size_t phase_count = 0;

  std::size_t index(std::size_t x, std::size_t phi) const { return x * phase_count + phi; }
  /// Lens projecting (x, phi) -> x.
  Lens state_projection() const;
  /// Lens projecting (x, phi) -> phi.
  Lens phase_projection() const;
};

/// P((x,phi),(x',phi')) = alpha 1[x'=x] S(phi,phi') + (1-alpha) 1[phi'=phi] K_phi(x,x')
LiftedChain lift_protocol(const ProtocolFamily& family);

/// Product measure pi x s on the lifted index space.
Dist product_measure(const Dist& pi, const Dist& s);

struct TrapAudit {
  KLResult lifted_sigma;
  KLResult projected_sigma;
  bool reversible_cert = false;     // lifted chain balanced at the audit measure
  bool phase_reversible = false;    // S balanced w.r.t. its stationary s
  bool common_stationary = false;   // every K_phi balanced w.r.t. one pi
  bool hypotheses_hold = false;
  bool lifted_irreducible = false;
  std::string audit_measure;  // "product" or "lifted_stationary"
  Dist measure;
  Dist phase_stationary;
  Dist state_stationary;
  double balance_violation = 0.0;
};

inline constexpr double kBalanceTolerance = 1e-10;

/// Checks the reversibility hypotheses, then audits path reversal asymmetry
/// of the lifted chain and of its projection to X. The audit runs whether or
/// not the hypotheses hold; the report says which measure was used.
TrapAudit trap_audit(const ProtocolFamily& family, std::size_t horizon,
                     std::uint64_t cap = kDefaultPathCap, const ToleranceConfig& cfg = {});

/// Matrix product K_last * ... * K_first of a time-ordered list; for [K0, K1]
/// this is K1 K0.
Kernel stroboscopic_kernel(const std::vector<Kernel>& kernels);

}  // namespace emergence
