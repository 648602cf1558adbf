#pragma once

// Discrete-time bridges, integrated capacity (ICAP) audits, capacity
// schedules and the No-Zeno divergence decision. Time advances in unit steps;
// integrals over windows become sums over inclusive index ranges.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emergence/kernel.hpp"

namespace emergence {

using Vector = Eigen::VectorXd;

/// Causal convolution y(t) = sum_{s <= t} K(t - s) u(s) with finite lag support.
struct ConvolutionBridge {
  std::size_t port_dim = 0;
  std::vector<Matrix> kernels;  // K(0..L)

  static ConvolutionBridge make(std::size_t port_dim, std::vector<Matrix> kernels);
  std::size_t lags() const noexcept { return kernels.size(); }
};

struct PortSignal {
  std::vector<Vector> samples;

  static PortSignal make(std::size_t port_dim, std::vector<Vector> samples);
  static PortSignal zeros(std::size_t port_dim, std::size_t steps);
  std::size_t steps() const noexcept { return samples.size(); }
  std::size_t port_dim() const noexcept { return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().size()); }
};

/// Inclusive index range [first, last].
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Response to the input truncated to `w` (fresh start at w.first). The
/// returned signal has the input's length and is zero outside the window.
PortSignal apply_bridge(const ConvolutionBridge& z, const PortSignal& u, Window w);

/// sum over the window of max(<u(t), y(t)>, 0)
double positive_work(const PortSignal& u, const PortSignal& y, Window w);
/// sum over the window of ||u(t)||^2
double input_energy(const PortSignal& u, Window w);

/// Largest singular value, from the symmetric eigenproblem of A^T A.
double operator_norm(const Matrix& a);

/// sum_t ||K(t)||
double kernel_mass(const ConvolutionBridge& z);

struct IcapAudit {
  double max_ratio = 0.0;
  double certified_bound = 0.0;
  bool pass = false;
  std::size_t evaluations = 0;
};

/// Worst W+/energy over the batch and windows (0/0 counts as 0). Passes when
/// the ratio stays within kernel_mass up to 1e-10 relative slack.
IcapAudit icap_audit(const ConvolutionBridge& z, const std::vector<PortSignal>& batch,
                     const std::vector<Window>& windows);
/// Every window [s, t] of each signal.
std::vector<Window> all_windows(std::size_t steps);

/// Lag-wise sum of bridges sharing a port dimension.
ConvolutionBridge parallel_sum(const std::vector<ConvolutionBridge>& bridges);
/// sum_r kernel_mass(Z_r): an ICAP constant for parallel_sum(bridges).
double parallel_capacity(const std::vector<ConvolutionBridge>& bridges);

/// Dissipative atom summary: ||C||, ||B|| and decay rate lambda.
struct AtomSpec {
  double norm_c = 1.0;
  double norm_b = 1.0;
  double decay = 1.0;

  void validate() const;
  bool balanced(double lambda0) const { return norm_c * norm_b <= lambda0 * decay; }
};

/// Scalar-per-port kernel K(k) = h ||C|| ||B|| exp(-lambda k h) I for k < lags.
ConvolutionBridge atom_bridge(const AtomSpec& atom, std::size_t port_dim, double step,
                              std::size_t lags);
/// lambda h / (1 - exp(-lambda h)); tends to 1 as h -> 0.
double balanced_discretization_factor(double decay, double step);

/// Mode count bound ceil(C0 (j + 1)).
std::uint64_t ect_mode_bound(double c0, std::size_t depth);

struct CapacityCurve {
  std::vector<double> cap;           // Lambda0 C0 (j + 1)
  std::vector<double> partial_sums;  // sum_{i <= j} 1 / cap(i)
  std::string verdict = "diverges";
};

CapacityCurve ect_capacity_curve(double lambda0, double c0, std::size_t j_max);

/// One factor of a capacity schedule, indexed by depth j >= 0.
struct ScheduleTerm {
  enum class Form { Poly, Geometric, Table };
  Form form = Form::Poly;
  double c = 1.0;
  double exponent = 0.0;  // Poly: c (j + 1)^exponent
  double ratio = 1.0;     // Geometric: c ratio^j
  std::vector<double> table;

  double at(std::size_t j) const;
  static ScheduleTerm poly(double c, double exponent);
  static ScheduleTerm geometric(double c, double ratio);
  static ScheduleTerm tabulated(std::vector<double> values);
};

struct CapacitySchedule {
  double theta = 1.0;
  std::optional<ScheduleTerm> theta_of_j;  // per-depth work quantum, if not constant
  ScheduleTerm lambda = ScheduleTerm::poly(1.0, 0.0);
  ScheduleTerm bbar = ScheduleTerm::poly(1.0, 0.0);
  std::size_t j_max = 100;

  void validate() const;
  double cap(std::size_t j) const { return lambda.at(j) * bbar.at(j); }
  double work_quantum(std::size_t j) const { return theta_of_j ? theta_of_j->at(j) : theta; }
};

struct LatencyBounds {
  std::vector<double> cap;
  std::vector<double> delta_t;     // theta_j / Cap(j), j < j_max
  std::vector<double> cumulative;  // t_J = sum_{j < J} delta_t, J = 0..j_max
  bool work_uniform = true;        // false flags the vanishing-work-quantum regime
};

LatencyBounds latency_bounds(const CapacitySchedule& sched);

enum class Verdict { Diverges, Converges, Undetermined };
const char* to_string(Verdict v);

struct ZenoDecision {
  Verdict verdict = Verdict::Undetermined;
  std::string basis;  // "closed_form" or "partial_sum"
  std::optional<double> alpha_plus_beta;
  std::optional<double> growth_ratio;
  std::vector<double> partial_sums;  // sum_{j <= J} 1 / Cap(j)
  bool no_zeno_certified = false;    // divergence with a uniform work quantum
};

/// Decides divergence of sum_j 1/Cap(j). Closed forms c (j+1)^p r^j are
/// decided analytically; any tabulated factor yields Undetermined.
ZenoDecision no_zeno_decision(const CapacitySchedule& sched);

struct RouteMismatch {
  double rm = 0.0;
  double gain_direct = 0.0;
  double gain_step1 = 0.0;
  double gain_step2 = 0.0;
  double gain_bound = 0.0;
  bool pass = false;
};

/// step1: B -> A, step2: C -> B, direct: C -> A (matrices act on columns).
RouteMismatch route_mismatch_audit(const Matrix& direct, const Matrix& step1, const Matrix& step2);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// ||AB - A'B'|| <= ||A - A'|| ||B|| + ||A'|| ||B - B'||
InequalityCheck composition_perturbation(const Matrix& a, const Matrix& b, const Matrix& a2,
                                         const Matrix& b2);
/// ||E^2 - E|| <= ||E|| ||E - I||
InequalityCheck idempotence_factorization(const Matrix& e);

/// sum <u, Z u> >= sum <u, G u> over the window for the caller's gate G.
InequalityCheck coercivity_check(const ConvolutionBridge& z, const Matrix& gate, const PortSignal& u,
                                 Window w);
/// sum <u, G u> >= a^2 sum ||u||^2 over the window.
InequalityCheck shrinkage_check(const Matrix& gate, double a, const PortSignal& u, Window w);

}  // namespace emergence
