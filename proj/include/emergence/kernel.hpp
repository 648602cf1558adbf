#pragma once

// Finite distributions and row-stochastic kernels. Everything uses the
// row-vector convention: a distribution mu evolves as mu -> mu P.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace emergence {

using Matrix = Eigen::MatrixXd;

struct ToleranceConfig {
  double row_sum_tol = 1e-5;
  double stationarity_tol = 1e-12;
  double zero_tol = 1e-15;  // entries below this are structural zeros
  std::int64_t max_power_iters = 1'000'000;

  void validate() const;
};

/// Probability vector over a finite state set.
class Dist {
 public:
  Dist() = default;

  /// Rejects negative or non-finite entries and sums further than `tol` from 1.
  static Dist make(std::vector<double> weights, double tol = 1e-12);
  /// Rescales nonnegative weights with positive total to sum to 1.
  static Dist normalized(std::vector<double> weights);
  static Dist uniform(std::size_t n);
  static Dist delta(std::size_t n, std::size_t at);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const noexcept { return w_; }
  std::span<const double> view() const noexcept { return w_; }

  friend bool operator==(const Dist&, const Dist&) = default;

 private:
  explicit Dist(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

/// L1 distance between two vectors of equal length.
double l1_distance(std::span<const double> a, std::span<const double> b);
/// Total variation distance, half the L1 distance.
double tv_distance(std::span<const double> a, std::span<const double> b);

class Kernel;

struct ValidationReport;

/// Square row-stochastic matrix. Construct through validate_kernel() or the
/// checked factory; instances are immutable.
class Kernel {
 public:
  Kernel() = default;

  /// Wraps a matrix whose rows are already known to be stochastic within
  /// `tol`. Used by operations whose outputs are stochastic by construction.
  static Kernel from_stochastic(Matrix m, double tol = 1e-10);
  static Kernel identity(std::size_t n);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& matrix() const noexcept { return m_; }
  std::vector<std::vector<double>> rows() const;

  friend bool operator==(const Kernel& a, const Kernel& b) {
    return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() && a.m_ == b.m_;
  }

 private:
  explicit Kernel(Matrix m) : m_(std::move(m)) {}
  Matrix m_;

  friend ValidationReport validate_kernel(const std::vector<std::vector<double>>&,
                                          const ToleranceConfig&);
};

struct ValidationReport {
  Kernel kernel;
  std::vector<std::pair<std::size_t, std::size_t>> clamped;  // entries zeroed
  std::vector<std::size_t> renormalized_rows;
};

ValidationReport validate_kernel(const std::vector<std::vector<double>>& raw,
                                 const ToleranceConfig& cfg = {});
ValidationReport validate_kernel(const Matrix& raw, const ToleranceConfig& cfg = {});

/// mu P^t by t sequential row-vector products in index order.
Dist propagate(const Dist& mu, const Kernel& p, std::uint64_t t);

/// One row-vector product without re-normalization: x -> x M.
std::vector<double> row_times(std::span<const double> x, const Matrix& m);

bool is_irreducible(const Kernel& p, double zero_tol = 0.0);

struct StationaryResult {
  Dist pi;
  std::int64_t iterations = 0;
  double residual = 0.0;  // ||pi P - pi||_1
};

/// Stationary distribution of an irreducible kernel by power iteration.
StationaryResult stationary(const Kernel& p, const ToleranceConfig& cfg = {});

/// Power-iteration limit from the uniform start without an irreducibility
/// requirement. For reducible chains this picks one stationary distribution
/// (the one reached from uniform); callers must say so in their reports.
StationaryResult stationary_from_uniform(const Kernel& p, const ToleranceConfig& cfg = {});

struct BalanceCheck {
  bool balanced = false;
  double max_violation = 0.0;
};

/// max_{i,j} |pi_i P_ij - pi_j P_ji| against `tol`.
BalanceCheck check_detailed_balance(const Kernel& p, const Dist& pi, double tol);

double commutator_max_abs(const Kernel& a, const Kernel& b);

}  // namespace emergence
