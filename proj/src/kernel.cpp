#include "emergence/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "emergence/error.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "kernel_core";

// Rows whose sum is within this many ulps-per-entry of 1 are left untouched,
// which keeps validation idempotent.
double renorm_slack(std::size_t n) {
  return 8.0 * static_cast<double>(std::max<std::size_t>(n, 1)) *
         std::numeric_limits<double>::epsilon();
}

std::string fmt_entry(std::size_t i, std::size_t j, double v) {
  std::ostringstream os;
  os.precision(17);
  os << "entry (" << i << "," << j << ") = " << v;
  return os.str();
}

}  // namespace

void ToleranceConfig::validate() const {
  if (!(row_sum_tol > 0) || !(stationarity_tol > 0) || !(zero_tol > 0) || max_power_iters < 1)
    raise(ErrorCode::InvalidArgument, kModule,
          "tolerances must be positive and max_power_iters >= 1");
}

Dist Dist::make(std::vector<double> weights, double tol) {
  if (weights.empty()) raise(ErrorCode::InvalidDistribution, kModule, "empty distribution");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      raise(ErrorCode::InvalidDistribution, kModule, "distribution entries must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "distribution sums to " << sum;
    raise(ErrorCode::InvalidDistribution, kModule, os.str());
  }
  return Dist(std::move(weights));
}

Dist Dist::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      raise(ErrorCode::InvalidDistribution, kModule, "weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum > 0.0)) raise(ErrorCode::InvalidDistribution, kModule, "weights have zero total mass");
  for (double& w : weights) w /= sum;
  return Dist(std::move(weights));
}

Dist Dist::uniform(std::size_t n) {
  if (n == 0) raise(ErrorCode::InvalidDistribution, kModule, "empty distribution");
  return Dist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Dist Dist::delta(std::size_t n, std::size_t at) {
  if (at >= n) raise(ErrorCode::InvalidDistribution, kModule, "delta index out of range");
  std::vector<double> w(n, 0.0);
  w[at] = 1.0;
  return Dist(std::move(w));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) raise(ErrorCode::DimensionMismatch, kModule, "vector sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  return 0.5 * l1_distance(a, b);
}

Kernel Kernel::from_stochastic(Matrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    raise(ErrorCode::NonSquare, kModule, "kernel matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < 0.0)
        raise(ErrorCode::NegativeEntry, kModule,
              fmt_entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j), v));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      raise(ErrorCode::RowSumOutOfTolerance, kModule,
            "row " + std::to_string(i) + " is not stochastic");
  }
  return Kernel(std::move(m));
}

Kernel Kernel::identity(std::size_t n) {
  if (n == 0) raise(ErrorCode::NonSquare, kModule, "kernel needs at least one state");
  const auto k = static_cast<Eigen::Index>(n);
  return Kernel(Matrix::Identity(k, k));
}

std::vector<std::vector<double>> Kernel::rows() const {
  std::vector<std::vector<double>> out(dim(), std::vector<double>(dim()));
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) out[i][j] = (*this)(i, j);
  return out;
}

ValidationReport validate_kernel(const std::vector<std::vector<double>>& raw,
                                 const ToleranceConfig& cfg) {
  cfg.validate();
  const std::size_t n = raw.size();
  if (n == 0) raise(ErrorCode::NonSquare, kModule, "kernel needs at least one state");
  for (std::size_t i = 0; i < n; ++i)
    if (raw[i].size() != n)
      raise(ErrorCode::NonSquare, kModule,
            "row " + std::to_string(i) + " has " + std::to_string(raw[i].size()) +
                " entries, expected " + std::to_string(n));

  const auto k = static_cast<Eigen::Index>(n);
  Matrix m(k, k);
  ValidationReport report;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double v = raw[i][j];
      if (!std::isfinite(v) || v < -cfg.zero_tol)
        raise(ErrorCode::NegativeEntry, kModule, fmt_entry(i, j, v));
      if (v < cfg.zero_tol) {
        if (v != 0.0) report.clamped.emplace_back(i, j);
        v = 0.0;
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > cfg.row_sum_tol) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " sums to " << sum;
      raise(ErrorCode::RowSumOutOfTolerance, kModule, os.str());
    }
    if (std::abs(sum - 1.0) > renorm_slack(n)) {
      m.row(static_cast<Eigen::Index>(i)) /= sum;
      report.renormalized_rows.push_back(i);
    }
  }
  report.kernel = Kernel(std::move(m));
  return report;
}

ValidationReport validate_kernel(const Matrix& raw, const ToleranceConfig& cfg) {
  if (raw.rows() != raw.cols())
    raise(ErrorCode::NonSquare, kModule, "kernel matrix must be square");
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    for (Eigen::Index j = 0; j < raw.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(raw(i, j));
  return validate_kernel(rows, cfg);
}

std::vector<double> row_times(std::span<const double> x, const Matrix& m) {
  if (static_cast<Eigen::Index>(x.size()) != m.rows())
    raise(ErrorCode::DimensionMismatch, kModule, "row vector length does not match matrix rows");
  const auto cols = static_cast<std::size_t>(m.cols());
  std::vector<double> y(cols, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < cols; ++j)
      y[j] += xi * m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return y;
}

Dist propagate(const Dist& mu, const Kernel& p, std::uint64_t t) {
  if (mu.size() != p.dim())
    raise(ErrorCode::DimensionMismatch, kModule, "distribution and kernel dimensions differ");
  std::vector<double> x = mu.weights();
  for (std::uint64_t step = 0; step < t; ++step) x = row_times(x, p.matrix());
  return Dist::make(std::move(x), 1e-9);
}

bool is_irreducible(const Kernel& p, double zero_tol) {
  // Iterative Tarjan over the directed support graph.
  const std::size_t n = p.dim();
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0;
  std::size_t components = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_w;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != SIZE_MAX) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      bool descended = false;
      while (f.next_w < n) {
        const std::size_t w = f.next_w++;
        if (!(p(f.v, w) > zero_tol)) continue;
        if (index[w] == SIZE_MAX) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      const std::size_t v = f.v;
      if (low[v] == index[v]) {
        ++components;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
        } while (w != v);
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return components == 1;
}

StationaryResult stationary_from_uniform(const Kernel& p, const ToleranceConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.dim();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  // Lazy iteration x <- (x + xP)/2 shares fixed points with P and is
  // aperiodic, so periodic chains converge without special casing.
  for (std::int64_t it = 0; it <= cfg.max_power_iters; ++it) {
    std::vector<double> xp = row_times(x, p.matrix());
    const double residual = l1_distance(xp, x);
    if (residual <= cfg.stationarity_tol) {
      StationaryResult out{Dist::normalized(std::move(x)), it, residual};
      out.residual = l1_distance(row_times(out.pi.weights(), p.matrix()), out.pi.weights());
      return out;
    }
    if (it == cfg.max_power_iters) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * (x[i] + xp[i]);
  }
  raise(ErrorCode::NotConverged, kModule,
        "power iteration did not converge within " + std::to_string(cfg.max_power_iters) +
            " iterations");
}

StationaryResult stationary(const Kernel& p, const ToleranceConfig& cfg) {
  if (!is_irreducible(p)) raise(ErrorCode::NotIrreducible, kModule, "kernel is not irreducible");
  return stationary_from_uniform(p, cfg);
}

BalanceCheck check_detailed_balance(const Kernel& p, const Dist& pi, double tol) {
  if (pi.size() != p.dim())
    raise(ErrorCode::DimensionMismatch, kModule, "distribution and kernel dimensions differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i)
    for (std::size_t j = i + 1; j < p.dim(); ++j)
      worst = std::max(worst, std::abs(pi[i] * p(i, j) - pi[j] * p(j, i)));
  return {worst <= tol, worst};
}

double commutator_max_abs(const Kernel& a, const Kernel& b) {
  if (a.dim() != b.dim()) raise(ErrorCode::DimensionMismatch, kModule, "kernel dimensions differ");
  const Matrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
  return c.cwiseAbs().maxCoeff();
}

}  // namespace emergence
