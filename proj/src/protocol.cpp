#include "emergence/protocol.hpp"

#include <cmath>

#include "emergence/error.hpp"

namespace emergence {

namespace {
constexpr std::string_view kModule = "protocol_models";
}

void ProtocolFamily::validate() const {
  if (phase_count() < 2) raise(ErrorCode::InvalidProtocol, kModule, "need at least two phases");
  if (state_kernels.size() != phase_count())
    raise(ErrorCode::DimensionMismatch, kModule,
          "need one state kernel per phase (" + std::to_string(phase_count()) + ")");
  for (const auto& k : state_kernels)
    if (k.dim() != state_count())
      raise(ErrorCode::DimensionMismatch, kModule, "state kernels differ in dimension");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    raise(ErrorCode::InvalidProtocol, kModule, "alpha must lie in [0, 1]");
}

Lens LiftedChain::state_projection() const {
  std::vector<std::size_t> a(state_count * phase_count);
  for (std::size_t x = 0; x < state_count; ++x)
    for (std::size_t phi = 0; phi < phase_count; ++phi) a[index(x, phi)] = x;
  return Lens::from_assignment(std::move(a));
}

Lens LiftedChain::phase_projection() const {
  std::vector<std::size_t> a(state_count * phase_count);
  for (std::size_t x = 0; x < state_count; ++x)
    for (std::size_t phi = 0; phi < phase_count; ++phi) a[index(x, phi)] = phi;
  return Lens::from_assignment(std::move(a));
}

LiftedChain lift_protocol(const ProtocolFamily& family) {
  family.validate();
  const std::size_t n = family.state_count(), m = family.phase_count();
  LiftedChain chain;
  chain.state_count = n;
  chain.phase_count = m;
  const auto dim = static_cast<Eigen::Index>(n * m);
  Matrix p = Matrix::Zero(dim, dim);
  const double a = family.alpha;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t phi = 0; phi < m; ++phi) {
      const auto row = static_cast<Eigen::Index>(chain.index(x, phi));
      for (std::size_t phi2 = 0; phi2 < m; ++phi2)
        p(row, static_cast<Eigen::Index>(chain.index(x, phi2))) += a * family.phase_kernel(phi, phi2);
      for (std::size_t x2 = 0; x2 < n; ++x2)
        p(row, static_cast<Eigen::Index>(chain.index(x2, phi))) +=
            (1.0 - a) * family.state_kernels[phi](x, x2);
    }
  chain.kernel = Kernel::from_stochastic(std::move(p), 1e-12);
  return chain;
}

Dist product_measure(const Dist& pi, const Dist& s) {
  std::vector<double> w(pi.size() * s.size());
  for (std::size_t x = 0; x < pi.size(); ++x)
    for (std::size_t phi = 0; phi < s.size(); ++phi) w[x * s.size() + phi] = pi[x] * s[phi];
  return Dist::make(std::move(w), 1e-9);
}

TrapAudit trap_audit(const ProtocolFamily& family, std::size_t horizon, std::uint64_t cap,
                     const ToleranceConfig& cfg) {
  if (horizon == 0) raise(ErrorCode::InvalidArgument, kModule, "horizon must be >= 1");
  const LiftedChain chain = lift_protocol(family);
  TrapAudit audit;

  audit.phase_stationary = stationary_from_uniform(family.phase_kernel, cfg).pi;
  audit.phase_reversible =
      check_detailed_balance(family.phase_kernel, audit.phase_stationary, kBalanceTolerance).balanced;

  audit.state_stationary = stationary_from_uniform(family.state_kernels.front(), cfg).pi;
  audit.common_stationary = true;
  for (const auto& k : family.state_kernels)
    if (!check_detailed_balance(k, audit.state_stationary, kBalanceTolerance).balanced)
      audit.common_stationary = false;

  audit.hypotheses_hold = audit.phase_reversible && audit.common_stationary;
  audit.lifted_irreducible = is_irreducible(chain.kernel);
  if (audit.hypotheses_hold) {
    audit.measure = product_measure(audit.state_stationary, audit.phase_stationary);
    audit.audit_measure = "product";
  } else {
    audit.measure = stationary_from_uniform(chain.kernel, cfg).pi;
    audit.audit_measure = "lifted_stationary";
  }

  const auto law = path_law(chain.kernel, audit.measure, horizon, cap);
  const auto dpi = dpi_audit(law, chain.state_projection());
  audit.lifted_sigma = dpi.micro;
  audit.projected_sigma = dpi.macro;
  const auto balance = check_detailed_balance(chain.kernel, audit.measure, kBalanceTolerance);
  audit.reversible_cert = balance.balanced;
  audit.balance_violation = balance.max_violation;
  return audit;
}

Kernel stroboscopic_kernel(const std::vector<Kernel>& kernels) {
  if (kernels.empty()) raise(ErrorCode::InvalidArgument, kModule, "need at least one kernel");
  Matrix prod = kernels.front().matrix();
  for (std::size_t i = 1; i < kernels.size(); ++i) {
    if (kernels[i].dim() != kernels.front().dim())
      raise(ErrorCode::DimensionMismatch, kModule, "kernels differ in dimension");
    prod = kernels[i].matrix() * prod;
  }
  return Kernel::from_stochastic(std::move(prod), 1e-9);
}

}  // namespace emergence
