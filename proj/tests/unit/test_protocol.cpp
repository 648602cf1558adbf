#include <cmath>

#include "doctest.h"

#include "emergence/cycles.hpp"
#include "emergence/protocol.hpp"
#include "helpers.hpp"

using namespace emergence;
using testing_support::biased_cycle;
using testing_support::kernel;
using testing_support::kK0;
using testing_support::kK1;

namespace {

ProtocolFamily family(const oracle::Rows& s, std::vector<oracle::Rows> ks, double alpha) {
  ProtocolFamily f;
  f.phase_kernel = kernel(s);
  for (const auto& k : ks) f.state_kernels.push_back(kernel(k));
  f.alpha = alpha;
  return f;
}

ProtocolFamily trap(double alpha = 0.5) { return family({{0.5, 0.5}, {0.5, 0.5}}, {kK0, kK1}, alpha); }

// Reversible walk on a weighted complete graph with self-loops; all such
// walks on the same vertex weights share the stationary law.
oracle::Rows metropolis(oracle::Rng& rng, const std::vector<double>& pi) {
  const std::size_t n = pi.size();
  oracle::Rows p(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) p[i][j] = rng.range(0.1, 1.0) / static_cast<double>(n) * std::min(1.0, pi[j] / pi[i]);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += p[i][j];
    p[i][i] = 1.0 - s;
  }
  // Symmetrise the proposal so that pi_i P_ij = pi_j P_ji.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double flow = std::min(pi[i] * p[i][j], pi[j] * p[j][i]);
      p[i][j] = flow / pi[i];
      p[j][i] = flow / pi[j];
    }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += p[i][j];
    p[i][i] = 1.0 - s;
  }
  return p;
}

}  // namespace

TEST_CASE("lifted kernel follows the defining formula") {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng.below(3), n = 2 + rng.below(3);
    const auto s = oracle::random_bidirected_kernel(rng, m, 0.5);
    std::vector<oracle::Rows> ks;
    for (std::size_t phi = 0; phi < m; ++phi) ks.push_back(oracle::random_bidirected_kernel(rng, n, 0.5));
    const double alpha = rng.unit();
    const auto f = family(s, ks, alpha);
    const auto lifted = lift_protocol(f);
    REQUIRE(lifted.kernel.dim() == n * m);
    const auto& S = f.phase_kernel;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t phi = 0; phi < m; ++phi) {
        CHECK(lifted.index(x, phi) == x * m + phi);
        double row = 0.0;
        for (std::size_t y = 0; y < n; ++y)
          for (std::size_t psi = 0; psi < m; ++psi) {
            const double expect = alpha * (y == x ? S(phi, psi) : 0.0) +
                                  (1 - alpha) * (psi == phi ? f.state_kernels[phi](x, y) : 0.0);
            CHECK(lifted.kernel(x * m + phi, y * m + psi) == expect);
            row += lifted.kernel(x * m + phi, y * m + psi);
          }
        CHECK(std::abs(row - 1.0) <= 1e-12);
      }
    const auto xs = lifted.state_projection();
    const auto ps = lifted.phase_projection();
    CHECK(xs.block_count() == n);
    CHECK(ps.block_count() == m);
    CHECK(xs.block_of(lifted.index(n - 1, 0)) == n - 1);
    CHECK(ps.block_of(lifted.index(0, m - 1)) == m - 1);
  }
}

TEST_CASE("lifted kernel spot entries for the two-phase family") {
  const auto lifted = lift_protocol(trap());
  CHECK(lifted.kernel.dim() == 6);
  const auto k0 = kernel(kK0);
  const auto k1 = kernel(kK1);
  // (x=0, phi=0) -> (x=0, phi=1): phase move only.
  CHECK(lifted.kernel(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  // (x=0, phi=0) -> (x=0, phi=0): stay in phase and in state.
  CHECK(lifted.kernel(0, 0) == doctest::Approx(0.25 + 0.5 * k0(0, 0)).epsilon(1e-15));
  // (x=0, phi=0) -> (x=1, phi=0)
  CHECK(lifted.kernel(0, 2) == doctest::Approx(0.5 * k0(0, 1)).epsilon(1e-15));
  // (x=1, phi=1) -> (x=2, phi=1)
  CHECK(lifted.kernel(3, 5) == doctest::Approx(0.5 * k1(1, 2)).epsilon(1e-15));
  // Moving both coordinates at once is impossible.
  CHECK(lifted.kernel(0, 3) == 0.0);
}

TEST_CASE("degenerate alphas") {
  const auto frozen = lift_protocol(trap(1.0));
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y)
      if (x != y)
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) CHECK(frozen.kernel(frozen.index(x, a), frozen.index(y, b)) == 0.0);

  const auto blocks = lift_protocol(trap(0.0));
  const auto k1 = kernel(kK1);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      CHECK(blocks.kernel(blocks.index(x, 0), blocks.index(y, 1)) == 0.0);
      CHECK(blocks.kernel(blocks.index(x, 1), blocks.index(y, 1)) == k1(x, y));
    }

  const auto audit = trap_audit(trap(1.0), 3);
  CHECK(audit.lifted_sigma.value <= 1e-10);
  CHECK(audit.projected_sigma.value <= 1e-10);
}

TEST_CASE("family validation") {
  auto f = trap();
  f.alpha = 1.5;
  CHECK_ERROR(f.validate(), ErrorCode::InvalidProtocol);
  f = trap();
  f.state_kernels.push_back(kernel(kK0));
  CHECK_ERROR(lift_protocol(f), ErrorCode::DimensionMismatch);
  f = trap();
  f.state_kernels[1] = kernel({{0.5, 0.5}, {0.5, 0.5}});
  CHECK_ERROR(lift_protocol(f), ErrorCode::DimensionMismatch);
}

TEST_CASE("protocol trap: reversible ingredients give zero asymmetry") {
  for (std::size_t horizon = 1; horizon <= 4; ++horizon) {
    const auto a = trap_audit(trap(), horizon);
    CHECK(a.phase_reversible);
    CHECK(a.common_stationary);
    CHECK(a.hypotheses_hold);
    CHECK(a.reversible_cert);
    CHECK(a.audit_measure == "product");
    CHECK_FALSE(a.lifted_sigma.infinite);
    CHECK(a.lifted_sigma.value <= 1e-10);
    CHECK(a.projected_sigma.value <= 1e-10);
  }
}

TEST_CASE("biased phase cycle drives the lifted chain") {
  const auto f = family(biased_cycle(0.7, 0.2, 0.1), {kK0, kK1, kK0}, 0.5);
  const auto a = trap_audit(f, 2);
  CHECK_FALSE(a.phase_reversible);
  CHECK_FALSE(a.hypotheses_hold);
  CHECK(a.audit_measure == "lifted_stationary");
  CHECK(a.lifted_sigma.value > 0.0);

  // Oracle: enumerate the lifted chain at its own stationary law.
  const auto lifted = lift_protocol(f);
  const auto rows = lifted.kernel.rows();
  const auto pi = oracle::stationary_solve(rows);
  CHECK(a.lifted_sigma.value == doctest::Approx(oracle::sigma_brute(rows, pi, 2)).epsilon(1e-8));
}

TEST_CASE("reversible families with a common stationary law are traps") {
  oracle::Rng rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(2), m = 2 + rng.below(2);
    const auto pi = oracle::random_weights(rng, n, 0.1);
    std::vector<oracle::Rows> ks;
    for (std::size_t phi = 0; phi < m; ++phi) ks.push_back(metropolis(rng, pi));
    const auto s = oracle::random_reversible_kernel(rng, m, 1.0);
    const auto a = trap_audit(family(s, ks, rng.range(0.1, 0.9)), 2);
    CHECK(a.hypotheses_hold);
    CHECK(a.reversible_cert);
    CHECK(a.lifted_sigma.value <= 1e-10);
    CHECK(a.projected_sigma.value <= 1e-10);
  }
}

TEST_CASE("disagreeing stationary laws are flagged and audited anyway") {
  const auto f = family({{0.5, 0.5}, {0.5, 0.5}}, {{{0.5, 0.5}, {0.5, 0.5}}, {{0.9, 0.1}, {0.5, 0.5}}}, 0.5);
  const auto a = trap_audit(f, 2);
  CHECK_FALSE(a.common_stationary);
  CHECK_FALSE(a.hypotheses_hold);
  CHECK(a.audit_measure == "lifted_stationary");
  CHECK(a.measure.size() == 4);
}

TEST_CASE("convex combinations of balanced kernels stay balanced") {
  const auto f0 = trap();
  const auto pi = stationary(f0.state_kernels[0]).pi;
  const auto s = Dist::uniform(2);
  const auto mu = product_measure(pi, s);
  REQUIRE(check_detailed_balance(lift_protocol(trap(1.0)).kernel, mu, 1e-10).balanced);
  REQUIRE(check_detailed_balance(lift_protocol(trap(0.0)).kernel, mu, 1e-10).balanced);
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0})
    CHECK(check_detailed_balance(lift_protocol(trap(alpha)).kernel, mu, 1e-10).balanced);
}

TEST_CASE("zero lifted affinities mean zero asymmetry at stationarity") {
  const auto lifted = lift_protocol(trap());
  const auto graph = support_graph(lifted.kernel);
  REQUIRE(graph.rev_ok);
  const auto ex = exactness(one_form(lifted.kernel, graph), cycle_basis(graph));
  for (double a : ex.affinities) CHECK(std::abs(a) <= 1e-9);
  const auto pi = stationary(lifted.kernel).pi;
  for (std::size_t horizon = 1; horizon <= 3; ++horizon) CHECK(sigma_T(lifted.kernel, pi, horizon).value <= 1e-10);
}

TEST_CASE("noncommuting kernels can still form a trap") {
  CHECK(commutator_max_abs(kernel(kK0), kernel(kK1)) > 0.1);
  const auto a = trap_audit(trap(), 3);
  CHECK(a.lifted_sigma.value <= 1e-10);
  CHECK(a.projected_sigma.value <= 1e-10);
}

TEST_CASE("stroboscopic products") {
  const auto p = kernel(biased_cycle(0.7, 0.2, 0.1));
  CHECK(stroboscopic_kernel({Kernel::identity(3), p}).matrix().isApprox(p.matrix(), 1e-15));
  CHECK(stroboscopic_kernel({p}) == p);
  CHECK_ERROR(stroboscopic_kernel({p, Kernel::identity(2)}), ErrorCode::DimensionMismatch);

  const auto k = stroboscopic_kernel({kernel(kK0), kernel(kK1)});
  const auto expect = oracle::mat_mul(testing_support::rows(kernel(kK1)), testing_support::rows(kernel(kK0)));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(k(i, j) == doctest::Approx(expect[i][j]).epsilon(1e-14));

  const auto rows = k.rows();
  const auto pi = oracle::stationary_solve(rows);
  const double brute = oracle::sigma_brute(rows, pi, 1);
  CHECK(brute > 0.0);
  CHECK(sigma_T(k, stationary(k).pi, 1).value == doctest::Approx(brute).epsilon(1e-8));
}
