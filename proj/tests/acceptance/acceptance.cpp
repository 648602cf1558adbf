// Acceptance run: one PASS/FAIL line per criterion with its runtime limit.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "emergence/capacity.hpp"
#include "emergence/cycles.hpp"
#include "emergence/forcing.hpp"
#include "emergence/lens.hpp"
#include "emergence/paths.hpp"
#include "emergence/protocol.hpp"
#include "emergence/report.hpp"
#include "oracles.hpp"

using namespace emergence;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  int id;
  std::string name;
  double limit_ms;
  std::function<Outcome()> run;
};

Kernel kernel(const oracle::Rows& rows) { return validate_kernel(rows).kernel; }

Json fixture(const std::string& name) {
  std::ifstream in(std::string(EMERGENCE_FIXTURE_DIR) + "/" + name + ".json");
  return Json::parse(in);
}

oracle::Rows biased_cycle(double p, double q, double s) { return {{s, p, q}, {q, s, p}, {p, q, s}}; }

const oracle::Rows kK0 = {{0.573333, 0.393333, 0.033333}, {0.393333, 0.573333, 0.033333}, {0.033333, 0.033333, 0.933333}};
const oracle::Rows kK1 = {{0.933333, 0.033333, 0.033333}, {0.033333, 0.573333, 0.393333}, {0.033333, 0.393333, 0.573333}};

std::vector<std::size_t> random_assignment(oracle::Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> a(n);
  for (std::size_t z = 0; z < n; ++z) a[z] = z < k ? z : rng.below(k);
  for (std::size_t z = n; z-- > 1;) std::swap(a[z], a[rng.below(z + 1)]);
  return a;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1 ------------------------------------------------------------------------
Outcome affinity_three_cycle() {
  Outcome o;
  const auto p = kernel(biased_cycle(0.7, 0.2, 0.1));
  const auto g = support_graph(p);
  const auto aff = affinities(one_form(p, g), cycle_basis(g));
  o.require(aff.size() == 1, "expected one basis cycle");
  if (!o.ok) return o;
  const double a = std::abs(aff[0]);
  o.require(std::abs(a - 3.7583) <= 1e-4, "affinity " + fmt(a) + " differs from 3.7583");
  o.require(std::abs(a - 3.0 * std::log(3.5)) <= 1e-12, "affinity differs from 3 ln 3.5");
  o.detail = o.ok ? "A = " + fmt(aff[0]) : o.detail;
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome exactness_dichotomy() {
  Outcome o;
  oracle::Rng rng(2002);
  int exact_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    const auto rows = trial % 2 == 0 ? oracle::random_reversible_kernel(rng, n, rng.range(0.1, 0.9))
                                     : oracle::random_bidirected_kernel(rng, n, rng.range(0.1, 0.9));
    const auto p = kernel(rows);
    const auto g = support_graph(p);
    const auto ex = exactness(one_form(p, g), cycle_basis(g));
    bool all_small = true;
    for (double a : ex.affinities) all_small = all_small && std::abs(a) <= 1e-10;
    o.require(ex.exact == all_small, "exact flag disagrees with affinities at trial " + std::to_string(trial));
    if (ex.exact) {
      ++exact_count;
      std::vector<double> w;
      for (double phi : *ex.potential) w.push_back(std::exp(phi));
      o.require(check_detailed_balance(p, Dist::normalized(w), 1e-10).balanced,
                "exp(potential) fails detailed balance at trial " + std::to_string(trial));
    }
  }
  o.require(exact_count > 0 && exact_count < 200, "corpus does not exercise both sides");
  if (o.ok) o.detail = std::to_string(exact_count) + "/200 exact";
  return o;
}

// 3 ------------------------------------------------------------------------
Outcome dpi_never_violated() {
  Outcome o;
  oracle::Rng rng(3003);
  int strict = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(4);
    const auto rows = oracle::random_bidirected_kernel(rng, n, rng.range(0.2, 1.0), rng.coin(0.5));
    const auto rho = Dist::normalized(oracle::random_weights(rng, n));
    const auto lens = Lens::from_assignment(random_assignment(rng, n, 1 + rng.below(n)));
    const std::size_t horizon = 1 + rng.below(4);
    const auto a = dpi_audit(kernel(rows), rho, lens, horizon);
    o.require(a.pass, "audit failed at trial " + std::to_string(trial));
    if (!a.micro.infinite) {
      o.require(!a.macro.infinite && a.macro.value <= a.micro.value + 1e-10,
                "macro exceeds micro at trial " + std::to_string(trial));
      if (a.macro.value < a.micro.value - 1e-6) ++strict;
    }
  }
  o.require(strict >= 30, "only " + std::to_string(strict) + " strict hiding instances");
  if (o.ok) o.detail = std::to_string(strict) + "/300 strict hiding";
  return o;
}

// 4 ------------------------------------------------------------------------
ProtocolFamily family(const oracle::Rows& s, const std::vector<oracle::Rows>& ks) {
  ProtocolFamily f;
  f.phase_kernel = kernel(s);
  for (const auto& k : ks) f.state_kernels.push_back(kernel(k));
  f.alpha = 0.5;
  return f;
}

Outcome protocol_trap() {
  Outcome o;
  const auto trap = family({{0.5, 0.5}, {0.5, 0.5}}, {kK0, kK1});
  for (std::size_t horizon = 1; horizon <= 4; ++horizon) {
    const auto a = trap_audit(trap, horizon);
    o.require(!a.lifted_sigma.infinite && a.lifted_sigma.value <= 1e-10,
              "lifted sigma nonzero at T=" + std::to_string(horizon));
    o.require(!a.projected_sigma.infinite && a.projected_sigma.value <= 1e-10,
              "projected sigma nonzero at T=" + std::to_string(horizon));
  }
  const auto strobe = stroboscopic_kernel({kernel(kK0), kernel(kK1)});
  const double s_strobe = sigma_T(strobe, stationary(strobe).pi, 1).value;
  o.require(s_strobe > 1e-3, "stroboscopic sigma " + fmt(s_strobe) + " <= 1e-3");
  const auto biased = trap_audit(family(biased_cycle(0.7, 0.2, 0.1), {kK0, kK1, kK0}), 2);
  o.require(biased.lifted_sigma.value > 1e-4, "biased phase sigma too small");
  const double comm = commutator_max_abs(kernel(kK0), kernel(kK1));
  o.require(std::abs(comm - 0.1296) <= 5e-4, "commutator " + fmt(comm));
  if (o.ok)
    o.detail = "strobe sigma " + fmt(s_strobe) + ", biased lifted " + fmt(biased.lifted_sigma.value) +
               ", commutator " + fmt(comm);
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome defect_bound() {
  Outcome o;
  oracle::Rng rng(5005);
  for (int trial = 0; trial < 500 && o.ok; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const auto rows = oracle::random_bidirected_kernel(rng, n, rng.range(0.1, 0.9), rng.coin(0.5));
    const auto lens = Lens::from_assignment(random_assignment(rng, n, 1 + rng.below(n)));
    std::vector<std::vector<double>> u(lens.block_count(), std::vector<double>(n, 0.0));
    for (std::size_t x = 0; x < lens.block_count(); ++x) {
      const auto& block = lens.block(x);
      const auto w = oracle::random_weights(rng, block.size(), 0.0);
      for (std::size_t i = 0; i < block.size(); ++i) u[x][block[i]] = w[i];
    }
    const auto protos = PrototypeSet::make(lens, u);
    const std::size_t tau = 1 + rng.below(4);
    const auto p = kernel(rows);
    const auto e = build_endomap(p, lens, protos, tau);
    const double delta = idempotence_defect_tv(e);
    const double eps = retention_error(p, lens, protos, tau);
    o.require(delta <= eps + 1e-12, "defect exceeds retention at trial " + std::to_string(trial));
    for (int k = 0; k < 200; ++k) {
      const auto mu = oracle::random_weights(rng, n, 0.0);
      const auto once = oracle::endomap_apply(rows, lens.assignment(), u, tau, mu);
      const auto twice = oracle::endomap_apply(rows, lens.assignment(), u, tau, once);
      if (oracle::tv(twice, once) > delta + 1e-12) {
        o.require(false, "random mu beats the extreme-point defect at trial " + std::to_string(trial));
        break;
      }
    }
  }
  if (o.ok) o.detail = "500 instances x 200 mu";
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome refinement_fixtures() {
  Outcome o;
  const std::pair<const char*, const char*> cases[] = {{"refinement_reveals", "reveals"},
                                                       {"refinement_destroys", "destroys"}};
  const std::size_t fine_expected[] = {2, 0};
  for (std::size_t i = 0; i < 2; ++i) {
    const Json req = {{"input", fixture(cases[i].first)}, {"options", {{"epsilon", 0.05}}}, {"seed", nullptr}};
    const auto out = run_report("defect", req);
    const auto& r = out.report.at("refinement");
    o.require(r.at("stable_count_coarse") == 1, std::string(cases[i].first) + ": coarse count");
    o.require(r.at("stable_count_fine") == fine_expected[i], std::string(cases[i].first) + ": fine count");
    o.require(r.at("direction") == cases[i].second, std::string(cases[i].first) + ": direction");
  }
  if (o.ok) o.detail = "1->2 reveals, 1->0 destroys";
  return o;
}

// 7 ------------------------------------------------------------------------
// All integer partitions of n (block-size profiles), largest part first.
void for_each_profile(std::size_t n, std::size_t max_part, std::vector<std::size_t>& cur,
                      const std::function<void(const std::vector<std::size_t>&)>& visit) {
  if (n == 0) {
    visit(cur);
    return;
  }
  for (std::size_t part = std::min(n, max_part); part >= 1; --part) {
    cur.push_back(part);
    for_each_profile(n - part, part, cur, visit);
    cur.pop_back();
  }
}

Outcome forcing_counts() {
  Outcome o;
  std::size_t lenses = 0;
  // Every set partition for N <= 11.
  for (std::size_t n = 1; n <= 11; ++n)
    oracle::for_each_set_partition(n, [&](const std::vector<std::size_t>& a) {
      const auto lens = Lens::from_assignment(a);
      const auto e = exact_enumeration(lens);
      ++lenses;
      if (e.definable_count != BigInt(1) << lens.block_count())
        o.require(false, "count mismatch for an N=" + std::to_string(n) + " lens");
    });
  // N = 12: one lens per block-size profile. The count is invariant under
  // relabeling states, so a profile stands for every partition with it.
  for (std::size_t n = 12; n <= 12; ++n) {
    std::vector<std::size_t> cur;
    for_each_profile(n, n, cur, [&](const std::vector<std::size_t>& sizes) {
      std::vector<std::size_t> a;
      for (std::size_t b = 0; b < sizes.size(); ++b) a.insert(a.end(), sizes[b], b);
      const auto e = exact_enumeration(Lens::from_assignment(a));
      ++lenses;
      if (e.definable_count != BigInt(1) << sizes.size())
        o.require(false, "count mismatch for an N=" + std::to_string(n) + " profile");
    });
  }
  const auto r = forcing_report(Lens::balanced(16, 4));
  o.require(r.p_definable.to_string() == "2^-12", "dyadic " + r.p_definable.to_string());
  o.require(std::abs(r.p_definable.to_double() - 2.44e-4) < 5e-7, "float value");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto mc = monte_carlo_definability(Lens::balanced(8, 4), 100000, seed);
    const double three_sigma = 3.0 * std::sqrt(mc.expected * (1 - mc.expected) / 1e5);
    o.require(std::abs(mc.freq - mc.expected) <= three_sigma, "seed " + std::to_string(seed) + " outside 3 sigma");
  }
  if (o.ok) o.detail = std::to_string(lenses) + " lenses enumerated";
  return o;
}

// 8 ------------------------------------------------------------------------
std::vector<WeightedEdge> unit_edges(const Json& edges) {
  std::vector<WeightedEdge> out;
  for (const auto& e : edges) out.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), 1.0});
  return out;
}

struct GapMove {
  long delta_beta1;
  double gap_before;
  double gap_after;
};

GapMove p1_rewrite(const Json& fx) {
  const auto n = fx.at("vertices").get<std::size_t>();
  const double self = fx.at("self_weight").get<double>();
  auto before_edges = unit_edges(fx.at("edges"));
  auto after_edges = before_edges;
  if (fx.contains("add"))
    for (const auto& e : unit_edges(fx.at("add"))) after_edges.push_back(e);
  if (fx.contains("remove"))
    for (const auto& r : unit_edges(fx.at("remove")))
      std::erase_if(after_edges, [&](const WeightedEdge& e) {
        return (e.i == r.i && e.j == r.j) || (e.i == r.j && e.j == r.i);
      });
  const auto before = graph_walk_kernel(n, before_edges, self);
  const auto after = graph_walk_kernel(n, after_edges, self);
  return {static_cast<long>(cycle_rank(support_graph(after))) - static_cast<long>(cycle_rank(support_graph(before))),
          spectral_gap(before, graph_walk_stationary(n, before_edges, self)),
          spectral_gap(after, graph_walk_stationary(n, after_edges, self))};
}

Outcome cycle_rank_gating() {
  Outcome o;
  oracle::Rng rng(8008);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const auto p = kernel(oracle::random_bidirected_kernel(rng, n, rng.range(0.1, 0.9), true));
    const auto g = support_graph(p);
    std::vector<Edge> remove;
    for (const auto& e : g.undirected_edges)
      if (rng.coin(0.3)) remove.push_back(e);
    const auto gated = gate_edges(p, remove);
    o.require(cycle_rank(support_graph(gated)) <= cycle_rank(g), "beta1 increased at trial " + std::to_string(trial));
  }
  const auto ring = p1_rewrite(fixture("p1_close_ring"));
  const auto bridge = p1_rewrite(fixture("p1_remove_bridge"));
  o.require(ring.delta_beta1 == 1, "ring closure changes beta1 by " + std::to_string(ring.delta_beta1));
  o.require(bridge.delta_beta1 == -1, "bridge removal changes beta1 by " + std::to_string(bridge.delta_beta1));
  o.require(ring.gap_after > ring.gap_before, "ring closure does not raise the gap");
  o.require(bridge.gap_after < bridge.gap_before, "bridge removal does not lower the gap");
  if (o.ok)
    o.detail = "gap " + fmt(ring.gap_before) + "->" + fmt(ring.gap_after) + ", " + fmt(bridge.gap_before) + "->" +
               fmt(bridge.gap_after);
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome icap_zeno() {
  Outcome o;
  oracle::Rng rng(9009);
  for (int b = 0; b < 50; ++b) {
    const std::size_t dim = 1 + rng.below(3);
    std::vector<Matrix> ks;
    for (std::size_t t = 0; t < 1 + rng.below(5); ++t) {
      Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.range(-1, 1);
      ks.push_back(m);
    }
    const auto z = ConvolutionBridge::make(dim, ks);
    std::vector<PortSignal> batch;
    for (int s = 0; s < 20; ++s) {
      std::vector<Vector> samples;
      for (int t = 0; t < 10; ++t) {
        Vector v(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.range(-1, 1);
        samples.push_back(v);
      }
      batch.push_back(PortSignal::make(dim, samples));
    }
    o.require(icap_audit(z, batch, all_windows(10)).pass, "icap audit failed for bridge " + std::to_string(b));
  }

  CapacitySchedule geo;
  geo.lambda = ScheduleTerm::geometric(1, 2);
  geo.j_max = 60;
  const auto lat = latency_bounds(geo);
  o.require(std::abs(lat.cumulative.back() - 2.0) <= 1e-9, "cumulative time " + fmt(lat.cumulative.back()));
  const auto d = no_zeno_decision(geo);
  o.require(std::abs(d.partial_sums.back() - 2.0) <= 1e-9, "partial sum does not reach 2");
  o.require(d.verdict == Verdict::Converges, "geometric schedule not converging");

  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0})
    for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      if (alpha + beta > 1.0) continue;
      CapacitySchedule s;
      s.lambda = ScheduleTerm::poly(1, alpha);
      s.bbar = ScheduleTerm::poly(1, beta);
      o.require(no_zeno_decision(s).verdict == Verdict::Diverges,
                "alpha=" + fmt(alpha) + " beta=" + fmt(beta) + " not diverging");
    }
  if (o.ok) o.detail = "t_60 = " + fmt(lat.cumulative.back());
  return o;
}

// 10 -----------------------------------------------------------------------
Matrix random_matrix(oracle::Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.range(-1, 1);
  return m;
}

Outcome route_and_inequalities() {
  Outcome o;
  oracle::Rng rng(10010);
  auto dim = [&] { return 1 + static_cast<Eigen::Index>(rng.below(5)); };
  for (int t = 0; t < 100; ++t) {
    const auto a = dim(), b = dim(), c = dim();
    const auto r = route_mismatch_audit(random_matrix(rng, a, c), random_matrix(rng, a, b), random_matrix(rng, b, c));
    o.require(r.pass && r.gain_direct <= r.gain_bound + 1e-10, "route bound fails at triple " + std::to_string(t));
  }
  for (int t = 0; t < 200; ++t) {
    const auto n = dim(), m = dim(), k = dim();
    const auto a = random_matrix(rng, n, m), b = random_matrix(rng, m, k);
    const auto cp = composition_perturbation(a, b, a + 0.1 * random_matrix(rng, n, m), b + 0.1 * random_matrix(rng, m, k));
    o.require(cp.lhs <= cp.rhs + 1e-10, "composition perturbation fails at case " + std::to_string(t));
    const auto f = idempotence_factorization(random_matrix(rng, n, n));
    o.require(f.lhs <= f.rhs + 1e-10, "idempotence factorization fails at case " + std::to_string(t));
  }
  if (o.ok) o.detail = "100 triples, 200 matrix cases";
  return o;
}

// 11 -----------------------------------------------------------------------
std::vector<std::pair<std::string, Json>> report_suite() {
  auto req = [](Json input, Json options = Json::object(), Json seed = nullptr) {
    return Json{{"input", std::move(input)}, {"options", std::move(options)}, {"seed", std::move(seed)}};
  };
  return {
      {"affinity.three_cycle", req(fixture("three_cycle"))},
      {"sigma.three_cycle", req(fixture("three_cycle"), {{"T", 3}, {"rho", "uniform"}, {"export_paths", true}})},
      {"sigma.reversible_flip", req(fixture("reversible_flip"), {{"T", 3}, {"rho", "uniform"}})},
      {"dpi.three_cycle", req(fixture("dpi_three_cycle"), {{"T", 3}})},
      {"defect.reveals", req(fixture("refinement_reveals"), {{"epsilon", 0.05}})},
      {"defect.destroys", req(fixture("refinement_destroys"), {{"epsilon", 0.05}, {"tau", 2}})},
      {"protocol-audit.trap", req(fixture("protocol_trap"), {{"T", 4}})},
      {"protocol-audit.biased", req(fixture("protocol_biased"), {{"T", 2}})},
      {"strobe.trap", req(fixture("protocol_trap"))},
      {"gate.barbell", req(fixture("gate_barbell"))},
      {"gap.flip", req(Json{{"rows", {{0.7, 0.3}, {0.3, 0.7}}}})},
      {"forcing.lens16", req(fixture("forcing_lens"), {{"trials", 100000}}, 7)},
      {"forcing.balanced", req(nullptr, {{"n", 16}, {"k", 4}})},
      {"icap.bridge", req(fixture("icap_bridge"), Json::object(), 3)},
      {"zeno.linear", req(fixture("zeno_linear"))},
      {"zeno.geometric", req(fixture("zeno_geometric"))},
      {"route.fixture", req(fixture("route"))},
  };
}

void write_suite(const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, request] : report_suite()) {
    const std::string command = name.substr(0, name.find('.'));
    std::ofstream(dir / (name + ".json"), std::ios::binary) << render(run_report(command, request).report);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path g_report_dir = "acceptance_reports";

Outcome determinism() {
  Outcome o;
  fs::remove_all(g_report_dir);
  write_suite(g_report_dir / "run1");
  write_suite(g_report_dir / "run2");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(g_report_dir / "run1")) {
    ++files;
    const auto other = g_report_dir / "run2" / entry.path().filename();
    o.require(fs::exists(other) && slurp(entry.path()) == slurp(other),
              entry.path().filename().string() + " differs between runs");
  }
  o.require(files == report_suite().size(), "missing report files");
  if (o.ok) o.detail = std::to_string(files) + " report files byte-identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_report_dir = argv[1];
  const std::vector<Criterion> criteria = {
      {1, "biased three-cycle affinity", 10, affinity_three_cycle},
      {2, "exactness dichotomy", 5000, exactness_dichotomy},
      {3, "data processing never violated", 60000, dpi_never_violated},
      {4, "protocol trap", 30000, protocol_trap},
      {5, "defect bounded by retention", 60000, defect_bound},
      {6, "refinement reveals and destroys", 1000, refinement_fixtures},
      {7, "definable predicate counting", 30000, forcing_counts},
      {8, "cycle-rank gating and gap moves", 10000, cycle_rank_gating},
      {9, "integrated capacity and no-Zeno", 30000, icap_zeno},
      {10, "route mismatch and norm inequalities", 10000, route_and_inequalities},
      {11, "byte-identical reports", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && c.limit_ms > 0 && ms > c.limit_ms) {
      o.ok = false;
      o.detail = "over time limit";
    }
    failures += o.ok ? 0 : 1;
    const std::string limit = c.limit_ms > 0 ? "limit " + fmt(c.limit_ms) + " ms" : "no limit";
    std::printf("%s %2d  %-38s %10.2f ms (%s)  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name.c_str(), ms, limit.c_str(),
                o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
