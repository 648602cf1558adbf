#include "emergence/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>

#include <openssl/evp.h>

#include "emergence/cycles.hpp"
#include "emergence/error.hpp"
#include "emergence/forcing.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "cli_reports";

[[noreturn]] void schema_error(const std::string& what) { raise(ErrorCode::SchemaError, kModule, what); }

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing member \"") + key + "\"");
  return j.at(key);
}

double as_number(const Json& j, const std::string& what) {
  if (!j.is_number()) schema_error(what + " must be a number");
  return j.get<double>();
}

std::uint64_t as_count(const Json& j, const std::string& what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  schema_error(what + " must be a nonnegative integer");
}

std::vector<double> as_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) schema_error(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_number(v, what));
  return out;
}

std::vector<std::vector<double>> as_rows(const Json& j, const std::string& what) {
  if (!j.is_array()) schema_error(what + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) rows.push_back(as_vector(r, what));
  return rows;
}

// Accessors over the "options" object; absent keys fall back to defaults.
struct Options {
  const Json& j;

  bool has(const char* key) const { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }
  std::uint64_t count(const char* key, std::uint64_t fallback) const {
    return has(key) ? as_count(j.at(key), std::string("option ") + key) : fallback;
  }
  double number(const char* key, double fallback) const {
    return has(key) ? as_number(j.at(key), std::string("option ") + key) : fallback;
  }
  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j.at(key).is_string()) schema_error(std::string("option ") + key + " must be a string");
    return j.at(key).get<std::string>();
  }
  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j.at(key).is_boolean()) schema_error(std::string("option ") + key + " must be a boolean");
    return j.at(key).get<bool>();
  }
};

struct Context {
  const Json& input;
  Options options;
  ToleranceConfig tol;
  std::optional<std::uint64_t> seed;
};

// A kernel document may be bare or wrapped as {"kernel": ...}.
const Json& kernel_doc(const Json& input) {
  if (input.is_object() && input.contains("rows")) return input;
  return member(input, "kernel");
}

Dist stationary_of(const Kernel& p, const ToleranceConfig& tol) {
  return is_irreducible(p, tol.zero_tol) ? stationary(p, tol).pi : stationary_from_uniform(p, tol).pi;
}

// rho: "uniform", "stationary", an array of weights or {"weights": [...]}.
std::pair<Dist, std::string> initial_dist(const Json& spec, const Kernel& p, const ToleranceConfig& tol) {
  if (spec.is_string()) {
    const auto mode = spec.get<std::string>();
    if (mode == "uniform") return {Dist::uniform(p.dim()), mode};
    if (mode == "stationary") return {stationary_of(p, tol), mode};
    schema_error("rho must be \"uniform\", \"stationary\" or a weight vector");
  }
  Dist d = load_dist(spec);
  if (d.size() != p.dim()) raise(ErrorCode::DimensionMismatch, kModule, "rho length differs from state count");
  return {d, "given"};
}

std::pair<Dist, std::string> rho_option(const Context& c, const Kernel& p) {
  const Json spec = c.options.has("rho") ? c.options.j.at("rho") : Json("stationary");
  return initial_dist(spec, p, c.tol);
}

Json edges_json(const std::vector<Edge>& edges) {
  Json out = Json::array();
  for (const auto& [i, j] : edges) out.push_back({i, j});
  return out;
}

Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Uniform doubles in [-1, 1) from the top 53 bits of each draw, so signals
// do not depend on the standard library's distribution implementations.
double signed_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1p-53 * 2.0 - 1.0;
}

// ---- subcommands --------------------------------------------------------

ReportOutcome cmd_defect(const Context& c) {
  const Kernel p = load_kernel(kernel_doc(c.input), c.tol);
  const Lens lens = load_lens(member(c.input, "lens"));
  const std::size_t tau = c.options.count("tau", 1);
  auto prototypes_for = [&](const Json& doc, const Lens& l) {
    if (doc.contains("prototypes") && doc.at("prototypes").is_string() &&
        doc.at("prototypes").get<std::string>() == "stationary")
      return PrototypeSet::stationary_conditional(l, stationary_of(p, c.tol));
    return doc.contains("prototypes") ? load_prototypes(doc, l) : PrototypeSet::uniform(l);
  };
  const PrototypeSet protos = prototypes_for(c.input, lens);

  const EmpiricalEndomap e = build_endomap(p, lens, protos, tau);
  const double defect = idempotence_defect_tv(e);
  const double retention = retention_error(p, lens, protos, tau);
  const auto stability = prototype_stability(e);
  bool bound = defect <= retention + 1e-12;
  for (double s : stability) bound = bound && s <= retention + 1e-12;

  Json r;
  r["tau"] = tau;
  r["labels"] = lens.labels();
  r["defect"] = defect;
  r["retention"] = retention;
  r["stability"] = stability;
  r["bound_holds"] = bound;
  r["endomap"] = matrix_json(e.matrix.matrix());

  if (c.options.has("epsilon")) {
    const double eps = c.options.number("epsilon", 0.0);
    const LensStability ls = lens_stability(p, lens, protos, tau, eps);
    r["epsilon"] = eps;
    r["stable_count"] = ls.stable_count;
    r["distinct_stable"] = ls.distinct_stable;
  } else {
    r["epsilon"] = nullptr;
  }

  if (c.input.contains("fine")) {
    if (!c.options.has("epsilon")) schema_error("refinement needs option epsilon");
    const double eps = c.options.number("epsilon", 0.0);
    const Json& fine_doc = c.input.at("fine");
    const Lens fine = load_lens(member(fine_doc, "lens"));
    const PrototypeSet fine_protos = prototypes_for(fine_doc, fine);
    const RefinementReport rr = refinement_report(p, lens, protos, fine, fine_protos, tau, eps);
    auto side = [](const LensStability& s) {
      return Json{{"stability", s.stability}, {"stable_count", s.stable_count},
                  {"distinct_stable", s.distinct_stable}, {"retention", s.retention},
                  {"defect", s.defect}};
    };
    r["refinement"] = {{"coarse", side(rr.coarse)},
                       {"fine", side(rr.fine)},
                       {"stable_count_coarse", rr.stable_count_coarse},
                       {"stable_count_fine", rr.stable_count_fine},
                       {"direction", to_string(rr.direction)}};
  }
  return {r, bound ? kExitOk : kExitAuditFailure};
}

ReportOutcome cmd_sigma(const Context& c) {
  const Kernel p = load_kernel(kernel_doc(c.input), c.tol);
  const auto [rho, mode] = rho_option(c, p);
  const std::size_t horizon = c.options.count("T", 1);
  const std::uint64_t cap = c.options.count("cap", kDefaultPathCap);
  const KLResult s = sigma_T(p, rho, horizon, cap);
  Json r = to_json(s);
  r["T"] = horizon;
  r["rho"] = rho.weights();
  r["rho_mode"] = mode;
  r["rate"] = s.infinite || horizon == 0 ? Json(nullptr) : Json(s.value / static_cast<double>(horizon));
  if (c.options.flag("export_paths", false)) r["path_law"] = to_json(path_law(p, rho, horizon, cap));
  return {r, kExitOk};
}

ReportOutcome cmd_dpi(const Context& c) {
  const Kernel p = load_kernel(kernel_doc(c.input), c.tol);
  const Lens lens = load_lens(member(c.input, "lens"));
  const auto [rho, mode] = rho_option(c, p);
  const std::size_t horizon = c.options.count("T", 1);
  const DpiAudit a = dpi_audit(p, rho, lens, horizon, c.options.count("cap", kDefaultPathCap));
  Json r;
  r["T"] = horizon;
  r["rho"] = rho.weights();
  r["rho_mode"] = mode;
  r["micro"] = to_json(a.micro);
  r["macro"] = to_json(a.macro);
  r["slack"] = optional_json(a.slack);
  r["commutation_defect"] = a.commutation_defect;
  r["pass"] = a.pass;
  return {r, a.pass ? kExitOk : kExitAuditFailure};
}

ReportOutcome cmd_protocol_audit(const Context& c) {
  const ProtocolFamily fam = load_protocol(c.input, c.tol);
  const std::size_t horizon = c.options.count("T", 2);
  const TrapAudit a = trap_audit(fam, horizon, c.options.count("cap", kDefaultPathCap), c.tol);
  Json r;
  r["T"] = horizon;
  r["alpha"] = fam.alpha;
  r["lifted_sigma"] = to_json(a.lifted_sigma);
  r["projected_sigma"] = to_json(a.projected_sigma);
  r["reversible_cert"] = a.reversible_cert;
  r["phase_reversible"] = a.phase_reversible;
  r["common_stationary"] = a.common_stationary;
  r["hypotheses_hold"] = a.hypotheses_hold;
  r["lifted_irreducible"] = a.lifted_irreducible;
  r["audit_measure"] = a.audit_measure;
  r["measure"] = a.measure.weights();
  r["phase_stationary"] = a.phase_stationary.weights();
  r["state_stationary"] = a.state_stationary.weights();
  r["balance_violation"] = a.balance_violation;
  // Under the hypotheses both asymmetries must vanish; anything else is a bug.
  bool ok = true;
  if (a.hypotheses_hold)
    ok = a.reversible_cert && !a.lifted_sigma.infinite && !a.projected_sigma.infinite &&
         a.lifted_sigma.value <= kBalanceTolerance && a.projected_sigma.value <= kBalanceTolerance;
  r["pass"] = ok;
  return {r, ok ? kExitOk : kExitAuditFailure};
}

ReportOutcome cmd_strobe(const Context& c) {
  std::vector<Kernel> kernels;
  if (c.input.contains("state_kernels")) {
    kernels = load_protocol(c.input, c.tol).state_kernels;
  } else {
    const Json& list = member(c.input, "kernels");
    if (!list.is_array() || list.empty()) schema_error("kernels must be a non-empty array");
    for (const auto& k : list) kernels.push_back(load_kernel(k, c.tol));
  }
  const Kernel k = stroboscopic_kernel(kernels);
  const std::size_t horizon = c.options.count("T", 1);
  const bool irreducible = is_irreducible(k, c.tol.zero_tol);
  const Dist pi = stationary_of(k, c.tol);
  Json r;
  r["T"] = horizon;
  r["kernel"] = to_json(k);
  r["irreducible"] = irreducible;
  r["stationary"] = pi.weights();
  r["sigma"] = to_json(sigma_T(k, pi, horizon, c.options.count("cap", kDefaultPathCap)));
  double comm = 0.0;
  for (std::size_t i = 0; i < kernels.size(); ++i)
    for (std::size_t j = i + 1; j < kernels.size(); ++j)
      comm = std::max(comm, commutator_max_abs(kernels[i], kernels[j]));
  r["commutator_max_abs"] = comm;
  return {r, kExitOk};
}

ReportOutcome cmd_affinity(const Context& c) {
  const Kernel p = load_kernel(kernel_doc(c.input), c.tol);
  const std::string forest = c.options.text("forest", "bfs");
  if (forest != "bfs" && forest != "dfs") schema_error("forest must be \"bfs\" or \"dfs\"");
  const SupportGraph g = support_graph(p, c.tol.zero_tol);
  const OneForm a = one_form(p, g);
  const CycleBasis basis = cycle_basis(g, forest == "bfs" ? ForestKind::Bfs : ForestKind::Dfs);
  const Exactness ex = exactness(a, basis);
  Json r;
  r["beta1"] = cycle_rank(g);
  r["affinities"] = ex.affinities;
  r["exact"] = ex.exact;
  r["potential"] = ex.potential ? Json(*ex.potential) : Json(nullptr);
  r["tree_potential"] = ex.tree_potential;
  r["max_residual"] = ex.max_residual;
  r["worst_edge"] = {ex.worst_edge.first, ex.worst_edge.second};
  r["chords"] = edges_json(basis.chords);
  r["cycles"] = basis.cycles;
  r["edges"] = edges_json(g.undirected_edges);
  r["components"] = g.component_count;
  r["forest"] = forest;
  return {r, kExitOk};
}

Json gap_or_null(const Kernel& p, const ToleranceConfig& tol) {
  if (!is_irreducible(p, tol.zero_tol)) return nullptr;
  const Dist pi = stationary(p, tol).pi;
  if (!check_detailed_balance(p, pi, kBalanceTolerance).balanced) return nullptr;
  return spectral_gap(p, pi);
}

ReportOutcome cmd_gate(const Context& c) {
  const Kernel p = load_kernel(kernel_doc(c.input), c.tol);
  std::vector<Edge> remove;
  for (const auto& e : member(c.input, "remove")) {
    if (!e.is_array() || e.size() != 2) schema_error("remove entries must be [i, j] pairs");
    const auto i = as_count(e[0], "edge endpoint"), j = as_count(e[1], "edge endpoint");
    remove.emplace_back(std::min(i, j), std::max(i, j));
  }
  const Kernel q = gate_edges(p, remove, c.tol.zero_tol);
  const std::size_t before = cycle_rank(support_graph(p, c.tol.zero_tol));
  const std::size_t after = cycle_rank(support_graph(q, c.tol.zero_tol));
  Json r;
  r["removed"] = edges_json(remove);
  r["beta1_before"] = before;
  r["beta1_after"] = after;
  r["delta_beta1"] = static_cast<std::int64_t>(after) - static_cast<std::int64_t>(before);
  r["monotone"] = after <= before;
  r["kernel"] = to_json(q);
  r["gap_before"] = gap_or_null(p, c.tol);
  r["gap_after"] = gap_or_null(q, c.tol);
  return {r, after <= before ? kExitOk : kExitAuditFailure};
}

ReportOutcome cmd_gap(const Context& c) {
  const Kernel p = load_kernel(kernel_doc(c.input), c.tol);
  if (!is_irreducible(p, c.tol.zero_tol))
    raise(ErrorCode::NotIrreducible, "kernel_core", "spectral gap needs an irreducible kernel");
  const Dist pi = stationary(p, c.tol).pi;
  const BalanceCheck b = check_detailed_balance(p, pi, kBalanceTolerance);
  Json r;
  r["stationary"] = pi.weights();
  r["reversible"] = b.balanced;
  r["balance_violation"] = b.max_violation;
  r["gap"] = spectral_gap(p, pi);
  return {r, kExitOk};
}

ReportOutcome cmd_forcing(const Context& c) {
  Lens lens;
  if (!c.input.is_null()) {
    lens = load_lens(c.input.contains("lens") ? c.input.at("lens") : c.input);
  } else {
    if (!c.options.has("n") || !c.options.has("k")) schema_error("forcing needs a lens or options n and k");
    lens = Lens::balanced(c.options.count("n", 0), c.options.count("k", 0));
  }
  const ForcingReport fr = forcing_report(lens);
  Json r;
  r["n"] = fr.n;
  r["k"] = fr.k;
  r["p_definable"] = fr.p_definable.to_double();
  r["exact_dyadic"] = fr.p_definable.to_string();
  r["per_block_constancy"] = fr.per_block_constancy;
  r["union_bound"] = fr.union_bound;
  r["split_lower_bound"] = optional_json(fr.split_lower_bound);

  const bool enumerate = fr.n <= kEnumerationBudget;
  const EnumerationResult en = exact_enumeration(lens, !enumerate);
  r["enumeration"] = {{"definable_count", en.definable_count.str()},
                      {"total", en.total.str()},
                      {"enumerated", en.enumerated}};

  int exit_code = kExitOk;
  if (c.options.has("trials")) {
    const std::uint64_t seed = c.seed.value_or(0);
    const MonteCarloResult mc = monte_carlo_definability(lens, c.options.count("trials", 0), seed);
    r["monte_carlo"] = {{"trials", mc.trials}, {"hits", mc.hits},         {"freq", mc.freq},
                        {"expected", mc.expected}, {"three_sigma", mc.three_sigma},
                        {"tolerance", mc.tolerance}, {"consistent", mc.consistent},
                        {"generator", mc.generator}, {"seed", mc.seed}};
    if (!mc.consistent) exit_code = kExitAuditFailure;
  } else {
    r["monte_carlo"] = nullptr;
  }
  return {r, exit_code};
}

ReportOutcome cmd_icap(const Context& c) {
  const ConvolutionBridge z = load_bridge(c.input.contains("bridge") ? c.input.at("bridge") : c.input);
  std::vector<PortSignal> batch;
  std::size_t steps = 0;
  if (c.input.contains("signals")) {
    for (const auto& s : c.input.at("signals")) {
      std::vector<Vector> samples;
      for (const auto& v : s) {
        const auto values = as_vector(v, "signal sample");
        samples.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
      }
      batch.push_back(PortSignal::make(z.port_dim, std::move(samples)));
    }
    if (batch.empty()) schema_error("signals must be non-empty");
    steps = batch.front().steps();
  } else {
    steps = c.options.count("steps", 16);
    const std::size_t count = c.options.count("signals", 20);
    std::mt19937_64 gen(c.seed.value_or(0));
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<Vector> samples(steps, Vector(static_cast<Eigen::Index>(z.port_dim)));
      for (auto& v : samples)
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = signed_unit(gen);
      batch.push_back(PortSignal::make(z.port_dim, std::move(samples)));
    }
  }
  std::vector<Window> windows;
  for (const auto& u : batch)
    if (u.steps() != steps) schema_error("all signals must have the same number of steps");
  windows = all_windows(steps);
  const IcapAudit a = icap_audit(z, batch, windows);
  Json r;
  r["max_ratio"] = a.max_ratio;
  r["certified_bound"] = a.certified_bound;
  r["kernel_mass"] = kernel_mass(z);
  r["pass"] = a.pass;
  r["evaluations"] = a.evaluations;
  r["signals"] = batch.size();
  r["steps"] = steps;
  r["port_dim"] = z.port_dim;
  return {r, a.pass ? kExitOk : kExitAuditFailure};
}

ReportOutcome cmd_zeno(const Context& c) {
  CapacitySchedule sched = load_schedule(c.input);
  if (c.options.has("j_max")) sched.j_max = c.options.count("j_max", sched.j_max);
  const ZenoDecision d = no_zeno_decision(sched);
  const LatencyBounds lb = latency_bounds(sched);
  Json r;
  r["j_max"] = sched.j_max;
  r["verdict"] = to_string(d.verdict);
  r["basis"] = d.basis;
  r["alpha_plus_beta"] = optional_json(d.alpha_plus_beta);
  r["growth_ratio"] = optional_json(d.growth_ratio);
  r["no_zeno_certified"] = d.no_zeno_certified;
  r["partial_sums"] = d.partial_sums;
  r["cap"] = lb.cap;
  r["delta_t"] = lb.delta_t;
  r["cumulative_time"] = lb.cumulative;
  r["work_uniform"] = lb.work_uniform;
  return {r, kExitOk};
}

ReportOutcome cmd_route(const Context& c) {
  const RouteMismatch m = route_mismatch_audit(load_matrix(member(c.input, "direct")),
                                               load_matrix(member(c.input, "step1")),
                                               load_matrix(member(c.input, "step2")));
  Json r;
  r["rm"] = m.rm;
  r["gain_direct"] = m.gain_direct;
  r["gain_step1"] = m.gain_step1;
  r["gain_step2"] = m.gain_step2;
  r["gain_bound"] = m.gain_bound;
  r["pass"] = m.pass;
  return {r, m.pass ? kExitOk : kExitAuditFailure};
}

using Handler = ReportOutcome (*)(const Context&);

const std::map<std::string, Handler, std::less<>>& handlers() {
  static const std::map<std::string, Handler, std::less<>> table = {
      {"defect", cmd_defect},   {"sigma", cmd_sigma},       {"dpi", cmd_dpi},
      {"protocol-audit", cmd_protocol_audit},                {"strobe", cmd_strobe},
      {"affinity", cmd_affinity}, {"gate", cmd_gate},       {"gap", cmd_gap},
      {"forcing", cmd_forcing}, {"icap", cmd_icap},         {"zeno", cmd_zeno},
      {"route", cmd_route},
  };
  return table;
}

Json manifest(std::string_view command, const Json& request, const ToleranceConfig& tol,
              const std::optional<std::uint64_t>& seed) {
  Json m;
  m["command"] = std::string(command);
  m["input_digest"] = input_digest(request);
  m["seed"] = seed ? Json(*seed) : Json(nullptr);
  m["tool_version"] = kToolVersion;
  m["tolerances"] = to_json(tol);
  return m;
}

}  // namespace

const std::vector<std::string>& report_commands() {
  static const std::vector<std::string> names = {"defect", "sigma",    "dpi",  "protocol-audit",
                                                 "strobe", "affinity", "gate", "gap",
                                                 "forcing", "icap",    "zeno", "route"};
  return names;
}

ToleranceConfig tolerance_profile(std::string_view name) {
  ToleranceConfig cfg;
  if (name.empty() || name == "default") return cfg;
  if (name == "strict") {
    cfg.row_sum_tol = 1e-10;
    cfg.stationarity_tol = 1e-14;
    return cfg;
  }
  if (name == "loose") {
    cfg.row_sum_tol = 1e-3;
    cfg.stationarity_tol = 1e-10;
    return cfg;
  }
  raise(ErrorCode::InvalidArgument, kModule, "unknown tolerance profile \"" + std::string(name) + "\"");
}

ToleranceConfig tolerances_from_json(const Json& j, const ToleranceConfig& base) {
  ToleranceConfig cfg = base;
  if (j.is_null()) return cfg;
  if (!j.is_object()) schema_error("tolerances must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "row_sum_tol") cfg.row_sum_tol = as_number(value, key);
    else if (key == "stationarity_tol") cfg.stationarity_tol = as_number(value, key);
    else if (key == "zero_tol") cfg.zero_tol = as_number(value, key);
    else if (key == "max_power_iters") cfg.max_power_iters = static_cast<std::int64_t>(as_count(value, key));
    else schema_error("unknown tolerance \"" + key + "\"");
  }
  cfg.validate();
  return cfg;
}

Json to_json(const ToleranceConfig& cfg) {
  return {{"row_sum_tol", cfg.row_sum_tol},
          {"stationarity_tol", cfg.stationarity_tol},
          {"zero_tol", cfg.zero_tol},
          {"max_power_iters", cfg.max_power_iters}};
}

Kernel load_kernel(const Json& j, const ToleranceConfig& cfg) {
  const auto rows = as_rows(member(j, "rows"), "kernel rows");
  if (j.contains("states")) {
    const Json& states = j.at("states");
    if (!states.is_array() || states.size() != rows.size())
      schema_error("kernel states must list one name per row");
  }
  return validate_kernel(rows, cfg).kernel;
}

Dist load_dist(const Json& j) {
  const Json& w = j.is_object() ? member(j, "weights") : j;
  return Dist::normalized(Dist::make(as_vector(w, "weights"), 1e-9).weights());
}

Lens load_lens(const Json& j) {
  const Json& labels = member(j, "labels");
  const Json& assignment = member(j, "assignment");
  if (!labels.is_array()) schema_error("lens labels must be an array of strings");
  std::vector<std::string> names;
  for (const auto& l : labels) {
    if (!l.is_string()) schema_error("lens labels must be strings");
    names.push_back(l.get<std::string>());
  }
  if (!assignment.is_array()) schema_error("lens assignment must be an array");
  std::vector<std::size_t> idx;
  for (const auto& a : assignment) idx.push_back(as_count(a, "lens assignment"));
  return Lens::make(std::move(names), std::move(idx));
}

PrototypeSet load_prototypes(const Json& j, const Lens& lens) {
  const Json& doc = j.contains("prototypes") ? j.at("prototypes") : j;
  if (doc.is_string() && doc.get<std::string>() == "uniform") return PrototypeSet::uniform(lens);
  if (!doc.is_object()) schema_error("prototypes must be an object keyed by label or \"uniform\"");
  const PrototypeSet uniform = PrototypeSet::uniform(lens);
  std::vector<std::vector<double>> u(lens.block_count());
  for (const auto& [key, value] : doc.items())
    if (std::find(lens.labels().begin(), lens.labels().end(), key) == lens.labels().end())
      schema_error("prototype for unknown label \"" + key + "\"");
  for (std::size_t x = 0; x < lens.block_count(); ++x) {
    const std::string& label = lens.labels()[x];
    if (!doc.contains(label) || (doc.at(label).is_string() && doc.at(label).get<std::string>() == "uniform"))
      u[x] = uniform.prototype(x);
    else
      u[x] = as_vector(doc.at(label), "prototype " + label);
  }
  return PrototypeSet::make(lens, std::move(u));
}

ProtocolFamily load_protocol(const Json& j, const ToleranceConfig& cfg) {
  ProtocolFamily fam;
  fam.alpha = as_number(member(j, "alpha"), "alpha");
  fam.phase_kernel = load_kernel(member(j, "phase_kernel"), cfg);
  const Json& ks = member(j, "state_kernels");
  if (!ks.is_array()) schema_error("state_kernels must be an array");
  for (const auto& k : ks) fam.state_kernels.push_back(load_kernel(k, cfg));
  fam.validate();
  return fam;
}

namespace {

ScheduleTerm load_term(const Json& j, const char* exponent_key) {
  if (j.is_number()) return ScheduleTerm::poly(j.get<double>(), 0.0);
  const std::string form = member(j, "form").is_string() ? j.at("form").get<std::string>() : "";
  if (form == "poly") {
    double e = 0.0;
    if (j.contains(exponent_key)) e = as_number(j.at(exponent_key), exponent_key);
    else if (j.contains("exponent")) e = as_number(j.at("exponent"), "exponent");
    return ScheduleTerm::poly(j.contains("c") ? as_number(j.at("c"), "c") : 1.0, e);
  }
  if (form == "geometric")
    return ScheduleTerm::geometric(j.contains("c") ? as_number(j.at("c"), "c") : 1.0,
                                   as_number(member(j, "ratio"), "ratio"));
  if (form == "table") return ScheduleTerm::tabulated(as_vector(member(j, "values"), "values"));
  schema_error("schedule form must be \"poly\", \"geometric\" or \"table\"");
}

}  // namespace

CapacitySchedule load_schedule(const Json& j) {
  CapacitySchedule s;
  const Json& theta = member(j, "theta");
  if (theta.is_number()) {
    s.theta = theta.get<double>();
  } else {
    s.theta_of_j = load_term(theta, "exponent");
    s.theta = s.theta_of_j->form == ScheduleTerm::Form::Table ? 1.0 : s.theta_of_j->c;
  }
  s.lambda = load_term(member(j, "lambda"), "alpha");
  s.bbar = load_term(member(j, "bbar"), "beta");
  s.j_max = as_count(member(j, "j_max"), "j_max");
  s.validate();
  return s;
}

Matrix load_matrix(const Json& j) {
  const auto rows = as_rows(j, "matrix");
  if (rows.empty()) schema_error("matrix must have at least one row");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) schema_error("matrix rows differ in length");
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

ConvolutionBridge load_bridge(const Json& j) {
  const std::size_t d = as_count(member(j, "port_dim"), "port_dim");
  std::vector<Matrix> kernels;
  for (const auto& k : member(j, "kernels")) kernels.push_back(load_matrix(k));
  return ConvolutionBridge::make(d, std::move(kernels));
}

Json to_json(const KLResult& r) {
  Json j;
  j["infinite"] = r.infinite;
  j["value"] = r.infinite ? Json(nullptr) : Json(r.value);
  j["witness"] = r.witness ? Json(*r.witness) : Json(nullptr);
  return j;
}

Json to_json(const PathLaw& law) {
  Json entries = Json::array();
  for (const auto& [path, p] : law.table()) entries.push_back({{"path", path}, {"p", p}});
  return {{"T", law.horizon()}, {"entries", std::move(entries)}};
}

Json to_json(const Kernel& k) {
  Json states = Json::array();
  for (std::size_t i = 0; i < k.dim(); ++i) states.push_back("s" + std::to_string(i));
  return {{"states", std::move(states)}, {"rows", matrix_json(k.matrix())}};
}

std::string input_digest(const Json& request) {
  const Json canonical = {{"input", request.value("input", Json())},
                          {"options", request.value("options", Json::object())}};
  const std::string text = canonical.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    raise(ErrorCode::Internal, kModule, "SHA-256 digest failed");
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string render(const Json& report) { return report.dump(2) + "\n"; }

ReportOutcome run_report(std::string_view command, const Json& request) {
  ToleranceConfig tol;
  std::optional<std::uint64_t> seed;
  ReportOutcome out;
  try {
    if (!request.is_object()) schema_error("request must be an object");
    ToleranceConfig base;
    if (request.contains("tolerance_profile")) {
      if (!request.at("tolerance_profile").is_string()) schema_error("tolerance_profile must be a string");
      base = tolerance_profile(request.at("tolerance_profile").get<std::string>());
    }
    tol = tolerances_from_json(request.value("tolerances", Json()), base);
    if (request.contains("seed") && !request.at("seed").is_null()) seed = as_count(request.at("seed"), "seed");
    const auto it = handlers().find(command);
    if (it == handlers().end())
      raise(ErrorCode::InvalidArgument, kModule, "unknown command \"" + std::string(command) + "\"");
    static const Json kEmpty = Json::object();
    const Json null_input;
    const Json& options = request.contains("options") ? request.at("options") : kEmpty;
    if (!options.is_object()) schema_error("options must be an object");
    const Context ctx{request.contains("input") ? request.at("input") : null_input, Options{options}, tol, seed};
    out = it->second(ctx);
  } catch (const Error& e) {
    out.report = {{"error", {{"code", std::string(error_code_name(e.code()))},
                             {"module", e.module()},
                             {"message", e.what()}}}};
    out.exit_code = e.code() == ErrorCode::Internal ? kExitAuditFailure : kExitInputError;
  } catch (const Json::exception& e) {
    out.report = {{"error", {{"code", "SchemaError"}, {"module", std::string(kModule)}, {"message", e.what()}}}};
    out.exit_code = kExitInputError;
  }
  Json digest_source = request.is_object() ? request : Json::object();
  out.report["manifest"] = manifest(command, digest_source, tol, seed);
  return out;
}

}  // namespace emergence
