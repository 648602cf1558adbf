#include "emergence/capacity.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "emergence/error.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "capacity_zeno";

void check_window(const PortSignal& u, Window w) {
  if (w.first > w.last || w.last >= u.steps())
    raise(ErrorCode::BadWindow, kModule,
          "window [" + std::to_string(w.first) + "," + std::to_string(w.last) +
              "] outside a signal of " + std::to_string(u.steps()) + " steps");
}

bool is_constant(const ScheduleTerm& t) {
  switch (t.form) {
    case ScheduleTerm::Form::Poly: return t.exponent == 0.0;
    case ScheduleTerm::Form::Geometric: return t.ratio == 1.0;
    case ScheduleTerm::Form::Table:
      return std::adjacent_find(t.table.begin(), t.table.end(), std::not_equal_to<>()) == t.table.end();
  }
  return false;
}

}  // namespace

ConvolutionBridge ConvolutionBridge::make(std::size_t port_dim, std::vector<Matrix> kernels) {
  if (port_dim == 0) raise(ErrorCode::DimensionMismatch, kModule, "port dimension must be >= 1");
  for (const auto& k : kernels) {
    if (static_cast<std::size_t>(k.rows()) != port_dim || static_cast<std::size_t>(k.cols()) != port_dim)
      raise(ErrorCode::DimensionMismatch, kModule, "bridge kernels must be port_dim x port_dim");
    if (!k.allFinite()) raise(ErrorCode::InvalidArgument, kModule, "bridge kernels must be finite");
  }
  return ConvolutionBridge{port_dim, std::move(kernels)};
}

PortSignal PortSignal::make(std::size_t port_dim, std::vector<Vector> samples) {
  for (const auto& s : samples) {
    if (static_cast<std::size_t>(s.size()) != port_dim)
      raise(ErrorCode::DimensionMismatch, kModule, "signal sample has the wrong dimension");
    if (!s.allFinite()) raise(ErrorCode::InvalidArgument, kModule, "signal samples must be finite");
  }
  return PortSignal{std::move(samples)};
}

PortSignal PortSignal::zeros(std::size_t port_dim, std::size_t steps) {
  return PortSignal{std::vector<Vector>(steps, Vector::Zero(static_cast<Eigen::Index>(port_dim)))};
}

PortSignal apply_bridge(const ConvolutionBridge& z, const PortSignal& u, Window w) {
  check_window(u, w);
  if (u.port_dim() != z.port_dim)
    raise(ErrorCode::DimensionMismatch, kModule, "signal and bridge port dimensions differ");
  PortSignal y = PortSignal::zeros(z.port_dim, u.steps());
  for (std::size_t t = w.first; t <= w.last; ++t) {
    Vector acc = Vector::Zero(static_cast<Eigen::Index>(z.port_dim));
    const std::size_t lo = t >= z.lags() ? std::max(w.first, t - z.lags() + 1) : w.first;
    for (std::size_t s = lo; s <= t; ++s) acc.noalias() += z.kernels[t - s] * u.samples[s];
    y.samples[t] = std::move(acc);
  }
  return y;
}

double positive_work(const PortSignal& u, const PortSignal& y, Window w) {
  if (u.steps() != y.steps() || u.port_dim() != y.port_dim())
    raise(ErrorCode::ShapeMismatch, kModule, "input and output signals differ in shape");
  check_window(u, w);
  double sum = 0.0;
  for (std::size_t t = w.first; t <= w.last; ++t) sum += std::max(u.samples[t].dot(y.samples[t]), 0.0);
  return sum;
}

double input_energy(const PortSignal& u, Window w) {
  check_window(u, w);
  double sum = 0.0;
  for (std::size_t t = w.first; t <= w.last; ++t) sum += u.samples[t].squaredNorm();
  return sum;
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const Matrix gram = a.cols() <= a.rows() ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) raise(ErrorCode::NotConverged, kModule, "eigensolver failed");
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double kernel_mass(const ConvolutionBridge& z) {
  double m = 0.0;
  for (const auto& k : z.kernels) m += operator_norm(k);
  return m;
}

std::vector<Window> all_windows(std::size_t steps) {
  std::vector<Window> out;
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t t = s; t < steps; ++t) out.push_back({s, t});
  return out;
}

IcapAudit icap_audit(const ConvolutionBridge& z, const std::vector<PortSignal>& batch,
                     const std::vector<Window>& windows) {
  IcapAudit a;
  a.certified_bound = kernel_mass(z);
  for (const auto& u : batch)
    for (const auto& w : windows) {
      const PortSignal y = apply_bridge(z, u, w);
      const double work = positive_work(u, y, w);
      const double energy = input_energy(u, w);
      const double ratio = energy > 0.0 ? work / energy : 0.0;
      a.max_ratio = std::max(a.max_ratio, ratio);
      ++a.evaluations;
    }
  a.pass = a.max_ratio <= a.certified_bound + 1e-10 * std::max(1.0, a.certified_bound);
  return a;
}

ConvolutionBridge parallel_sum(const std::vector<ConvolutionBridge>& bridges) {
  if (bridges.empty()) raise(ErrorCode::InvalidArgument, kModule, "need at least one bridge");
  const std::size_t d = bridges.front().port_dim;
  std::size_t lags = 0;
  for (const auto& b : bridges) {
    if (b.port_dim != d) raise(ErrorCode::DimensionMismatch, kModule, "bridges differ in port dimension");
    lags = std::max(lags, b.lags());
  }
  const auto k = static_cast<Eigen::Index>(d);
  std::vector<Matrix> sum(lags, Matrix::Zero(k, k));
  for (const auto& b : bridges)
    for (std::size_t t = 0; t < b.lags(); ++t) sum[t] += b.kernels[t];
  return ConvolutionBridge::make(d, std::move(sum));
}

double parallel_capacity(const std::vector<ConvolutionBridge>& bridges) {
  if (bridges.empty()) raise(ErrorCode::InvalidArgument, kModule, "need at least one bridge");
  double total = 0.0;
  for (const auto& b : bridges) {
    if (b.port_dim != bridges.front().port_dim)
      raise(ErrorCode::DimensionMismatch, kModule, "bridges differ in port dimension");
    total += kernel_mass(b);
  }
  return total;
}

void AtomSpec::validate() const {
  if (!(norm_c > 0.0 && norm_b > 0.0 && decay > 0.0))
    raise(ErrorCode::InvalidArgument, kModule, "atom norms and decay rate must be positive");
}

ConvolutionBridge atom_bridge(const AtomSpec& atom, std::size_t port_dim, double step, std::size_t lags) {
  atom.validate();
  if (!(step > 0.0)) raise(ErrorCode::InvalidArgument, kModule, "time step must be positive");
  const auto k = static_cast<Eigen::Index>(port_dim);
  std::vector<Matrix> kernels;
  kernels.reserve(lags);
  for (std::size_t t = 0; t < lags; ++t)
    kernels.push_back(Matrix::Identity(k, k) *
                      (step * atom.norm_c * atom.norm_b * std::exp(-atom.decay * step * static_cast<double>(t))));
  return ConvolutionBridge::make(port_dim, std::move(kernels));
}

double balanced_discretization_factor(double decay, double step) {
  const double x = decay * step;
  return x / -std::expm1(-x);
}

std::uint64_t ect_mode_bound(double c0, std::size_t depth) {
  if (!(c0 > 0.0)) raise(ErrorCode::InvalidArgument, kModule, "C0 must be positive");
  return static_cast<std::uint64_t>(std::ceil(c0 * static_cast<double>(depth + 1)));
}

CapacityCurve ect_capacity_curve(double lambda0, double c0, std::size_t j_max) {
  if (!(lambda0 > 0.0 && c0 > 0.0))
    raise(ErrorCode::InvalidArgument, kModule, "Lambda0 and C0 must be positive");
  CapacityCurve c;
  double sum = 0.0;
  for (std::size_t j = 0; j <= j_max; ++j) {
    const double cap = lambda0 * c0 * static_cast<double>(j + 1);
    sum += 1.0 / cap;
    c.cap.push_back(cap);
    c.partial_sums.push_back(sum);
  }
  return c;  // linear capacity: harmonic comparison always diverges
}

double ScheduleTerm::at(std::size_t j) const {
  switch (form) {
    case Form::Poly: return c * std::pow(static_cast<double>(j + 1), exponent);
    case Form::Geometric: return c * std::pow(ratio, static_cast<double>(j));
    case Form::Table:
      if (j >= table.size())
        raise(ErrorCode::InvalidSchedule, kModule, "tabulated schedule shorter than the requested depth");
      return table[j];
  }
  return 0.0;
}

ScheduleTerm ScheduleTerm::poly(double c, double exponent) {
  ScheduleTerm t;
  t.form = Form::Poly;
  t.c = c;
  t.exponent = exponent;
  return t;
}

ScheduleTerm ScheduleTerm::geometric(double c, double ratio) {
  ScheduleTerm t;
  t.form = Form::Geometric;
  t.c = c;
  t.ratio = ratio;
  return t;
}

ScheduleTerm ScheduleTerm::tabulated(std::vector<double> values) {
  ScheduleTerm t;
  t.form = Form::Table;
  t.table = std::move(values);
  return t;
}

void CapacitySchedule::validate() const {
  if (!(theta > 0.0)) raise(ErrorCode::InvalidSchedule, kModule, "theta must be positive");
  auto check = [&](const ScheduleTerm& t, const char* name) {
    if (t.form != ScheduleTerm::Form::Table && !(t.c > 0.0))
      raise(ErrorCode::InvalidSchedule, kModule, std::string(name) + ": constant must be positive");
    if (t.form == ScheduleTerm::Form::Geometric && !(t.ratio > 0.0))
      raise(ErrorCode::InvalidSchedule, kModule, std::string(name) + ": ratio must be positive");
    if (t.form == ScheduleTerm::Form::Table && t.table.size() < j_max)
      raise(ErrorCode::InvalidSchedule, kModule, std::string(name) + ": table shorter than j_max");
    for (std::size_t j = 0; j < j_max; ++j) {
      const double v = t.at(j);
      if (!(v > 0.0) || !std::isfinite(v))
        raise(ErrorCode::InvalidSchedule, kModule,
              std::string(name) + " must be positive and finite at depth " + std::to_string(j));
    }
  };
  check(lambda, "lambda");
  check(bbar, "bbar");
  if (theta_of_j) check(*theta_of_j, "theta");
}

LatencyBounds latency_bounds(const CapacitySchedule& sched) {
  sched.validate();
  LatencyBounds out;
  out.work_uniform = !sched.theta_of_j || is_constant(*sched.theta_of_j);
  out.cumulative.push_back(0.0);
  for (std::size_t j = 0; j < sched.j_max; ++j) {
    const double cap = sched.cap(j);
    const double dt = sched.work_quantum(j) / cap;
    out.cap.push_back(cap);
    out.delta_t.push_back(dt);
    out.cumulative.push_back(out.cumulative.back() + dt);
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Diverges: return "diverges";
    case Verdict::Converges: return "converges";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

ZenoDecision no_zeno_decision(const CapacitySchedule& sched) {
  sched.validate();
  ZenoDecision d;
  double sum = 0.0;
  for (std::size_t j = 0; j < sched.j_max; ++j) {
    sum += 1.0 / sched.cap(j);
    d.partial_sums.push_back(sum);
  }

  const bool tabulated = sched.lambda.form == ScheduleTerm::Form::Table ||
                         sched.bbar.form == ScheduleTerm::Form::Table;
  if (tabulated) {
    d.verdict = Verdict::Undetermined;
    d.basis = "partial_sum";
  } else {
    // Cap(j) = c (j + 1)^p r^j
    double p = 0.0, r = 1.0;
    for (const ScheduleTerm* t : {&sched.lambda, &sched.bbar}) {
      if (t->form == ScheduleTerm::Form::Poly)
        p += t->exponent;
      else
        r *= t->ratio;
    }
    if (sched.lambda.form == ScheduleTerm::Form::Poly && sched.bbar.form == ScheduleTerm::Form::Poly)
      d.alpha_plus_beta = p;
    d.growth_ratio = r;
    d.basis = "closed_form";
    if (r < 1.0)
      d.verdict = Verdict::Diverges;
    else if (r > 1.0)
      d.verdict = Verdict::Converges;
    else
      d.verdict = p <= 1.0 ? Verdict::Diverges : Verdict::Converges;
  }
  const bool work_uniform = !sched.theta_of_j || is_constant(*sched.theta_of_j);
  d.no_zeno_certified = d.verdict == Verdict::Diverges && work_uniform;
  return d;
}

RouteMismatch route_mismatch_audit(const Matrix& direct, const Matrix& step1, const Matrix& step2) {
  if (step1.cols() != step2.rows() || direct.rows() != step1.rows() || direct.cols() != step2.cols())
    raise(ErrorCode::ShapeMismatch, kModule, "route matrices are not composable");
  RouteMismatch r;
  r.rm = operator_norm(direct - step1 * step2);
  r.gain_direct = operator_norm(direct);
  r.gain_step1 = operator_norm(step1);
  r.gain_step2 = operator_norm(step2);
  r.gain_bound = r.gain_step1 * r.gain_step2 + r.rm;
  r.pass = r.gain_direct <= r.gain_bound + 1e-10;
  return r;
}

InequalityCheck composition_perturbation(const Matrix& a, const Matrix& b, const Matrix& a2,
                                         const Matrix& b2) {
  if (a.cols() != b.rows() || a.rows() != a2.rows() || a.cols() != a2.cols() || b.rows() != b2.rows() ||
      b.cols() != b2.cols())
    raise(ErrorCode::ShapeMismatch, kModule, "perturbed compositions are not compatible");
  InequalityCheck c;
  c.lhs = operator_norm(a * b - a2 * b2);
  c.rhs = operator_norm(a - a2) * operator_norm(b) + operator_norm(a2) * operator_norm(b - b2);
  c.holds = c.lhs <= c.rhs + 1e-10;
  return c;
}

InequalityCheck idempotence_factorization(const Matrix& e) {
  if (e.rows() != e.cols()) raise(ErrorCode::ShapeMismatch, kModule, "matrix must be square");
  InequalityCheck c;
  c.lhs = operator_norm(e * e - e);
  c.rhs = operator_norm(e) * operator_norm(e - Matrix::Identity(e.rows(), e.cols()));
  c.holds = c.lhs <= c.rhs + 1e-10;
  return c;
}

InequalityCheck coercivity_check(const ConvolutionBridge& z, const Matrix& gate, const PortSignal& u,
                                 Window w) {
  if (static_cast<std::size_t>(gate.rows()) != z.port_dim || gate.rows() != gate.cols())
    raise(ErrorCode::DimensionMismatch, kModule, "gate must be port_dim x port_dim");
  const PortSignal y = apply_bridge(z, u, w);
  InequalityCheck c;
  for (std::size_t t = w.first; t <= w.last; ++t) {
    c.lhs += u.samples[t].dot(y.samples[t]);
    c.rhs += u.samples[t].dot(gate * u.samples[t]);
  }
  c.holds = c.lhs + 1e-10 >= c.rhs;
  return c;
}

InequalityCheck shrinkage_check(const Matrix& gate, double a, const PortSignal& u, Window w) {
  check_window(u, w);
  if (static_cast<std::size_t>(gate.rows()) != u.port_dim() || gate.rows() != gate.cols())
    raise(ErrorCode::DimensionMismatch, kModule, "gate must be port_dim x port_dim");
  InequalityCheck c;
  for (std::size_t t = w.first; t <= w.last; ++t) c.lhs += u.samples[t].dot(gate * u.samples[t]);
  c.rhs = a * a * input_energy(u, w);
  c.holds = c.lhs + 1e-10 >= c.rhs;
  return c;
}

}  // namespace emergence
