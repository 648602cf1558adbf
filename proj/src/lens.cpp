#include "emergence/lens.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "emergence/error.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "lens_packaging";
constexpr double kPrototypeTol = 1e-12;
constexpr double kDistinctTol = 1e-9;

Matrix block_sum_matrix(const Lens& lens) {
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(lens.state_count()),
                          static_cast<Eigen::Index>(lens.block_count()));
  for (std::size_t z = 0; z < lens.state_count(); ++z)
    q(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(lens.block_of(z))) = 1.0;
  return q;
}

Matrix lift_matrix(const PrototypeSet& prototypes) {
  Matrix u(static_cast<Eigen::Index>(prototypes.block_count()),
           static_cast<Eigen::Index>(prototypes.state_count()));
  for (std::size_t x = 0; x < prototypes.block_count(); ++x)
    for (std::size_t z = 0; z < prototypes.state_count(); ++z)
      u(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z)) = prototypes.prototype(x)[z];
  return u;
}

void require_compatible(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes) {
  if (p.dim() != lens.state_count() || prototypes.state_count() != lens.state_count() ||
      prototypes.block_count() != lens.block_count())
    raise(ErrorCode::DimensionMismatch, kModule, "kernel, lens and prototypes disagree in size");
}

Matrix kernel_power(const Kernel& p, std::size_t tau) {
  Matrix m = p.matrix();
  for (std::size_t s = 1; s < tau; ++s) m = m * p.matrix();
  return m;
}

}  // namespace

Lens Lens::make(std::vector<std::string> labels, std::vector<std::size_t> assignment) {
  if (assignment.empty()) raise(ErrorCode::InvalidLens, kModule, "lens has no states");
  std::vector<std::vector<std::size_t>> blocks(labels.size());
  for (std::size_t z = 0; z < assignment.size(); ++z) {
    if (assignment[z] >= labels.size())
      raise(ErrorCode::InvalidLens, kModule,
            "state " + std::to_string(z) + " assigned to unknown label index " +
                std::to_string(assignment[z]));
    blocks[assignment[z]].push_back(z);
  }
  for (std::size_t x = 0; x < blocks.size(); ++x)
    if (blocks[x].empty())
      raise(ErrorCode::InvalidLens, kModule, "label '" + labels[x] + "' has no states");
  {
    auto sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      raise(ErrorCode::InvalidLens, kModule, "duplicate lens labels");
  }
  Lens lens;
  lens.labels_ = std::move(labels);
  lens.assignment_ = std::move(assignment);
  lens.blocks_ = std::move(blocks);
  return lens;
}

Lens Lens::from_assignment(std::vector<std::size_t> assignment) {
  std::size_t k = 0;
  for (std::size_t a : assignment) k = std::max(k, a + 1);
  std::vector<std::string> labels;
  for (std::size_t x = 0; x < k; ++x) labels.push_back(std::to_string(x));
  return make(std::move(labels), std::move(assignment));
}

Lens Lens::identity(std::size_t n) {
  std::vector<std::size_t> a(n);
  for (std::size_t z = 0; z < n; ++z) a[z] = z;
  return from_assignment(std::move(a));
}

Lens Lens::single_block(std::size_t n) { return from_assignment(std::vector<std::size_t>(n, 0)); }

Lens Lens::balanced(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) raise(ErrorCode::InvalidLens, kModule, "need 1 <= k <= n blocks");
  std::vector<std::size_t> a(n);
  const std::size_t base = n / k, extra = n % k;
  std::size_t z = 0;
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t c = 0; c < base + (x < extra ? 1 : 0); ++c) a[z++] = x;
  return from_assignment(std::move(a));
}

bool Lens::refines(const Lens& coarser) const {
  if (coarser.state_count() != state_count()) return false;
  for (const auto& b : blocks_)
    for (std::size_t z : b)
      if (coarser.block_of(z) != coarser.block_of(b.front())) return false;
  return true;
}

bool Lens::same_partition(const Lens& other) const {
  return refines(other) && other.refines(*this);
}

Lens compose(const Lens& f, const Lens& g) {
  if (g.state_count() != f.block_count())
    raise(ErrorCode::DimensionMismatch, kModule, "outer lens must act on the inner lens labels");
  std::vector<std::size_t> a(f.state_count());
  for (std::size_t z = 0; z < a.size(); ++z) a[z] = g.block_of(f.block_of(z));
  return Lens::make(g.labels(), std::move(a));
}

PrototypeSet PrototypeSet::make(const Lens& lens, std::vector<std::vector<double>> prototypes) {
  if (prototypes.size() != lens.block_count())
    raise(ErrorCode::DimensionMismatch, kModule, "need one prototype per block");
  for (std::size_t x = 0; x < prototypes.size(); ++x) {
    const auto& u = prototypes[x];
    if (u.size() != lens.state_count())
      raise(ErrorCode::DimensionMismatch, kModule, "prototype length differs from state count");
    double sum = 0.0;
    for (std::size_t z = 0; z < u.size(); ++z) {
      if (!std::isfinite(u[z]) || u[z] < 0.0)
        raise(ErrorCode::InvalidPrototype, kModule, "prototype entries must be >= 0");
      if (u[z] > 0.0 && lens.block_of(z) != x)
        raise(ErrorCode::InvalidPrototype, kModule,
              "prototype for '" + lens.labels()[x] + "' has mass outside its block");
      sum += u[z];
    }
    if (std::abs(sum - 1.0) > kPrototypeTol)
      raise(ErrorCode::InvalidPrototype, kModule,
            "prototype for '" + lens.labels()[x] + "' does not sum to 1");
  }
  PrototypeSet set;
  set.u_ = std::move(prototypes);
  return set;
}

PrototypeSet PrototypeSet::uniform(const Lens& lens) {
  std::vector<std::vector<double>> u(lens.block_count(), std::vector<double>(lens.state_count(), 0.0));
  for (std::size_t x = 0; x < lens.block_count(); ++x) {
    const auto& b = lens.block(x);
    for (std::size_t z : b) u[x][z] = 1.0 / static_cast<double>(b.size());
  }
  return make(lens, std::move(u));
}

PrototypeSet PrototypeSet::point_mass(const Lens& lens, const std::vector<std::size_t>& reps) {
  if (reps.size() != lens.block_count())
    raise(ErrorCode::DimensionMismatch, kModule, "need one representative per block");
  std::vector<std::vector<double>> u(lens.block_count(), std::vector<double>(lens.state_count(), 0.0));
  for (std::size_t x = 0; x < reps.size(); ++x) {
    if (reps[x] >= lens.state_count())
      raise(ErrorCode::InvalidPrototype, kModule, "representative out of range");
    u[x][reps[x]] = 1.0;
  }
  return make(lens, std::move(u));
}

PrototypeSet PrototypeSet::stationary_conditional(const Lens& lens, const Dist& pi) {
  if (pi.size() != lens.state_count())
    raise(ErrorCode::DimensionMismatch, kModule, "distribution length differs from state count");
  std::vector<std::vector<double>> u(lens.block_count(), std::vector<double>(lens.state_count(), 0.0));
  for (std::size_t x = 0; x < lens.block_count(); ++x) {
    double mass = 0.0;
    for (std::size_t z : lens.block(x)) mass += pi[z];
    if (!(mass > 0.0))
      raise(ErrorCode::InvalidPrototype, kModule,
            "block '" + lens.labels()[x] + "' has zero stationary mass");
    for (std::size_t z : lens.block(x)) u[x][z] = pi[z] / mass;
  }
  return make(lens, std::move(u));
}

std::vector<double> pushforward(const Lens& lens, std::span<const double> mu) {
  if (mu.size() != lens.state_count())
    raise(ErrorCode::DimensionMismatch, kModule, "distribution length differs from state count");
  std::vector<double> out(lens.block_count(), 0.0);
  for (std::size_t z = 0; z < mu.size(); ++z) out[lens.block_of(z)] += mu[z];
  return out;
}

Dist pushforward(const Lens& lens, const Dist& mu) {
  return Dist::make(pushforward(lens, mu.view()), 1e-9);
}

Dist lift(const PrototypeSet& prototypes, const Dist& nu) {
  if (nu.size() != prototypes.block_count())
    raise(ErrorCode::DimensionMismatch, kModule, "block distribution length differs from block count");
  std::vector<double> out(prototypes.state_count(), 0.0);
  for (std::size_t x = 0; x < nu.size(); ++x) {
    const auto& u = prototypes.prototype(x);
    for (std::size_t z = 0; z < out.size(); ++z) out[z] += nu[x] * u[z];
  }
  return Dist::make(std::move(out), 1e-9);
}

Dist EmpiricalEndomap::apply_composed(const Kernel& p, const Dist& mu) const {
  return lift(prototypes, pushforward(lens, propagate(mu, p, tau)));
}

EmpiricalEndomap build_endomap(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes,
                               std::size_t tau) {
  if (tau == 0) raise(ErrorCode::TauZero, kModule, "tau must be >= 1");
  require_compatible(p, lens, prototypes);
  Matrix e = kernel_power(p, tau) * block_sum_matrix(lens) * lift_matrix(prototypes);
  return EmpiricalEndomap{Kernel::from_stochastic(std::move(e), 1e-9), tau, lens, prototypes};
}

double idempotence_defect_tv(const Matrix& e) {
  const Matrix d = e * e - e;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) worst = std::max(worst, d.row(i).cwiseAbs().sum());
  return std::min(1.0, 0.5 * worst);  // TV between distributions; rounding can overshoot
}

double idempotence_defect_tv(const EmpiricalEndomap& e) { return idempotence_defect_tv(e.matrix.matrix()); }

double retention_error(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes,
                       std::size_t tau) {
  if (tau == 0) raise(ErrorCode::TauZero, kModule, "tau must be >= 1");
  require_compatible(p, lens, prototypes);
  const Matrix pt = kernel_power(p, tau);
  double worst = 0.0;
  for (std::size_t x = 0; x < lens.block_count(); ++x) {
    const auto evolved = row_times(prototypes.prototype(x), pt);
    const auto coarse = pushforward(lens, evolved);
    std::vector<double> target(lens.block_count(), 0.0);
    target[x] = 1.0;
    worst = std::max(worst, tv_distance(coarse, target));
  }
  return worst;
}

std::vector<double> prototype_stability(const EmpiricalEndomap& e) {
  std::vector<double> s;
  s.reserve(e.prototypes.block_count());
  for (const auto& u : e.prototypes.all()) s.push_back(tv_distance(row_times(u, e.matrix.matrix()), u));
  return s;
}

const char* to_string(RefinementDirection d) {
  switch (d) {
    case RefinementDirection::Reveals: return "reveals";
    case RefinementDirection::Destroys: return "destroys";
    case RefinementDirection::Preserved: return "preserved";
  }
  return "preserved";
}

LensStability lens_stability(const Kernel& p, const Lens& lens, const PrototypeSet& prototypes,
                             std::size_t tau, double epsilon) {
  if (!(epsilon >= 0.0)) raise(ErrorCode::InvalidArgument, kModule, "epsilon must be >= 0");
  const auto e = build_endomap(p, lens, prototypes, tau);
  LensStability out;
  out.stability = prototype_stability(e);
  out.retention = retention_error(p, lens, prototypes, tau);
  out.defect = idempotence_defect_tv(e);
  std::vector<std::vector<double>> images;
  for (std::size_t x = 0; x < out.stability.size(); ++x) {
    if (out.stability[x] > epsilon) continue;
    ++out.stable_count;
    auto img = row_times(prototypes.prototype(x), e.matrix.matrix());
    const bool seen = std::any_of(images.begin(), images.end(), [&](const auto& other) {
      return tv_distance(other, img) <= kDistinctTol;
    });
    if (!seen) images.push_back(std::move(img));
  }
  out.distinct_stable = images.size();
  return out;
}

RefinementReport refinement_report(const Kernel& p, const Lens& coarse,
                                   const PrototypeSet& coarse_prototypes, const Lens& fine,
                                   const PrototypeSet& fine_prototypes, std::size_t tau,
                                   double epsilon) {
  if (!fine.refines(coarse))
    raise(ErrorCode::NotARefinement, kModule, "fine lens does not refine the coarse lens");
  RefinementReport r;
  r.coarse = lens_stability(p, coarse, coarse_prototypes, tau, epsilon);
  r.fine = lens_stability(p, fine, fine_prototypes, tau, epsilon);
  r.stable_count_coarse = r.coarse.stable_count;
  r.stable_count_fine = r.fine.stable_count;
  if (r.stable_count_fine > r.stable_count_coarse)
    r.direction = RefinementDirection::Reveals;
  else if (r.stable_count_fine < r.stable_count_coarse)
    r.direction = RefinementDirection::Destroys;
  else
    r.direction = RefinementDirection::Preserved;
  return r;
}

}  // namespace emergence
