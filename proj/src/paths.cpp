#include "emergence/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "emergence/error.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "path_audit";

double sup_distance(const std::map<Path, double>& a, const std::map<Path, double>& b) {
  double worst = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      worst = std::max(worst, std::abs(ia->second));
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      worst = std::max(worst, std::abs(ib->second));
      ++ib;
    } else {
      worst = std::max(worst, std::abs(ia->second - ib->second));
      ++ia;
      ++ib;
    }
  }
  return worst;
}

}  // namespace

PathLaw::PathLaw(std::size_t horizon, std::map<Path, double> table)
    : horizon_(horizon), table_(std::move(table)) {
  for (auto it = table_.begin(); it != table_.end();) {
    if (it->first.size() != horizon_ + 1)
      raise(ErrorCode::ShapeMismatch, kModule, "path length does not match horizon");
    if (!std::isfinite(it->second) || it->second < 0.0)
      raise(ErrorCode::InvalidDistribution, kModule, "path probabilities must be >= 0");
    if (it->second == 0.0)
      it = table_.erase(it);
    else
      ++it;
  }
}

double PathLaw::probability(const Path& path) const {
  const auto it = table_.find(path);
  return it == table_.end() ? 0.0 : it->second;
}

double PathLaw::total_mass() const {
  double s = 0.0;
  for (const auto& [path, p] : table_) s += p;
  return s;
}

double KLResult::as_double() const {
  return infinite ? std::numeric_limits<double>::infinity() : value;
}

std::uint64_t path_count(std::size_t states, std::size_t horizon) {
  std::uint64_t count = 1;
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (states != 0 && count > std::numeric_limits<std::uint64_t>::max() / states)
      return std::numeric_limits<std::uint64_t>::max();
    count *= states;
  }
  return count;
}

PathLaw path_law(const Kernel& p, const Dist& rho, std::size_t horizon, std::uint64_t cap) {
  const std::size_t n = p.dim();
  if (rho.size() != n)
    raise(ErrorCode::DimensionMismatch, kModule, "initial distribution and kernel dimensions differ");
  if (path_count(n, horizon) > cap)
    raise(ErrorCode::ExplosionCap, kModule,
          std::to_string(n) + "^" + std::to_string(horizon + 1) + " paths exceed cap " +
              std::to_string(cap));

  std::map<Path, double> table;
  // Depth-first over positive-probability prefixes in lexicographic order.
  Path path(horizon + 1);
  std::vector<double> prefix(horizon + 1);
  std::vector<std::uint32_t> next(horizon + 1, 0);
  for (std::uint32_t z0 = 0; z0 < n; ++z0) {
    if (rho[z0] <= 0.0) continue;
    path[0] = z0;
    prefix[0] = rho[z0];
    if (horizon == 0) {
      table.emplace(path, prefix[0]);
      continue;
    }
    std::size_t depth = 1;
    next[1] = 0;
    while (depth > 0) {
      if (next[depth] >= n) {
        --depth;
        continue;
      }
      const std::uint32_t z = next[depth]++;
      const double step = p(path[depth - 1], z);
      if (step <= 0.0) continue;
      path[depth] = z;
      prefix[depth] = prefix[depth - 1] * step;
      if (depth == horizon) {
        table.emplace(path, prefix[depth]);
      } else {
        ++depth;
        next[depth] = 0;
      }
    }
  }
  return PathLaw(horizon, std::move(table));
}

PathLaw reverse_pushforward(const PathLaw& law) {
  std::map<Path, double> table;
  for (const auto& [path, p] : law.table()) table.emplace(Path(path.rbegin(), path.rend()), p);
  return PathLaw(law.horizon(), std::move(table));
}

KLResult kl(const PathLaw& p, const PathLaw& q) {
  if (p.horizon() != q.horizon())
    raise(ErrorCode::ShapeMismatch, kModule, "path laws have different horizons");
  KLResult r;
  double sum = 0.0;
  for (const auto& [path, pv] : p.table()) {
    const double qv = q.probability(path);
    if (qv <= 0.0) {
      r.infinite = true;
      r.witness = path;
      return r;
    }
    sum += pv * std::log(pv / qv);
  }
  // Rounding can leave a tiny negative sum for identical laws.
  r.value = std::max(0.0, sum);
  return r;
}

KLResult kl(const Dist& p, const Dist& q) {
  if (p.size() != q.size()) raise(ErrorCode::ShapeMismatch, kModule, "distributions differ in length");
  KLResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      r.infinite = true;
      r.witness = Path{static_cast<std::uint32_t>(i)};
      return r;
    }
    sum += p[i] * std::log(p[i] / q[i]);
  }
  r.value = std::max(0.0, sum);
  return r;
}

KLResult reversal_asymmetry(const PathLaw& law) { return kl(law, reverse_pushforward(law)); }

KLResult sigma_T(const Kernel& p, const Dist& rho, std::size_t horizon, std::uint64_t cap) {
  return reversal_asymmetry(path_law(p, rho, horizon, cap));
}

KLResult entropy_production_rate(const Kernel& p, const Dist& pi, std::size_t horizon,
                                 std::uint64_t cap) {
  if (horizon == 0) raise(ErrorCode::InvalidArgument, kModule, "horizon must be >= 1");
  KLResult r = sigma_T(p, pi, horizon, cap);
  if (!r.infinite) r.value /= static_cast<double>(horizon);
  return r;
}

PathLaw coarse_path_pushforward(const Lens& lens, const PathLaw& law) {
  std::map<Path, double> table;
  Path coarse;
  for (const auto& [path, p] : law.table()) {
    coarse.resize(path.size());
    for (std::size_t t = 0; t < path.size(); ++t) {
      if (path[t] >= lens.state_count())
        raise(ErrorCode::DimensionMismatch, kModule, "path state outside the lens domain");
      coarse[t] = static_cast<std::uint32_t>(lens.block_of(path[t]));
    }
    table[coarse] += p;
  }
  return PathLaw(law.horizon(), std::move(table));
}

DpiAudit dpi_audit(const PathLaw& micro_law, const Lens& lens) {
  const PathLaw micro_rev = reverse_pushforward(micro_law);
  const PathLaw macro_law = coarse_path_pushforward(lens, micro_law);
  const PathLaw macro_rev = reverse_pushforward(macro_law);
  const PathLaw macro_rev_alt = coarse_path_pushforward(lens, micro_rev);

  DpiAudit a;
  a.micro = kl(micro_law, micro_rev);
  a.macro = kl(macro_law, macro_rev);
  a.commutation_defect = sup_distance(macro_rev.table(), macro_rev_alt.table());
  if (!a.micro.infinite && !a.macro.infinite) a.slack = a.micro.value - a.macro.value;

  bool inequality;
  if (a.micro.infinite)
    inequality = true;
  else if (a.macro.infinite)
    inequality = false;
  else
    inequality = a.macro.value <= a.micro.value + kDpiTolerance;
  a.pass = inequality && a.commutation_defect <= kCommutationTolerance;
  return a;
}

DpiAudit dpi_audit(const Kernel& p, const Dist& rho, const Lens& lens, std::size_t horizon,
                   std::uint64_t cap) {
  if (lens.state_count() != p.dim())
    raise(ErrorCode::DimensionMismatch, kModule, "lens and kernel dimensions differ");
  return dpi_audit(path_law(p, rho, horizon, cap), lens);
}

}  // namespace emergence
