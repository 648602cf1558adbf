#include "emergence/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Eigenvalues>

#include "emergence/error.hpp"

namespace emergence {

namespace {

constexpr std::string_view kModule = "cycle_forms";
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

Edge ordered(std::size_t i, std::size_t j) { return i < j ? Edge{i, j} : Edge{j, i}; }

std::vector<std::vector<std::size_t>> adjacency(const SupportGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.vertex_count);
  for (const auto& [i, j] : g.undirected_edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

void label_components(SupportGraph& g) {
  const auto adj = adjacency(g);
  g.components.assign(g.vertex_count, kNone);
  g.component_count = 0;
  for (std::size_t root = 0; root < g.vertex_count; ++root) {
    if (g.components[root] != kNone) continue;
    std::deque<std::size_t> queue{root};
    g.components[root] = root;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t w : adj[v])
        if (g.components[w] == kNone) {
          g.components[w] = root;
          queue.push_back(w);
        }
    }
    ++g.component_count;
  }
}

// Vertices in the order the forest reached them, so parents precede children.
struct Forest {
  std::vector<std::size_t> parent;
  std::vector<std::size_t> order;
  std::vector<std::size_t> roots;
};

Forest spanning_forest(const SupportGraph& g, ForestKind kind) {
  const auto adj = adjacency(g);
  Forest f;
  f.parent.assign(g.vertex_count, kNone);
  std::vector<bool> seen(g.vertex_count, false);
  for (std::size_t root = 0; root < g.vertex_count; ++root) {
    if (seen[root]) continue;
    f.roots.push_back(root);
    seen[root] = true;
    if (kind == ForestKind::Bfs) {
      std::deque<std::size_t> queue{root};
      while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        f.order.push_back(v);
        for (std::size_t w : adj[v])
          if (!seen[w]) {
            seen[w] = true;
            f.parent[w] = v;
            queue.push_back(w);
          }
      }
    } else {
      struct Frame {
        std::size_t v;
        std::size_t next;
      };
      std::vector<Frame> stack{{root, 0}};
      f.order.push_back(root);
      while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next == adj[top.v].size()) {
          stack.pop_back();
          continue;
        }
        const std::size_t w = adj[top.v][top.next++];
        if (seen[w]) continue;
        seen[w] = true;
        f.parent[w] = top.v;
        f.order.push_back(w);
        stack.push_back({w, 0});
      }
    }
  }
  return f;
}

std::vector<std::size_t> path_to_root(const std::vector<std::size_t>& parent, std::size_t v) {
  std::vector<std::size_t> path{v};
  while (parent[path.back()] != kNone) path.push_back(parent[path.back()]);
  return path;
}

// Tree path from `from` to `to` (inclusive at both ends).
std::vector<std::size_t> tree_path(const std::vector<std::size_t>& parent, std::size_t from,
                                   std::size_t to) {
  auto up_from = path_to_root(parent, from);
  auto up_to = path_to_root(parent, to);
  while (up_from.size() > 1 && up_to.size() > 1 &&
         up_from[up_from.size() - 2] == up_to[up_to.size() - 2]) {
    up_from.pop_back();
    up_to.pop_back();
  }
  // Both now end at the lowest common ancestor.
  std::vector<std::size_t> path(up_from.begin(), up_from.end());
  for (auto it = up_to.rbegin() + 1; it != up_to.rend(); ++it) path.push_back(*it);
  return path;
}

}  // namespace

SupportGraph SupportGraph::from_edges(std::size_t n, const std::vector<Edge>& edges) {
  SupportGraph g;
  g.vertex_count = n;
  std::set<Edge> unique;
  for (const auto& [i, j] : edges) {
    if (i >= n || j >= n) raise(ErrorCode::DimensionMismatch, kModule, "edge endpoint out of range");
    if (i != j) unique.insert(ordered(i, j));
  }
  g.undirected_edges.assign(unique.begin(), unique.end());
  for (const auto& [i, j] : g.undirected_edges) {
    g.directed_support.emplace_back(i, j);
    g.directed_support.emplace_back(j, i);
  }
  std::sort(g.directed_support.begin(), g.directed_support.end());
  g.rev_ok = true;
  label_components(g);
  return g;
}

bool SupportGraph::has_edge(std::size_t i, std::size_t j) const {
  return std::binary_search(undirected_edges.begin(), undirected_edges.end(), ordered(i, j));
}

SupportGraph support_graph(const Kernel& p, double zero_tol) {
  SupportGraph g;
  g.vertex_count = p.dim();
  for (std::size_t i = 0; i < p.dim(); ++i)
    for (std::size_t j = 0; j < p.dim(); ++j) {
      if (i == j || !(p(i, j) > zero_tol)) continue;
      g.directed_support.emplace_back(i, j);
      if (p(j, i) > zero_tol) {
        if (i < j) g.undirected_edges.emplace_back(i, j);
      } else {
        g.rev_violations.emplace_back(i, j);
      }
    }
  g.rev_ok = g.rev_violations.empty();
  label_components(g);
  return g;
}

bool OneForm::has_edge(std::size_t i, std::size_t j) const {
  return i != j && forward_.count(ordered(i, j)) > 0;
}

double OneForm::operator()(std::size_t i, std::size_t j) const {
  const auto it = forward_.find(ordered(i, j));
  if (i == j || it == forward_.end())
    raise(ErrorCode::EdgeMissing, kModule,
          "edge (" + std::to_string(i) + "," + std::to_string(j) + ") carries no 1-form value");
  return i < j ? it->second : -it->second;
}

OneForm one_form(const Kernel& p, const SupportGraph& graph) {
  if (!graph.rev_ok) {
    const auto& [i, j] = graph.rev_violations.front();
    raise(ErrorCode::RevViolation, kModule,
          "P(" + std::to_string(i) + "," + std::to_string(j) + ") > 0 but the reverse entry is zero");
  }
  if (graph.vertex_count != p.dim())
    raise(ErrorCode::DimensionMismatch, kModule, "graph and kernel dimensions differ");
  std::map<Edge, double> values;
  for (const auto& [i, j] : graph.undirected_edges) values[{i, j}] = std::log(p(i, j) / p(j, i));
  return OneForm(std::move(values));
}

CycleBasis cycle_basis(const SupportGraph& graph, ForestKind kind) {
  const Forest f = spanning_forest(graph, kind);
  CycleBasis b;
  b.parent = f.parent;
  b.roots = f.roots;
  for (std::size_t v = 0; v < graph.vertex_count; ++v)
    if (f.parent[v] != kNone) b.tree_edges.push_back(ordered(v, f.parent[v]));
  std::sort(b.tree_edges.begin(), b.tree_edges.end());
  for (const auto& e : graph.undirected_edges)
    if (!std::binary_search(b.tree_edges.begin(), b.tree_edges.end(), e)) b.chords.push_back(e);
  for (const auto& [i, j] : b.chords) {
    std::vector<std::size_t> cycle{i};
    const auto back = tree_path(f.parent, j, i);
    cycle.insert(cycle.end(), back.begin(), back.end());
    b.cycles.push_back(std::move(cycle));
  }
  return b;
}

double cycle_integral(const OneForm& a, const std::vector<std::size_t>& cycle) {
  if (cycle.size() < 2 || cycle.front() != cycle.back())
    raise(ErrorCode::InvalidArgument, kModule, "cycle must be a closed vertex walk");
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < cycle.size(); ++k) sum += a(cycle[k], cycle[k + 1]);
  return sum;
}

std::vector<double> affinities(const OneForm& a, const CycleBasis& basis) {
  std::vector<double> out;
  out.reserve(basis.cycles.size());
  for (const auto& c : basis.cycles) out.push_back(cycle_integral(a, c));
  return out;
}

Exactness exactness(const OneForm& a, const CycleBasis& basis, double tol) {
  Exactness r;
  r.affinities = affinities(a, basis);
  r.exact = std::all_of(r.affinities.begin(), r.affinities.end(),
                        [&](double v) { return std::abs(v) <= tol; });

  const std::size_t n = basis.parent.size();
  std::vector<double> phi(n, 0.0);
  std::vector<bool> done(n, false);
  for (std::size_t root : basis.roots) done[root] = true;
  // Integrate along tree paths; each vertex waits for its parent.
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> chain;
    for (std::size_t w = v; !done[w]; w = basis.parent[w]) chain.push_back(w);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const std::size_t w = *it;
      phi[w] = phi[basis.parent[w]] + a(basis.parent[w], w);
      done[w] = true;
    }
  }
  r.tree_potential = phi;
  for (const auto& [edge, value] : a.forward()) {
    const auto& [i, j] = edge;
    if (i >= n || j >= n) raise(ErrorCode::DimensionMismatch, kModule, "1-form edge outside basis");
    const double residual = std::abs(value - (phi[j] - phi[i]));
    if (residual > r.max_residual) {
      r.max_residual = residual;
      r.worst_edge = edge;
    }
  }
  if (r.exact) r.potential = std::move(phi);
  return r;
}

std::size_t cycle_rank(const SupportGraph& graph) {
  return graph.undirected_edges.size() + graph.component_count - graph.vertex_count;
}

Kernel gate_edges(const Kernel& p, const std::vector<Edge>& remove, double zero_tol) {
  Matrix m = p.matrix();
  const std::size_t n = p.dim();
  std::vector<bool> touched(n, false);
  for (const auto& [i, j] : remove) {
    if (i >= n || j >= n) raise(ErrorCode::DimensionMismatch, kModule, "edge endpoint out of range");
    if (i == j) raise(ErrorCode::InvalidArgument, kModule, "gating acts on edges between distinct states");
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 0.0;
    touched[i] = touched[j] = true;
  }
  // Untouched rows keep their exact entries.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!touched[static_cast<std::size_t>(i)]) continue;
    const double sum = m.row(i).sum();
    if (!(sum > zero_tol))
      raise(ErrorCode::RowStarved, kModule, "row " + std::to_string(i) + " has no remaining mass");
    m.row(i) /= sum;
  }
  Kernel gated = Kernel::from_stochastic(std::move(m), 1e-12);
  if (cycle_rank(support_graph(gated, zero_tol)) > cycle_rank(support_graph(p, zero_tol)))
    raise(ErrorCode::Internal, kModule, "edge gating increased the cycle rank");
  return gated;
}

double spectral_gap(const Kernel& p, const Dist& pi) {
  const std::size_t n = p.dim();
  if (pi.size() != n) raise(ErrorCode::DimensionMismatch, kModule, "distribution and kernel differ");
  for (std::size_t i = 0; i < n; ++i)
    if (!(pi[i] > 0.0))
      raise(ErrorCode::NotReversible, kModule, "spectral gap needs a strictly positive measure");
  const auto balance = check_detailed_balance(p, pi, 1e-10);
  if (!balance.balanced)
    raise(ErrorCode::NotReversible, kModule, "kernel is not reversible w.r.t. the measure");
  if (n == 1) return 1.0;

  const auto k = static_cast<Eigen::Index>(n);
  Matrix s(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double lazy = 0.5 * ((i == j ? 1.0 : 0.0) + p.matrix()(i, j));
      s(i, j) = std::sqrt(pi[static_cast<std::size_t>(i)]) * lazy /
                std::sqrt(pi[static_cast<std::size_t>(j)]);
    }
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    raise(ErrorCode::NotReversible, kModule, "symmetrised lazy kernel is not symmetric");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    raise(ErrorCode::NotConverged, kModule, "eigensolver failed");
  const double lambda2 = solver.eigenvalues()(k - 2);
  return std::clamp(1.0 - lambda2, 0.0, 1.0);
}

Kernel graph_walk_kernel(std::size_t n, const std::vector<WeightedEdge>& edges, double self_weight) {
  const auto k = static_cast<Eigen::Index>(n);
  Matrix w = Matrix::Zero(k, k);
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n || e.i == e.j || !(e.weight > 0.0))
      raise(ErrorCode::InvalidArgument, kModule, "weighted edges need distinct endpoints and weight > 0");
    w(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) += e.weight;
    w(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) += e.weight;
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    w(i, i) += self_weight;
    const double deg = w.row(i).sum();
    if (!(deg > 0.0)) raise(ErrorCode::RowStarved, kModule, "isolated vertex without self weight");
    w.row(i) /= deg;
  }
  return Kernel::from_stochastic(std::move(w), 1e-12);
}

Dist graph_walk_stationary(std::size_t n, const std::vector<WeightedEdge>& edges, double self_weight) {
  std::vector<double> deg(n, self_weight);
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) raise(ErrorCode::InvalidArgument, kModule, "edge endpoint out of range");
    deg[e.i] += e.weight;
    deg[e.j] += e.weight;
  }
  return Dist::normalized(std::move(deg));
}

}  // namespace emergence
