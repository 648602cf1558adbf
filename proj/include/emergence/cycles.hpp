#pragma once

// Support graphs of kernels, the log-ratio edge 1-form, fundamental cycle
// bases, affinities, exactness, cycle rank, edge gating and spectral gaps.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "emergence/kernel.hpp"

namespace emergence {

using Edge = std::pair<std::size_t, std::size_t>;  // unordered edges stored with first < second

struct SupportGraph {
  std::size_t vertex_count = 0;
  std::vector<Edge> undirected_edges;   // bidirected pairs, sorted
  std::vector<Edge> directed_support;   // ordered pairs i != j with P_ij > zero_tol, sorted
  std::vector<Edge> rev_violations;     // (i, j) with P_ij > 0 but P_ji = 0
  std::vector<std::size_t> components;  // component label per vertex, labels by lowest vertex
  std::size_t component_count = 0;
  bool rev_ok = false;

  /// Graph with the given undirected edges (self-loops dropped, duplicates merged).
  static SupportGraph from_edges(std::size_t n, const std::vector<Edge>& edges);
  bool has_edge(std::size_t i, std::size_t j) const;
};

SupportGraph support_graph(const Kernel& p, double zero_tol = 1e-15);

/// Antisymmetric edge weights. One orientation (i < j) is stored; reads in
/// the other orientation negate, so a(j,i) = -a(i,j) exactly.
class OneForm {
 public:
  OneForm() = default;
  explicit OneForm(std::map<Edge, double> forward) : forward_(std::move(forward)) {}

  bool has_edge(std::size_t i, std::size_t j) const;
  /// a(i, j); throws EdgeMissing if the edge is not stored.
  double operator()(std::size_t i, std::size_t j) const;
  const std::map<Edge, double>& forward() const noexcept { return forward_; }

 private:
  std::map<Edge, double> forward_;
};

/// a_ij = log(P_ij / P_ji) on every bidirected edge; requires rev_ok.
OneForm one_form(const Kernel& p, const SupportGraph& graph);

enum class ForestKind { Bfs, Dfs };

struct CycleBasis {
  std::vector<std::size_t> parent;  // SIZE_MAX at roots
  std::vector<std::size_t> roots;
  std::vector<Edge> tree_edges;
  std::vector<Edge> chords;  // lexicographic
  // One closed vertex walk per chord: starts with the chord (i -> j) and
  // returns to i along the tree.
  std::vector<std::vector<std::size_t>> cycles;
};

/// Spanning forest rooted at the lowest vertex of each component; neighbours
/// are visited in increasing order.
CycleBasis cycle_basis(const SupportGraph& graph, ForestKind kind = ForestKind::Bfs);

/// Signed sum of a along a closed vertex walk.
double cycle_integral(const OneForm& a, const std::vector<std::size_t>& cycle);
std::vector<double> affinities(const OneForm& a, const CycleBasis& basis);

struct Exactness {
  bool exact = false;
  std::optional<std::vector<double>> potential;  // present only when exact
  std::vector<double> tree_potential;  // tree-path integral, always computed
  double max_residual = 0.0;           // max over all edges of |a_ij - (Phi_j - Phi_i)|
  Edge worst_edge{0, 0};
  std::vector<double> affinities;
};

Exactness exactness(const OneForm& a, const CycleBasis& basis, double tol = 1e-10);

/// beta_1 = |E| - |V| + c(G)
std::size_t cycle_rank(const SupportGraph& graph);

/// Zero both orientations of every listed pair and renormalise rows.
Kernel gate_edges(const Kernel& p, const std::vector<Edge>& remove, double zero_tol = 1e-15);

/// 1 - lambda_2 of the lazy kernel (I + P)/2, via its symmetrisation with
/// D = diag(pi). Requires P reversible w.r.t. a strictly positive pi.
double spectral_gap(const Kernel& p, const Dist& pi);

/// Random walk on a weighted undirected graph: P_ij = w_ij / sum_k w_ik,
/// with optional self-loop weight. Reversible w.r.t. the degree measure.
struct WeightedEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 1.0;
};
Kernel graph_walk_kernel(std::size_t n, const std::vector<WeightedEdge>& edges,
                         double self_weight = 0.0);
Dist graph_walk_stationary(std::size_t n, const std::vector<WeightedEdge>& edges,
                           double self_weight = 0.0);

}  // namespace emergence
