#pragma once

// Stable labeled graphs and the two weighted graph sums they support.  A
// graph carries genus and marking on vertices, heights on half edges,
// ordered ordinary leaves, and unordered dilaton leaves of height >= 2.
// Enumeration emits one representative per isomorphism class with |Aut|
// counted as (decoration-preserving vertex permutations) x (internal edge
// and dilaton symmetries).  The B-model weight is valued in products of
// the auxiliary one-forms at the critical points; the A-model weight keeps
// the ordinary-leaf inputs symbolic so the two sums can be compared
// coefficient by coefficient.

#include <utility>
#include <vector>

#include "wpm/rmatrix.hpp"
#include "wpm/spectral.hpp"

namespace wpm {

struct LabeledGraph {
  struct Vertex {
    int g = 0;
    int beta = 0;  // marking, 0-based
  };
  struct Edge {
    int v1 = 0, v2 = 0;  // v1 <= v2
    int k1 = 0, k2 = 0;  // heights at the two half edges
  };
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<std::pair<int, int>> leaves;    // ordered: (vertex, height)
  std::vector<std::pair<int, int>> dilatons;  // (vertex, height >= 2), sorted
  long aut = 1;

  int genus() const {
    int s = int(edges.size()) - int(vertices.size()) + 1;
    for (const auto& v : vertices) s += v.g;
    return s;
  }
  int valence(int v) const;         // all half edges at v
  int vertex_height_sum(int v) const;
};

// All stable classes of genus g with N ordered ordinary leaves and markings
// in 0..r-1.  Unstable (g, N) throws.  With ordered_leaves = false the
// classes are grouped by forgetting the leaf order and |Aut| picks up the
// leaf stabilizer, so that sum_unordered w/|Aut| = sum_ordered w/|Aut| / N!.
std::vector<LabeledGraph> enumerate_graphs(int g, int N, int r,
                                           bool ordered_leaves = true);

struct AModelData {
  MatSeries R;                   // normalized, R(0) = id
  std::vector<Cplx> sqrt_delta;  // coherent branch, sqrt(2)/h1
};

// Edge factor [z^k w^l] (delta_{ab} - sum_c R_c^a(-z) R_c^b(-w)) / (z + w);
// requires k + l + 1 <= R.order.  Unitarity makes the numerator divisible.
Cplx amodel_edge(const AModelData& ad, int a, int b, int k, int l);

// Weight of one graph with explicit ordinary-leaf inputs; leaf_in[j][i][b]
// is the z^i coefficient of u_j in basis slot b (already divided by
// sqrt(Delta^b)).  In descendent mode every leaf input is first multiplied
// by the operator series s_op, stored as powers of 1/z.
enum class LeafMode { ancestor, descendent };
Cplx amodel_weight(const LabeledGraph& gr, const AModelData& ad,
                   const std::vector<std::vector<std::vector<Cplx>>>& leaf_in,
                   LeafMode mode = LeafMode::ancestor,
                   const MatSeries* s_op = nullptr);

// Weight with symbolic ordinary leaves: the key slot j holds (basis b,
// z-power i) of the j-th leaf input.
FormExpansion amodel_symbolic(const LabeledGraph& gr, const AModelData& ad);

// B-model weight of one graph, valued in products of dxi_{k}^{alpha}: the
// key slot j holds (alpha, k) of the j-th ordinary leaf.  Includes the
// overall sign and the per-leaf 1/sqrt(-2).
FormExpansion bmodel_weight(const LabeledGraph& gr, const SpectralData& sd);

FormExpansion bmodel_graph_sum(SpectralData& sd, int g, int N);

// Max coefficient difference between the B-model graph sum and the
// slot-symmetrized recursion invariant.
double theorem31_residual(SpectralData& sd, int g, int N);

// Max coefficient difference, over the W-symbol basis, between the B-model
// sum and (-1)^{g-1+N} times the A-model sum under the leaf identification
// sqrt(-2) u_k = W_k.
double theorem41_residual(SpectralData& sd, const MatSeries& rmat, int g, int N);

}  // namespace wpm
