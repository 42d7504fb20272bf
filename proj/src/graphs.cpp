#include "wpm/graphs.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>

#include "wpm/intersect.hpp"

namespace wpm {

int LabeledGraph::valence(int v) const {
  int s = 0;
  for (const auto& e : edges) s += (e.v1 == v) + (e.v2 == v);
  for (const auto& l : leaves) s += (l.first == v);
  for (const auto& d : dilatons) s += (d.first == v);
  return s;
}

int LabeledGraph::vertex_height_sum(int v) const {
  int s = 0;
  for (const auto& e : edges) {
    if (e.v1 == v) s += e.k1;
    if (e.v2 == v) s += e.k2;
  }
  for (const auto& l : leaves)
    if (l.first == v) s += l.second;
  for (const auto& d : dilatons)
    if (d.first == v) s += d.second;
  return s;
}

namespace {

double dfact_odd(int k) {  // (2k-1)!!
  double r = 1.0;
  for (int j = 3; j <= 2 * k - 1; j += 2) r *= j;
  return r;
}

Cplx pow_int(Cplx base, int e) {
  if (e < 0) return pow_int(Cplx(1.0) / base, -e);
  Cplx r(1.0);
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

const Cplx kInvSqrtM2(0.0, -1.0 / 1.4142135623730951);  // 1/sqrt(-2)

// Constant multiplying h_check on a height-k dilaton half edge.  Fixed by
// the recursion invariants at (1,1) and (2,1); equals the ordinary-leaf
// expansion of -sum_a (1/sqrt(Delta^a)) R_a^b(-z) on the other side, so the
// dilaton sectors of the two graph sums match term by term.
Cplx dilaton_constant(int k) {
  return Cplx((k % 2 == 0 ? 1.0 : -1.0) / 1.4142135623730951, 0.0);
}

using Enc = std::vector<long>;

// Normal form of a labeled structure for a fixed vertex relabeling p
// (p[old] = new); injective on labeled structures, so equality of
// encodings is equality of structures.
Enc encode(const LabeledGraph& gr, const std::vector<int>& p,
           bool with_leaf_order) {
  int V = int(gr.vertices.size());
  std::vector<int> inv(static_cast<size_t>(V));
  for (int o = 0; o < V; ++o) inv[size_t(p[size_t(o)])] = o;
  Enc e;
  e.push_back(V);
  for (int t = 0; t < V; ++t) {
    int o = inv[size_t(t)];
    e.push_back(gr.vertices[size_t(o)].g);
    e.push_back(gr.vertices[size_t(o)].beta);
    std::vector<int> dh;
    for (const auto& d : gr.dilatons)
      if (d.first == o) dh.push_back(d.second);
    std::sort(dh.begin(), dh.end());
    e.push_back(-1);
    for (int h : dh) e.push_back(h);
  }
  std::vector<std::array<long, 4>> es;
  for (const auto& ed : gr.edges) {
    std::array<long, 2> a = {p[size_t(ed.v1)], ed.k1};
    std::array<long, 2> b = {p[size_t(ed.v2)], ed.k2};
    if (b < a) std::swap(a, b);
    es.push_back({a[0], a[1], b[0], b[1]});
  }
  std::sort(es.begin(), es.end());
  e.push_back(-2);
  for (const auto& x : es)
    for (long v : x) e.push_back(v);
  e.push_back(-3);
  if (with_leaf_order) {
    for (const auto& l : gr.leaves) {
      e.push_back(p[size_t(l.first)]);
      e.push_back(l.second);
    }
  } else {
    std::vector<std::array<long, 2>> ls;
    for (const auto& l : gr.leaves) ls.push_back({p[size_t(l.first)], l.second});
    std::sort(ls.begin(), ls.end());
    for (const auto& x : ls) {
      e.push_back(x[0]);
      e.push_back(x[1]);
    }
  }
  return e;
}

// |Aut| = (#vertex permutations preserving the structure) x (internal edge
// and dilaton symmetries).
long automorphism_count(const LabeledGraph& gr) {
  int V = int(gr.vertices.size());
  std::vector<int> p(static_cast<size_t>(V));
  std::iota(p.begin(), p.end(), 0);
  Enc id = encode(gr, p, true);
  long stab = 0;
  do {
    if (encode(gr, p, true) == id) ++stab;
  } while (std::next_permutation(p.begin(), p.end()));
  long kernel = 1;
  std::map<std::array<long, 4>, long> groups;
  for (const auto& ed : gr.edges) {
    std::array<long, 2> a = {ed.v1, ed.k1}, b = {ed.v2, ed.k2};
    if (b < a) std::swap(a, b);
    long mult = ++groups[{a[0], a[1], b[0], b[1]}];
    kernel *= mult;  // running factorial of the identical-edge group
    if (ed.v1 == ed.v2 && ed.k1 == ed.k2) kernel *= 2;
  }
  std::map<std::pair<int, int>, long> dgroups;
  for (const auto& d : gr.dilatons) kernel *= ++dgroups[d];
  return stab * kernel;
}

struct CoreSlots {
  // per vertex: (edge index, end) slots then leaf indices
  std::vector<std::vector<std::pair<int, int>>> edge_slots;
  std::vector<std::vector<int>> leaf_slots;
};

void sorted_parts(int total, int parts, int minv, std::vector<int>& cur,
                  const std::function<void(const std::vector<int>&)>& fn) {
  if (parts == 0) {
    if (total == 0) fn(cur);
    return;
  }
  for (int x = minv; parts * x <= total; ++x) {
    cur.push_back(x);
    sorted_parts(total - x, parts - 1, x, cur, fn);
    cur.pop_back();
  }
}

struct VertexDec {
  std::vector<int> slot_heights;  // edge-end slots then leaf slots, in order
  std::vector<int> dil;           // sorted, >= 2
};

}  // namespace

std::vector<LabeledGraph> enumerate_graphs(int g, int N, int r,
                                           bool ordered_leaves) {
  if (g < 0 || N < 0 || 2 * g - 2 + N <= 0)
    throw Unstable("enumerate_graphs: 2g - 2 + N must be positive");
  if (r < 1) throw ConfigError("enumerate_graphs: need at least one marking");

  std::map<Enc, LabeledGraph> classes;

  int vmax = 2 * g - 2 + N;
  for (int V = 1; V <= vmax; ++V) {
    for (int b1 = 0; b1 <= g; ++b1) {
      int E = V - 1 + b1;
      int gsum = g - b1;
      std::vector<std::array<int, 2>> pairs;
      for (int i = 0; i < V; ++i)
        for (int j = i; j < V; ++j) pairs.push_back({i, j});

      std::vector<int> counts(pairs.size(), 0);
      std::function<void(size_t, int)> edge_rec = [&](size_t at, int left) {
        if (at == pairs.size()) {
          if (left != 0) return;
          std::vector<std::array<int, 2>> edge_list;
          for (size_t s = 0; s < pairs.size(); ++s)
            for (int c = 0; c < counts[s]; ++c) edge_list.push_back(pairs[s]);
          // connectivity over vertices
          std::vector<int> root(static_cast<size_t>(V));
          std::iota(root.begin(), root.end(), 0);
          std::function<int(int)> find = [&](int x) {
            while (root[size_t(x)] != x) x = root[size_t(x)] = root[size_t(root[size_t(x)])];
            return x;
          };
          for (const auto& ed : edge_list) root[size_t(find(ed[0]))] = find(ed[1]);
          for (int v = 0; v < V; ++v)
            if (find(v) != find(0)) return;

          std::vector<int> edge_val(size_t(V), 0);
          for (const auto& ed : edge_list) {
            edge_val[size_t(ed[0])] += 1;
            edge_val[size_t(ed[1])] += 1;
          }

          // ordered leaf attachments
          std::vector<int> leaf_at(size_t(N), 0);
          while (true) {
            std::vector<int> val0 = edge_val;
            for (int j = 0; j < N; ++j) val0[size_t(leaf_at[size_t(j)])] += 1;

            // genus distributions with stability
            std::vector<int> gv(size_t(V), 0);
            std::function<void(int, int)> genus_rec = [&](int v, int left_g) {
              if (v == V) {
                if (left_g != 0) return;
                for (int t = 0; t < V; ++t)
                  if (2 * gv[size_t(t)] - 2 + val0[size_t(t)] <= 0) return;

                // decorations per vertex
                CoreSlots cs;
                cs.edge_slots.assign(size_t(V), {});
                cs.leaf_slots.assign(size_t(V), {});
                for (int eidx = 0; eidx < int(edge_list.size()); ++eidx) {
                  cs.edge_slots[size_t(edge_list[size_t(eidx)][0])].push_back({eidx, 0});
                  cs.edge_slots[size_t(edge_list[size_t(eidx)][1])].push_back({eidx, 1});
                }
                for (int j = 0; j < N; ++j)
                  cs.leaf_slots[size_t(leaf_at[size_t(j)])].push_back(j);

                std::vector<std::vector<VertexDec>> decs(static_cast<size_t>(V));
                for (int v2 = 0; v2 < V; ++v2) {
                  int budget0 = 3 * gv[size_t(v2)] - 3 + val0[size_t(v2)];
                  int nslots = int(cs.edge_slots[size_t(v2)].size() +
                                   cs.leaf_slots[size_t(v2)].size());
                  for (int D = 0; D <= budget0; ++D) {
                    int rem = budget0 - D;
                    std::vector<int> hcur;
                    std::function<void(int, int)> slot_rec = [&](int slot, int left) {
                      if (slot == nslots) {
                        std::vector<int> scopy = hcur;
                        std::vector<int> dcur;
                        sorted_parts(left, D, 0, dcur,
                                     [&](const std::vector<int>& parts) {
                                       VertexDec vd;
                                       vd.slot_heights = scopy;
                                       for (int x : parts) vd.dil.push_back(2 + x);
                                       decs[size_t(v2)].push_back(vd);
                                     });
                        return;
                      }
                      for (int x = 0; x <= left; ++x) {
                        hcur.push_back(x);
                        slot_rec(slot + 1, left - x);
                        hcur.pop_back();
                      }
                    };
                    slot_rec(0, rem);
                  }
                }

                // markings then the per-vertex decoration product
                std::vector<int> beta(size_t(V), 0);
                while (true) {
                  std::vector<size_t> pick(size_t(V), 0);
                  while (true) {
                    LabeledGraph gr;
                    gr.vertices.resize(size_t(V));
                    for (int t = 0; t < V; ++t)
                      gr.vertices[size_t(t)] = {gv[size_t(t)], beta[size_t(t)]};
                    gr.edges.resize(edge_list.size());
                    for (size_t eidx = 0; eidx < edge_list.size(); ++eidx)
                      gr.edges[eidx] = {edge_list[eidx][0], edge_list[eidx][1], 0, 0};
                    gr.leaves.assign(size_t(N), {0, 0});
                    for (int j = 0; j < N; ++j)
                      gr.leaves[size_t(j)].first = leaf_at[size_t(j)];
                    for (int t = 0; t < V; ++t) {
                      const VertexDec& vd = decs[size_t(t)][pick[size_t(t)]];
                      size_t si = 0;
                      for (const auto& [eidx, end] : cs.edge_slots[size_t(t)]) {
                        int h = vd.slot_heights[si++];
                        if (end == 0)
                          gr.edges[size_t(eidx)].k1 = h;
                        else
                          gr.edges[size_t(eidx)].k2 = h;
                      }
                      for (int j : cs.leaf_slots[size_t(t)])
                        gr.leaves[size_t(j)].second = vd.slot_heights[si++];
                      for (int h : vd.dil) gr.dilatons.push_back({t, h});
                    }
                    std::sort(gr.dilatons.begin(), gr.dilatons.end());

                    std::vector<int> perm(static_cast<size_t>(V));
                    std::iota(perm.begin(), perm.end(), 0);
                    Enc canon = encode(gr, perm, true);
                    while (std::next_permutation(perm.begin(), perm.end())) {
                      Enc cand = encode(gr, perm, true);
                      if (cand < canon) canon = cand;
                    }
                    if (classes.find(canon) == classes.end()) {
                      gr.aut = automorphism_count(gr);
                      classes.emplace(std::move(canon), std::move(gr));
                    }

                    size_t pv = 0;
                    while (pv < size_t(V) && ++pick[pv] == decs[pv].size()) {
                      pick[pv] = 0;
                      ++pv;
                    }
                    if (pv == size_t(V)) break;
                  }
                  int bv = 0;
                  while (bv < V && ++beta[size_t(bv)] == r) {
                    beta[size_t(bv)] = 0;
                    ++bv;
                  }
                  if (bv == V) break;
                }
              } else {
                for (int x = 0; x <= left_g; ++x) {
                  gv[size_t(v)] = x;
                  genus_rec(v + 1, left_g - x);
                }
                gv[size_t(v)] = 0;
              }
            };
            genus_rec(0, gsum);

            int lj = 0;
            while (lj < N && ++leaf_at[size_t(lj)] == V) {
              leaf_at[size_t(lj)] = 0;
              ++lj;
            }
            if (lj == N || N == 0) break;
          }
          return;
        }
        for (int c = 0; c <= left; ++c) {
          counts[at] = c;
          edge_rec(at + 1, left - c);
        }
        counts[at] = 0;
      };
      edge_rec(0, E);
    }
  }

  std::vector<LabeledGraph> out;
  out.reserve(classes.size());
  for (auto& [enc, gr] : classes) out.push_back(std::move(gr));
  if (ordered_leaves) return out;

  // Group by the leaf-order-forgetting normal form; |Aut| then counts the
  // compatible (vertex permutation, leaf permutation) pairs.
  std::map<Enc, LabeledGraph> grouped;
  for (const auto& gr : out) {
    int V = int(gr.vertices.size());
    std::vector<int> perm(static_cast<size_t>(V));
    std::iota(perm.begin(), perm.end(), 0);
    Enc canon = encode(gr, perm, false);
    while (std::next_permutation(perm.begin(), perm.end())) {
      Enc cand = encode(gr, perm, false);
      if (cand < canon) canon = cand;
    }
    if (grouped.find(canon) != grouped.end()) continue;
    LabeledGraph rep = gr;
    std::iota(perm.begin(), perm.end(), 0);
    Enc id_noleaf = encode(rep, perm, false);
    Enc id_novert = encode(rep, perm, true);
    long pairs = 0;
    do {
      if (encode(rep, perm, false) != id_noleaf) continue;
      // leaf bijections compatible with this vertex permutation
      std::map<std::pair<int, int>, long> want, have;
      for (const auto& l : rep.leaves) {
        want[{perm[size_t(l.first)], l.second}] += 1;
        have[l] += 1;
      }
      if (want != have) continue;
      long ways = 1;
      for (const auto& [key, cnt] : want)
        for (long t = 2; t <= cnt; ++t) ways *= t;
      pairs += ways;
    } while (std::next_permutation(perm.begin(), perm.end()));
    long kernel = rep.aut / [&] {
      std::vector<int> idp(static_cast<size_t>(V));
      std::iota(idp.begin(), idp.end(), 0);
      long stab = 0;
      do {
        if (encode(rep, idp, true) == id_novert) ++stab;
      } while (std::next_permutation(idp.begin(), idp.end()));
      return stab;
    }();
    rep.aut = kernel * pairs;
    grouped.emplace(std::move(canon), std::move(rep));
  }
  std::vector<LabeledGraph> res;
  res.reserve(grouped.size());
  for (auto& [enc, gr] : grouped) res.push_back(std::move(gr));
  return res;
}

Cplx amodel_edge(const AModelData& ad, int a, int b, int k, int l) {
  if (k + l + 1 > ad.R.order)
    throw ChartTooLarge("amodel_edge: expansion order of R too small");
  auto num = [&](int s, int t) -> Cplx {
    Cplx acc(0.0);
    if (s <= ad.R.order && t <= ad.R.order) {
      for (int c = 0; c < ad.R.r; ++c) acc += ad.R.at(s, c, a) * ad.R.at(t, c, b);
      if ((s + t) % 2 != 0) acc = -acc;
    }
    Cplx val = -acc;
    if (s == 0 && t == 0 && a == b) val += 1.0;
    return val;
  };
  Cplx e(0.0);
  for (int j = 0; j <= l; ++j) {
    Cplx term = num(k + 1 + j, l - j);
    e += (j % 2 == 0) ? term : -term;
  }
  return e;
}

namespace {

// [z^s] R_b^a(z), zero outside the stored range
Cplx r_coeff(const MatSeries& R, int s, int b, int a) {
  if (s < 0 || s > R.order) return Cplx(0.0);
  return R.at(s, b, a);
}

// [z^s] R_b^a(-z)
Cplx r_negz(const MatSeries& R, int s, int b, int a) {
  Cplx v = r_coeff(R, s, b, a);
  return (s % 2 == 0) ? v : -v;
}

Cplx vertex_factor_a(const LabeledGraph& gr, const AModelData& ad, int v) {
  const auto& vx = gr.vertices[size_t(v)];
  int val = gr.valence(v);
  std::vector<int> ks;
  for (const auto& e : gr.edges) {
    if (e.v1 == v) ks.push_back(e.k1);
    if (e.v2 == v) ks.push_back(e.k2);
  }
  for (const auto& l : gr.leaves)
    if (l.first == v) ks.push_back(l.second);
  for (const auto& d : gr.dilatons)
    if (d.first == v) ks.push_back(d.second);
  Cplx sq = ad.sqrt_delta[size_t(vx.beta)];
  return pow_int(sq, 2 * vx.g - 2 + val) * intersection_number_d(vx.g, ks);
}

Cplx dilaton_factor_a(const AModelData& ad, int beta, int k) {
  Cplx acc(0.0);
  for (int al = 0; al < ad.R.r; ++al)
    acc += r_negz(ad.R, k - 1, al, beta) / ad.sqrt_delta[size_t(al)];
  return -acc;
}

bool dimensions_ok(const LabeledGraph& gr) {
  for (int v = 0; v < int(gr.vertices.size()); ++v) {
    if (2 * gr.vertices[size_t(v)].g - 2 + gr.valence(v) <= 0) return false;
    if (gr.vertex_height_sum(v) !=
        3 * gr.vertices[size_t(v)].g - 3 + gr.valence(v))
      return false;
  }
  return true;
}

Cplx scalar_part_a(const LabeledGraph& gr, const AModelData& ad) {
  Cplx w(1.0);
  for (int v = 0; v < int(gr.vertices.size()); ++v) w *= vertex_factor_a(gr, ad, v);
  for (const auto& e : gr.edges)
    w *= amodel_edge(ad, gr.vertices[size_t(e.v1)].beta,
                     gr.vertices[size_t(e.v2)].beta, e.k1, e.k2);
  for (const auto& d : gr.dilatons)
    w *= dilaton_factor_a(ad, gr.vertices[size_t(d.first)].beta, d.second);
  return w;
}

}  // namespace

Cplx amodel_weight(const LabeledGraph& gr, const AModelData& ad,
                   const std::vector<std::vector<std::vector<Cplx>>>& leaf_in,
                   LeafMode mode, const MatSeries* s_op) {
  if (!dimensions_ok(gr)) return Cplx(0.0);
  if (int(leaf_in.size()) != int(gr.leaves.size()))
    throw ConfigError("amodel_weight: one input per ordinary leaf");
  Cplx w = scalar_part_a(gr, ad);
  for (size_t j = 0; j < gr.leaves.size(); ++j) {
    auto [v, k] = gr.leaves[j];
    int beta = gr.vertices[size_t(v)].beta;
    std::vector<std::vector<Cplx>> in = leaf_in[j];
    if (mode == LeafMode::descendent && s_op != nullptr) {
      // multiply by the operator series in 1/z: out_i = sum_t S_t in_{i+t}
      std::vector<std::vector<Cplx>> out(in.size(),
                                         std::vector<Cplx>(size_t(ad.R.r)));
      for (size_t i = 0; i < in.size(); ++i)
        for (int t = 0; t <= s_op->order; ++t) {
          if (i + size_t(t) >= in.size()) break;
          for (int c = 0; c < ad.R.r; ++c)
            for (int b = 0; b < ad.R.r; ++b)
              out[i][size_t(c)] += s_op->at(t, b, c) * in[i + size_t(t)][size_t(b)];
        }
      in = std::move(out);
    }
    Cplx leaf(0.0);
    for (int i = 0; i <= k && i < int(in.size()); ++i)
      for (int b = 0; b < ad.R.r; ++b)
        leaf += in[size_t(i)][size_t(b)] * r_negz(ad.R, k - i, b, beta);
    w *= leaf;
  }
  return w;
}

FormExpansion amodel_symbolic(const LabeledGraph& gr, const AModelData& ad) {
  FormExpansion out;
  if (!dimensions_ok(gr)) return out;
  Cplx scal = scalar_part_a(gr, ad);
  std::vector<std::vector<std::pair<std::pair<int, int>, Cplx>>> leaf_terms;
  for (const auto& [v, k] : gr.leaves) {
    int beta = gr.vertices[size_t(v)].beta;
    std::vector<std::pair<std::pair<int, int>, Cplx>> terms;
    for (int i = 0; i <= k; ++i)
      for (int b = 0; b < ad.R.r; ++b) {
        Cplx c = r_negz(ad.R, k - i, b, beta);
        if (std::abs(c) > 0.0) terms.push_back({{b, i}, c});
      }
    leaf_terms.push_back(std::move(terms));
  }
  FormKey key(gr.leaves.size());
  std::function<void(size_t, Cplx)> rec = [&](size_t j, Cplx acc) {
    if (j == leaf_terms.size()) {
      out[key] += acc;
      return;
    }
    for (const auto& [bk, c] : leaf_terms[j]) {
      key[j] = bk;
      rec(j + 1, acc * c);
    }
  };
  rec(0, scal);
  return out;
}

FormExpansion bmodel_weight(const LabeledGraph& gr, const SpectralData& sd) {
  FormExpansion out;
  if (!dimensions_ok(gr)) return out;
  int N = int(gr.leaves.size());
  Cplx w = pow_int(Cplx(-1.0), gr.genus() - 1 + N);
  for (int v = 0; v < int(gr.vertices.size()); ++v) {
    const auto& vx = gr.vertices[size_t(v)];
    Cplx h1 = sd.charts[size_t(vx.beta)].h1;
    std::vector<int> ks;
    for (const auto& e : gr.edges) {
      if (e.v1 == v) ks.push_back(e.k1);
      if (e.v2 == v) ks.push_back(e.k2);
    }
    for (const auto& l : gr.leaves)
      if (l.first == v) ks.push_back(l.second);
    for (const auto& d : gr.dilatons)
      if (d.first == v) ks.push_back(d.second);
    w *= pow_int(h1 / std::sqrt(2.0), 2 - 2 * vx.g - int(ks.size())) *
         intersection_number_d(vx.g, ks);
  }
  for (const auto& e : gr.edges) {
    Cplx cb = cb_hat(sd, gr.vertices[size_t(e.v1)].beta,
                     gr.vertices[size_t(e.v2)].beta, e.k1, e.k2);
    // the moment grid stores the chart expansion with (-1)^k per form index
    w *= ((e.k1 + e.k2) % 2 == 0) ? -cb : cb;
  }
  for (const auto& [v, k] : gr.dilatons) {
    const Chart& ch = sd.charts[size_t(gr.vertices[size_t(v)].beta)];
    if (2 * k - 2 >= int(ch.hk.size()))
      throw ChartTooLarge("bmodel_weight: chart order below a dilaton height");
    Cplx hcheck = dfact_odd(k) / std::pow(2.0, k - 1) * ch.hk[size_t(2 * k - 2)];
    w *= dilaton_constant(k) * hcheck;
  }
  FormKey key;
  for (const auto& [v, k] : gr.leaves)
    key.push_back({gr.vertices[size_t(v)].beta, k});
  out[key] = w * pow_int(kInvSqrtM2, N);
  return out;
}

FormExpansion bmodel_graph_sum(SpectralData& sd, int g, int N) {
  FormExpansion total;
  for (const auto& gr : enumerate_graphs(g, N, sd.r())) {
    FormExpansion w = bmodel_weight(gr, sd);
    for (const auto& [key, c] : w) total[key] += c / double(gr.aut);
  }
  return total;
}

namespace {

FormExpansion symmetrize(const FormExpansion& in, int N) {
  std::vector<int> perm(static_cast<size_t>(N));
  std::iota(perm.begin(), perm.end(), 0);
  long nfact = 1;
  for (int j = 2; j <= N; ++j) nfact *= j;
  FormExpansion out;
  do {
    for (const auto& [key, c] : in) {
      FormKey k2(static_cast<size_t>(N));
      for (int t = 0; t < N; ++t) k2[size_t(t)] = key[size_t(perm[size_t(t)])];
      out[k2] += c / double(nfact);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

double expansion_diff(const FormExpansion& a, const FormExpansion& b) {
  double worst = 0.0;
  for (const auto& [key, c] : a) {
    auto it = b.find(key);
    worst = std::max(worst, std::abs(c - (it == b.end() ? Cplx(0.0) : it->second)));
  }
  for (const auto& [key, c] : b)
    if (a.find(key) == a.end()) worst = std::max(worst, std::abs(c));
  return worst;
}

}  // namespace

double theorem31_residual(SpectralData& sd, int g, int N) {
  FormExpansion gs = symmetrize(bmodel_graph_sum(sd, g, N), N);
  FormExpansion eo = symmetrize(eo_invariant(sd, g, N), N);
  return expansion_diff(gs, eo);
}

double theorem41_residual(SpectralData& sd, const MatSeries& rmat, int g,
                          int N) {
  // B side, re-expressed over the W symbols through the triangular relation
  // dxi_k = W_k - sum_{i<k} cb_hat_{k-1-i,0} W_i.
  FormExpansion bsum = bmodel_graph_sum(sd, g, N);
  FormExpansion bw;
  for (const auto& [key, c] : bsum) {
    std::vector<std::vector<std::pair<std::pair<int, int>, Cplx>>> slot_terms;
    for (const auto& [al, k] : key) {
      std::vector<std::pair<std::pair<int, int>, Cplx>> terms;
      terms.push_back({{al, k}, Cplx(1.0)});
      for (int i = 0; i < k; ++i)
        for (int b = 0; b < sd.r(); ++b) {
          Cplx cb = cb_hat(sd, al, b, k - 1 - i, 0);
          terms.push_back({{b, i}, ((k - i) % 2 == 0) ? -cb : cb});
        }
      slot_terms.push_back(std::move(terms));
    }
    FormKey k2(key.size());
    std::function<void(size_t, Cplx)> rec = [&](size_t j, Cplx acc) {
      if (j == slot_terms.size()) {
        bw[k2] += acc;
        return;
      }
      for (const auto& [bk, f] : slot_terms[j]) {
        k2[j] = bk;
        rec(j + 1, acc * f);
      }
    };
    rec(0, c);
  }

  AModelData ad;
  ad.R = rmat;
  ad.sqrt_delta = sqrt_delta_coherent(sd.cd);
  FormExpansion asum;
  for (const auto& gr : enumerate_graphs(g, N, sd.r())) {
    FormExpansion w = amodel_symbolic(gr, ad);
    for (const auto& [key, c] : w) asum[key] += c / double(gr.aut);
  }
  // identification sqrt(-2) u = W and the overall sign
  Cplx pref = pow_int(Cplx(-1.0), g - 1 + N) * pow_int(kInvSqrtM2, N);
  for (auto& [key, c] : asum) c *= pref;
  return expansion_diff(bw, asum);
}

}  // namespace wpm
