#pragma once

// Spectral-curve side: the curve x = W(Y) on the Y-cylinder carries the
// global kernel B = dY1 dY2 / (Y1 - Y2)^2.  This module expands B in the
// quadratic charts at the critical points, extracts moment coefficients,
// and runs the residue recursion for the higher invariants, decomposing
// each one over products of the auxiliary forms dxi_k at the poles.

#include <map>
#include <utility>
#include <vector>

#include "wpm/model.hpp"

namespace wpm {

// One slot of a decomposed N-form: (pole index alpha, form index k).
using FormKey = std::vector<std::pair<int, int>>;
using FormExpansion = std::map<FormKey, Cplx>;

Cplx kappa_factor(int k);  // (2k-1)!! 2^{-k} i^{-2k-1}

int height_cap(int g, int n);  // 3g - 3 + n, the per-slot index bound

struct SpectralData {
  Superpotential w;
  CriticalData cd;
  int K = 0;                              // chart order
  std::vector<Chart> charts;
  std::vector<std::vector<Series2C>> reg;  // reg[a][b]: regular part of B, charts (a,b)
  std::vector<SeriesC> dinv;               // 1 / D_gamma, D = 8 sum_{odd k} h_k zeta^{k+1}
  std::map<std::pair<int, int>, FormExpansion> memo;
  double odd_moment_residual = 0.0;        // largest dropped odd-moment coefficient
  double coeff_scale = 0.0;                // largest kept coefficient magnitude

  int r() const { return cd.size(); }
};

SpectralData spectral_data(const Superpotential& w, int K = 26);

// Moment-moment coefficient grid entry of the regular part, indices are
// powers of the two chart variables.
Cplx bergman_moment(const SpectralData& sd, int a, int b, int i, int j);

// Edge weight: (2k-1)!! (2l-1)!! 2^{-(k+l+1)} * bergman_moment(a, b, 2k, 2l).
Cplx cb_hat(const SpectralData& sd, int a, int b, int k, int l);

// Chart-gamma expansion of the one-form H_i^alpha (coefficient series of
// dzeta): delta_{alpha gamma} (i+1) zeta^{-i-2} + sum_l reg[gamma][alpha](l, i) zeta^l.
SeriesC moment_series(const SpectralData& sd, int gamma, int alpha, int i);

// The invariant omega_{g,N} decomposed over products of dxi_{k}^{alpha}.
// Slots are kept in recursion order; symmetry is a property, not an input.
// Throws Unstable for 2g-2+N <= 0 and DecompositionFailure when the chart
// order cannot support a required residue.
const FormExpansion& eo_invariant(SpectralData& sd, int g, int N);

}  // namespace wpm
