#pragma once

// Superpotential geometry for the two-parameter family on the cylinder:
//   W(Y) = Y^m + sum_{l<m} a_l Y^l + sum_{l<=n} b_l Y^{-l} + c_log log Y + c0.
// Critical points, critical values, Hessians in the log coordinate, local
// charts in the quadratic parameter zeta with W(Y(zeta)) = u - zeta^2, and
// the residual pairing on the Jacobian ring.

#include <vector>

#include "wpm/series.hpp"

namespace wpm {

struct ModelParams {
  int m = 1, n = 1;
  std::vector<Cplx> w_pos;  // equivariant weights attached to Y^1..Y^{m-1}
  std::vector<Cplx> w_neg;  // attached to Y^{-1}..Y^{-n}
  std::vector<Cplx> q_pos;  // deformation parameters of Y^1..Y^{m-1}
  std::vector<Cplx> q_neg;  // of Y^{-1}..Y^{-n}; last entry must not vanish

  void validate() const;  // throws ConfigError
};

struct Superpotential {
  int m = 1;                // top positive power, coefficient a[m-1]
  int n = 0;                // top negative power; 0 means no negative part
  std::vector<Cplx> a;      // a[l-1] multiplies Y^l, l = 1..m
  std::vector<Cplx> b;      // b[l-1] multiplies Y^{-l}, l = 1..n
  Cplx c_log{};             // coefficient of log Y
  Cplx c0{};                // additive constant

  Cplx eval(Cplx y) const;      // principal branch of log Y
  Cplx eval_logy(Cplx ly) const;  // W as a function of the log coordinate
  Cplx dy(Cplx y) const;        // dW/dY
  Cplx f(Cplx y) const;         // Y dW/dY  (derivative in log Y)
  Cplx df_dy(Cplx y) const;     // d f / dY

  // coefficients of P(Y) = Y^n f(Y), degree m+n, index = power of Y
  std::vector<Cplx> critical_polynomial() const;
};

// Build W from model parameters:
// a_l = q_pos[l-1] (a_m = 1), b_l = q_neg[l-1],
// c_log = sum l w_pos[l-1] - sum l w_neg[l-1],
// c0 = sum w_pos[l-1] log q_pos[l-1] + sum w_neg[l-1] log q_neg[l-1]
// (terms with weight zero are dropped; weight on a vanishing parameter
// is a ConfigError).
Superpotential superpotential(const ModelParams& p);

struct CriticalData {
  std::vector<Cplx> roots;  // sorted by argument, then modulus
  std::vector<Cplx> u;      // critical values
  std::vector<Cplx> delta;  // Hessian in log coordinate: p f'(p)
  std::vector<Cplx> h1;     // principal sqrt(-2 / delta)
  int size() const { return int(roots.size()); }
};

// Companion-matrix roots of the critical polynomial plus one Newton step.
// Root separation below sep_tol * max|root| (or a root at the puncture)
// throws DegenerateCritical.
CriticalData critical_points(const Superpotential& w, double sep_tol = 1e-8);

struct Chart {
  int alpha = 0;
  Cplx p, u, delta;
  Cplx h1;                    // -s_1; sign fixed by h1_ref (default: principal)
  std::vector<Cplx> hk;       // h_k = -s_k, k = 1..K (index k-1)
  SeriesC zeta_of_s;          // window [1, K]
  SeriesC s_of_zeta;          // window [1, K]
  SeriesC y_of_zeta;          // window [0, K]
};

// Local chart at root alpha to order K: zeta(s)^2 = u - W(p e^s), branch
// chosen so that -1/[s^1]zeta is closest to h1_ref (default: the principal
// sqrt(-2/delta)).
Chart chart(const Superpotential& w, const CriticalData& cd, int alpha, int K,
            Cplx h1_ref = Cplx(0.0, 0.0));

// Residual pairing (f, g) = sum_alpha f(p_a) g(p_a) / delta_a for functions
// given by their values at the critical points.
Cplx pairing(const CriticalData& cd, const std::vector<Cplx>& fvals,
             const std::vector<Cplx>& gvals);

// Coefficients (ascending powers of X, length = #roots) of the Lagrange
// interpolation basis element phi_alpha.
std::vector<Cplx> lagrange_basis(const std::vector<Cplx>& roots, int alpha);

// Psi(i, alpha) = [X^i] ( sqrt_delta[alpha] * phi_alpha ), row-major i-first.
std::vector<std::vector<Cplx>> psi_matrix(const std::vector<Cplx>& roots,
                                          const std::vector<Cplx>& sqrt_delta);

// Principal square roots of delta, and the branch-coherent choice
// sqrt(delta) = sqrt(2)/h1 under which sqrt(delta/2) h1 = 1 exactly.
std::vector<Cplx> sqrt_delta_principal(const CriticalData& cd);
std::vector<Cplx> sqrt_delta_coherent(const CriticalData& cd);

}  // namespace wpm
