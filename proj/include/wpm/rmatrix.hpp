#pragma once

// R-matrix machinery on both sides of the correspondence: the stationary
// phase expansion of thimble period integrals at the critical points, the
// Gamma-function block matrices at large radius, and the flatness equation
// that pins the expansion up to its diagonal ambiguity.

#include <vector>

#include "wpm/model.hpp"

namespace wpm {

// Matrix-valued polynomial in z, dense storage coeff[k][i*r+j].
struct MatSeries {
  int r = 0;
  int order = -1;
  std::vector<std::vector<Cplx>> coeff;

  MatSeries() = default;
  MatSeries(int r_, int order_)
      : r(r_), order(order_),
        coeff(size_t(order_ + 1), std::vector<Cplx>(size_t(r_) * size_t(r_))) {}

  static MatSeries identity(int r, int order);

  Cplx& at(int k, int i, int j) { return coeff[size_t(k)][size_t(i) * size_t(r) + size_t(j)]; }
  const Cplx& at(int k, int i, int j) const {
    return coeff[size_t(k)][size_t(i) * size_t(r) + size_t(j)];
  }

  MatSeries mul(const MatSeries& o) const;  // truncated to the smaller order
  MatSeries transpose_negz() const;         // M(z) -> M(-z)^T
  double max_abs(int k) const;
};

// Entrywise max |a - b| over orders 0..min(order).
double max_diff(const MatSeries& a, const MatSeries& b);

// Stationary phase expansion of the period pairings: entry (alpha, beta)
// collects the Gaussian moments of -2 zeta / (c_alpha (Y_beta(zeta) - p_alpha))
// with c_alpha = sqrt(2)/(h1_alpha p_alpha).  The raw diagonal starts at
// -2 pi i; the normalized matrix starts at the identity.
MatSeries laplace_raw(const std::vector<Chart>& charts, int order);
MatSeries laplace_normalized(const std::vector<Chart>& charts, int order);

// max |[R(z) R(-z)^T]_k - delta_{k0} id| over k = 0..order.
double unitarity_residual(const MatSeries& rmat);

Rational bernoulli_number(int n);
Rational bernoulli_poly(int n, const Rational& x);

// Gamma-block at large radius: entry (i, j) of
// (1/m) sum_t omega^{t(j-i)} exp( sum_s (-1)^{s+1} B_{s+1}(t/m)/(s(s+1)) (m z / p)^s ),
// omega = exp(2 pi i / m).
MatSeries gamma_block(int m, double p, int order);

// Large-radius comparison for one block: the normalized stationary phase
// matrix of Y^m + p log Y with roots labeled r0 exp(2 pi i beta / m) against
// the Gamma block.  Returns the max residual over orders 1..order.
double gamma_block_residual(int m, double p, int order, int K = 26);

// Multiplication-by-X matrix on the flat basis, from the monic critical
// polynomial; power < 0 uses the inverse (the origin is never critical).
std::vector<std::vector<Cplx>> companion_power(const Superpotential& w, int power);

struct QdeResult {
  double residual = 0.0;       // max |entry| over z-orders 0..zmax at step eps
  double residual_half = 0.0;  // same at eps/2
  double ratio = 0.0;          // residual / residual_half
  double z0_identity = 0.0;    // |Psi dU - C Psi|, step independent
};

// Central-difference flatness residual of Psi R e^{U/z} along the direction
// q_{dir} (dir > 0) or q_{-|dir|} (dir < 0), weights must vanish.  The
// differential equation is taken in the monomial row frame, whose exact
// z-linear frame corrections are computed alongside the multiplication
// matrix.  identity_control replaces R by the identity and must break
// flatness.
QdeResult qde_check(const ModelParams& base, int direction, double eps = 1e-3, int zmax = 3,
                    int K = 26, int order = 5, bool identity_control = false);

// Off-diagonal reconstruction through the flatness equation,
// (R_k)_{ab} (du_b - du_a) = (Psi^{-1} (frame terms - d(Psi R)_{k-1}))_{ab},
// with diagonals copied from the stationary phase expansion.
MatSeries flat_reference(const ModelParams& base, int direction, double eps = 1e-3, int K = 26,
                         int order = 4);

// Solve ref = cand * A and insist A is diagonal with odd-only log;
// anything else is an AmbiguityShapeError.
MatSeries ambiguity_normalize(const MatSeries& cand, const MatSeries& ref, double tol = 1e-6);

}  // namespace wpm
