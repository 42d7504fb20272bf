#pragma once

// Level-path and dual-contour integrals for the superpotential.  A thimble
// is the path W = u^beta + [0, length] through saddle beta, traced in the
// log coordinate; its oscillatory integrals at real negative z reproduce
// the stationary-phase expansion series entry by entry, which is what the
// asymptotic fits below measure.  The dual contour is the three-segment
// horizontal-vertical-horizontal path whose heights are fixed by a line
// bundle framing.

#include <functional>
#include <vector>

#include "wpm/model.hpp"
#include "wpm/rmatrix.hpp"

namespace wpm {

enum class ContourKind { thimble, syz, ray };

struct Contour {
  ContourKind kind = ContourKind::thimble;
  int beta = -1;             // saddle index for thimble/ray
  int ell1 = 0, ell2 = 0;    // framing for syz
  double smax = 0.0;         // traced level range; cut short at a wall
  std::vector<Cplx> points;  // log-coordinate polyline, oriented
  int winding = 0;           // round(net drift of Im y / 2 pi) over the polyline
  std::vector<int> stokes;   // saddles on the level range (reported, not fatal)
};

struct KFraming {
  int ell1 = 0;
  int ell2 = 1;  // requires ell1 + ell2 > 0
};

// Both branches from the saddle joined, oriented so the tangent runs from
// +i h1 to -i h1.  A saddle gamma with u^gamma - u^beta real positive and
// inside the range truncates the trace there and is recorded in stokes.
Contour trace_thimble(const Superpotential& w, const std::vector<Chart>& charts,
                      int beta, double length);

// Straight path through the saddle with the thimble orientation; the exact
// thimble when W has no subleading chart terms.
Contour ray_contour(const std::vector<Chart>& charts, int beta, double length);

// Corners at heights -2 pi ell1 / n and 2 pi ell2 / m; the horizontal legs
// extend to where e^{W/z} has decayed below 1e-14 of the leg peak.
Contour syz_contour(const Superpotential& w, const KFraming& fr);

enum class Integrand {
  dy,     // dy
  theta,  // theta_alpha; the double pole is removed by parts
  dxi0,   // -i sqrt(2) theta_alpha
  ydx,    // y dW
};

// Quadrature of e^{(W - u^beta)/z} (thimble/ray) or e^{W/z} (syz) against
// the chosen form; z must be real negative, theta/dxi0 need alpha.  A
// quadrature that fails to settle throws TailError; a contour that fails
// to decay also throws TailError.
Cplx integrate(const Superpotential& w, const std::vector<Chart>& charts,
               const Contour& c, double z, Integrand kind, int alpha = -1);

// Generic level-path quadrature: integral of e^{(W(y) - u)/z} g(y) dy over
// W = u + sigma^2 through y0 with tangent dy/dsigma = t0 on the outgoing
// branch.  Quadrature control seam: pick u so that W(y) - u evaluates
// without cancellation (u = 0 for a closed-form quadratic).
Cplx level_path_integral(const std::function<Cplx(Cplx)>& W,
                         const std::function<Cplx(Cplx)>& dW, Cplx y0, Cplx u,
                         Cplx t0, double z, const std::function<Cplx(Cplx)>& g);

// Normalized saddle entry -i sqrt(-z / (2 pi)) * integral of
// e^{(W - u^beta)/z} theta_alpha over the thimble; its z -> 0 expansion is
// entry (alpha, beta) of laplace_normalized on the same charts.
Cplx thimble_r_entry(const Superpotential& w, const std::vector<Chart>& charts,
                     const Contour& c, double z, int alpha);

// Least-squares slope of log|numeric - predicted| against log|z|.  zs must
// be >= 3 values ordered by decreasing |z|; errors that grow as |z| shrinks
// while above the noise floor throw MatchFailure.
double asymptotic_match(const std::vector<double>& zs,
                        const std::vector<Cplx>& numeric,
                        const std::vector<Cplx>& predicted);

struct SlopeFit {
  int alpha = 0, beta = 0;
  int order = 0;       // truncation order of the compared series
  double slope = 0.0;  // fitted error order, expected >= order + 0.7
};

// Error order of thimble_r_entry against the series truncated at each order
// 1..kmax, for every alpha and every saddle whose thimble traces clean;
// wall-hit saddles are skipped.
std::vector<SlopeFit> rmatrix_slopes(const Superpotential& w,
                                     const std::vector<Chart>& charts,
                                     const MatSeries& rmat,
                                     const std::vector<double>& zs, int kmax);

// Same fit for the S-entries -z * integral of e^{(W - u^beta)/z}
// dxi_{alpha,0} / sqrt(-2) against -i sqrt(2 pi) sqrt(-z) R_alpha^beta(z).
std::vector<SlopeFit> s_entry_slopes(const Superpotential& w,
                                     const std::vector<Chart>& charts,
                                     const MatSeries& rmat,
                                     const std::vector<double>& zs, int kmax);

// |(-z) * integral(dy) - integral(y dW)| / scale on the dual contour: the
// two sides are equal by parts, the far ends carrying no boundary term.
double syz_parts_residual(const Superpotential& w,
                          const std::vector<Chart>& charts, const KFraming& fr,
                          double z);

struct SyzDecomposition {
  std::vector<Cplx> coeff;  // one per saddle
  double residual = 0.0;    // relative least-squares misfit
};

// Fit of the dual-contour value against e^{u^beta/z} times the thimble
// values over the sample z's.  Coefficients are reported, not asserted:
// wall-truncated thimbles enter with their truncated values.
SyzDecomposition syz_decompose(const Superpotential& w,
                               const std::vector<Chart>& charts,
                               const KFraming& fr,
                               const std::vector<double>& zs);

}  // namespace wpm
