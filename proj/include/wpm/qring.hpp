#pragma once

// Quantum ring of the target geometry.  The multiplication-by-X matrix on
// the monomial basis X^0..X^{m+n-1} is the companion matrix of the critical
// polynomial; the flat structure-constant matrices are its powers.  The
// cohomology-valued hypergeometric series I(q, z) is assembled from the
// charge data of the (m+n)-coordinate quotient presentation, with
// twisted-sector units resolved through the fractional parts of the two
// full-divisor pairings.  Difference operators built from the same charges
// annihilate the series; the mirror map reads off its 1/z coefficient.

#include <vector>

#include "wpm/model.hpp"
#include "wpm/series.hpp"

namespace wpm {

// mx[i][j] = [X^i] (X * X^j) after reduction; ca[a] = mx^a for a = 0..dim-1.
struct RingPresentation {
  int dim = 0;
  std::vector<std::vector<Cplx>> mx;
  std::vector<std::vector<std::vector<Cplx>>> ca;
};

// Companion presentation of the quantum ring at the parameters of w.
// The origin (all deformations and weights zero) is allowed; the matrix is
// then nilpotent.
RingPresentation structure_constants(const ModelParams& params);

// Charge data: coordinates a = -(n-1)..m-1 (stored ascending), divisors
// labeled -m..-1, 1..n.  Rows of charge are the divisor vectors; supports
// lists the index sets whose strictly positive spans contain the all-ones
// stability vector, and core is their common intersection.
struct ToricData {
  int m = 0, n = 0;
  std::vector<int> labels;                // size m+n
  std::vector<std::vector<long>> charge;  // (m+n) x (m+n-1)
  std::vector<std::vector<int>> supports; // sorted index sets, sorted
  std::vector<int> core;
  int coord_index(int a) const { return a + n - 1; }
};

ToricData toric_data(int m, int n);

// Values of the series live in the small orbifold cohomology with basis
// index 0 = unit, 1..m = X^j, m+j = Xbar^j (j = 1..n-1); dimension m+n.
// Each stored coefficient carries a power of z and a power of log q_0.
struct CohCoeff {
  int zpow = 0;
  int lpow = 0;
  std::vector<Rational> v;
};

struct ITerm {
  std::vector<Rational> d;  // exponent of q, ascending coordinate order
  std::vector<CohCoeff> c;
};

// All exponents with max-norm at most order whose integrality pattern lands
// in one of the stable supports, with exact rational coefficients.
struct IFunctionSeries {
  int m = 0, n = 0;
  int order = 0;
  std::vector<ITerm> terms;
};

IFunctionSeries i_function(const ModelParams& params, int order);

// Max |coefficient| of (q^d P1 - P2) applied to the series, measured over
// exponents complete in both truncated products; exact zero for the
// unperturbed series.  d is integral, ascending coordinate order.
double annihilator_residual(const IFunctionSeries& series,
                            const std::vector<long>& d);
double picard_fuchs_check(const ModelParams& params, const std::vector<long>& d,
                          int order);

// Coefficient of 1/z in (I - 1): the mirror map.  The single lpow = 1 term
// is the degree-2 generator times log q_0.
struct MirrorTerm {
  std::vector<Rational> d;
  int lpow = 0;
  std::vector<Rational> v;
};

std::vector<MirrorTerm> mirror_map(const ModelParams& params, int order);

}  // namespace wpm
