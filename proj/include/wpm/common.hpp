#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpm {

using Real = double;
using Cplx = std::complex<double>;

inline constexpr Real kDefaultRelTol = 1e-9;

// Error taxonomy. Each failure mode gets its own type so callers can react
// (or tests can assert) on the precise condition.
#define WPM_ERROR(Name)                                    \
  struct Name : std::runtime_error {                       \
    explicit Name(const std::string& m = #Name)            \
        : std::runtime_error(std::string(#Name ": ") + m) {} \
  }

WPM_ERROR(DegenerateSeries);
WPM_ERROR(NotInvertible);
WPM_ERROR(BranchPoint);
WPM_ERROR(NotDivisible);
WPM_ERROR(PoleAtOrigin);
WPM_ERROR(DegenerateCritical);
WPM_ERROR(NumericFailure);
WPM_ERROR(Unstable);
WPM_ERROR(ChartTooLarge);
WPM_ERROR(DecompositionFailure);
WPM_ERROR(NonconvergentNormalization);
WPM_ERROR(UndefinedLimit);
WPM_ERROR(StepFailure);
WPM_ERROR(AmbiguityShapeError);
WPM_ERROR(StokesEvent);
WPM_ERROR(TailError);
WPM_ERROR(MatchFailure);
WPM_ERROR(ConfigError);

#undef WPM_ERROR

// (2k-1)!! with the convention (-1)!! = 1.
inline double dfactorial_odd(int k) {
  double r = 1.0;
  for (int j = 2 * k - 1; j >= 3; j -= 2) r *= j;
  return r;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int j = 2; j <= n; ++j) r *= j;
  return r;
}

inline Cplx ipow(int e) {  // (sqrt(-1))^e for any integer e
  switch (((e % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline long long gcd_ll(long long a, long long b) {
  while (b) { long long t = a % b; a = b; b = t; }
  return a < 0 ? -a : a;
}

}  // namespace wpm
