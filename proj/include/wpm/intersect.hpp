#pragma once

// psi-class intersection numbers <tau_{k_1} ... tau_{k_n}>_g, exact rationals,
// computed by the KdV/Virasoro recursion on the largest insertion with
// memoization.  Unstable (2g - 2 + n <= 0) queries throw; inside the
// recursion unstable and dimension-violating terms count as zero.

#include <vector>

#include "wpm/series.hpp"

namespace wpm {

Rational intersection_number(int g, std::vector<int> ks);

double intersection_number_d(int g, const std::vector<int>& ks);

}  // namespace wpm
