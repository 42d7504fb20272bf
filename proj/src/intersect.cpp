#include "wpm/intersect.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

namespace wpm {

namespace {

Rational dfo(int k) {  // (2k-1)!!, (-1)!! = 1
  Rational r = 1;
  for (int j = 2 * k - 1; j >= 3; j -= 2) r *= j;
  return r;
}

using Key = std::pair<int, std::vector<int>>;

std::map<Key, Rational>& memo() {
  static std::map<Key, Rational> m;
  return m;
}
std::mutex memo_mutex;

Rational eval(int g, std::vector<int> ks);

// <tau_a prod_I> <tau_b prod_J> summed over ordered genus splits and subsets
Rational split_sum(int a, int b, int g, const std::vector<int>& rest) {
  Rational total = 0;
  const int nr = int(rest.size());
  for (int mask = 0; mask < (1 << nr); ++mask) {
    std::vector<int> left{a}, right{b};
    for (int i = 0; i < nr; ++i) ((mask >> i) & 1 ? left : right).push_back(rest[size_t(i)]);
    for (int g1 = 0; g1 <= g; ++g1) {
      Rational vl = eval(g1, left);
      if (vl == 0) continue;
      total += vl * eval(g - g1, right);
    }
  }
  return total;
}

Rational eval(int g, std::vector<int> ks) {
  const int n = int(ks.size());
  if (g < 0) return 0;
  for (int k : ks)
    if (k < 0) return 0;
  if (2 * g - 2 + n <= 0) return 0;
  const long long dim = std::accumulate(ks.begin(), ks.end(), 0LL);
  if (dim != 3LL * g - 3 + n) return 0;

  std::sort(ks.begin(), ks.end());
  Key key{g, ks};
  {
    std::lock_guard<std::mutex> lock(memo_mutex);
    auto it = memo().find(key);
    if (it != memo().end()) return it->second;
  }

  Rational value;
  if (g == 0 && n == 3) {
    value = 1;  // <tau_0^3>_0
  } else if (g == 1 && n == 1) {
    value = Rational(1, 24);  // <tau_1>_1
  } else {
    const int k1 = ks.back();  // largest insertion; >= 1 in every remaining stable case
    std::vector<int> rest(ks.begin(), ks.end() - 1);
    Rational rhs = 0;
    for (size_t j = 0; j < rest.size(); ++j) {
      std::vector<int> merged;
      merged.reserve(rest.size());
      for (size_t i = 0; i < rest.size(); ++i)
        if (i != j) merged.push_back(rest[i]);
      merged.push_back(k1 + rest[j] - 1);
      rhs += dfo(k1 + rest[j]) / dfo(rest[j]) * eval(g, merged);
    }
    for (int a = 0; a + 2 <= k1; ++a) {
      const int b = k1 - 2 - a;
      std::vector<int> lower{a, b};
      lower.insert(lower.end(), rest.begin(), rest.end());
      Rational bracket = eval(g - 1, lower) + split_sum(a, b, g, rest);
      rhs += Rational(1, 2) * dfo(a + 1) * dfo(b + 1) * bracket;
    }
    value = rhs / dfo(k1 + 1);
  }

  std::lock_guard<std::mutex> lock(memo_mutex);
  memo().emplace(key, value);
  return value;
}

}  // namespace

Rational intersection_number(int g, std::vector<int> ks) {
  if (g < 0) throw ConfigError("genus must be nonnegative");
  for (int k : ks)
    if (k < 0) throw ConfigError("psi powers must be nonnegative");
  if (2 * g - 2 + int(ks.size()) <= 0)
    throw Unstable("2g-2+n <= 0 for g=" + std::to_string(g) + ", n=" + std::to_string(ks.size()));
  return eval(g, std::move(ks));
}

double intersection_number_d(int g, const std::vector<int>& ks) {
  return intersection_number(g, ks).convert_to<double>();
}

}  // namespace wpm
