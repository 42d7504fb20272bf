#include "wpm/qring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <utility>

#include "wpm/common.hpp"

namespace wpm {

namespace {

using boost::multiprecision::cpp_int;

bool is_integer(const Rational& r) { return denominator(r) == 1; }

long ceil_long(const Rational& r) {
  cpp_int p = numerator(r), q = denominator(r);  // q > 0
  cpp_int fl = (p >= 0) ? cpp_int(p / q) : cpp_int(-((-p + q - 1) / q));
  if (fl * q != p) fl += 1;
  return fl.convert_to<long>();
}

Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

std::vector<std::vector<Cplx>> mat_mul(const std::vector<std::vector<Cplx>>& a,
                                       const std::vector<std::vector<Cplx>>& b) {
  size_t d = a.size();
  std::vector<std::vector<Cplx>> out(d, std::vector<Cplx>(d));
  for (size_t i = 0; i < d; ++i)
    for (size_t k = 0; k < d; ++k) {
      Cplx aik = a[i][k];
      if (aik == Cplx()) continue;
      for (size_t j = 0; j < d; ++j) out[i][j] += aik * b[k][j];
    }
  return out;
}

// Feasibility of eta = sum_{i in I} c_i D_i with every c_i > 0.  The e_0
// row couples only the two full divisors, n c_first + m c_last = 1, leaving
// one free parameter s = n c_first; every other row is linear in s.  The
// feasible s-set is an interval, intersected exactly.
bool carries_stability(int m, int n, const std::vector<std::vector<long>>& charge,
                       unsigned mask) {
  int nd = m + n;
  int nc = m + n - 1;
  bool has_first = (mask & 1u) != 0;
  bool has_last = (mask >> (nd - 1)) & 1u;
  if (!has_first && !has_last) return false;
  Rational lo(0), hi(1);
  bool open_lo = true, open_hi = true;
  if (!has_last) { lo = hi = 1; open_lo = open_hi = false; }
  if (!has_first) { lo = hi = 0; open_lo = open_hi = false; }
  auto require_eq = [&](const Rational& s) {
    if (s < lo || (s == lo && open_lo)) return false;
    if (s > hi || (s == hi && open_hi)) return false;
    lo = hi = s;
    open_lo = open_hi = false;
    return true;
  };
  // Coordinate rows: value of the single-divisor coefficient as alpha+beta*s;
  // positive if the divisor is in I, zero if it is not.
  for (int idx = 1; idx < nd - 1; ++idx) {
    int a = -1;
    for (int c = 0; c < nc; ++c)
      if (charge[size_t(idx)][size_t(c)] != 0) a = c;
    long w = charge[size_t(idx)][size_t(a)];
    // 1 = w*c_single + (first row)*c_first + (last row)*c_last on coordinate a
    Rational alpha = 1, beta = 0;
    long cf = charge[0][size_t(a)], cl = charge[size_t(nd - 1)][size_t(a)];
    // c_first = s/n, c_last = (1-s)/m
    alpha -= Rational(cl, m);
    beta += Rational(cl, m) - Rational(cf, n);
    bool present = (mask >> idx) & 1u;
    if (present) {
      if (beta > 0) {
        Rational bound = -alpha / beta;  // s > bound
        if (bound > lo || (bound == lo && !open_lo)) { lo = bound; open_lo = true; }
      } else if (beta < 0) {
        Rational bound = -alpha / beta;  // s < bound
        if (bound < hi || (bound == hi && !open_hi)) { hi = bound; open_hi = true; }
      } else if (alpha <= 0) {
        return false;
      }
    } else {
      if (beta == 0) {
        if (alpha != 0) return false;
      } else if (!require_eq(-alpha / beta)) {
        return false;
      }
    }
  }
  if (lo > hi) return false;
  if (lo == hi && (open_lo || open_hi)) return false;
  return true;
}

}  // namespace

RingPresentation structure_constants(const ModelParams& params) {
  // Shape checks only: the ring exists at the origin of the deformation
  // space, where the critical set degenerates and M_X is nilpotent.
  if (params.m < 1 || params.n < 1 || std::gcd(params.m, params.n) != 1)
    throw ConfigError("structure_constants: orders must be positive and coprime");
  if (int(params.q_pos.size()) != params.m - 1 ||
      int(params.q_neg.size()) != params.n)
    throw ConfigError("structure_constants: parameter block sizes");
  Superpotential w;
  w.m = params.m;
  w.n = params.n;
  w.a.assign(size_t(params.m), Cplx(0.0));
  for (int l = 1; l < params.m; ++l)
    w.a[size_t(l - 1)] = params.q_pos[size_t(l - 1)];
  w.a[size_t(params.m - 1)] = Cplx(1.0);
  w.b.assign(size_t(params.n), Cplx(0.0));
  for (int l = 1; l <= params.n; ++l)
    w.b[size_t(l - 1)] = params.q_neg[size_t(l - 1)];
  for (int l = 1; l < params.m; ++l)
    if (l - 1 < int(params.w_pos.size()) &&
        params.w_pos[size_t(l - 1)] != Cplx(0.0)) {
      if (params.q_pos[size_t(l - 1)] == Cplx(0.0))
        throw ConfigError("structure_constants: weight on vanishing parameter");
      w.c_log += double(l) * params.w_pos[size_t(l - 1)];
    }
  for (int l = 1; l <= params.n; ++l)
    if (l - 1 < int(params.w_neg.size()) &&
        params.w_neg[size_t(l - 1)] != Cplx(0.0)) {
      if (params.q_neg[size_t(l - 1)] == Cplx(0.0))
        throw ConfigError("structure_constants: weight on vanishing parameter");
      w.c_log -= double(l) * params.w_neg[size_t(l - 1)];
    }
  std::vector<Cplx> c = w.critical_polynomial();
  int d = int(c.size()) - 1;
  RingPresentation rp;
  rp.dim = d;
  rp.mx.assign(size_t(d), std::vector<Cplx>(size_t(d)));
  for (int i = 1; i < d; ++i) rp.mx[size_t(i)][size_t(i - 1)] = 1.0;
  for (int i = 0; i < d; ++i)
    rp.mx[size_t(i)][size_t(d - 1)] -= c[size_t(i)] / c[size_t(d)];
  std::vector<std::vector<Cplx>> acc(static_cast<size_t>(d),
                                     std::vector<Cplx>(static_cast<size_t>(d)));
  for (int i = 0; i < d; ++i) acc[size_t(i)][size_t(i)] = 1.0;
  rp.ca.reserve(size_t(d));
  for (int a = 0; a < d; ++a) {
    rp.ca.push_back(acc);
    if (a + 1 < d) acc = mat_mul(rp.mx, acc);
  }
  return rp;
}

ToricData toric_data(int m, int n) {
  if (m < 1 || n < 1 || std::gcd(m, n) != 1)
    throw ConfigError("toric_data: orders must be positive and coprime");
  ToricData td;
  td.m = m;
  td.n = n;
  int nc = m + n - 1;
  auto add = [&](int label, std::vector<long> row) {
    td.labels.push_back(label);
    td.charge.push_back(std::move(row));
  };
  {
    std::vector<long> row(static_cast<size_t>(nc));
    for (int j = 0; j < n; ++j) row[size_t(td.coord_index(-j))] = n - j;
    add(-m, row);
  }
  for (int l = 1; l < m; ++l) {
    std::vector<long> row(static_cast<size_t>(nc));
    row[size_t(td.coord_index(l))] = n;
    add(-m + l, row);
  }
  for (int l = n - 1; l >= 1; --l) {
    std::vector<long> row(static_cast<size_t>(nc));
    row[size_t(td.coord_index(-l))] = m;
    add(n - l, row);
  }
  {
    std::vector<long> row(static_cast<size_t>(nc));
    for (int j = 0; j < m; ++j) row[size_t(td.coord_index(j))] = m - j;
    add(n, row);
  }
  int nd = m + n;
  for (unsigned mask = 1; mask < (1u << nd); ++mask) {
    if (!carries_stability(m, n, td.charge, mask)) continue;
    std::vector<int> I;
    for (int i = 0; i < nd; ++i)
      if ((mask >> i) & 1u) I.push_back(i);
    td.supports.push_back(std::move(I));
  }
  std::sort(td.supports.begin(), td.supports.end());
  td.core = td.supports.front();
  for (const auto& s : td.supports) {
    std::vector<int> inter;
    std::set_intersection(td.core.begin(), td.core.end(), s.begin(), s.end(),
                          std::back_inserter(inter));
    td.core = std::move(inter);
  }
  return td;
}

IFunctionSeries i_function(const ModelParams& params, int order) {
  params.validate();
  if (order < 1) throw ConfigError("i_function: order must be >= 1");
  int m = params.m, n = params.n;
  ToricData td = toric_data(m, n);
  int nc = m + n - 1;
  int nd = m + n;
  int e0 = td.coord_index(0);

  std::vector<std::vector<Rational>> grid(static_cast<size_t>(nc));
  for (int a = -(n - 1); a <= m - 1; ++a) {
    auto& g = grid[size_t(td.coord_index(a))];
    if (a == 0) {
      long den = (long)m * n;
      for (long k = -order * den; k <= order * den; ++k) g.emplace_back(k, den);
    } else if (a > 0) {
      for (long k = 0; k <= (long)order * n; ++k) g.emplace_back(k, (long)n);
    } else {
      for (long k = 0; k <= (long)order * m; ++k) g.emplace_back(k, (long)m);
    }
  }

  IFunctionSeries out;
  out.m = m;
  out.n = n;
  out.order = order;

  std::vector<size_t> idx(size_t(nc), 0);
  std::vector<Rational> d(static_cast<size_t>(nc));
  while (true) {
    for (int a = 0; a < nc; ++a) d[size_t(a)] = grid[size_t(a)][idx[size_t(a)]];

    std::vector<Rational> kk(size_t(nd), Rational(0));
    for (int i = 0; i < nd; ++i)
      for (int a = 0; a < nc; ++a)
        if (td.charge[size_t(i)][size_t(a)] != 0)
          kk[size_t(i)] += Rational(td.charge[size_t(i)][size_t(a)]) * d[size_t(a)];

    std::vector<int> support;
    for (int i = 0; i < nd; ++i)
      if (kk[size_t(i)] >= 0 && is_integer(kk[size_t(i)])) support.push_back(i);

    if (std::find(td.supports.begin(), td.supports.end(), support) ==
        td.supports.end())
      goto next;

    {
      // Sector unit from the fractional parts of the two full pairings;
      // membership guarantees at most one of them is fractional.
      Rational fa = Rational(ceil_long(kk[0])) - kk[0];
      Rational fb = Rational(ceil_long(kk[size_t(nd - 1)])) - kk[size_t(nd - 1)];
      if (fa != 0 && fb != 0) throw NumericFailure("i_function: mixed sector");
      int vidx = 0;
      if (fa != 0) {
        Rational j = fa * m;
        if (!is_integer(j)) throw NumericFailure("i_function: sector grid");
        vidx = int(numerator(j).convert_to<long>());
      } else if (fb != 0) {
        Rational j = fb * n;
        if (!is_integer(j)) throw NumericFailure("i_function: sector grid");
        vidx = m + int(numerator(j).convert_to<long>());
      }

      Rational scal(1), corr(0), zero_a(0);
      int zsum = 0, zero_count = 0;
      for (int i = 0; i < nd; ++i) {
        const Rational& k = kk[size_t(i)];
        long a0 = td.charge[size_t(i)][size_t(e0)];
        long c = ceil_long(k);
        if (c > 0) {
          for (long nu = 0; nu < c; ++nu) {
            Rational beta = k - nu;
            scal /= beta;
            corr -= Rational(a0) / beta;
            zsum -= 1;
          }
        } else if (k < 0) {
          for (long nu = c; nu <= -1; ++nu) {
            Rational beta = k - nu;
            if (beta == 0) {
              zero_count += 1;
              zero_a = Rational(a0);
            } else {
              scal *= beta;
              corr += Rational(a0) / beta;
              zsum += 1;
            }
          }
        }
      }
      if (zero_count >= 2) goto next;

      ITerm term;
      term.d = d;
      auto put = [&term, nd](int z, int l, int comp, const Rational& val) {
        if (val == 0) return;
        for (auto& cc : term.c)
          if (cc.zpow == z && cc.lpow == l) {
            cc.v[size_t(comp)] += val;
            return;
          }
        CohCoeff cc;
        cc.zpow = z;
        cc.lpow = l;
        cc.v.assign(size_t(nd), Rational(0));
        cc.v[size_t(comp)] = val;
        term.c.push_back(std::move(cc));
      };
      if (zero_count == 1) {
        if (vidx != 0) throw NumericFailure("i_function: nilpotent twisted term");
        put(zsum, 0, m, zero_a * scal / n);
      } else if (vidx != 0) {
        put(zsum, 0, vidx, scal);
      } else {
        put(zsum, 0, 0, scal);
        put(zsum - 1, 0, m, scal * corr / n);
        put(zsum - 1, 1, m, scal / n);
      }
      if (!term.c.empty()) out.terms.push_back(std::move(term));
    }

  next:
    int pos = nc - 1;
    while (pos >= 0 && ++idx[size_t(pos)] == grid[size_t(pos)].size()) {
      idx[size_t(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

namespace {

using ZLKey = std::pair<int, int>;
using CohMap = std::map<ZLKey, std::vector<Rational>>;
using SerMap = std::map<std::vector<Rational>, CohMap>;

void acc_into(CohMap& dst, const CohMap& src, int sign) {
  for (const auto& [zl, v] : src) {
    auto& t = dst[zl];
    if (t.empty()) t.assign(v.size(), Rational(0));
    for (size_t i = 0; i < v.size(); ++i) t[i] += sign * v[i];
  }
}

// (D_i - nu z): each exponent is multiplied by (<D_i, e> - nu) z, and the
// log power p contributes a0 p z at one lower power of log.
SerMap apply_op(const SerMap& in, const std::vector<long>& row, int e0, long nu) {
  SerMap out;
  for (const auto& [e, coh] : in) {
    Rational pe(0);
    for (size_t a = 0; a < e.size(); ++a)
      if (row[a] != 0) pe += Rational(row[a]) * e[a];
    Rational c1 = pe - nu;
    long a0 = row[size_t(e0)];
    CohMap& dst = out[e];
    for (const auto& [zl, v] : coh) {
      if (c1 != 0) {
        auto& t = dst[{zl.first + 1, zl.second}];
        if (t.empty()) t.assign(v.size(), Rational(0));
        for (size_t i = 0; i < v.size(); ++i) t[i] += c1 * v[i];
      }
      if (a0 != 0 && zl.second >= 1) {
        auto& t = dst[{zl.first + 1, zl.second - 1}];
        if (t.empty()) t.assign(v.size(), Rational(0));
        Rational f = Rational(a0) * zl.second;
        for (size_t i = 0; i < v.size(); ++i) t[i] += f * v[i];
      }
    }
  }
  return out;
}

}  // namespace

double annihilator_residual(const IFunctionSeries& series,
                            const std::vector<long>& d) {
  int m = series.m, n = series.n;
  ToricData td = toric_data(m, n);
  int nc = m + n - 1;
  int nd = m + n;
  int e0 = td.coord_index(0);
  if (int(d.size()) != nc)
    throw ConfigError("annihilator_residual: direction has wrong size");
  long dmax = 0;
  for (long x : d) dmax = std::max(dmax, std::labs(x));
  if (dmax == 0) return 0.0;
  if (long(series.order) < dmax)
    throw ConfigError("annihilator_residual: series order below |d|");

  SerMap base;
  for (const auto& term : series.terms) {
    CohMap& coh = base[term.d];
    for (const auto& cc : term.c) {
      auto& t = coh[{cc.zpow, cc.lpow}];
      if (t.empty()) t.assign(cc.v.size(), Rational(0));
      for (size_t i = 0; i < cc.v.size(); ++i) t[i] += cc.v[i];
    }
  }

  std::vector<long> kk(size_t(nd), 0);
  for (int i = 0; i < nd; ++i)
    for (int a = 0; a < nc; ++a)
      kk[size_t(i)] += td.charge[size_t(i)][size_t(a)] * d[size_t(a)];

  SerMap t1 = base, t2 = base;
  for (int i = 0; i < nd; ++i) {
    for (long nu = 0; nu < -kk[size_t(i)]; ++nu)
      t1 = apply_op(t1, td.charge[size_t(i)], e0, nu);
    for (long nu = 0; nu < kk[size_t(i)]; ++nu)
      t2 = apply_op(t2, td.charge[size_t(i)], e0, nu);
  }

  auto within = [&](const std::vector<Rational>& e) {
    for (const auto& x : e)
      if (rat_abs(x) > series.order) return false;
    return true;
  };

  SerMap res;
  for (const auto& [e, coh] : t1) {
    std::vector<Rational> shifted(e);
    for (int a = 0; a < nc; ++a) shifted[size_t(a)] += d[size_t(a)];
    if (!within(shifted)) continue;
    acc_into(res[shifted], coh, +1);
  }
  for (const auto& [e, coh] : t2) {
    std::vector<Rational> back(e);
    for (int a = 0; a < nc; ++a) back[size_t(a)] -= d[size_t(a)];
    if (!within(back)) continue;
    acc_into(res[e], coh, -1);
  }

  double worst = 0.0;
  for (const auto& [e, coh] : res)
    for (const auto& [zl, v] : coh)
      for (const auto& x : v)
        worst = std::max(worst, std::abs(x.convert_to<double>()));
  return worst;
}

double picard_fuchs_check(const ModelParams& params, const std::vector<long>& d,
                          int order) {
  long dmax = 0;
  for (long x : d) dmax = std::max(dmax, std::labs(x));
  if (dmax == 0) return 0.0;
  if (long(order) < dmax)
    throw ConfigError("picard_fuchs_check: order below |d|");
  return annihilator_residual(i_function(params, order), d);
}

std::vector<MirrorTerm> mirror_map(const ModelParams& params, int order) {
  IFunctionSeries series = i_function(params, order);
  std::vector<MirrorTerm> out;
  for (const auto& term : series.terms) {
    bool origin = true;
    for (const auto& x : term.d)
      if (x != 0) origin = false;
    for (const auto& cc : term.c) {
      if (cc.zpow >= 0) {
        bool unit = origin && cc.zpow == 0 && cc.lpow == 0;
        if (unit)
          for (size_t i = 1; i < cc.v.size(); ++i)
            if (cc.v[i] != 0) unit = false;
        if (!unit || cc.v[0] != 1)
          throw UndefinedLimit("mirror_map: series is not 1 + tau/z + o(1/z)");
        continue;
      }
      if (cc.zpow == -1) {
        MirrorTerm mt;
        mt.d = term.d;
        mt.lpow = cc.lpow;
        mt.v = cc.v;
        out.push_back(std::move(mt));
      }
    }
  }
  return out;
}

}  // namespace wpm
