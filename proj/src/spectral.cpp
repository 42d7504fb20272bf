#include "wpm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wpm {

Cplx kappa_factor(int k) {
  return dfactorial_odd(k) * std::ldexp(1.0, -k) * ipow(-2 * k - 1);
}

int height_cap(int g, int n) { return 3 * g - 3 + n; }

namespace {

// Outer product f(z) * g(w) on the full rectangle of known coefficients.
Series2C outer(const SeriesC& f, const SeriesC& g) {
  const int fl = std::max(f.lo(), 0), gl = std::max(g.lo(), 0);
  Series2C r(fl, f.hi(), gl, g.hi(), f.hi() + g.hi());
  for (int k = fl; k <= f.hi(); ++k)
    for (int l = gl; l <= g.hi(); ++l) r.set(k, l, f.coeff(k) * g.coeff(l));
  return r;
}

// f(z) - g(w) as a bivariate series; all rectangle entries are exact.
Series2C cross_difference(const SeriesC& f, const SeriesC& g) {
  Series2C r(0, f.hi(), 0, g.hi(), f.hi() + g.hi());
  for (int k = 0; k <= f.hi(); ++k) r.add_to(k, 0, f.coeff(k));
  for (int l = 0; l <= g.hi(); ++l) r.add_to(0, l, -g.coeff(l));
  return r;
}

// Divided difference (Y(z) - Y(w)) / (z - w): entry (k, l) is Y_{k+l+1}.
Series2C divided_difference(const SeriesC& y, int K) {
  Series2C r(0, K - 1, 0, K - 1, K - 1);
  for (int k = 0; k <= K - 1; ++k)
    for (int l = 0; k + l <= K - 1; ++l) r.set(k, l, y.coeff(k + l + 1));
  return r;
}

Series2C bergman_regular(const Chart& ca, const Chart& cb, int K) {
  const SeriesC da = ca.y_of_zeta.derivative().truncated(K - 1);
  const SeriesC db = cb.y_of_zeta.derivative().truncated(K - 1);
  if (ca.alpha != cb.alpha) {
    Series2C s = cross_difference(ca.y_of_zeta, cb.y_of_zeta);
    return outer(da, db) * (s * s).inverse2();
  }
  Series2C h = divided_difference(ca.y_of_zeta, K);
  Series2C h2 = h * h;
  Series2C q = outer(da, db) - h2;
  q = q.divide_linear(-1).divide_linear(-1);
  return q * h2.inverse2();
}

// One-form value series at -zeta including orientation: g dzeta -> -g(-zeta) dzeta.
SeriesC neg_pullback(const SeriesC& f) {
  SeriesC r(f.lo(), f.hi());
  for (int e = f.lo(); e <= f.hi(); ++e) {
    const Cplx v = f.coeff(e);
    r.set(e, (e % 2 == 0) ? -v : v);
  }
  return r;
}

using HKey = std::vector<std::pair<int, int>>;  // per-slot (pole, moment index)

struct Factor {
  HKey asg;   // spectator symbols for the part's subset, in subset order
  SeriesC f;  // value series in the recursion variable, built at +zeta
  Cplx c{1.0, 0.0};
};

SeriesC dxi_slot(const SpectralData& sd, int gamma, int alpha, int k) {
  return kappa_factor(k) * moment_series(sd, gamma, alpha, 2 * k);
}

// Multiplicative contributions of the part (gpart, subset) on one side of
// the recursion bracket.  A (0,2) part is a Bergman leg: its loose end
// stays symbolic as a moment of every index up to jmax.
std::vector<Factor> part_factors(SpectralData& sd, int gamma, int gpart,
                                 const std::vector<int>& slots, int jmax) {
  std::vector<Factor> out;
  const int npart = int(slots.size()) + 1;
  if (gpart == 0 && npart == 1) return out;
  if (gpart == 0 && npart == 2) {
    for (int j = 0; j <= jmax; ++j) {
      Factor fc;
      fc.asg = {{gamma, j}};
      fc.f = SeriesC::monomial(Cplx(1.0, 0.0), j, sd.K);
      out.push_back(std::move(fc));
    }
    return out;
  }
  for (const auto& [key, c] : eo_invariant(sd, gpart, npart)) {
    Factor fc;
    fc.c = c;
    fc.f = dxi_slot(sd, gamma, key[0].first, key[0].second);
    for (size_t t = 1; t < key.size(); ++t) {
      fc.asg.push_back({key[t].first, 2 * key[t].second});
      fc.c *= kappa_factor(key[t].second);
    }
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace

SpectralData spectral_data(const Superpotential& w, int K) {
  if (K < 8) throw ConfigError("chart order too small for kernel expansions");
  SpectralData sd;
  sd.w = w;
  sd.cd = critical_points(w);
  sd.K = K;
  const int r = sd.cd.size();
  sd.charts.reserve(size_t(r));
  for (int a = 0; a < r; ++a) sd.charts.push_back(chart(w, sd.cd, a, K));
  sd.reg.assign(size_t(r), std::vector<Series2C>(size_t(r)));
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      sd.reg[size_t(a)][size_t(b)] = bergman_regular(sd.charts[size_t(a)], sd.charts[size_t(b)], K);
  sd.dinv.reserve(size_t(r));
  for (int a = 0; a < r; ++a) {
    SeriesC d(2, K + 1);
    for (int k = 1; k <= K; k += 2) d.set(k + 1, 8.0 * sd.charts[size_t(a)].hk[size_t(k - 1)]);
    sd.dinv.push_back(d.inverse());
  }
  return sd;
}

Cplx bergman_moment(const SpectralData& sd, int a, int b, int i, int j) {
  return sd.reg[size_t(a)][size_t(b)].coeff(i, j);
}

Cplx cb_hat(const SpectralData& sd, int a, int b, int k, int l) {
  return dfactorial_odd(k) * dfactorial_odd(l) * std::ldexp(1.0, -(k + l + 1)) *
         bergman_moment(sd, a, b, 2 * k, 2 * l);
}

SeriesC moment_series(const SpectralData& sd, int gamma, int alpha, int i) {
  const Series2C& g = sd.reg[size_t(gamma)][size_t(alpha)];
  if (i > g.whi())
    throw DecompositionFailure("moment index " + std::to_string(i) +
                               " beyond kernel window " + std::to_string(g.whi()));
  const int lhi = std::min(g.zhi(), g.deg_hi() - i);
  const int lo = (gamma == alpha) ? -i - 2 : 0;
  SeriesC r(lo, std::max(lhi, lo));
  if (gamma == alpha) r.set(-i - 2, Cplx(double(i + 1), 0.0));
  for (int l = 0; l <= lhi; ++l) r.set(l, g.coeff(l, i));
  return r;
}

const FormExpansion& eo_invariant(SpectralData& sd, int g, int N) {
  if (g < 0 || N < 1) throw ConfigError("invariant labels must have g >= 0, N >= 1");
  if (2 * g - 2 + N <= 0)
    throw Unstable("no invariant at (" + std::to_string(g) + "," + std::to_string(N) + ")");
  if (auto it = sd.memo.find({g, N}); it != sd.memo.end()) return it->second;

  const int r = sd.r();
  const int kcap = height_cap(g, N);
  const int jmax = 2 * kcap + 4;
  std::map<HKey, Cplx> acc;

  for (int gamma = 0; gamma < r; ++gamma) {
    std::map<HKey, SeriesC> bracket;
    auto add_term = [&](const HKey& skey, const SeriesC& f, const Cplx& c) {
      if (c == Cplx(0.0, 0.0)) return;
      SeriesC fs = f * c;
      auto [it, inserted] = bracket.try_emplace(skey, fs);
      if (!inserted) it->second = it->second + fs;
    };

    if (g == 1 && N == 1) {
      // omega_{0,2} evaluated on (zeta, -zeta), diagonal singular part included
      SeriesC diag = sd.reg[size_t(gamma)][size_t(gamma)].diagonal(Cplx(-1.0, 0.0));
      SeriesC f = -(diag + SeriesC::monomial(Cplx(0.25, 0.0), -2, diag.hi()));
      add_term({}, f, Cplx(1.0, 0.0));
    } else if (g >= 1) {
      for (const auto& [key, c] : eo_invariant(sd, g - 1, N + 1)) {
        SeriesC f = dxi_slot(sd, gamma, key[0].first, key[0].second) *
                    neg_pullback(dxi_slot(sd, gamma, key[1].first, key[1].second));
        HKey skey;
        Cplx cc = c;
        for (size_t t = 2; t < key.size(); ++t) {
          skey.push_back({key[t].first, 2 * key[t].second});
          cc *= kappa_factor(key[t].second);
        }
        add_term(skey, f, cc);
      }
    }

    const int ns = N - 1;
    for (int mask = 0; mask < (1 << ns); ++mask) {
      std::vector<int> si, sj;
      for (int t = 0; t < ns; ++t) ((mask >> t) & 1 ? si : sj).push_back(t);
      for (int g1 = 0; g1 <= g; ++g1) {
        const int g2 = g - g1;
        if (g1 == 0 && si.empty()) continue;
        if (g2 == 0 && sj.empty()) continue;
        const auto fa = part_factors(sd, gamma, g1, si, jmax);
        if (fa.empty()) continue;
        const auto fb = part_factors(sd, gamma, g2, sj, jmax);
        for (const auto& a : fa)
          for (const auto& b : fb) {
            HKey skey(static_cast<size_t>(ns));
            for (size_t t = 0; t < si.size(); ++t) skey[size_t(si[t])] = a.asg[t];
            for (size_t t = 0; t < sj.size(); ++t) skey[size_t(sj[t])] = b.asg[t];
            add_term(skey, a.f * neg_pullback(b.f), a.c * b.c);
          }
      }
    }

    const SeriesC& dv = sd.dinv[size_t(gamma)];
    for (const auto& [skey, f] : bracket) {
      SeriesC q = f * dv;
      for (int kp = 0; kp <= kcap; ++kp) {
        const int e = -2 * kp - 2;
        if (!q.known(e))
          throw DecompositionFailure("chart order " + std::to_string(sd.K) +
                                     " cannot resolve residue at height " + std::to_string(kp));
        const Cplx c = q.coeff(e) * Cplx(2.0 / double(2 * kp + 1), 0.0);
        if (c == Cplx(0.0, 0.0)) continue;
        HKey full;
        full.reserve(skey.size() + 1);
        full.push_back({gamma, 2 * kp});
        full.insert(full.end(), skey.begin(), skey.end());
        acc[full] += c;
      }
    }
  }

  // Decompose over dxi products; moments of odd index or beyond the height
  // cap must cancel and are dropped with their largest magnitude recorded.
  FormExpansion out;
  double dropped = 0.0, scale = 0.0;
  for (const auto& [hkey, c] : acc) {
    bool vanish = false;
    for (const auto& [a, i] : hkey)
      if (i % 2 != 0 || i / 2 > kcap) {
        vanish = true;
        break;
      }
    if (vanish) {
      dropped = std::max(dropped, std::abs(c));
      continue;
    }
    Cplx v = c;
    FormKey fk;
    fk.reserve(hkey.size());
    for (const auto& [a, i] : hkey) {
      v /= kappa_factor(i / 2);
      fk.push_back({a, i / 2});
    }
    out[fk] += v;
  }
  for (auto it = out.begin(); it != out.end();) {
    const double m = std::abs(it->second);
    scale = std::max(scale, m);
    it = (m == 0.0) ? out.erase(it) : std::next(it);
  }
  sd.odd_moment_residual = std::max(sd.odd_moment_residual, dropped);
  sd.coeff_scale = std::max(sd.coeff_scale, scale);
  return sd.memo.emplace(std::make_pair(g, N), std::move(out)).first->second;
}

}  // namespace wpm
