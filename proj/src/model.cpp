#include "wpm/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace wpm {

void ModelParams::validate() const {
  if (m < 1 || n < 1) throw ConfigError("m and n must be positive");
  if (std::gcd(m, n) != 1) throw ConfigError("m and n must be coprime");
  if (int(q_pos.size()) != m - 1) throw ConfigError("q_pos needs m-1 entries");
  if (int(q_neg.size()) != n) throw ConfigError("q_neg needs n entries");
  if (!w_pos.empty() && int(w_pos.size()) != m - 1)
    throw ConfigError("w_pos needs m-1 entries (or none)");
  if (!w_neg.empty() && int(w_neg.size()) != n) throw ConfigError("w_neg needs n entries (or none)");
  if (q_neg.empty() || q_neg.back() == Cplx(0.0))
    throw ConfigError("the deepest negative parameter must not vanish");
  for (size_t i = 0; i < w_pos.size(); ++i)
    if (w_pos[i] != Cplx(0.0) && q_pos[i] == Cplx(0.0))
      throw ConfigError("weight attached to a vanishing positive parameter");
  for (size_t i = 0; i < w_neg.size(); ++i)
    if (w_neg[i] != Cplx(0.0) && q_neg[i] == Cplx(0.0))
      throw ConfigError("weight attached to a vanishing negative parameter");
}

Superpotential superpotential(const ModelParams& p) {
  p.validate();
  Superpotential w;
  w.m = p.m;
  w.n = p.n;
  w.a.assign(size_t(p.m), Cplx(0.0));
  for (int l = 1; l < p.m; ++l) w.a[size_t(l - 1)] = p.q_pos[size_t(l - 1)];
  w.a[size_t(p.m - 1)] = Cplx(1.0);
  w.b.assign(size_t(p.n), Cplx(0.0));
  for (int l = 1; l <= p.n; ++l) w.b[size_t(l - 1)] = p.q_neg[size_t(l - 1)];
  w.c_log = Cplx(0.0);
  w.c0 = Cplx(0.0);
  for (int l = 1; l < p.m; ++l)
    if (l - 1 < int(p.w_pos.size())) {
      const Cplx wt = p.w_pos[size_t(l - 1)];
      if (wt == Cplx(0.0)) continue;
      w.c_log += double(l) * wt;
      w.c0 += wt * std::log(p.q_pos[size_t(l - 1)]);
    }
  for (int l = 1; l <= p.n; ++l)
    if (l - 1 < int(p.w_neg.size())) {
      const Cplx wt = p.w_neg[size_t(l - 1)];
      if (wt == Cplx(0.0)) continue;
      w.c_log -= double(l) * wt;
      w.c0 += wt * std::log(p.q_neg[size_t(l - 1)]);
    }
  return w;
}

Cplx Superpotential::eval(Cplx y) const {
  Cplx r = c0 + c_log * std::log(y);
  Cplx yp = Cplx(1.0);
  for (int l = 1; l <= m; ++l) {
    yp *= y;
    r += a[size_t(l - 1)] * yp;
  }
  Cplx ym = Cplx(1.0);
  for (int l = 1; l <= n; ++l) {
    ym /= y;
    r += b[size_t(l - 1)] * ym;
  }
  return r;
}

Cplx Superpotential::eval_logy(Cplx ly) const {
  const Cplx y = std::exp(ly);
  Cplx r = c0 + c_log * ly;
  Cplx yp = Cplx(1.0);
  for (int l = 1; l <= m; ++l) {
    yp *= y;
    r += a[size_t(l - 1)] * yp;
  }
  Cplx ym = Cplx(1.0);
  for (int l = 1; l <= n; ++l) {
    ym /= y;
    r += b[size_t(l - 1)] * ym;
  }
  return r;
}

Cplx Superpotential::f(Cplx y) const {
  Cplx r = c_log;
  Cplx yp = Cplx(1.0);
  for (int l = 1; l <= m; ++l) {
    yp *= y;
    r += double(l) * a[size_t(l - 1)] * yp;
  }
  Cplx ym = Cplx(1.0);
  for (int l = 1; l <= n; ++l) {
    ym /= y;
    r -= double(l) * b[size_t(l - 1)] * ym;
  }
  return r;
}

Cplx Superpotential::dy(Cplx y) const { return f(y) / y; }

Cplx Superpotential::df_dy(Cplx y) const {
  Cplx r = Cplx(0.0);
  Cplx yp = Cplx(1.0);
  for (int l = 1; l <= m; ++l) {
    r += double(l) * double(l) * a[size_t(l - 1)] * yp;
    yp *= y;
  }
  // d/dY of -l b_l Y^{-l} is l^2 b_l Y^{-l-1}
  Cplx ym = Cplx(1.0);
  for (int l = 1; l <= n; ++l) {
    ym /= y;
    r += double(l) * double(l) * b[size_t(l - 1)] * ym / y;
  }
  return r;
}

std::vector<Cplx> Superpotential::critical_polynomial() const {
  std::vector<Cplx> c(size_t(m + n + 1), Cplx(0.0));
  for (int l = 1; l <= m; ++l) c[size_t(n + l)] += double(l) * a[size_t(l - 1)];
  c[size_t(n)] += c_log;
  for (int l = 1; l <= n; ++l) c[size_t(n - l)] -= double(l) * b[size_t(l - 1)];
  return c;
}

CriticalData critical_points(const Superpotential& w, double sep_tol) {
  std::vector<Cplx> c = w.critical_polynomial();
  while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
  const int deg = int(c.size()) - 1;
  if (deg < 1) throw DegenerateCritical("critical polynomial is constant");
  if (std::abs(c[0]) == 0.0)
    throw DegenerateCritical("critical point at the puncture Y=0");

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[size_t(i)] / c[size_t(deg)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericFailure("eigenvalue solve failed");

  std::vector<Cplx> roots(static_cast<size_t>(deg));
  for (int i = 0; i < deg; ++i) {
    Cplx y = solver.eigenvalues()(i);
    // one Newton step on P
    for (int it = 0; it < 2; ++it) {
      Cplx pv = Cplx(0.0), dv = Cplx(0.0);
      for (int k = deg; k >= 0; --k) {
        dv = dv * y + pv;
        pv = pv * y + c[size_t(k)];
      }
      if (std::abs(dv) > 0.0) y -= pv / dv;
    }
    roots[size_t(i)] = y;
  }

  std::sort(roots.begin(), roots.end(), [](const Cplx& x, const Cplx& y) {
    const double ax = std::arg(x), ay = std::arg(y);
    if (std::abs(ax - ay) > 1e-12) return ax < ay;
    return std::abs(x) < std::abs(y);
  });

  double maxmod = 0.0;
  for (const Cplx& r : roots) maxmod = std::max(maxmod, std::abs(r));
  for (const Cplx& r : roots)
    if (std::abs(r) < sep_tol * maxmod)
      throw DegenerateCritical("critical point collides with the puncture");
  for (size_t i = 0; i < roots.size(); ++i)
    for (size_t j = i + 1; j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) < sep_tol * maxmod)
        throw DegenerateCritical("critical points closer than tolerance");

  CriticalData cd;
  cd.roots = roots;
  for (const Cplx& r : roots) {
    cd.u.push_back(w.eval(r));
    const Cplx d = r * w.df_dy(r);
    cd.delta.push_back(d);
    if (std::abs(d) == 0.0) throw DegenerateCritical("vanishing Hessian");
    cd.h1.push_back(std::sqrt(Cplx(-2.0) / d));
  }
  return cd;
}

Chart chart(const Superpotential& w, const CriticalData& cd, int alpha, int K, Cplx h1_ref) {
  if (alpha < 0 || alpha >= cd.size()) throw ConfigError("chart index out of range");
  if (K < 2) throw ConfigError("chart order must be at least 2");
  const Cplx p = cd.roots[size_t(alpha)];

  // cap(s) = W(p e^s) - u = sum_{j>=2} c_j s^j on window [2, K+1]
  SeriesC cap(2, K + 1, "s");
  {
    std::vector<double> invfact(size_t(K) + 2, 1.0);
    for (int j = 1; j <= K + 1; ++j) invfact[size_t(j)] = invfact[size_t(j - 1)] / double(j);
    Cplx yp = Cplx(1.0);
    for (int l = 1; l <= w.m; ++l) {
      yp *= p;
      const Cplx al = w.a[size_t(l - 1)];
      if (al == Cplx(0.0)) continue;
      double lj = double(l) * double(l);  // l^j starting at j=2
      for (int j = 2; j <= K + 1; ++j) {
        cap.add_to(j, al * yp * lj * invfact[size_t(j)]);
        lj *= double(l);
      }
    }
    Cplx ym = Cplx(1.0);
    for (int l = 1; l <= w.n; ++l) {
      ym /= p;
      const Cplx bl = w.b[size_t(l - 1)];
      if (bl == Cplx(0.0)) continue;
      double lj = double(l) * double(l);
      for (int j = 2; j <= K + 1; ++j) {
        cap.add_to(j, bl * ym * ((j % 2 == 0) ? lj : -lj) * invfact[size_t(j)]);
        lj *= double(l);
      }
    }
  }

  // zeta(s) = sqrt(-cap), branch with -1/zeta_1 nearest h1_ref
  SeriesC zeta = sqrt_branch(-cap, true);
  const Cplx target = (h1_ref == Cplx(0.0)) ? cd.h1[size_t(alpha)] : h1_ref;
  {
    const Cplx cand = Cplx(-1.0) / zeta.coeff(1);
    if (std::abs(cand - target) > std::abs(-cand - target)) zeta = -zeta;
  }
  zeta = zeta.truncated(K);

  SeriesC s_of_zeta = revert(zeta);
  s_of_zeta.set_var("zeta");

  Chart ch;
  ch.alpha = alpha;
  ch.p = p;
  ch.u = cd.u[size_t(alpha)];
  ch.delta = cd.delta[size_t(alpha)];
  ch.h1 = -s_of_zeta.coeff(1);
  ch.hk.resize(size_t(K));
  for (int k = 1; k <= K; ++k) ch.hk[size_t(k - 1)] = -s_of_zeta.coeff(k);
  ch.zeta_of_s = zeta;
  ch.s_of_zeta = s_of_zeta;
  ch.y_of_zeta = Cplx(p) * exp_series(s_of_zeta);
  ch.y_of_zeta.set_var("zeta");
  return ch;
}

Cplx pairing(const CriticalData& cd, const std::vector<Cplx>& fvals,
             const std::vector<Cplx>& gvals) {
  if (int(fvals.size()) != cd.size() || int(gvals.size()) != cd.size())
    throw ConfigError("pairing needs one value per critical point");
  Cplx s = Cplx(0.0);
  for (int i = 0; i < cd.size(); ++i)
    s += fvals[size_t(i)] * gvals[size_t(i)] / cd.delta[size_t(i)];
  return s;
}

std::vector<Cplx> lagrange_basis(const std::vector<Cplx>& roots, int alpha) {
  const int r = int(roots.size());
  std::vector<Cplx> num{Cplx(1.0)};  // product of (X - z_j), j != alpha
  Cplx den = Cplx(1.0);
  for (int j = 0; j < r; ++j) {
    if (j == alpha) continue;
    std::vector<Cplx> next(num.size() + 1, Cplx(0.0));
    for (size_t i = 0; i < num.size(); ++i) {
      next[i + 1] += num[i];
      next[i] -= roots[size_t(j)] * num[i];
    }
    num = std::move(next);
    den *= roots[size_t(alpha)] - roots[size_t(j)];
  }
  for (auto& c : num) c /= den;
  num.resize(size_t(r), Cplx(0.0));
  return num;
}

std::vector<std::vector<Cplx>> psi_matrix(const std::vector<Cplx>& roots,
                                          const std::vector<Cplx>& sqrt_delta) {
  const int r = int(roots.size());
  if (int(sqrt_delta.size()) != r) throw ConfigError("psi_matrix size mismatch");
  std::vector<std::vector<Cplx>> psi(size_t(r), std::vector<Cplx>(size_t(r), Cplx(0.0)));
  for (int al = 0; al < r; ++al) {
    std::vector<Cplx> lag = lagrange_basis(roots, al);
    for (int i = 0; i < r; ++i) psi[size_t(i)][size_t(al)] = sqrt_delta[size_t(al)] * lag[size_t(i)];
  }
  return psi;
}

std::vector<Cplx> sqrt_delta_principal(const CriticalData& cd) {
  std::vector<Cplx> r;
  for (const Cplx& d : cd.delta) r.push_back(std::sqrt(d));
  return r;
}

std::vector<Cplx> sqrt_delta_coherent(const CriticalData& cd) {
  std::vector<Cplx> r;
  for (const Cplx& h : cd.h1) r.push_back(std::sqrt(2.0) / h);
  return r;
}

}  // namespace wpm
