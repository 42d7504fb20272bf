#include "wpm/rmatrix.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace wpm {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd to_eigen(const std::vector<std::vector<Cplx>>& m) {
  const int r = int(m.size());
  Eigen::MatrixXcd out(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) out(i, j) = m[size_t(i)][size_t(j)];
  return out;
}

std::vector<Cplx> coherent_sqrt_delta(const std::vector<Chart>& charts) {
  std::vector<Cplx> s;
  s.reserve(charts.size());
  for (const Chart& c : charts) s.push_back(std::sqrt(2.0) / c.h1);
  return s;
}

Eigen::MatrixXcd psi_eigen(const CriticalData& cd, const std::vector<Chart>& charts) {
  return to_eigen(psi_matrix(cd.roots, coherent_sqrt_delta(charts)));
}

struct MatchedModel {
  Superpotential w;
  CriticalData cd;
  std::vector<Chart> charts;
};

// Rebuild the model at perturbed parameters, keeping root labels and sqrt
// branches continuous with the base point.
MatchedModel build_matched(const ModelParams& p, const CriticalData& base,
                           const std::vector<Chart>& base_charts, int K) {
  MatchedModel mm;
  mm.w = superpotential(p);
  CriticalData raw = critical_points(mm.w);
  const int r = base.size();
  if (raw.size() != r) throw StepFailure("critical point count changed under perturbation");
  double min_sep = 1e300;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      min_sep = std::min(min_sep, std::abs(base.roots[size_t(a)] - base.roots[size_t(b)]));
  std::vector<char> used(size_t(r), 0);
  mm.cd.roots.resize(size_t(r));
  mm.cd.u.resize(size_t(r));
  mm.cd.delta.resize(size_t(r));
  mm.cd.h1.resize(size_t(r));
  for (int a = 0; a < r; ++a) {
    int best = -1;
    double bd = 1e300;
    for (int j = 0; j < r; ++j) {
      if (used[size_t(j)]) continue;
      const double d = std::abs(raw.roots[size_t(j)] - base.roots[size_t(a)]);
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    if (best < 0 || bd > 0.45 * min_sep)
      throw StepFailure("root matching lost under perturbation");
    used[size_t(best)] = 1;
    mm.cd.roots[size_t(a)] = raw.roots[size_t(best)];
    mm.cd.u[size_t(a)] = raw.u[size_t(best)];
    mm.cd.delta[size_t(a)] = raw.delta[size_t(best)];
    mm.cd.h1[size_t(a)] = raw.h1[size_t(best)];
  }
  mm.charts.reserve(size_t(r));
  for (int a = 0; a < r; ++a)
    mm.charts.push_back(chart(mm.w, mm.cd, a, K, base_charts[size_t(a)].h1));
  return mm;
}

void check_flat_direction(const ModelParams& p, int dir) {
  for (const Cplx& wt : p.w_pos)
    if (wt != Cplx(0.0)) throw ConfigError("flatness check requires zero weights");
  for (const Cplx& wt : p.w_neg)
    if (wt != Cplx(0.0)) throw ConfigError("flatness check requires zero weights");
  if (dir == 0 || dir > p.m - 1 || dir < -p.n)
    throw ConfigError("no parameter direction " + std::to_string(dir));
}

ModelParams shifted(const ModelParams& base, int dir, double delta) {
  ModelParams p = base;
  if (dir > 0)
    p.q_pos[size_t(dir - 1)] += delta;
  else
    p.q_neg[size_t(-dir - 1)] += delta;
  return p;
}

}  // namespace

MatSeries MatSeries::identity(int r, int order) {
  MatSeries out(r, order);
  for (int i = 0; i < r; ++i) out.at(0, i, i) = Cplx(1.0);
  return out;
}

MatSeries MatSeries::mul(const MatSeries& o) const {
  MatSeries out(r, std::min(order, o.order));
  for (int k = 0; k <= out.order; ++k)
    for (int s = 0; s <= k; ++s)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          Cplx acc(0.0);
          for (int t = 0; t < r; ++t) acc += at(s, i, t) * o.at(k - s, t, j);
          out.at(k, i, j) += acc;
        }
  return out;
}

MatSeries MatSeries::transpose_negz() const {
  MatSeries out(r, order);
  for (int k = 0; k <= order; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) out.at(k, i, j) = sgn * at(k, j, i);
  }
  return out;
}

double MatSeries::max_abs(int k) const {
  double m = 0.0;
  for (const Cplx& v : coeff[size_t(k)]) m = std::max(m, std::abs(v));
  return m;
}

double max_diff(const MatSeries& a, const MatSeries& b) {
  double m = 0.0;
  for (int k = 0; k <= std::min(a.order, b.order); ++k)
    for (int i = 0; i < a.r; ++i)
      for (int j = 0; j < a.r; ++j) m = std::max(m, std::abs(a.at(k, i, j) - b.at(k, i, j)));
  return m;
}

MatSeries laplace_raw(const std::vector<Chart>& charts, int order) {
  const int r = int(charts.size());
  if (r == 0) throw ConfigError("no charts");
  const int K = charts[0].y_of_zeta.hi();
  if (2 * order > K - 1)
    throw ChartTooLarge("expansion order " + std::to_string(order) +
                        " needs chart order above " + std::to_string(2 * order + 1));
  const Cplx pref = Cplx(0.0, -kPi * std::sqrt(2.0));
  MatSeries out(r, order);
  for (int b = 0; b < r; ++b) {
    const SeriesC& y = charts[size_t(b)].y_of_zeta;
    for (int a = 0; a < r; ++a) {
      const Cplx ca = std::sqrt(2.0) / (charts[size_t(a)].h1 * charts[size_t(a)].p);
      SeriesC den = y;
      den.add_to(0, -charts[size_t(a)].p);
      den = den * ca;
      SeriesC g = SeriesC::monomial(Cplx(-2.0), 1, K) * den.inverse();
      for (int k = 0; k <= order; ++k)
        out.at(k, a, b) = pref * g.coeff(2 * k) * dfactorial_odd(k) * std::ldexp(1.0, -k);
    }
  }
  return out;
}

MatSeries laplace_normalized(const std::vector<Chart>& charts, int order) {
  MatSeries out = laplace_raw(charts, order);
  const Cplx s = Cplx(0.0, 1.0) / (2.0 * kPi);  // 1 / (-2 pi i)
  for (auto& slab : out.coeff)
    for (Cplx& v : slab) v *= s;
  return out;
}

double unitarity_residual(const MatSeries& rmat) {
  const MatSeries u = rmat.mul(rmat.transpose_negz());
  double worst = 0.0;
  for (int k = 0; k <= u.order; ++k)
    for (int i = 0; i < u.r; ++i)
      for (int j = 0; j < u.r; ++j) {
        const Cplx target = (k == 0 && i == j) ? Cplx(1.0) : Cplx(0.0);
        worst = std::max(worst, std::abs(u.at(k, i, j) - target));
      }
  return worst;
}

namespace {

Rational binom(int n, int k) {
  Rational r = 1;
  for (int j = 1; j <= k; ++j) r *= Rational(n - k + j, j);
  return r;
}

}  // namespace

Rational bernoulli_number(int n) {
  static std::vector<Rational> cache{Rational(1)};
  for (int k = int(cache.size()); k <= n; ++k) {
    Rational s = 0;
    for (int j = 0; j < k; ++j) s += binom(k + 1, j) * cache[size_t(j)];
    cache.push_back(-s / Rational(k + 1));
  }
  return cache[size_t(n)];
}

Rational bernoulli_poly(int n, const Rational& x) {
  Rational s = 0;
  Rational xp = 1;
  for (int j = n; j >= 0; --j) {  // B_j x^{n-j}, accumulate powers from x^0
    s += binom(n, n - j) * bernoulli_number(j) * xp;
    xp *= x;
  }
  return s;
}

MatSeries gamma_block(int m, double p, int order) {
  if (m < 1) throw ConfigError("block size must be positive");
  MatSeries out(m, order);
  for (int t = 0; t < m; ++t) {
    SeriesC st(1, order);
    for (int s = 1; s <= order; ++s) {
      const double bval = bernoulli_poly(s + 1, Rational(t, m)).convert_to<double>();
      const double sgn = (s % 2 == 0) ? -1.0 : 1.0;  // (-1)^{s+1}
      st.set(s, Cplx(sgn * bval / (double(s) * double(s + 1)) * std::pow(m / p, s), 0.0));
    }
    const SeriesC et = exp_series(st);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double ang = 2.0 * kPi * double(t) * double(j - i) / double(m);
        const Cplx om = std::polar(1.0, ang) / double(m);
        for (int k = 0; k <= order; ++k) out.at(k, i, j) += om * et.coeff(k);
      }
  }
  return out;
}

double gamma_block_residual(int m, double p, int order, int K) {
  if (p >= 0.0) throw ConfigError("large-radius block needs p < 0");
  Superpotential w;
  w.m = m;
  w.n = 0;
  w.a.assign(size_t(m), Cplx(0.0));
  w.a[size_t(m - 1)] = Cplx(1.0);
  w.c_log = Cplx(p, 0.0);
  w.c0 = Cplx(0.0);

  CriticalData cd;
  const double r0 = std::pow(-p / double(m), 1.0 / double(m));
  for (int b = 0; b < m; ++b) {
    const double ang = 2.0 * kPi * double(b) / double(m);
    cd.roots.push_back(std::polar(r0, ang));
    cd.u.push_back(Cplx(-p / double(m), 0.0) + p * Cplx(std::log(r0), ang));
    cd.delta.push_back(Cplx(-double(m) * p, 0.0));
    cd.h1.push_back(std::sqrt(Cplx(-2.0, 0.0) / cd.delta.back()));
  }
  std::vector<Chart> charts;
  charts.reserve(size_t(m));
  for (int b = 0; b < m; ++b) charts.push_back(chart(w, cd, b, K));

  const MatSeries rn = laplace_normalized(charts, order);
  const MatSeries pb = gamma_block(m, p, order);
  double worst = 0.0;
  for (int k = 1; k <= order; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        worst = std::max(worst, std::abs(rn.at(k, i, j) - pb.at(k, i, j)));
  return worst;
}

std::vector<std::vector<Cplx>> companion_power(const Superpotential& w, int power) {
  std::vector<Cplx> c = w.critical_polynomial();
  const int d = int(c.size()) - 1;
  if (std::abs(c[0]) == 0.0) throw DegenerateCritical("critical point at the puncture Y=0");
  Eigen::MatrixXcd mx = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) mx(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) mx(i, d - 1) -= c[size_t(i)] / c[size_t(d)];
  Eigen::MatrixXcd base = (power >= 0) ? mx : Eigen::MatrixXcd(mx.inverse());
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(d, d);
  for (int i = 0; i < std::abs(power); ++i) acc = acc * base;
  std::vector<std::vector<Cplx>> out(static_cast<size_t>(d),
                                     std::vector<Cplx>(static_cast<size_t>(d)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[size_t(i)][size_t(j)] = acc(i, j);
  return out;
}

namespace {

// The columns of the expansion integrate the global forms
//   omega_alpha = sqrt(2) h1_alpha p_alpha W'(Y) dY / (Y - p_alpha),
// and the row frame Omega_i = sum_alpha Psi(i,alpha) omega_alpha collapses to
//   sum_i X^i Omega_i = 2 [X P(Y) - Y P(X)] / (Y^{n+1} (Y - X)) dY
// with P the critical polynomial.  Differentiating along a parameter and
// reducing monomial forms back into the frame (ring reduction at the ends of
// the exponent window plus integration by parts, which costs one power of z)
// yields the exact connection  z d_a S = (conn_0 + conn_1 z + ...) S.
// conn_0 is multiplication by dW/dq_a; the z-terms are the frame corrections.
std::vector<Eigen::MatrixXcd> gauss_manin_connection(const Superpotential& w, int direction,
                                                     int zorder) {
  const std::vector<Cplx> c = w.critical_polynomial();
  const int deg = int(c.size()) - 1;  // = m + n
  const int r = deg;
  const int tlo = -w.n - 1, thi = w.m - 2;  // frame exponent window

  // frame matrix: column i lists the monomial content of Omega_i
  Eigen::MatrixXcd fr = Eigen::MatrixXcd::Zero(r, r);
  fr(0, 0) = -2.0 * c[0];  // Omega_0 = -2 c_0 Y^{-n-1} dY
  for (int i = 1; i < r; ++i)
    for (int s = i + 1; s <= deg; ++s) fr((s - i - w.n - 1) - tlo, i) += 2.0 * c[size_t(s)];
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(fr);

  std::vector<Eigen::MatrixXcd> conn(size_t(zorder) + 1, Eigen::MatrixXcd::Zero(r, r));
  for (int i = 0; i < r; ++i) {
    // z-graded monomial content, state[k][t] * Y^t dY at order z^k
    std::vector<std::map<int, Cplx>> state(size_t(zorder) + 2);
    // multiplication term (dW/dq_a) Omega_i = Y^dir Omega_i
    if (i == 0) {
      state[0][-w.n - 1 + direction] += -2.0 * c[0];
    } else {
      for (int s = i + 1; s <= deg; ++s)
        state[0][s - i - w.n - 1 + direction] += 2.0 * c[size_t(s)];
    }
    // frame variation d Omega_i / dq_a: the critical polynomial moves only in
    // c_{n+dir}, with d c_{n+dir} = dir
    const int sstar = w.n + direction;
    if (sstar == 0) {
      if (i == 0) state[1][-w.n - 1] += -2.0 * double(direction);
    } else if (i >= 1 && sstar >= i + 1) {
      state[1][sstar - i - w.n - 1] += 2.0 * double(direction);
    }

    for (int k = 0; k <= zorder; ++k) {
      for (int guard = 0;; ++guard) {
        if (guard > 1000) throw NumericFailure("frame reduction did not terminate");
        auto out_of_window = [&]() {
          for (auto& kv : state[size_t(k)])
            if (kv.first < tlo || kv.first > thi) return kv.first;
          return tlo;  // sentinel: everything in window
        };
        const int t = out_of_window();
        bool found = (t < tlo || t > thi);
        if (!found) break;
        const Cplx v = state[size_t(k)][t];
        state[size_t(k)].erase(t);
        if (std::abs(v) == 0.0) continue;
        if (t > thi) {
          // Y^t = (P Y^{j-n-1} - sum_{s<deg} c_s Y^{s+j-n-1}) / c_deg, j = t-m+1;
          // the P piece integrates by parts to -z j Y^{j-1}
          const int j = t - w.m + 1;
          for (int s = 0; s < deg; ++s)
            state[size_t(k)][s + j - w.n - 1] -= v * c[size_t(s)] / c[size_t(deg)];
          state[size_t(k) + 1][j - 1] -= v * double(j) / c[size_t(deg)];
        } else {
          // Y^t = (P Y^{j-n-1} - sum_{s>=1} c_s Y^{s+j-n-1}) / c_0, j = t+n+1
          const int j = t + w.n + 1;
          for (int s = 1; s <= deg; ++s)
            state[size_t(k)][s + j - w.n - 1] -= v * c[size_t(s)] / c[size_t(0)];
          state[size_t(k) + 1][j - 1] -= v * double(j) / c[size_t(0)];
        }
      }
      Eigen::VectorXcd mono = Eigen::VectorXcd::Zero(r);
      for (auto& kv : state[size_t(k)]) mono(kv.first - tlo) = kv.second;
      const Eigen::VectorXcd x = lu.solve(mono);
      for (int j = 0; j < r; ++j) conn[size_t(k)](i, j) = x(j);
    }
  }
  return conn;
}

// (Psi R)_k slabs at a shifted parameter, labels and branches matched.
std::vector<Eigen::MatrixXcd> psi_r_slabs(const ModelParams& base, int dir, double delta,
                                          const CriticalData& cd0,
                                          const std::vector<Chart>& charts0, int K, int order,
                                          bool identity_control) {
  const MatchedModel mm = build_matched(shifted(base, dir, delta), cd0, charts0, K);
  const MatSeries rm = identity_control ? MatSeries::identity(cd0.size(), order)
                                        : laplace_normalized(mm.charts, order);
  const Eigen::MatrixXcd psi = psi_eigen(mm.cd, mm.charts);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(size_t(order) + 1);
  for (int k = 0; k <= order; ++k) {
    Eigen::MatrixXcd rk(rm.r, rm.r);
    for (int i = 0; i < rm.r; ++i)
      for (int j = 0; j < rm.r; ++j) rk(i, j) = rm.at(k, i, j);
    out.push_back(psi * rk);
  }
  return out;
}

}  // namespace

QdeResult qde_check(const ModelParams& base, int direction, double eps, int zmax, int K, int order,
                    bool identity_control) {
  base.validate();
  check_flat_direction(base, direction);
  if (zmax > order) throw ConfigError("z range beyond expansion order");

  const Superpotential w0 = superpotential(base);
  const CriticalData cd0 = critical_points(w0);
  const int r = cd0.size();
  std::vector<Chart> charts0;
  charts0.reserve(size_t(r));
  for (int a = 0; a < r; ++a) charts0.push_back(chart(w0, cd0, a, K));

  const Eigen::MatrixXcd psi0 = psi_eigen(cd0, charts0);
  const auto conn = gauss_manin_connection(w0, direction, zmax);
  Eigen::MatrixXcd du = Eigen::MatrixXcd::Zero(r, r);
  for (int a = 0; a < r; ++a)
    du(a, a) = std::pow(cd0.roots[size_t(a)], Cplx(double(direction), 0.0));

  const MatSeries r0 = identity_control ? MatSeries::identity(r, order)
                                        : laplace_normalized(charts0, order);
  std::vector<Eigen::MatrixXcd> m0;
  for (int k = 0; k <= order; ++k) {
    Eigen::MatrixXcd rk(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) rk(i, j) = r0.at(k, i, j);
    m0.push_back(psi0 * rk);
  }

  auto resid_for = [&](double e) {
    const auto mp = psi_r_slabs(base, direction, +e, cd0, charts0, K, order, identity_control);
    const auto mn = psi_r_slabs(base, direction, -e, cd0, charts0, K, order, identity_control);
    double worst = 0.0;
    for (int k = 0; k <= zmax; ++k) {
      Eigen::MatrixXcd res = m0[size_t(k)] * du;
      for (int s = 0; s <= k; ++s) res -= conn[size_t(s)] * m0[size_t(k - s)];
      if (k >= 1) res += (mp[size_t(k - 1)] - mn[size_t(k - 1)]) / (2.0 * e);
      worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
    return worst;
  };

  QdeResult qr;
  qr.residual = resid_for(eps);
  qr.residual_half = resid_for(eps / 2.0);
  qr.ratio = qr.residual / qr.residual_half;
  qr.z0_identity = (psi0 * du - conn[0] * psi0).cwiseAbs().maxCoeff();
  return qr;
}

MatSeries flat_reference(const ModelParams& base, int direction, double eps, int K, int order) {
  base.validate();
  check_flat_direction(base, direction);

  const Superpotential w0 = superpotential(base);
  const CriticalData cd0 = critical_points(w0);
  const int r = cd0.size();
  std::vector<Chart> charts0;
  charts0.reserve(size_t(r));
  for (int a = 0; a < r; ++a) charts0.push_back(chart(w0, cd0, a, K));

  std::vector<Cplx> du(static_cast<size_t>(r));
  for (int a = 0; a < r; ++a) du[size_t(a)] = std::pow(cd0.roots[size_t(a)], double(direction));
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      if (std::abs(du[size_t(a)] - du[size_t(b)]) < 1e-8)
        throw ConfigError("direction with coincident eigenvalues cannot reconstruct");

  const MatSeries rt = laplace_normalized(charts0, order);
  const Eigen::MatrixXcd psi0 = psi_eigen(cd0, charts0);
  const Eigen::MatrixXcd psi_inv = psi0.inverse();
  const auto conn = gauss_manin_connection(w0, direction, order);

  auto deriv = [&](double e) {
    const auto mp = psi_r_slabs(base, direction, +e, cd0, charts0, K, order, false);
    const auto mn = psi_r_slabs(base, direction, -e, cd0, charts0, K, order, false);
    std::vector<Eigen::MatrixXcd> d;
    d.reserve(size_t(order) + 1);
    for (int k = 0; k <= order; ++k) d.push_back((mp[size_t(k)] - mn[size_t(k)]) / (2.0 * e));
    return d;
  };
  const auto d1 = deriv(eps);
  const auto d2 = deriv(eps / 2.0);

  MatSeries out(r, order);
  for (int a = 0; a < r; ++a) out.at(0, a, a) = Cplx(1.0);
  std::vector<Eigen::MatrixXcd> mrec;  // Psi * (reconstructed R)_k
  mrec.push_back(psi0);
  for (int k = 1; k <= order; ++k) {
    const Eigen::MatrixXcd rich = (4.0 * d2[size_t(k - 1)] - d1[size_t(k - 1)]) / 3.0;
    // z-order k of the flatness equation, solved for the commutator with dU:
    // (R_k dU - dU R_k) = Psi^{-1} (sum_{s>=1} conn_s M_{k-s} - d M_{k-1})
    Eigen::MatrixXcd num = -rich;
    for (int s = 1; s <= k; ++s) num += conn[size_t(s)] * mrec[size_t(k - s)];
    const Eigen::MatrixXcd g = psi_inv * num;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        out.at(k, a, b) = (a == b) ? rt.at(k, a, a) : g(a, b) / (du[size_t(b)] - du[size_t(a)]);
    Eigen::MatrixXcd rk(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) rk(a, b) = out.at(k, a, b);
    mrec.push_back(psi0 * rk);
  }
  return out;
}

MatSeries ambiguity_normalize(const MatSeries& cand, const MatSeries& ref, double tol) {
  if (cand.r != ref.r) throw ConfigError("size mismatch");
  const int r = cand.r;
  const int order = std::min(cand.order, ref.order);
  Eigen::MatrixXcd c0(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) c0(i, j) = cand.at(0, i, j);
  const Eigen::MatrixXcd inv0 = c0.inverse();

  MatSeries amb(r, order);
  for (int k = 0; k <= order; ++k) {
    Eigen::MatrixXcd rhs(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) rhs(i, j) = ref.at(k, i, j);
    for (int s = 1; s <= k; ++s) {
      Eigen::MatrixXcd cs(r, r), as(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          cs(i, j) = cand.at(s, i, j);
          as(i, j) = amb.at(k - s, i, j);
        }
      rhs -= cs * as;
    }
    const Eigen::MatrixXcd ak = inv0 * rhs;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) amb.at(k, i, j) = ak(i, j);
  }

  double scale = 0.0;
  for (int k = 0; k <= order; ++k) scale = std::max(scale, amb.max_abs(k));
  scale = std::max(scale, 1.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (i != j && std::abs(amb.at(0, i, j)) > tol * scale)
        throw AmbiguityShapeError("leading ambiguity term is not the identity");
  for (int i = 0; i < r; ++i)
    if (std::abs(amb.at(0, i, i) - Cplx(1.0)) > tol * scale)
      throw AmbiguityShapeError("leading ambiguity term is not the identity");
  for (int k = 1; k <= order; ++k)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        if (i != j && std::abs(amb.at(k, i, j)) > tol * scale)
          throw AmbiguityShapeError("ambiguity has an off-diagonal entry at order " +
                                    std::to_string(k));
  // diagonal log must carry odd powers only
  for (int a = 0; a < r; ++a) {
    std::vector<Cplx> lg(size_t(order) + 1, Cplx(0.0));
    for (int k = 1; k <= order; ++k) {
      Cplx s = double(k) * amb.at(k, a, a);
      for (int j = 1; j < k; ++j) s -= double(j) * lg[size_t(j)] * amb.at(k - j, a, a);
      lg[size_t(k)] = s / (double(k) * amb.at(0, a, a));
      if (k % 2 == 0 && std::abs(lg[size_t(k)]) > tol * scale)
        throw AmbiguityShapeError("ambiguity log has an even power at order " + std::to_string(k));
    }
  }
  return amb;
}

}  // namespace wpm
