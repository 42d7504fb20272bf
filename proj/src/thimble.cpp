#include "wpm/thimble.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace wpm {

namespace {

constexpr double kPi = std::numbers::pi;

// exp((w - shift)/z) with overflow/underflow guards; z < 0
Cplx guarded_exp(Cplx w, double z) {
  const double re = w.real() / z;
  if (re > 700.0) throw TailError("contour magnitude overflow");
  if (re < -745.0) return Cplx(0.0);
  return std::exp(w / z);
}

Cplx cexpm1(Cplx w) {
  if (std::abs(w) > 0.5) return std::exp(w) - 1.0;
  Cplx term = w, sum = w;
  for (int j = 2; j <= 22; ++j) {
    term *= w / double(j);
    sum += term;
  }
  return sum;
}

struct TsRule {
  std::vector<double> x, w;  // nodes and weights on (0, 1), x ascending
};

TsRule ts_rule(double h) {
  TsRule r;
  const double T = 3.7;
  for (double t = -T; t <= T + 1e-12; t += h) {
    const double sh = 0.5 * kPi * std::sinh(t);
    const double dxdt = 0.25 * kPi * std::cosh(t) / (std::cosh(sh) * std::cosh(sh));
    if (dxdt < 1e-18) continue;
    const double x = 0.5 * (1.0 + std::tanh(sh));
    if (x <= 0.0 || x >= 1.0) continue;  // tanh underflow at the rim
    r.x.push_back(x);
    r.w.push_back(h * dxdt);
  }
  return r;
}

using Fn = std::function<Cplx(Cplx)>;
// node value without the exponential envelope: (y, zeta_R, dy/dzeta_R)
using NodeFn = std::function<Cplx(Cplx, double, Cplx)>;

struct PathSpec {
  Fn W, dW;                      // in the log coordinate
  Cplx y0, u;
  Cplx tan0;                     // dy/dzeta_R at the saddle
  const SeriesC* sser = nullptr; // y - y0 as a series in zeta = i zeta_R
  SeriesC sder;
  double sigc = 0.0;             // series trusted for sigma < sigc
  // without a local series, tangents near the stationary point keep
  // solver-tolerance noise; the refinement then bottoms out early
  double settle = 1e-12;
};

Cplx newton_level(const PathSpec& ps, Cplx y_pred, double s) {
  const double scale = 1.0 + s + std::abs(ps.u);
  Cplx y = y_pred;
  Cplx res = ps.W(y) - ps.u - s;
  for (int it = 0; it < 40; ++it) {
    if (std::abs(res) <= 1e-12 * scale) return y;
    const Cplx d = ps.dW(y);
    if (d == Cplx(0.0)) break;
    Cplx step = res / d;
    bool moved = false;
    for (int half = 0; half < 10; ++half) {
      const Cplx yn = y - step;
      const Cplx rn = ps.W(yn) - ps.u - s;
      if (std::abs(rn) < std::abs(res)) {
        y = yn;
        res = rn;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  if (std::abs(res) <= 1e-9 * scale) return y;
  throw StepFailure("level solve stalled");
}

struct Walker {
  const PathSpec* ps;
  int dir;
  Cplx y;
  double sig;
  Cplx dyds;  // dy/dsigma on this leg
  bool live = false;

  void seed() {
    y = ps->y0;
    sig = 0.0;
    dyds = double(dir) * ps->tan0;
    if (ps->sser && ps->sigc > 0.0) {
      const Cplx zeta = Cplx(0.0, 1.0) * double(dir) * ps->sigc;
      y = ps->y0 + ps->sser->eval(zeta);
      sig = ps->sigc;
      dyds = double(dir) * Cplx(0.0, 1.0) * ps->sder.eval(zeta);
    }
    live = true;
  }

  // advance to sigma target with bounded predictor steps
  void to(double target) {
    if (!live) seed();
    while (sig < target) {
      const double next = std::min(target, sig + 0.08 * (1.0 + sig));
      const Cplx y_pred = y + dyds * (next - sig);
      y = newton_level(*ps, y_pred, next * next);
      sig = next;
      const Cplx d = ps->dW(y);
      const double zr = dir * sig;
      // so close to the saddle that dW is rounding noise, keep the tangent
      if (d != Cplx(0.0) &&
          std::abs(y - ps->y0) > 3e-6 * (1.0 + std::abs(ps->y0)))
        dyds = double(dir) * (2.0 * zr / d);
    }
  }
};

Cplx leg_value(const PathSpec& ps, int dir, double L, double z, const NodeFn& g,
               double h, double& abssum) {
  const TsRule r = ts_rule(h);
  Walker walk{&ps, dir};
  Cplx acc(0.0);
  for (size_t j = 0; j < r.x.size(); ++j) {
    const double sig = L * r.x[j];
    const double env = std::exp(sig * sig / z);
    if (env < 1e-25) {
      if (sig > 0.5 * L) break;
      continue;
    }
    Cplx y, dydzr;
    if (ps.sser && sig < ps.sigc) {
      const Cplx zeta = Cplx(0.0, 1.0) * double(dir) * sig;
      y = ps.y0 + ps.sser->eval(zeta);
      dydzr = Cplx(0.0, 1.0) * ps.sder.eval(zeta);
    } else {
      try {
        walk.to(sig);
      } catch (const StepFailure&) {
        if (r.w[j] < 1e-9) continue;  // double-exponentially damped endpoint
        throw;
      }
      y = walk.y;
      dydzr = double(dir) * walk.dyds;
    }
    const Cplx val = env * g(y, dir * sig, dydzr);
    acc += (L * r.w[j]) * val;
    abssum += L * r.w[j] * std::abs(val);
  }
  return acc;
}

Cplx saddle_quadrature(const PathSpec& ps, double L, double z, const NodeFn& g) {
  Cplx prev(0.0);
  bool have = false;
  for (double h = 0.25; h > 0.006; h *= 0.5) {
    double abssum = 1e-300;
    const Cplx cur = leg_value(ps, +1, L, z, g, h, abssum) +
                     leg_value(ps, -1, L, z, g, h, abssum);
    if (have && std::abs(cur - prev) <= ps.settle * std::max(1.0, abssum))
      return cur;
    prev = cur;
    have = true;
  }
  throw TailError("level-path quadrature did not settle");
}

double series_trust_radius(const SeriesC& s) {
  const int K = s.hi();
  for (double sc : {0.35, 0.25, 0.18, 0.12, 0.08, 0.05, 0.03}) {
    const double tail = std::abs(s.coeff(K)) * std::pow(sc, K) +
                        std::abs(s.coeff(K - 1)) * std::pow(sc, K - 1);
    if (tail < 1e-16) return sc;
  }
  return 0.02;
}

PathSpec model_path(const Superpotential& w, const Chart& ch) {
  PathSpec ps;
  ps.W = [&w](Cplx y) { return w.eval_logy(y); };
  ps.dW = [&w](Cplx y) { return w.f(std::exp(y)); };
  ps.y0 = std::log(ch.p);
  ps.u = ch.u;
  ps.tan0 = Cplx(0.0, -1.0) * ch.h1;
  ps.sser = &ch.s_of_zeta;
  ps.sder = ch.s_of_zeta.derivative();
  ps.sigc = series_trust_radius(ch.s_of_zeta);
  return ps;
}

// straight-segment quadrature of e^{W/z} g(y) dy with level doubling
Cplx segment_value(const Superpotential& w, Cplx ya, Cplx yb, double z,
                   const Fn& g) {
  const Cplx d = yb - ya;
  Cplx prev(0.0);
  bool have = false;
  for (double h = 0.25; h > 0.006; h *= 0.5) {
    double abssum = 1e-300;
    Cplx acc(0.0);
    const TsRule r = ts_rule(h);
    for (size_t j = 0; j < r.x.size(); ++j) {
      const Cplx y = ya + r.x[j] * d;
      const Cplx val = guarded_exp(w.eval_logy(y), z) * g(y);
      acc += r.w[j] * val;
      abssum += r.w[j] * std::abs(val);
    }
    acc *= d;
    if (have && std::abs(acc - prev) <= 1e-12 * std::max(1.0, abssum * std::abs(d)))
      return acc;
    prev = acc;
    have = true;
  }
  throw TailError("contour quadrature did not settle");
}

// horizontal reach at the given height: march until the integrand weight has
// dropped 1e-16 below the leg peak
double horizontal_reach(const Superpotential& w, double z, double height, int dirx) {
  double peak = -1e300;
  for (double x = 0.0; x <= 500.0; x += 0.25) {
    const Cplx y(dirx * x, height);
    const Cplx wv = w.eval_logy(y);
    const double lm = wv.real() / z;
    if (!std::isfinite(lm)) return x;
    if (lm > 700.0) throw TailError("contour fails to decay");
    peak = std::max(peak, lm);
    const double extra =
        std::log1p(std::abs(y) + std::abs(w.f(std::exp(y))));
    if (x >= 1.0 && lm + extra < peak - 36.85) return x;
  }
  throw TailError("contour truncation not reached");
}

Cplx kSqrtM2() { return Cplx(0.0, std::sqrt(2.0)); }  // principal sqrt(-2)

}  // namespace

Contour trace_thimble(const Superpotential& w, const std::vector<Chart>& charts,
                      int beta, double length) {
  const int r = int(charts.size());
  if (beta < 0 || beta >= r) throw ConfigError("saddle index out of range");
  if (!(length > 0.0)) throw ConfigError("trace length must be positive");
  const Chart& ch = charts[size_t(beta)];

  Contour c;
  c.kind = ContourKind::thimble;
  c.beta = beta;
  c.smax = length;
  for (int g = 0; g < r; ++g) {
    if (g == beta) continue;
    const Cplx ds = charts[size_t(g)].u - ch.u;
    if (std::abs(ds.imag()) <= 1e-9 * (1.0 + std::abs(ds)) && ds.real() > 1e-12 &&
        ds.real() <= length) {
      c.stokes.push_back(g);
      c.smax = std::min(c.smax, ds.real());
    }
  }

  PathSpec ps = model_path(w, ch);
  const double send = std::sqrt(c.smax) * (1.0 - 1e-9);
  const int steps = 160;
  std::vector<Cplx> plus, minus;
  for (int dir : {+1, -1}) {
    Walker walk{&ps, dir};
    std::vector<Cplx>& out = (dir > 0) ? plus : minus;
    for (int j = 1; j <= steps; ++j) {
      const double sig = send * double(j) / double(steps);
      Cplx y;
      if (sig < ps.sigc) {
        y = ps.y0 + ps.sser->eval(Cplx(0.0, 1.0) * double(dir) * sig);
      } else {
        walk.to(sig);
        y = walk.y;
      }
      for (int g = 0; g < r; ++g) {
        if (g == beta) continue;
        if (std::abs(std::exp(y) - charts[size_t(g)].p) <
            1e-6 * (1.0 + std::abs(charts[size_t(g)].p))) {
          if (std::find(c.stokes.begin(), c.stokes.end(), g) == c.stokes.end())
            c.stokes.push_back(g);
          c.smax = std::min(c.smax, sig * sig);
        }
      }
      out.push_back(y);
      if (sig * sig >= c.smax) break;
    }
  }
  c.points.assign(minus.rbegin(), minus.rend());
  c.points.push_back(ps.y0);
  c.points.insert(c.points.end(), plus.begin(), plus.end());
  c.winding = int(std::lround(
      (c.points.back().imag() - c.points.front().imag()) / (2.0 * kPi)));
  std::sort(c.stokes.begin(), c.stokes.end());
  return c;
}

Contour ray_contour(const std::vector<Chart>& charts, int beta, double length) {
  if (beta < 0 || beta >= int(charts.size()))
    throw ConfigError("saddle index out of range");
  if (!(length > 0.0)) throw ConfigError("ray length must be positive");
  const Chart& ch = charts[size_t(beta)];
  Contour c;
  c.kind = ContourKind::ray;
  c.beta = beta;
  c.smax = length;
  const Cplx y0 = std::log(ch.p);
  const Cplx tan = Cplx(0.0, -1.0) * ch.h1;
  const double zend = std::sqrt(length);
  const int steps = 80;
  for (int j = -steps; j <= steps; ++j)
    c.points.push_back(y0 + tan * (zend * double(j) / double(steps)));
  c.winding = int(std::lround(
      (c.points.back().imag() - c.points.front().imag()) / (2.0 * kPi)));
  return c;
}

Contour syz_contour(const Superpotential& w, const KFraming& fr) {
  if (fr.ell1 + fr.ell2 <= 0) throw ConfigError("framing needs ell1 + ell2 > 0");
  if (w.n == 0 && fr.ell1 != 0)
    throw ConfigError("no negative chart to carry the first height");
  Contour c;
  c.kind = ContourKind::syz;
  c.ell1 = fr.ell1;
  c.ell2 = fr.ell2;
  const double a = (w.n == 0) ? 0.0 : -2.0 * kPi * double(fr.ell1) / double(w.n);
  const double b = 2.0 * kPi * double(fr.ell2) / double(w.m);
  c.points = {Cplx(0.0, a), Cplx(0.0, b)};
  c.winding = int(std::lround((b - a) / (2.0 * kPi)));
  return c;
}

Cplx integrate(const Superpotential& w, const std::vector<Chart>& charts,
               const Contour& c, double z, Integrand kind, int alpha) {
  if (!(z < 0.0) || !std::isfinite(z))
    throw ConfigError("z must be real negative");
  const int r = int(charts.size());
  const bool needs_form = (kind == Integrand::theta || kind == Integrand::dxi0);
  if (needs_form && (alpha < 0 || alpha >= r))
    throw ConfigError("form index out of range");

  Cplx pa, ypa, cform;
  if (needs_form) {
    const Chart& cha = charts[size_t(alpha)];
    pa = cha.p;
    ypa = std::log(pa);
    const Cplx ca = std::sqrt(2.0) / (cha.h1 * cha.p);
    cform = -2.0 / (z * ca);
    if (kind == Integrand::dxi0) cform *= Cplx(0.0, -1.0) * std::sqrt(2.0);
  }
  auto y_minus_pa = [&](Cplx y) {
    const Cplx d = y - ypa;
    if (std::abs(d) < 0.4) return pa * cexpm1(d);
    return std::exp(y) - pa;
  };

  if (c.kind == ContourKind::syz) {
    const double a = (w.n == 0) ? 0.0 : -2.0 * kPi * double(c.ell1) / double(w.n);
    const double b = 2.0 * kPi * double(c.ell2) / double(w.m);
    const double xl = horizontal_reach(w, z, a, -1);
    const double xr = horizontal_reach(w, z, b, +1);
    Fn g;
    switch (kind) {
      case Integrand::dy:
        g = [](Cplx) { return Cplx(1.0); };
        break;
      case Integrand::ydx:
        g = [&w](Cplx y) { return y * w.f(std::exp(y)); };
        break;
      default:
        g = [&, cform](Cplx y) {
          return cform * 0.5 * w.f(std::exp(y)) / y_minus_pa(y);
        };
        break;
    }
    // chop each leg so no piece holds more than one saddle-scale peak
    auto leg_sum = [&](Cplx ya, Cplx yb) {
      const int pieces = std::max(1, int(std::ceil(std::abs(yb - ya) / 1.6)));
      Cplx acc(0.0);
      for (int j = 0; j < pieces; ++j) {
        const Cplx p0 = ya + (yb - ya) * (double(j) / pieces);
        const Cplx p1 = ya + (yb - ya) * (double(j + 1) / pieces);
        acc += segment_value(w, p0, p1, z, g);
      }
      return acc;
    };
    return leg_sum(Cplx(-xl, a), Cplx(0.0, a)) +
           leg_sum(Cplx(0.0, a), Cplx(0.0, b)) +
           leg_sum(Cplx(0.0, b), Cplx(xr, b));
  }

  if (c.beta < 0 || c.beta >= r) throw ConfigError("saddle index out of range");
  if (!(c.smax > 0.0)) throw ConfigError("contour carries no level range");
  PathSpec ps = model_path(w, charts[size_t(c.beta)]);
  const double L = std::sqrt(std::min(42.0 * (-z), c.smax));
  NodeFn g;
  switch (kind) {
    case Integrand::dy:
      g = [](Cplx, double, Cplx dydzr) { return dydzr; };
      break;
    case Integrand::ydx:
      g = [](Cplx y, double zr, Cplx) { return y * (2.0 * zr); };
      break;
    default:
      g = [&, cform](Cplx y, double zr, Cplx) {
        return cform * zr / y_minus_pa(y);
      };
      break;
  }
  return saddle_quadrature(ps, L, z, g);
}

Cplx level_path_integral(const std::function<Cplx(Cplx)>& W,
                         const std::function<Cplx(Cplx)>& dW, Cplx y0, Cplx u,
                         Cplx t0, double z,
                         const std::function<Cplx(Cplx)>& g) {
  if (!(z < 0.0) || !std::isfinite(z))
    throw ConfigError("z must be real negative");
  PathSpec ps;
  ps.W = W;
  ps.dW = dW;
  ps.y0 = y0;
  ps.u = u;
  ps.tan0 = t0;
  ps.settle = 1e-9;
  const double L = std::sqrt(42.0 * (-z));
  return saddle_quadrature(
      ps, L, z, [&g](Cplx y, double, Cplx dydzr) { return g(y) * dydzr; });
}

Cplx thimble_r_entry(const Superpotential& w, const std::vector<Chart>& charts,
                     const Contour& c, double z, int alpha) {
  const Cplx val = integrate(w, charts, c, z, Integrand::theta, alpha);
  return Cplx(0.0, -1.0) * std::sqrt(-z / (2.0 * kPi)) * val;
}

double asymptotic_match(const std::vector<double>& zs,
                        const std::vector<Cplx>& numeric,
                        const std::vector<Cplx>& predicted) {
  const size_t n = zs.size();
  if (n < 3 || numeric.size() != n || predicted.size() != n)
    throw ConfigError("need at least three matched samples");
  double scale = 0.0;
  for (const Cplx& v : numeric) scale = std::max(scale, std::abs(v));
  const double floor = 1e-15 * (1.0 + scale);
  std::vector<double> err(n);
  for (size_t j = 0; j < n; ++j) {
    if (j > 0 && !(std::abs(zs[j]) < std::abs(zs[j - 1])))
      throw ConfigError("samples must have decreasing magnitude");
    err[j] = std::abs(numeric[j] - predicted[j]);
  }
  for (size_t j = 1; j < n; ++j)
    if (err[j] > 1.2 * std::max(err[j - 1], floor))
      throw MatchFailure("error grows as z shrinks");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t j = 0; j < n; ++j) {
    const double x = std::log(std::abs(zs[j]));
    const double y = std::log(std::max(err[j], floor));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = double(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

namespace {

std::vector<SlopeFit> entry_slopes(const Superpotential& w,
                                   const std::vector<Chart>& charts,
                                   const MatSeries& rmat,
                                   const std::vector<double>& zs, int kmax,
                                   bool s_normalized) {
  if (kmax < 1 || kmax > rmat.order)
    throw ConfigError("fit order beyond the series");
  if (zs.size() < 3) throw ConfigError("need at least three samples");
  double zmax = 0.0;
  for (double z : zs) {
    if (!(z < 0.0)) throw ConfigError("z must be real negative");
    zmax = std::max(zmax, -z);
  }
  const int r = int(charts.size());
  std::vector<SlopeFit> out;
  for (int b = 0; b < r; ++b) {
    const Contour gb = trace_thimble(w, charts, b, 45.0 * zmax);
    if (!gb.stokes.empty()) continue;
    for (int a = 0; a < r; ++a) {
      std::vector<Cplx> num(zs.size());
      for (size_t j = 0; j < zs.size(); ++j) {
        if (s_normalized) {
          const Cplx val =
              integrate(w, charts, gb, zs[j], Integrand::dxi0, a);
          num[j] = -zs[j] * val / kSqrtM2();
        } else {
          num[j] = thimble_r_entry(w, charts, gb, zs[j], a);
        }
      }
      for (int K = 1; K <= kmax; ++K) {
        std::vector<Cplx> pred(zs.size());
        for (size_t j = 0; j < zs.size(); ++j) {
          Cplx s(0.0);
          Cplx zp(1.0);
          for (int k = 0; k <= K; ++k) {
            s += rmat.at(k, a, b) * zp;
            zp *= zs[j];
          }
          if (s_normalized)
            s *= Cplx(0.0, -1.0) * std::sqrt(2.0 * kPi) * std::sqrt(-zs[j]);
          pred[j] = s;
        }
        out.push_back({a, b, K, asymptotic_match(zs, num, pred)});
      }
    }
  }
  return out;
}

}  // namespace

std::vector<SlopeFit> rmatrix_slopes(const Superpotential& w,
                                     const std::vector<Chart>& charts,
                                     const MatSeries& rmat,
                                     const std::vector<double>& zs, int kmax) {
  return entry_slopes(w, charts, rmat, zs, kmax, false);
}

std::vector<SlopeFit> s_entry_slopes(const Superpotential& w,
                                     const std::vector<Chart>& charts,
                                     const MatSeries& rmat,
                                     const std::vector<double>& zs, int kmax) {
  return entry_slopes(w, charts, rmat, zs, kmax, true);
}

double syz_parts_residual(const Superpotential& w,
                          const std::vector<Chart>& charts, const KFraming& fr,
                          double z) {
  const Contour c = syz_contour(w, fr);
  const Cplx i1 = integrate(w, charts, c, z, Integrand::dy);
  const Cplx i2 = integrate(w, charts, c, z, Integrand::ydx);
  const double scale =
      std::max({std::abs(i2), std::abs(z * i1), 1e-300});
  return std::abs(-z * i1 - i2) / scale;
}

SyzDecomposition syz_decompose(const Superpotential& w,
                               const std::vector<Chart>& charts,
                               const KFraming& fr,
                               const std::vector<double>& zs) {
  const int r = int(charts.size());
  if (int(zs.size()) < r) throw ConfigError("need at least one sample per saddle");
  double zmax = 0.0;
  for (double z : zs) {
    if (!(z < 0.0)) throw ConfigError("z must be real negative");
    zmax = std::max(zmax, -z);
  }
  const Contour sc = syz_contour(w, fr);
  std::vector<Contour> gb;
  gb.reserve(size_t(r));
  for (int b = 0; b < r; ++b)
    gb.push_back(trace_thimble(w, charts, b, 45.0 * zmax));
  Eigen::MatrixXcd mat(long(zs.size()), r);
  Eigen::VectorXcd rhs(long(zs.size()));
  for (size_t j = 0; j < zs.size(); ++j) {
    rhs(long(j)) = integrate(w, charts, sc, zs[j], Integrand::dy);
    for (int b = 0; b < r; ++b) {
      const Cplx tb = integrate(w, charts, gb[size_t(b)], zs[j], Integrand::dy);
      mat(long(j), b) = guarded_exp(charts[size_t(b)].u, zs[j]) * tb;
    }
  }
  const Eigen::VectorXcd sol = mat.colPivHouseholderQr().solve(rhs);
  SyzDecomposition out;
  out.coeff.resize(size_t(r));
  for (int b = 0; b < r; ++b) out.coeff[size_t(b)] = sol(b);
  const double bn = rhs.norm();
  out.residual = (mat * sol - rhs).norm() / std::max(bn, 1e-300);
  return out;
}

}  // namespace wpm
