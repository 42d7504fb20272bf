#pragma once

// Truncated Laurent series in one and two variables with explicit knowledge
// windows.  A Series1 knows its coefficients on [lo, hi]; exponents below lo
// are exactly zero, exponents above hi are unknown and reading one throws.
// Window arithmetic is conservative: every operation reports the largest
// window on which its output is fully determined by known inputs.

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "wpm/common.hpp"

#include <boost/multiprecision/cpp_int.hpp>

namespace wpm {

using Rational = boost::multiprecision::cpp_rational;

template <class K>
struct Field;

template <>
struct Field<Cplx> {
  static constexpr bool exact = false;
  static double mag(const Cplx& x) { return std::abs(x); }
  static bool is_zero(const Cplx& x) { return x == Cplx(0.0, 0.0); }
  static Cplx sqrt(const Cplx& x) { return std::sqrt(x); }
  static Cplx from_int(long long n) { return Cplx(double(n), 0.0); }
};

template <>
struct Field<Rational> {
  static constexpr bool exact = true;
  static double mag(const Rational& x) { return std::abs(x.convert_to<double>()); }
  static bool is_zero(const Rational& x) { return x == 0; }
  static Rational sqrt(const Rational&) { throw NumericFailure("no exact sqrt"); }
  static Rational from_int(long long n) { return Rational(n); }
};

template <>
struct Field<double> {
  static constexpr bool exact = false;
  static double mag(double x) { return std::fabs(x); }
  static bool is_zero(double x) { return x == 0.0; }
  static double sqrt(double x) { return std::sqrt(x); }
  static double from_int(long long n) { return double(n); }
};

template <class K>
class Series1 {
 public:
  Series1() : lo_(0), hi_(-1) {}
  Series1(int lo, int hi) : lo_(lo), hi_(hi) {
    if (hi_ >= lo_) c_.assign(size_t(hi_ - lo_ + 1), K());
  }
  Series1(int lo, int hi, std::string var) : Series1(lo, hi) { var_ = std::move(var); }

  static Series1 zero(int hi, std::string var = {}) {
    Series1 s(0, hi, std::move(var));
    return s;
  }
  static Series1 monomial(const K& c, int e, int hi, std::string var = {}) {
    Series1 s(std::min(e, 0), hi, std::move(var));
    if (e > hi) throw std::out_of_range("monomial exponent above window");
    s.set(e, c);
    return s;
  }
  static Series1 one(int hi, std::string var = {}) {
    return monomial(Field<K>::from_int(1), 0, hi, std::move(var));
  }

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  const std::string& var() const { return var_; }
  void set_var(std::string v) { var_ = std::move(v); }

  bool known(int e) const { return e < lo_ || e <= hi_; }

  K coeff(int e) const {
    if (e < lo_) return K();
    if (e > hi_) throw std::out_of_range("Series1::coeff exponent " + std::to_string(e) +
                                         " above window hi=" + std::to_string(hi_));
    return c_[size_t(e - lo_)];
  }

  void set(int e, const K& v) {
    if (e < lo_ || e > hi_) throw std::out_of_range("Series1::set outside window");
    c_[size_t(e - lo_)] = v;
  }

  void add_to(int e, const K& v) {
    if (e < lo_ || e > hi_) throw std::out_of_range("Series1::add_to outside window");
    c_[size_t(e - lo_)] += v;
  }

  // First exponent whose coefficient is not exactly zero; hi_+1 if the whole
  // window vanishes.  Used to sharpen windows: a series is exactly zero below
  // its effective lo.
  int effective_lo() const {
    for (int e = lo_; e <= hi_; ++e)
      if (!Field<K>::is_zero(c_[size_t(e - lo_)])) return e;
    return hi_ + 1;
  }

  double max_mag() const {
    double m = 0.0;
    for (const auto& x : c_) m = std::max(m, Field<K>::mag(x));
    return m;
  }

  bool is_zero() const { return effective_lo() > hi_; }

  Series1 truncated(int new_hi) const {
    Series1 r(lo_, std::min(hi_, new_hi), var_);
    for (int e = r.lo_; e <= r.hi_; ++e) r.set(e, coeff(e));
    return r;
  }

  Series1 shifted(int k) const {  // multiply by z^k
    Series1 r(lo_ + k, hi_ + k, var_);
    r.c_ = c_;
    return r;
  }

  Series1 derivative() const {
    Series1 r(lo_ - 1, hi_ - 1, var_);
    for (int e = lo_; e <= hi_; ++e) r.set(e - 1, coeff(e) * Field<K>::from_int(e));
    return r;
  }

  K eval(const K& x) const {  // Horner over the window; lo_ may be negative
    K r{};
    for (int e = hi_; e >= lo_; --e) r = r * x + coeff(e);
    K shift{Field<K>::from_int(1)};
    if (lo_ > 0) {
      for (int j = 0; j < lo_; ++j) shift = shift * x;
    } else if (lo_ < 0) {
      for (int j = 0; j < -lo_; ++j) shift = shift / x;
    }
    return r * shift;
  }

  std::string join_var(const Series1& b) const {
    if (!var_.empty() && !b.var_.empty() && var_ != b.var_)
      throw std::logic_error("series variable mismatch: " + var_ + " vs " + b.var_);
    return var_.empty() ? b.var_ : var_;
  }

  friend Series1 operator+(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.lo_, b.lo_), std::min(a.hi_, b.hi_), a.join_var(b));
    for (int e = r.lo_; e <= r.hi_; ++e) r.set(e, a.coeff(e) + b.coeff(e));
    return r;
  }
  friend Series1 operator-(const Series1& a, const Series1& b) {
    Series1 r(std::min(a.lo_, b.lo_), std::min(a.hi_, b.hi_), a.join_var(b));
    for (int e = r.lo_; e <= r.hi_; ++e) r.set(e, a.coeff(e) - b.coeff(e));
    return r;
  }
  Series1 operator-() const {
    Series1 r(lo_, hi_, var_);
    for (int e = lo_; e <= hi_; ++e) r.set(e, -coeff(e));
    return r;
  }

  friend Series1 operator*(const Series1& a, const Series1& b) {
    const int ea = a.effective_lo(), eb = b.effective_lo();
    // One factor exactly zero on its window: product is zero at least through
    // the window the general formula would grant a one-term factor.
    const int rlo = ea + eb;
    const int rhi = std::min(a.hi_ + eb, b.hi_ + ea);
    Series1 r(rlo, rhi, a.join_var(b));
    for (int i = std::max(ea, a.lo_); i <= a.hi_; ++i) {
      if (Field<K>::is_zero(a.c_[size_t(i - a.lo_)])) continue;
      const int jmax = std::min(b.hi_, rhi - i);
      for (int j = eb; j <= jmax; ++j) {
        const K bj = b.coeff(j);
        if (Field<K>::is_zero(bj)) continue;
        r.add_to(i + j, a.c_[size_t(i - a.lo_)] * bj);
      }
    }
    return r;
  }

  friend Series1 operator*(const Series1& a, const K& s) {
    Series1 r(a.lo_, a.hi_, a.var_);
    for (int e = a.lo_; e <= a.hi_; ++e) r.set(e, a.coeff(e) * s);
    return r;
  }
  friend Series1 operator*(const K& s, const Series1& a) { return a * s; }

  // Leading exponent for division/sqrt: first coefficient of magnitude above
  // rel_tol * max |coeff|.  Smaller leading entries are treated as numerical
  // zeros.  Exact fields use exact-zero detection.
  int leading_exponent(double rel_tol = kDefaultRelTol) const {
    if (Field<K>::exact) {
      const int e = effective_lo();
      if (e > hi_) throw DegenerateSeries("series vanishes on its window");
      return e;
    }
    const double cutoff = rel_tol * max_mag();
    for (int e = lo_; e <= hi_; ++e)
      if (Field<K>::mag(c_[size_t(e - lo_)]) > cutoff) return e;
    throw DegenerateSeries("no coefficient above tolerance");
  }

  friend Series1 operator/(const Series1& a, const Series1& b) {
    return a * b.inverse();
  }

  // 1/b, windowed so that (a/b) is valid for the caller a.  Standalone
  // inverse: window [-v, hi - 2v] where v is b's leading exponent.
  Series1 inverse(double rel_tol = kDefaultRelTol) const {
    const int v = leading_exponent(rel_tol);
    const int ord = hi_ - v;  // relative orders available
    // unit part u: u_k = coeff(v + k), k = 0..ord, u_0 != 0
    std::vector<K> w(size_t(ord) + 1);
    const K u0 = coeff(v);
    w[0] = Field<K>::from_int(1) / u0;
    for (int k = 1; k <= ord; ++k) {
      K s{};
      for (int j = 1; j <= k; ++j) s += coeff(v + j) * w[size_t(k - j)];
      w[size_t(k)] = -s / u0;
    }
    Series1 r(-v, hi_ - 2 * v, var_);
    for (int k = 0; k <= ord && -v + k <= r.hi_; ++k) r.set(-v + k, w[size_t(k)]);
    return r;
  }

  // exp of a series with positive effective valuation (constant term zero).
  friend Series1 exp_series(const Series1& a) {
    for (int e = a.lo_; e <= std::min(0, a.hi_); ++e)
      if (!Field<K>::is_zero(a.coeff(e))) {
        if (e < 0) throw PoleAtOrigin("exp of a Laurent series");
        throw DegenerateSeries("exp needs vanishing constant term");
      }
    Series1 r(0, a.hi_, a.var_);
    if (a.hi_ < 0) return r;
    r.set(0, Field<K>::from_int(1));
    for (int k = 1; k <= a.hi_; ++k) {
      K s{};
      for (int j = 1; j <= k; ++j) s += Field<K>::from_int(j) * a.coeff(j) * r.coeff(k - j);
      r.set(k, s / Field<K>::from_int(k));
    }
    return r;
  }

  // Branch of the square root: leading exponent must be even (else
  // BranchPoint).  plus=true takes the principal root of the leading
  // coefficient, plus=false its negative.
  friend Series1 sqrt_branch(const Series1& a, bool plus, double rel_tol) {
    const int v = a.leading_exponent(rel_tol);
    if (v % 2 != 0) throw BranchPoint("odd leading exponent under sqrt");
    const int t = v / 2;
    const int ord = a.hi_ - v;
    std::vector<K> r(size_t(ord) + 1);
    K r0 = Field<K>::sqrt(a.coeff(v));
    if (!plus) r0 = -r0;
    r[0] = r0;
    for (int k = 1; k <= ord; ++k) {
      K s{};
      for (int j = 1; j + 1 <= k; ++j) s += r[size_t(j)] * r[size_t(k - j)];
      r[size_t(k)] = (a.coeff(v + k) - s) / (Field<K>::from_int(2) * r0);
    }
    Series1 out(t, a.hi_ - t, a.var_);
    for (int k = 0; k <= ord; ++k) out.set(t + k, r[size_t(k)]);
    return out;
  }
  friend Series1 sqrt_branch(const Series1& a, bool plus) {
    return sqrt_branch(a, plus, kDefaultRelTol);
  }

  // a(b(w)) for a power series a (lo >= 0) and b with positive valuation.
  friend Series1 compose(const Series1& a, const Series1& b) {
    if (a.lo_ < 0) throw PoleAtOrigin("compose with Laurent outer series");
    if (b.effective_lo() < 1) throw NotInvertible("inner series needs positive valuation");
    Series1 r = Series1::zero(b.hi_, b.var_);
    for (int e = a.hi_; e >= a.lo_; --e) {
      r = r * b;
      Series1 c = Series1::monomial(a.coeff(e), 0, r.hi_, b.var_);
      r = r + c;
    }
    if (a.lo_ > 0) {
      Series1 blo = Series1::one(b.hi_, b.var_);
      for (int j = 0; j < a.lo_; ++j) blo = blo * b;
      r = r * blo;
    }
    return r;
  }

  // Compositional inverse of a = a_1 w + a_2 w^2 + ... with a_1 != 0.
  friend Series1 revert(const Series1& a) {
    if (a.lo_ > 1 || !a.known(1)) throw NotInvertible("no linear coefficient");
    for (int e = std::min(0, a.lo_); e <= 0; ++e)
      if (a.known(e) && !Field<K>::is_zero(a.coeff(e)))
        throw NotInvertible("nonzero constant term");
    const K a1 = a.coeff(1);
    if (Field<K>::is_zero(a1)) throw NotInvertible("vanishing linear coefficient");
    const int kmax = a.hi_;
    // strip terms below degree 1, keep window
    Series1 an(1, kmax, a.var_);
    for (int e = 1; e <= kmax; ++e) an.set(e, a.coeff(e));
    Series1 s = Series1::monomial(Field<K>::from_int(1) / a1, 1, kmax, a.var_);
    for (int it = 2; it <= kmax; ++it) {
      Series1 comp = compose(an, s);  // should equal w through current order
      Series1 resid = comp - Series1::monomial(Field<K>::from_int(1), 1, comp.hi(), a.var_);
      s = s - resid * (Field<K>::from_int(1) / a1);
      s = s.truncated(kmax);
    }
    return s;
  }

  friend Series1 compose_check(const Series1& a, const Series1& b) { return compose(a, b); }

 private:
  int lo_, hi_;
  std::vector<K> c_;
  std::string var_;
};

using SeriesC = Series1<Cplx>;
using SeriesQ = Series1<Rational>;

// ---------------------------------------------------------------------------

// Bivariate truncated series supported in z^k w^l with k in [zlo, zhi],
// l in [wlo, whi], and a total-degree cap: entries with k + l > deg_hi are
// unknown.  Below either lower bound the series is exactly zero.
template <class K>
class Series2 {
 public:
  Series2() : zlo_(0), zhi_(-1), wlo_(0), whi_(-1), dh_(INT_MAX / 4) {}
  Series2(int zlo, int zhi, int wlo, int whi, int deg_hi = INT_MAX / 4)
      : zlo_(zlo), zhi_(zhi), wlo_(wlo), whi_(whi), dh_(deg_hi) {
    if (zhi_ >= zlo_ && whi_ >= wlo_)
      c_.assign(size_t(zhi_ - zlo_ + 1) * size_t(whi_ - wlo_ + 1), K());
  }

  int zlo() const { return zlo_; }
  int zhi() const { return zhi_; }
  int wlo() const { return wlo_; }
  int whi() const { return whi_; }
  int deg_hi() const { return dh_; }

  bool known(int k, int l) const {
    if (k < zlo_ || l < wlo_) return true;  // exactly zero
    return k <= zhi_ && l <= whi_ && k + l <= dh_;
  }

  K coeff(int k, int l) const {
    if (k < zlo_ || l < wlo_) return K();
    if (k > zhi_ || l > whi_ || k + l > dh_)
      throw std::out_of_range("Series2::coeff outside window (" + std::to_string(k) + "," +
                              std::to_string(l) + ")");
    return c_[idx(k, l)];
  }

  void set(int k, int l, const K& v) {
    if (!inside(k, l)) throw std::out_of_range("Series2::set outside storage");
    c_[idx(k, l)] = v;
  }
  void add_to(int k, int l, const K& v) {
    if (!inside(k, l)) throw std::out_of_range("Series2::add_to outside storage");
    c_[idx(k, l)] += v;
  }

  double max_mag() const {
    double m = 0.0;
    for (const auto& x : c_) m = std::max(m, Field<K>::mag(x));
    return m;
  }

  Series2 transposed() const {
    Series2 r(wlo_, whi_, zlo_, zhi_, dh_);
    for (int k = zlo_; k <= zhi_; ++k)
      for (int l = wlo_; l <= whi_; ++l)
        if (k + l <= dh_) r.set(l, k, coeff(k, l));
    return r;
  }

  Series2 w_negated() const {  // w -> -w
    Series2 r(zlo_, zhi_, wlo_, whi_, dh_);
    for (int k = zlo_; k <= zhi_; ++k)
      for (int l = wlo_; l <= whi_; ++l)
        if (k + l <= dh_) r.set(k, l, (l % 2 == 0) ? coeff(k, l) : -coeff(k, l));
    return r;
  }

  friend Series2 operator+(const Series2& a, const Series2& b) {
    Series2 r(std::min(a.zlo_, b.zlo_), std::min(a.zhi_, b.zhi_), std::min(a.wlo_, b.wlo_),
              std::min(a.whi_, b.whi_), std::min(a.dh_, b.dh_));
    for (int k = r.zlo_; k <= r.zhi_; ++k)
      for (int l = r.wlo_; l <= r.whi_; ++l)
        if (k + l <= r.dh_) r.set(k, l, a.coeff(k, l) + b.coeff(k, l));
    return r;
  }
  friend Series2 operator-(const Series2& a, const Series2& b) {
    Series2 r(std::min(a.zlo_, b.zlo_), std::min(a.zhi_, b.zhi_), std::min(a.wlo_, b.wlo_),
              std::min(a.whi_, b.whi_), std::min(a.dh_, b.dh_));
    for (int k = r.zlo_; k <= r.zhi_; ++k)
      for (int l = r.wlo_; l <= r.whi_; ++l)
        if (k + l <= r.dh_) r.set(k, l, a.coeff(k, l) - b.coeff(k, l));
    return r;
  }
  Series2 operator-() const {
    Series2 r(zlo_, zhi_, wlo_, whi_, dh_);
    for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = -c_[i];
    return r;
  }
  friend Series2 operator*(const Series2& a, const K& s) {
    Series2 r = a;
    for (auto& x : r.c_) x = x * s;
    return r;
  }
  friend Series2 operator*(const K& s, const Series2& a) { return a * s; }

  friend Series2 operator*(const Series2& a, const Series2& b) {
    const int zlo = a.zlo_ + b.zlo_, wlo = a.wlo_ + b.wlo_;
    const int zhi = std::min(a.zhi_ + b.zlo_, b.zhi_ + a.zlo_);
    const int whi = std::min(a.whi_ + b.wlo_, b.whi_ + a.wlo_);
    const int dh = std::min(a.dh_ + b.zlo_ + b.wlo_, b.dh_ + a.zlo_ + a.wlo_);
    Series2 r(zlo, zhi, wlo, whi, dh);
    for (int ka = a.zlo_; ka <= a.zhi_; ++ka)
      for (int la = a.wlo_; la <= a.whi_; ++la) {
        if (ka + la > a.dh_) continue;
        const K va = a.coeff(ka, la);
        if (Field<K>::is_zero(va)) continue;
        for (int kb = b.zlo_; kb <= b.zhi_ && ka + kb <= r.zhi_; ++kb)
          for (int lb = b.wlo_; lb <= b.whi_ && la + lb <= r.whi_; ++lb) {
            if (kb + lb > b.dh_) continue;
            if (ka + kb + la + lb > r.dh_) continue;
            const K vb = b.coeff(kb, lb);
            if (Field<K>::is_zero(vb)) continue;
            r.add_to(ka + kb, la + lb, va * vb);
          }
      }
    return r;
  }

  // 1/a for a with nonzero constant term and zlo = wlo = 0.
  Series2 inverse2(double rel_tol = kDefaultRelTol) const {
    if (zlo_ != 0 || wlo_ != 0) throw NotInvertible("inverse2 needs zlo=wlo=0");
    const K a00 = coeff(0, 0);
    if (Field<K>::mag(a00) <= rel_tol * max_mag())
      throw NotInvertible("constant term numerically zero");
    Series2 r(0, zhi_, 0, whi_, dh_);
    for (int d = 0; d <= std::min(dh_, zhi_ + whi_); ++d) {
      for (int k = std::max(0, d - whi_); k <= std::min(d, zhi_); ++k) {
        const int l = d - k;
        K s{};
        if (k == 0 && l == 0) s = Field<K>::from_int(1);
        for (int i = 0; i <= k; ++i)
          for (int j = 0; j <= l; ++j) {
            if (i == 0 && j == 0) continue;
            if (i + j > dh_) continue;
            s -= coeff(i, j) * r.coeff(k - i, l - j);
          }
        r.set(k, l, s / a00);
      }
    }
    return r;
  }

  // D(z, w) / (z + c w) for c = +-1.  Requires zlo = wlo = 0 and checks the
  // divisibility condition on the anti-diagonals it can see.
  Series2 divide_linear(int c, double rel_tol = kDefaultRelTol) const {
    if (c != 1 && c != -1) throw std::logic_error("divide_linear: c must be +-1");
    if (zlo_ != 0 || wlo_ != 0) throw NotDivisible("divide_linear needs zlo=wlo=0");
    const double scale = std::max(max_mag(), 1e-300);
    const K cc = Field<K>::from_int(c);
    const int dmax = std::min(std::min(zhi_, whi_), dh_);
    for (int d = 0; d <= dmax; ++d) {
      // D restricted to the line w = -c z must vanish: sum_k D_{k, d-k} (-c)^{d-k}
      K s{};
      for (int k = 0; k <= d; ++k) {
        K t = coeff(k, d - k);
        if ((d - k) % 2 == 1) t = t * cc;  // (-c)^{d-k}: c^{d-k} * (-1)^{d-k}
        if ((d - k) % 2 == 1) t = -t;
        s += t;
      }
      if (Field<K>::mag(s) > rel_tol * scale * double(d + 1))
        throw NotDivisible("kernel line residual " + std::to_string(Field<K>::mag(s)) +
                           " at diagonal " + std::to_string(d));
    }
    // Q_{k,l}: D_{k,l} = Q_{k-1,l} + c Q_{k,l-1}
    // iterate l upward: Q_{k,l} = (D_{k+1,l} - c^{-1}... ) derived:
    // Q_{k, l} = D_{k+1, l} - c Q_{k+1, l-1}
    const int qzhi = zhi_ - 1, qwhi = whi_;
    const int qdh = std::min(dh_, std::min(zhi_, whi_)) - 1;
    Series2 q(0, qzhi, 0, qwhi, qdh);
    for (int l = 0; l <= qwhi; ++l)
      for (int k = qzhi; k >= 0; --k) {
        if (k + l > qdh) continue;
        K v = (k + 1 <= zhi_ && l <= whi_) ? coeff(k + 1, l) : K();
        if (l >= 1 && k + 1 <= qzhi && (k + 1) + (l - 1) <= qdh)
          v -= cc * q.coeff(k + 1, l - 1);
        q.set(k, l, v);
      }
    return q;
  }

  // Restriction to the diagonal w = s*z as a univariate series.
  Series1<K> diagonal(const K& s) const {
    const int lo = zlo_ + wlo_;
    const int hi = std::min(dh_, zhi_ + whi_);
    Series1<K> r(lo, hi);
    for (int k = zlo_; k <= zhi_; ++k)
      for (int l = wlo_; l <= whi_; ++l) {
        if (k + l > dh_) continue;
        K v = coeff(k, l);
        for (int j = 0; j < l; ++j) v = v * s;
        r.add_to(k + l, v);
      }
    return r;
  }

  // Evaluate at numeric (z, w).
  K eval(const K& z, const K& w) const {
    K r{};
    for (int k = zlo_; k <= zhi_; ++k)
      for (int l = wlo_; l <= whi_; ++l) {
        if (k + l > dh_) continue;
        K t = coeff(k, l);
        for (int j = 0; j < k; ++j) t = t * z;
        for (int j = 0; j < l; ++j) t = t * w;
        r += t;
      }
    return r;
  }

 private:
  bool inside(int k, int l) const {
    return k >= zlo_ && k <= zhi_ && l >= wlo_ && l <= whi_;
  }
  size_t idx(int k, int l) const {
    return size_t(k - zlo_) * size_t(whi_ - wlo_ + 1) + size_t(l - wlo_);
  }
  int zlo_, zhi_, wlo_, whi_, dh_;
  std::vector<K> c_;
};

using Series2C = Series2<Cplx>;

// (delta-type kernels often need) D(z,w)/(z+w).
template <class K>
Series2<K> divide_sum_kernel(const Series2<K>& d, double rel_tol = kDefaultRelTol) {
  return d.divide_linear(1, rel_tol);
}

}  // namespace wpm
