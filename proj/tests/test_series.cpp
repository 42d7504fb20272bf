#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wpm/series.hpp"

using namespace wpm;

static SeriesQ random_series(std::mt19937& rng, int lo, int hi, int density_pct) {
  SeriesQ s(lo, hi);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7), pct(0, 99);
  for (int e = lo; e <= hi; ++e)
    if (pct(rng) < density_pct) s.set(e, Rational(num(rng), den(rng)));
  return s;
}

TEST_CASE("geometric series inverse") {
  SeriesQ denom(0, 4);
  denom.set(0, 1);
  denom.set(1, -1);
  SeriesQ g = SeriesQ::one(4) / denom;
  for (int e = 0; e <= 4; ++e) CHECK(g.coeff(e) == 1);
  CHECK(g.coeff(-3) == 0);
  CHECK_THROWS_AS((void)g.coeff(5), std::out_of_range);
}

TEST_CASE("reversion of z + z^2") {
  SeriesQ a(0, 3);
  a.set(1, 1);
  a.set(2, 1);
  SeriesQ s = revert(a);
  CHECK(s.coeff(1) == 1);
  CHECK(s.coeff(2) == -1);
  CHECK(s.coeff(3) == 2);
}

TEST_CASE("sqrt branch of 1 + 2z") {
  SeriesC a(0, 2);
  a.set(0, 1.0);
  a.set(1, 2.0);
  SeriesC r = sqrt_branch(a, true);
  CHECK(std::abs(r.coeff(0) - 1.0) < 1e-15);
  CHECK(std::abs(r.coeff(1) - 1.0) < 1e-15);
  CHECK(std::abs(r.coeff(2) + 0.5) < 1e-15);
  SeriesC rm = sqrt_branch(a, false);
  CHECK(std::abs(rm.coeff(0) + 1.0) < 1e-15);
  // square back
  SeriesC sq = r * r;
  CHECK(std::abs(sq.coeff(0) - 1.0) < 1e-14);
  CHECK(std::abs(sq.coeff(1) - 2.0) < 1e-14);
  CHECK(std::abs(sq.coeff(2)) < 1e-14);
}

TEST_CASE("sqrt of odd leading exponent reports branch point") {
  SeriesC a(0, 3);
  a.set(1, 1.0);
  CHECK_THROWS_AS(sqrt_branch(a, true), BranchPoint);
}

TEST_CASE("division by a vanishing series is degenerate") {
  SeriesC a = SeriesC::one(3);
  SeriesC z3 = SeriesC::zero(3);
  CHECK_THROWS_AS(a / z3, DegenerateSeries);
  SeriesC noisy(0, 3);
  noisy.set(0, 1e-16);
  noisy.set(1, 1.0);  // leading entry is noise; effective leading exponent is 1
  SeriesC inv = noisy.inverse();
  CHECK(inv.lo() == -1);
  CHECK(std::abs(inv.coeff(-1) - 1.0) < 1e-12);
}

TEST_CASE("exp series") {
  SeriesQ a(0, 6);
  a.set(1, 1);
  SeriesQ e = exp_series(a);
  Rational f = 1;
  for (int k = 0; k <= 6; ++k) {
    if (k > 0) f *= k;
    CHECK(e.coeff(k) == Rational(1) / f);
  }
  SeriesQ bad(0, 2);
  bad.set(0, 1);
  CHECK_THROWS_AS(exp_series(bad), DegenerateSeries);
  SeriesQ laurent(-1, 2);
  laurent.set(-1, 1);
  CHECK_THROWS_AS(exp_series(laurent), PoleAtOrigin);
}

TEST_CASE("laurent inverse window bookkeeping") {
  // b = z^2 (1 + z): inverse = z^-2 (1 - z + z^2 - ...), window [-2, hi-4]
  SeriesC b(0, 6);
  b.set(2, 1.0);
  b.set(3, 1.0);
  SeriesC inv = b.inverse();
  CHECK(inv.lo() == -2);
  CHECK(inv.hi() == 2);
  for (int e = -2; e <= 2; ++e) CHECK(std::abs(inv.coeff(e) - ((e % 2 == 0) ? 1.0 : -1.0)) < 1e-14);
  SeriesC prod = b * inv;
  CHECK(std::abs(prod.coeff(0) - 1.0) < 1e-14);
  for (int e = 1; e <= prod.hi(); ++e) CHECK(std::abs(prod.coeff(e)) < 1e-14);
}

TEST_CASE("multiplication window is conservative and zero-sharp") {
  SeriesC a(0, 2), b(0, 5);
  a.set(0, 1.0);
  b.set(0, 1.0);
  SeriesC p = a * b;
  CHECK(p.hi() == 2);
  // a factor that vanishes on its whole window forces the product to vanish
  // through that window as well (zero below the combined effective order)
  SeriesC zf = SeriesC::zero(2);
  SeriesC q = zf * b;
  CHECK(q.coeff(2) == Cplx(0.0));
  CHECK(q.known(2));
  CHECK(!q.known(3));  // zf could have any coefficient at z^3
}

TEST_CASE("ring axioms on random rational series") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 40; ++trial) {
    SeriesQ a = random_series(rng, -2, 6, 60);
    SeriesQ b = random_series(rng, 0, 6, 60);
    SeriesQ c = random_series(rng, -1, 5, 60);
    SeriesQ lhs = (a + b) * c;
    SeriesQ rhs = a * c + b * c;
    for (int e = std::max(lhs.lo(), rhs.lo()); e <= std::min(lhs.hi(), rhs.hi()); ++e)
      CHECK(lhs.coeff(e) == rhs.coeff(e));
    SeriesQ assoc1 = (a * b) * c, assoc2 = a * (b * c);
    for (int e = std::max(assoc1.lo(), assoc2.lo()); e <= std::min(assoc1.hi(), assoc2.hi()); ++e)
      CHECK(assoc1.coeff(e) == assoc2.coeff(e));
  }
}

TEST_CASE("inverse and reversion round trips, exact field") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 25; ++trial) {
    SeriesQ a = random_series(rng, 0, 8, 70);
    a.set(0, Rational(1 + trial % 3));  // unit
    SeriesQ inv = a.inverse();
    SeriesQ prod = a * inv;
    CHECK(prod.coeff(0) == 1);
    for (int e = 1; e <= prod.hi(); ++e) CHECK(prod.coeff(e) == 0);

    SeriesQ f = random_series(rng, 1, 7, 80);
    f.set(1, Rational(2 + trial % 4));
    SeriesQ g = revert(f);
    SeriesQ comp = compose(f, g);
    CHECK(comp.coeff(1) == 1);
    for (int e = 2; e <= comp.hi(); ++e) CHECK(comp.coeff(e) == 0);
    SeriesQ comp2 = compose(g, f);
    CHECK(comp2.coeff(1) == 1);
    for (int e = 2; e <= comp2.hi(); ++e) CHECK(comp2.coeff(e) == 0);
  }
}

TEST_CASE("derivative and eval") {
  SeriesQ a(-1, 3);
  a.set(-1, Rational(3));
  a.set(0, 5);
  a.set(2, 7);
  SeriesQ d = a.derivative();
  CHECK(d.coeff(-2) == -3);
  CHECK(d.coeff(1) == 14);
  CHECK(d.coeff(0) == 0);
  SeriesQ p(0, 3);
  p.set(0, 1);
  p.set(1, 2);
  p.set(3, 4);
  CHECK(p.eval(Rational(2)) == Rational(1 + 4 + 32));
}

TEST_CASE("variable tags propagate and clash loudly") {
  SeriesC a = SeriesC::one(2, "z");
  SeriesC b = SeriesC::one(2, "z");
  CHECK((a + b).var() == "z");
  SeriesC w = SeriesC::one(2, "w");
  CHECK_THROWS_AS(a + w, std::logic_error);
}

// --- bivariate ---

TEST_CASE("divide_sum_kernel on z^2 - w^2") {
  Series2C d(0, 2, 0, 2);
  d.set(2, 0, 1.0);
  d.set(0, 2, -1.0);
  Series2C q = divide_sum_kernel(d);
  CHECK(std::abs(q.coeff(1, 0) - 1.0) < 1e-14);
  CHECK(std::abs(q.coeff(0, 1) + 1.0) < 1e-14);
  CHECK(std::abs(q.coeff(0, 0)) < 1e-14);
}

TEST_CASE("divide_sum_kernel rejects a non-divisible numerator") {
  Series2C d(0, 2, 0, 2);
  d.set(0, 0, 1.0);
  CHECK_THROWS_AS(divide_sum_kernel(d), NotDivisible);
}

TEST_CASE("divide_linear by z - w") {
  // z^2 + z w  is not divisible by z - w;  z^2 - w^2 is: quotient z + w
  Series2C d(0, 2, 0, 2);
  d.set(2, 0, 1.0);
  d.set(0, 2, -1.0);
  Series2C q = d.divide_linear(-1);
  CHECK(std::abs(q.coeff(1, 0) - 1.0) < 1e-14);
  CHECK(std::abs(q.coeff(0, 1) - 1.0) < 1e-14);
}

TEST_CASE("bivariate product against hand expansion") {
  Series2C a(0, 2, 0, 2), b(0, 2, 0, 2);
  a.set(0, 0, 1.0);
  a.set(1, 0, 2.0);
  a.set(0, 1, 3.0);
  b.set(0, 0, 1.0);
  b.set(1, 1, -1.0);
  Series2C p = a * b;
  CHECK(std::abs(p.coeff(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(p.coeff(1, 0) - 2.0) < 1e-14);
  CHECK(std::abs(p.coeff(0, 1) - 3.0) < 1e-14);
  CHECK(std::abs(p.coeff(1, 1) + 1.0) < 1e-14);
  CHECK(std::abs(p.coeff(2, 1) + 2.0) < 1e-14);
  CHECK(std::abs(p.coeff(1, 2) + 3.0) < 1e-14);
}

TEST_CASE("bivariate inverse") {
  Series2C a(0, 3, 0, 3);
  a.set(0, 0, 2.0);
  a.set(1, 0, 1.0);
  a.set(0, 1, -1.0);
  a.set(1, 1, 0.5);
  Series2C inv = a.inverse2();
  Series2C p = a * inv;
  CHECK(std::abs(p.coeff(0, 0) - 1.0) < 1e-13);
  for (int k = 0; k <= p.zhi(); ++k)
    for (int l = 0; l <= p.whi(); ++l)
      if ((k || l) && k + l <= p.deg_hi()) CHECK(std::abs(p.coeff(k, l)) < 1e-13);
}

TEST_CASE("bivariate window rules under the degree cap") {
  Series2C a(0, 4, 0, 4, 3);
  a.set(0, 0, 1.0);
  CHECK(a.known(2, 1));
  CHECK(!a.known(2, 2));
  Series2C b(0, 4, 0, 4, 3);
  b.set(0, 0, 1.0);
  Series2C p = a * b;
  CHECK(p.deg_hi() == 3);
  CHECK_THROWS_AS((void)p.coeff(2, 2), std::out_of_range);
}

TEST_CASE("transpose, w-negation, diagonal") {
  Series2C a(0, 2, 0, 2);
  a.set(1, 0, 2.0);
  a.set(0, 1, 3.0);
  a.set(1, 1, 4.0);
  Series2C t = a.transposed();
  CHECK(std::abs(t.coeff(0, 1) - 2.0) < 1e-14);
  CHECK(std::abs(t.coeff(1, 0) - 3.0) < 1e-14);
  Series2C n = a.w_negated();
  CHECK(std::abs(n.coeff(0, 1) + 3.0) < 1e-14);
  CHECK(std::abs(n.coeff(1, 1) + 4.0) < 1e-14);
  SeriesC diag = a.diagonal(Cplx(1.0));
  CHECK(std::abs(diag.coeff(1) - 5.0) < 1e-14);
  CHECK(std::abs(diag.coeff(2) - 4.0) < 1e-14);
}
