#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "wpm/model.hpp"
#include "wpm/qring.hpp"

using namespace wpm;

static ModelParams wp11() {
  ModelParams p;
  p.m = 1;
  p.n = 1;
  p.q_neg = {Cplx(1.0)};
  return p;
}

static ModelParams wp21() {
  ModelParams p;
  p.m = 2;
  p.n = 1;
  p.q_pos = {Cplx(0.5)};
  p.q_neg = {Cplx(1.0)};
  return p;
}

static ModelParams wp23() {
  ModelParams p;
  p.m = 2;
  p.n = 3;
  p.q_pos = {Cplx(0.7)};
  p.q_neg = {Cplx(0.3), Cplx(0.2), Cplx(1.1)};
  return p;
}

static const ITerm* find_term(const IFunctionSeries& s,
                              const std::vector<Rational>& d) {
  for (const auto& t : s.terms)
    if (t.d == d) return &t;
  return nullptr;
}

static const CohCoeff* find_coeff(const ITerm& t, int zpow, int lpow) {
  for (const auto& c : t.c)
    if (c.zpow == zpow && c.lpow == lpow) return &c;
  return nullptr;
}

TEST_CASE("multiplication matrix carries the critical spectrum") {
  for (const ModelParams& p : {wp21(), wp23()}) {
    RingPresentation rp = structure_constants(p);
    CriticalData cd = critical_points(superpotential(p));
    REQUIRE(rp.dim == int(cd.size()));
    Eigen::MatrixXcd mx(rp.dim, rp.dim);
    for (int i = 0; i < rp.dim; ++i)
      for (int j = 0; j < rp.dim; ++j) mx(i, j) = rp.mx[size_t(i)][size_t(j)];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(mx, false);
    REQUIRE(es.info() == Eigen::Success);
    std::vector<Cplx> ev(size_t(rp.dim));
    for (int i = 0; i < rp.dim; ++i) ev[size_t(i)] = es.eigenvalues()(i);
    for (const Cplx& root : cd.roots) {
      auto best = std::min_element(ev.begin(), ev.end(),
                                   [&](const Cplx& a, const Cplx& b) {
                                     return std::abs(a - root) < std::abs(b - root);
                                   });
      REQUIRE(best != ev.end());
      CHECK(std::abs(*best - root) < 1e-9);
      ev.erase(best);
    }
  }
}

TEST_CASE("flat structure constants are commuting powers") {
  for (const ModelParams& p : {wp21(), wp23()}) {
    RingPresentation rp = structure_constants(p);
    int d = rp.dim;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        CHECK(rp.ca[0][size_t(i)][size_t(j)] == Cplx(i == j ? 1.0 : 0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        CHECK(rp.ca[1][size_t(i)][size_t(j)] == rp.mx[size_t(i)][size_t(j)]);
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        double worst = 0.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            Cplx ab(0.0), ba(0.0);
            for (int k = 0; k < d; ++k) {
              ab += rp.ca[size_t(a)][size_t(i)][size_t(k)] *
                    rp.ca[size_t(b)][size_t(k)][size_t(j)];
              ba += rp.ca[size_t(b)][size_t(i)][size_t(k)] *
                    rp.ca[size_t(a)][size_t(k)][size_t(j)];
            }
            worst = std::max(worst, std::abs(ab - ba));
          }
        CHECK(worst < 1e-9);
      }
  }
}

TEST_CASE("residual pairing of reduced products is totally symmetric") {
  ModelParams p = wp23();
  RingPresentation rp = structure_constants(p);
  CriticalData cd = critical_points(superpotential(p));
  int d = rp.dim;
  std::vector<std::vector<Cplx>> vals(size_t(d),
                                      std::vector<Cplx>(cd.size(), Cplx(1.0)));
  for (int i = 1; i < d; ++i)
    for (size_t al = 0; al < cd.size(); ++al)
      vals[size_t(i)][al] = vals[size_t(i - 1)][al] * cd.roots[al];
  std::vector<std::vector<Cplx>> gram(
      static_cast<size_t>(d), std::vector<Cplx>(static_cast<size_t>(d)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      gram[size_t(i)][size_t(j)] = pairing(cd, vals[size_t(i)], vals[size_t(j)]);
  auto triple = [&](int a, int b, int c) {
    Cplx acc(0.0);
    for (int k = 0; k < d; ++k)
      acc += rp.ca[size_t(a)][size_t(k)][size_t(b)] * gram[size_t(k)][size_t(c)];
    return acc;
  };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        Cplx t = triple(a, b, c);
        CHECK(std::abs(t - triple(a, c, b)) < 1e-9);
        CHECK(std::abs(t - triple(b, a, c)) < 1e-9);
        CHECK(std::abs(t - triple(c, b, a)) < 1e-9);
        // reduction is root-faithful: pairing of plain power values agrees
        if (a + b + c < d) {
          CHECK(std::abs(t - pairing(cd, vals[size_t(a + b)], vals[size_t(c)])) <
                1e-9);
        }
      }
}

TEST_CASE("origin ring is the nilpotent shift") {
  ModelParams p;
  p.m = 1;
  p.n = 1;
  p.q_neg = {Cplx(0.0)};
  RingPresentation rp = structure_constants(p);
  REQUIRE(rp.dim == 2);
  CHECK(rp.mx[0][0] == Cplx(0.0));
  CHECK(rp.mx[0][1] == Cplx(0.0));
  CHECK(rp.mx[1][0] == Cplx(1.0));
  CHECK(rp.mx[1][1] == Cplx(0.0));
}

TEST_CASE("charge table and stable supports") {
  ToricData td = toric_data(2, 3);
  CHECK(td.labels == std::vector<int>({-2, -1, 1, 2, 3}));
  std::vector<std::vector<long>> expected = {
      {1, 2, 3, 0}, {0, 0, 0, 3}, {2, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 1}};
  CHECK(td.charge == expected);
  std::vector<std::vector<int>> supports = td.supports;
  std::sort(supports.begin(), supports.end());
  CHECK(supports == std::vector<std::vector<int>>(
                        {{0, 1, 2, 3}, {0, 1, 2, 3, 4}, {1, 2, 3, 4}}));
  CHECK(td.core == std::vector<int>({1, 2, 3}));

  ToricData smooth = toric_data(1, 1);
  CHECK(smooth.supports ==
        std::vector<std::vector<int>>({{0}, {0, 1}, {1}}));
  CHECK(smooth.core.empty());
}

TEST_CASE("twisted-sector coefficients at fractional degrees") {
  IFunctionSeries s21 = i_function(wp21(), 1);
  const ITerm* t = find_term(s21, {Rational(-1, 2), Rational(1)});
  REQUIRE(t != nullptr);
  REQUIRE(t->c.size() == 1);
  CHECK(t->c[0].zpow == -1);
  CHECK(t->c[0].lpow == 0);
  CHECK(t->c[0].v[1] == 1);  // X
  CHECK(find_term(s21, {Rational(-1, 2), Rational(0)}) == nullptr);

  IFunctionSeries s23 = i_function(wp23(), 1);
  const ITerm* tb = find_term(
      s23, {Rational(0), Rational(0), Rational(0), Rational(1, 3)});
  REQUIRE(tb != nullptr);
  REQUIRE(tb->c.size() == 1);
  CHECK(tb->c[0].zpow == -2);
  CHECK(tb->c[0].v[4] == 3);  // Xbar^2
  const ITerm* tx = find_term(
      s23, {Rational(1, 2), Rational(0), Rational(0), Rational(0)});
  REQUIRE(tx != nullptr);
  REQUIRE(tx->c.size() == 1);
  CHECK(tx->c[0].zpow == -2);
  CHECK(tx->c[0].v[1] == 2);  // X
}

TEST_CASE("smooth specialization reproduces the classical series") {
  IFunctionSeries s = i_function(wp11(), 3);
  const ITerm* t0 = find_term(s, {Rational(0)});
  REQUIRE(t0 != nullptr);
  const CohCoeff* unit = find_coeff(*t0, 0, 0);
  REQUIRE(unit != nullptr);
  CHECK(unit->v[0] == 1);
  CHECK(unit->v[1] == 0);
  const CohCoeff* logc = find_coeff(*t0, -1, 1);
  REQUIRE(logc != nullptr);
  CHECK(logc->v[1] == 1);
  CHECK(find_coeff(*t0, -1, 0) == nullptr);

  // degree 1: 1/((H+z)^2) = z^{-2} - 2 H z^{-3} modulo H^2
  const ITerm* t1 = find_term(s, {Rational(1)});
  REQUIRE(t1 != nullptr);
  const CohCoeff* c2 = find_coeff(*t1, -2, 0);
  REQUIRE(c2 != nullptr);
  CHECK(c2->v[0] == 1);
  const CohCoeff* c3 = find_coeff(*t1, -3, 0);
  REQUIRE(c3 != nullptr);
  CHECK(c3->v[0] == 0);
  CHECK(c3->v[1] == -2);
  CHECK(find_term(s, {Rational(-1)}) == nullptr);
}

TEST_CASE("every stored coefficient is homogeneous of degree zero") {
  struct Case {
    ModelParams p;
    int order;
  };
  for (const auto& [p, order] : {Case{wp23(), 2}, Case{wp21(), 3}}) {
    ToricData td = toric_data(p.m, p.n);
    int nc = p.m + p.n - 1;
    std::vector<long> half_delta(size_t(nc), 0);
    for (const auto& row : td.charge)
      for (int a = 0; a < nc; ++a) half_delta[size_t(a)] += row[size_t(a)];
    IFunctionSeries s = i_function(p, order);
    CHECK(s.terms.size() > 4);
    for (const auto& term : s.terms)
      for (const auto& cc : term.c) {
        int comp = -1;
        for (int i = 0; i < int(cc.v.size()); ++i)
          if (cc.v[size_t(i)] != 0) {
            CHECK(comp == -1);  // one basis component per stored coefficient
            comp = i;
          }
        REQUIRE(comp >= 0);
        Rational deg(0);
        if (comp >= 1 && comp <= p.m) deg = Rational(2 * comp, p.m);
        if (comp > p.m) deg = Rational(2 * (comp - p.m), p.n);
        Rational total = deg + 2 * cc.zpow;
        for (int a = 0; a < nc; ++a)
          total += Rational(2 * half_delta[size_t(a)]) * term.d[size_t(a)];
        CHECK(total == 0);
      }
  }
}

TEST_CASE("difference operators annihilate the truncated series") {
  CHECK(picard_fuchs_check(wp11(), {1}, 4) == 0.0);
  CHECK(picard_fuchs_check(wp21(), {1, 0}, 3) == 0.0);
  CHECK(picard_fuchs_check(wp21(), {0, 1}, 3) == 0.0);
  for (std::vector<long> d : {std::vector<long>{1, 0, 0, 0},
                              std::vector<long>{0, 1, 0, 0},
                              std::vector<long>{0, 0, 1, 0},
                              std::vector<long>{0, 0, 0, 1}})
    CHECK(picard_fuchs_check(wp23(), d, 2) < 1e-10);
}

TEST_CASE("annihilator residual detects a perturbed coefficient") {
  IFunctionSeries s = i_function(wp11(), 3);
  CHECK(annihilator_residual(s, {1}) == 0.0);
  for (auto& term : s.terms)
    if (term.d == std::vector<Rational>{Rational(1)}) {
      term.c[0].v[0] += Rational(1, 1000);
    }
  CHECK(annihilator_residual(s, {1}) >= 1e-4);
}

TEST_CASE("zero direction gives a zero operator") {
  CHECK(picard_fuchs_check(wp11(), {0}, 2) == 0.0);
  IFunctionSeries s = i_function(wp21(), 1);
  CHECK(annihilator_residual(s, {0, 0}) == 0.0);
}

TEST_CASE("mirror map of the smooth model is purely logarithmic") {
  std::vector<MirrorTerm> tau = mirror_map(wp11(), 3);
  REQUIRE(tau.size() == 1);
  CHECK(tau[0].d == std::vector<Rational>{Rational(0)});
  CHECK(tau[0].lpow == 1);
  CHECK(tau[0].v[1] == 1);
}

TEST_CASE("mirror map of the orbifold picks up twisted corrections") {
  std::vector<MirrorTerm> tau = mirror_map(wp21(), 2);
  bool saw_log = false, saw_twisted = false;
  for (const auto& t : tau) {
    bool origin = std::all_of(t.d.begin(), t.d.end(),
                              [](const Rational& x) { return x == 0; });
    if (origin) {
      CHECK(t.lpow == 1);  // no non-log correction at q = 0
      CHECK(t.v[2] == 1);
      saw_log = true;
    }
    if (t.d == std::vector<Rational>{Rational(-1, 2), Rational(1)}) {
      CHECK(t.lpow == 0);
      CHECK(t.v[1] == 1);
      saw_twisted = true;
    }
  }
  CHECK(saw_log);
  CHECK(saw_twisted);
}

TEST_CASE("qring rejects") {
  CHECK_THROWS_AS(toric_data(2, 4), ConfigError);
  CHECK_THROWS_AS(i_function(wp11(), 0), ConfigError);
  CHECK_THROWS_AS(picard_fuchs_check(wp11(), {2}, 1), ConfigError);
  IFunctionSeries s = i_function(wp11(), 1);
  CHECK_THROWS_AS(annihilator_residual(s, {1, 0}), ConfigError);
}
