#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "samples.hpp"

using namespace schottky;
using samples::C;

namespace {
const truncation_policy pol{6, 24, 1e-10};

std::vector<C> pts(int n) { return {samples::x_pts, samples::x_pts + n}; }
}  // namespace

TEST_CASE("pairings") {
  CHECK(pairings(0).size() == 1);
  CHECK(pairings(3).empty());
  long dfact = 1;
  for (int n = 2; n <= 10; n += 2) {
    dfact *= n - 1;
    auto ps = pairings(n);
    CHECK(static_cast<long>(ps.size()) == dfact);
    std::set<pairing> uniq(ps.begin(), ps.end());
    CHECK(uniq.size() == ps.size());
    for (const auto& p : ps) {
      std::vector<int> hit(n, 0);
      for (auto [i, j] : p) {
        CHECK(i < j);
        ++hit[i];
        ++hit[j];
      }
      CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
    }
  }
  auto four = pairings(4);
  CHECK(four[0] == pairing{{0, 1}, {2, 3}});
  CHECK(four[1] == pairing{{0, 2}, {1, 3}});
  CHECK(four[2] == pairing{{0, 3}, {1, 2}});
}

TEST_CASE("Heisenberg n-point functions") {
  surface S(samples::g2(), pol);
  auto Z = heisenberg_partition(S.parameters(), pol.M);

  for (int n : {1, 3, 5}) {
    auto v = heisenberg_npoint(S, pts(n));
    CHECK(v.value == C(0));
    CHECK(v.tail == 0);
  }
  auto two = heisenberg_npoint(S, pts(2));
  CHECK(std::abs(two.value - S.bidifferential_omega(samples::x_pts[0], samples::x_pts[1]).value * Z.value) < 1e-15);

  auto p = pts(4);
  auto four = heisenberg_npoint(S, p);
  CHECK(four.terms == 3);
  auto w = [&](int i, int j) { return S.bidifferential_omega(p[i], p[j]).value; };
  C brute = (w(0, 1) * w(2, 3) + w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2)) * Z.value;
  CHECK(std::abs(four.value - brute) < 1e-12 * std::abs(brute));

  std::vector<int> perm{0, 1, 2, 3};
  int count = 0;
  while (std::next_permutation(perm.begin(), perm.end()) && count < 5) {
    std::vector<C> q;
    for (int i : perm) q.push_back(p[i]);
    CHECK(std::abs(heisenberg_npoint(S, q).value - four.value) < 1e-10 * std::abs(four.value));
    ++count;
  }

  // F(x1..xn) = sum_k omega(x1,xk) F(x1,xk removed), with Z carried by both sides
  for (int n : {4, 6}) {
    auto q = pts(5);
    q.push_back(samples::y_pts[2]);
    q.resize(n);
    C lhs = heisenberg_npoint(S, q).value, rhs(0);
    for (int k = 1; k < n; ++k) {
      std::vector<C> rest;
      for (int i = 1; i < n; ++i)
        if (i != k) rest.push_back(q[i]);
      rhs += S.bidifferential_omega(q[0], q[k]).value * heisenberg_npoint(S, rest).value;
    }
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::abs(lhs));
  }

  CHECK_THROWS_AS(heisenberg_npoint(S, {C(2, 1), C(2, 1)}), error);
  CHECK_THROWS_AS(heisenberg_npoint(S, {C(2, 1), S.parameters().w(1)}), error);
}

TEST_CASE("Virasoro insertions") {
  SECTION("identity-only truncation") {
    surface S(samples::g2(), {0, 24, 1e-10});
    C x(2, 1), y(-1.5, 0.5);
    CHECK(virasoro_one_point(S, x).value == C(0));
    C z = heisenberg_partition(S.parameters(), 24).value;
    CHECK(std::abs(virasoro_two_point(S, x, y).value - 0.5 * std::pow(x - y, -4) * z) < 1e-15);
  }
  surface S(samples::g2(), pol);
  SECTION("one point from the coincidence limit of the Heisenberg two-point function") {
    // (1/2) lim [F(h,x;h,y) - Z/(x-y)^2]
    C x(2, 1);
    auto Z = heisenberg_partition(S.parameters(), pol.M).value;
    auto lim = [&](double h) {
      C y = x + C(h, -0.3 * h);
      return 0.5 * (heisenberg_npoint(S, {x, y}).value - Z / ((x - y) * (x - y)));
    };
    // the regular part has a linear term in y - x; averaging +h and -h removes it
    auto sym = [&](double h) { return 0.5 * (lim(h) + lim(-h)); };
    C rich = (4.0 * sym(5e-3) - sym(1e-2)) / 3.0;
    C v = virasoro_one_point(S, x).value;
    CHECK(std::abs(rich - v) < 1e-7 * std::abs(v));
  }
  SECTION("two point is symmetric") {
    for (int i = 0; i < 5; ++i) {
      C x = samples::x_pts[i], y = samples::y_pts[i];
      auto a = virasoro_two_point(S, x, y), b = virasoro_two_point(S, y, x);
      CHECK(std::abs(a.value - b.value) < 10 * (a.tail + b.tail) + 1e-14);
    }
  }
}

TEST_CASE("lattice specs") {
  CHECK_NOTHROW(lattice_spec{1, {{2}}}.validate());
  CHECK_THROWS_AS((lattice_spec{1, {{1}}}.validate()), error);
  CHECK_THROWS_AS((lattice_spec{2, {{2, 1}, {0, 2}}}.validate()), error);
  CHECK_THROWS_AS((lattice_spec{2, {{2, 3}, {3, 2}}}.validate()), error);
  CHECK_THROWS_AS((lattice_spec{2, {{2}}}.validate()), error);
}

TEST_CASE("Siegel theta") {
  lattice_spec a1{1, {{2}}};
  SECTION("below the shortest vector only the origin counts") {
    cmatrix<double> om(1, 1);
    om(0, 0) = C(0.1, 0.8);
    auto t = siegel_theta(om, a1, 1.0);
    CHECK(t.value == C(1));
    CHECK(t.vectors == 1);
  }
  SECTION("A1 at genus one against the direct series") {
    cmatrix<double> om(1, 1);
    om(0, 0) = C(0.23, 0.61);
    C qh = std::exp(C(0, 2 * M_PI) * om(0, 0)), direct(0);
    for (int n = -40; n <= 40; ++n) direct += std::pow(qh, n * n);
    auto t = siegel_theta(om, a1, default_theta_radius(om, a1));
    CHECK(std::abs(t.value - direct) < 1e-13);
    CHECK(t.tail < 1e-12);
  }
  SECTION("block-diagonal Omega factorizes") {
    cmatrix<double> om = cmatrix<double>::Zero(2, 2);
    om(0, 0) = C(0.1, 0.7);
    om(1, 1) = C(-0.2, 0.9);
    cmatrix<double> o1(1, 1), o2(1, 1);
    o1(0, 0) = om(0, 0);
    o2(0, 0) = om(1, 1);
    lattice_spec a2{2, {{2, -1}, {-1, 2}}};
    const double R = 6;
    C full = siegel_theta(om, a2, R).value;
    C prod = siegel_theta(o1, a2, R).value * siegel_theta(o2, a2, R).value;
    CHECK(std::abs(full - prod) < 1e-12 * std::abs(prod));
  }
  SECTION("origin term bounds a purely imaginary diagonal theta from below") {
    cmatrix<double> om = cmatrix<double>::Zero(2, 2);
    om(0, 0) = C(0, 0.5);
    om(1, 1) = C(0, 1.1);
    CHECK(std::abs(siegel_theta(om, a1, 5.0).value) >= 1.0);
  }
  SECTION("Im Omega must be positive definite") {
    cmatrix<double> om(1, 1);
    om(0, 0) = C(0.3, -0.2);
    CHECK_THROWS_AS(siegel_theta(om, a1, 3.0), error);
  }
}

TEST_CASE("lattice partition functions") {
  lattice_spec a1{1, {{2}}};
  SECTION("trivial lattice") {
    surface S(samples::g2(), pol);
    CHECK(lattice_partition(S, lattice_spec{}).value == C(1));
  }
  SECTION("genus one A1 against the character series") {
    for (C q : {C(0.05), C(0.02, 0.04)}) {
      auto sp = samples::g1(q);
      surface S(sp, {20, 40, 1e-12});
      C qq = classical_from_params(sp).q[0], th(0);
      for (int n = -40; n <= 40; ++n) th += std::pow(qq, n * n);
      C expect = th * samples::euler_product(qq);
      CHECK(std::abs(lattice_partition(S, a1).value - expect) < 1e-6 * std::abs(expect));
    }
  }
  SECTION("tensor product law") {
    surface S(samples::g2(), pol);
    auto P = S.period_matrix();
    lattice_spec a2{2, {{2, -1}, {-1, 2}}};
    auto sum = lattice_spec::block_diagonal(a1, a2);
    C lhs = lattice_partition(S, sum, &P).value;
    C rhs = lattice_partition(S, a1, &P).value * lattice_partition(S, a2, &P).value;
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(rhs));
  }
}
