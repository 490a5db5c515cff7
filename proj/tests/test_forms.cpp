#include <catch_amalgamated.hpp>

#include "samples.hpp"

using namespace schottky;
using samples::C;

namespace {

const truncation_policy pol{6, 24, 1e-10};

C ccw(C c, double r, const std::function<C(C)>& f, int n = 256) { return contour_integral<double>(c, r, n, f); }

}  // namespace

TEST_CASE("contour_integral is exact on Laurent monomials") {
  for (int k = -4; k <= 4; ++k) {
    C v = ccw(C(0.5, 0.5), 0.7, [&](C z) { return std::pow(z - C(0.5, 0.5), k); }, 64);
    CHECK(std::abs(v - C(k == -1 ? 1 : 0)) < 1e-14);
  }
}

TEST_CASE("identity-only truncation") {
  surface S(samples::g2(), {0, 4, 1e-10});
  CHECK(std::abs(S.psi1_third_kind(C(2), C(1)).value - C(0.5)) < 1e-15);
  C x(2, 1), y(-1.5, 0.5);
  CHECK(std::abs(S.bidifferential_omega(x, y).value - std::pow(x - y, -2)) < 1e-15);
  CHECK(S.projective_connection(x).value == C(0));
  CHECK(std::abs(S.lambda_n(x, y, 2).value - std::pow(x - y, -4)) < 1e-15);
}

TEST_CASE("form weights") {
  surface S(samples::g2(), pol);
  C x(2, 1), y(-1.5, 0.5);
  auto p = S.psi1_third_kind(x, y);
  CHECK(p.weight_x == 1);
  CHECK(p.weight_y == 0);
  auto w = S.bidifferential_omega(x, y);
  CHECK((w.weight_x == 1 && w.weight_y == 1));
  auto b = S.psi_n_bers(x, y, 2);
  CHECK((b.weight_x == 2 && b.weight_y == -1));
  CHECK(S.projective_connection(x).weight_x == 2);
  CHECK(S.lambda_n(x, y, 3).weight_x == 3);
}

TEST_CASE("psi1 has a unit residue at x = y") {
  surface S(samples::g2(), pol);
  C y(-1.5, 0.5);
  C res = ccw(y, 0.05, [&](C x) { return S.psi1_third_kind(x, y).value; });
  CHECK(std::abs(res - C(1)) < 1e-10);
}

TEST_CASE("pole proximity is reported with the word") {
  surface S(samples::g2(), pol);
  C y(-1.5, 0.5);
  try {
    S.bidifferential_omega(y, y);
    FAIL("no pole error");
  } catch (const error& e) {
    CHECK(e.code() == errc::pole);
    CHECK(std::string(e.what()).find("Id") != std::string::npos);
  }
}

TEST_CASE("genus one quasi-period of psi1 telescopes") {
  // gamma fixes +-1; the sum telescopes to 1/(x - W_1) - 1/(x - W_-1)
  auto sp = samples::g1(C(1e-3));
  surface S(sp, {20, 20, 1e-12});
  C y(0.3, 2.0), gy = S.generator(1)(y);
  for (C x : {C(2, 1), C(-0.5, 1.5), C(0.1, -2)}) {
    C diff = S.psi1_third_kind(x, y).value - S.psi1_third_kind(x, gy).value;
    C closed = C(1) / (x - C(1)) - C(1) / (x - C(-1));
    CHECK(std::abs(diff - closed) < 1e-12);
    CHECK(std::abs(S.holomorphic_one_form(1, x).value - closed) < 1e-12);
  }
}

TEST_CASE("bidifferential is symmetric with vanishing alpha periods") {
  surface S(samples::g2(), pol);
  for (C x : samples::x_pts)
    for (C y : samples::y_pts) {
      auto a = S.bidifferential_omega(x, y), b = S.bidifferential_omega(y, x);
      CHECK(std::abs(a.value - b.value) < 10 * (a.tail + b.tail) + 1e-12);
    }
  const auto& sp = S.parameters();
  for (int a = 1; a <= 2; ++a) {
    C per = ccw(sp.w(-a), 1.2 * sp.radius(a), [&](C x) { return S.bidifferential_omega(x, C(2, 1)).value; });
    CHECK(std::abs(per) < 1e-10);
  }
}

TEST_CASE("holomorphic one-forms") {
  surface S(samples::g2(), pol);
  const auto& sp = S.parameters();

  SECTION("unit alpha periods") {
    // alpha_a is C_{-a} run clockwise, as part of the boundary of D
    for (int a = 1; a <= 2; ++a)
      for (int b = 1; b <= 2; ++b) {
        C v = -ccw(sp.w(-a), sp.radius(a), [&](C x) { return S.nu(b, x).value; });
        CHECK(std::abs(v - C(a == b ? 1 : 0)) < 1e-9);
      }
  }
  SECTION("invariance under the generators") {
    for (int a : signed_indices(2))
      for (C x : samples::x_pts) {
        auto g = S.generator(a);
        for (int b = 1; b <= 2; ++b) {
          C lhs = S.nu(b, g(x)).value * g.deriv(x), rhs = S.nu(b, x).value;
          CHECK(std::abs(lhs - rhs) < 1e-6 * std::abs(rhs));
        }
      }
  }
  SECTION("probe independence") {
    for (C x : samples::x_pts)
      for (int b = 1; b <= 2; ++b) CHECK(std::abs(S.nu(b, x, 0).value - S.nu(b, x, 1).value) < 1e-8);
  }
  SECTION("derivative") {
    C x(2, 1);
    const double h = 1e-4;
    for (int b = 1; b <= 2; ++b) {
      C fd = (S.nu(b, x + h).value - S.nu(b, x - h).value) / (2 * h);
      CHECK(std::abs(fd - S.nu_dx(b, x).value) < 1e-7);
    }
  }
}

TEST_CASE("projective connection") {
  surface S(samples::g2(), pol);
  SECTION("limit definition, Richardson extrapolated") {
    for (C x : {C(2, 1), C(-0.3, -0.9)}) {
      auto lim = [&](double h) {
        C y = x + C(h, 0.5 * h);
        return 6.0 * (S.bidifferential_omega(x, y).value - std::pow(x - y, -2));
      };
      auto sym = [&](double h) { return 0.5 * (lim(h) + lim(-h)); };
      C rich = (4.0 * sym(5e-3) - sym(1e-2)) / 3.0;
      C s = S.projective_connection(x).value;
      CHECK(std::abs(rich - s) < 1e-7 * std::abs(s));
    }
  }
  SECTION("Mobius covariance under scaling") {
    const C lam(1.3, 0.4);
    auto moved = mobius_act_on_params(S.parameters(), mobius{lam, C(0), C(0), C(1)});
    surface T(moved, pol);
    for (C x : samples::x_pts) {
      C s = S.projective_connection(x).value, t = T.projective_connection(lam * x).value;
      CHECK(std::abs(t * lam * lam - s) < 1e-6 * std::abs(s));
    }
  }
  SECTION("derivative") {
    C x(1.5, 2.5);
    const double h = 1e-4;
    C fd = (S.projective_connection(x + h).value - S.projective_connection(x - h).value) / (2 * h);
    C d = S.projective_connection_dx(x).value;
    CHECK(std::abs(fd - d) < 1e-6 * std::abs(d));
  }
}

TEST_CASE("Lambda_N") {
  surface S(samples::g2(), pol);
  for (int i = 0; i < 5; ++i) {
    C x = samples::x_pts[i], y = samples::y_pts[i];
    CHECK(std::abs(S.lambda_n(x, y, 1).value - S.bidifferential_omega(x, y).value) < 1e-15);
    auto a = S.lambda_n(x, y, 2), b = S.lambda_n(y, x, 2);
    CHECK(std::abs(a.value - b.value) < 10 * (a.tail + b.tail) + 1e-12);
  }
}

TEST_CASE("Bers kernel and Psi_N") {
  kernel k(2, {C(0), C(-2), C(5)});
  CHECK(std::abs(k(C(3), C(1)) - C(0.2)) < 1e-15);

  surface S(samples::g2(), pol);
  auto A = S.bers_anchors(2);
  REQUIRE(A.size() == 3);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i + 1; j < A.size(); ++j) CHECK(std::abs(A[i] - A[j]) > 1e-6);

  SECTION("invariance in x") {
    C y(-1.5, 0.5);
    for (int a : signed_indices(2))
      for (C x : {C(2, 1), C(1.5, 2.5)}) {
        auto g = S.generator(a);
        C lhs = S.psi_n_bers(g(x), y, 2).value * std::pow(g.deriv(x), 2), rhs = S.psi_n_bers(x, y, 2).value;
        CHECK(std::abs(lhs - rhs) < 1e-6 * std::abs(rhs));
      }
  }
  SECTION("unit residue at x = y") {
    C y(0.2, -0.8);
    C res = ccw(y, 0.05, [&](C x) { return S.psi_n_bers(x, y, 2).value; });
    CHECK(std::abs(res - C(1)) < 1e-9);
  }
  SECTION("analytic y-derivative") {
    C x(2, 1), y(0.2, -0.8);
    auto k2 = S.bers_kernel(2);
    const double h = 1e-4;
    C fd = (S.psi_n(x, y + h, k2).value - S.psi_n(x, y - h, k2).value) / (2 * h);
    CHECK(std::abs(fd - S.psi_n_dy(x, y, k2).value) < 1e-7);
  }
  SECTION("genus one has too few limit points") {
    surface T(samples::g1(C(0.05)), pol);
    CHECK_THROWS_AS(T.bers_anchors(2), error);
  }
}

TEST_CASE("Theta forms") {
  surface S(samples::g2(), pol);
  SECTION("N=1 gives the normalized one-forms") {
    for (C x : {C(2, 1), C(-2.1, 0.4)})
      for (int a = 1; a <= 2; ++a) {
        auto th = S.theta_n_forms(1, a, x);
        REQUIRE(th.values.size() == 1);
        C nu = S.holomorphic_one_form(a, x).value;
        CHECK(std::abs(th.values[0].value - nu) < 1e-8 * std::abs(nu));
      }
  }
  SECTION("N=2 reproduces the quasi-period polynomial") {
    auto k2 = S.bers_kernel(2);
    C x(2, 1);
    for (int a = 1; a <= 2; ++a) {
      auto th = S.theta_n_forms(2, a, x);
      REQUIRE(th.values.size() == 3);
      for (C y : samples::y_pts) {
        C gy = S.generator(a)(y);
        C jac = -S.parameters().rho_of(a) / std::pow(y - S.parameters().w(a), 2);
        C lhs = S.psi_n(x, y, k2).value - S.psi_n(x, gy, k2).value / jac, rhs(0);
        for (int l = 0; l < 3; ++l) rhs += th.values[l].value * std::pow(y - S.parameters().w(a), l);
        CHECK(std::abs(lhs - rhs) < 1e-7 * std::max(1.0, std::abs(lhs)));
      }
    }
  }
  SECTION("N=2 forms are invariant weight-2 forms") {
    C x(1.5, 2.5);
    for (int a = 1; a <= 2; ++a) {
      auto g = S.generator(-a);
      auto t0 = S.theta_n_forms(2, a, x), t1 = S.theta_n_forms(2, a, g(x));
      for (int l = 0; l < 3; ++l) {
        C lhs = t1.values[l].value * std::pow(g.deriv(x), 2), rhs = t0.values[l].value;
        CHECK(std::abs(lhs - rhs) < 1e-6 * std::abs(rhs));
      }
    }
  }
  SECTION("node count must be a power of two") { CHECK_THROWS_AS(S.theta_n_forms(2, 1, C(2, 1), 100), error); }
}

TEST_CASE("period matrix") {
  SECTION("genus one recovers the multiplier") {
    for (C q : {C(0.05), C(0.02, 0.03), C(-0.01, 0.04)}) {
      auto sp = samples::g1(q);
      surface S(sp, {20, 40, 1e-12});
      auto P = S.period_matrix();
      C qq = classical_from_params(sp).q[0];
      CHECK(std::abs(std::exp(C(0, 2 * M_PI) * P.omega(0, 0)) - qq) < 1e-10 * std::abs(qq));
    }
  }
  SECTION("genus two is symmetric with positive imaginary part") {
    surface S(samples::g2(), pol);
    auto P = S.period_matrix();
    CHECK(std::abs(P.omega(0, 1) - P.omega(1, 0)) < 1e-7);
    CHECK(P.im_positive_definite);
    for (const auto& path : P.paths) {
      CHECK(path.clearance > 0);
      CHECK(path.vertices.size() == 4);
    }
    // frozen geometry reproduces the same numbers
    auto Q = S.period_matrix(&P.paths);
    CHECK((Q.omega - P.omega).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("Poincare tails decay geometrically") {
  auto sp = samples::g2();
  C x(2, 1), y(-1.5, 0.5);
  double prev = 0;
  for (int L = 2; L <= 7; ++L) {
    surface S(sp, {L, 8, 1e-10});
    double t = S.bidifferential_omega(x, y).tail;
    if (L > 2) CHECK(t < 0.6 * prev);
    prev = t;
  }
  CHECK(prev < 1e-7);
}
