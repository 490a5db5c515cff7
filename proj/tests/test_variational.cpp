#include <catch_amalgamated.hpp>

#include "samples.hpp"

using namespace schottky;
using samples::C;

namespace {
const truncation_policy pol{6, 24, 1e-10};
const pde_samples smp{{C(2, 1), C(-0.3, -0.9), C(1.5, 2.5)}, C(-1.5, 0.5), C(0.2, -0.8)};
}  // namespace

TEST_CASE("perturbation directions") {
  auto sp = samples::g2();
  auto p = perturb(sp, {2, 0}, C(1e-3));
  CHECK(p.w(2) == sp.w(2) + C(1e-3));
  p = perturb(sp, {2, 2}, C(1e-3));
  CHECK(p.w(-2) == sp.w(-2) + C(1e-3));
  p = perturb(sp, {1, 1}, C(1e-3));
  CHECK(std::abs(p.rho_of(1) - sp.rho_of(1) * std::exp(1e-3)) < 1e-17);
  CHECK_THROWS_AS(perturb(sp, {1, 3}, C(1e-3)), error);
}

TEST_CASE("finite differences of a known function") {
  auto sp = samples::g2();
  // f = w_1^2 rho_2 ; d/dw_1 = 2 w_1 rho_2, rho_2 d/drho_2 = f, rho_1 d/dw_{-1} = 0
  auto f = [](const params& p) { return p.w(1) * p.w(1) * p.rho_of(2); };
  fd_config cfg{1e-4};
  CHECK(std::abs(moduli_partial<double>({1, 0}, f, sp, cfg) - 2.0 * sp.w(1) * sp.rho_of(2)) < 1e-9);
  CHECK(std::abs(moduli_partial<double>({2, 1}, f, sp, cfg) - f(sp)) < 1e-9);
  CHECK(std::abs(moduli_partial<double>({1, 2}, f, sp, cfg)) < 1e-15);
  cfg.imaginary_axis = true;
  CHECK(std::abs(moduli_partial<double>({1, 0}, f, sp, cfg) - 2.0 * sp.w(1) * sp.rho_of(2)) < 1e-9);
  // w_1 - 2 lands on w_-1
  CHECK_THROWS_AS(moduli_partial<double>({1, 0}, f, sp, fd_config{2.0}), error);
}

TEST_CASE("nabla is linear") {
  surface S(samples::g2(), pol);
  fd_config cfg{1e-4};
  auto f = [](const params& p) { return heisenberg_partition(p, 16).value; };
  auto g = [](const params& p) { return p.w(1) * p.rho_of(2) + p.w(-2); };
  const C al(0.7, -0.2), be(-1.3, 0.4);
  auto h = [&](const params& p) { return al * f(p) + be * g(p); };
  C x(2, 1);
  C lhs = nabla(S, x, h, cfg), rhs = al * nabla(S, x, f, cfg) + be * nabla(S, x, g, cfg);
  // central differences amplify roundoff by about 1/h
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(rhs));
}

TEST_CASE("SL2 invariance of the partition function") {
  surface S(samples::g2(), pol);
  for (const auto& r : check_sl2_invariance(S, fd_config{1e-4})) {
    INFO(r.name << " " << r.max_residual);
    CHECK(r.passed);
    CHECK(r.max_residual < 1e-6);
  }
}

TEST_CASE("sl2 generators annihilate the multipliers") {
  auto f = [](const params& p) {
    auto q = classical_from_params(p).q;
    return q[0] + C(2, 1) * q[1];
  };
  auto v = apply_sl2(f, samples::g2(), fd_config{1e-5});
  for (int r = 0; r < 3; ++r) CHECK(std::abs(v.L[r]) < 1e-9);
}

TEST_CASE("Ward PDEs and the boson equation") {
  surface S(samples::g2(), pol);
  auto coarse = check_ward_pdes(S, smp, fd_config{1e-3});
  auto fine = check_ward_pdes(S, smp, fd_config{1e-4});
  for (std::size_t i = 0; i < fine.size(); ++i) {
    INFO(fine[i].name << " " << coarse[i].max_residual << " -> " << fine[i].max_residual);
    CHECK(fine[i].passed);
    CHECK(fine[i].classification() == "pass");
    // O(h^2): a tenfold smaller step gains well over a factor 10
    CHECK(fine[i].max_residual < 0.1 * coarse[i].max_residual);
  }
}

TEST_CASE("Rauch variational formula") {
  surface S(samples::g2(), pol);
  auto r = check_rauch(S, smp.x, fd_config{1e-4});
  INFO(r.max_residual);
  CHECK(r.passed);
  CHECK(r.residuals.size() == 12);
}

TEST_CASE("coarse truncation is classified as truncation") {
  surface S(samples::g2(), {1, 2, 1e-10});
  auto reps = check_ward_pdes(S, smp, fd_config{1e-4}, 1e-9);
  bool any_failed = false;
  for (const auto& r : reps) {
    if (r.passed) continue;
    any_failed = true;
    CHECK(r.classification() == "truncation");
  }
  CHECK(any_failed);
}
