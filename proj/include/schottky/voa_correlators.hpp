#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "schottky/error.hpp"
#include "schottky/forms.hpp"
#include "schottky/zhu_matrix.hpp"

namespace schottky {

template <class Real>
struct basic_correlator_value {
  cplx<Real> value{};
  Real tail = 0;
  std::size_t terms = 0;
};

using pairing = std::vector<std::pair<int, int>>;

// Fixed-point-free involutions of {0..n-1}; the lowest unpaired index is
// paired first, so the order is deterministic. Empty for odd n.
inline std::vector<pairing> pairings(int n) {
  std::vector<pairing> out;
  if (n < 0 || n % 2) return out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  // choice[k] = index among remaining partners picked at depth k
  const int depth = n / 2;
  std::vector<int> choice(depth, 0);
  for (;;) {
    std::vector<bool> used(n, false);
    pairing p;
    bool ok = true;
    for (int k = 0; k < depth; ++k) {
      int first = 0;
      while (used[first]) ++first;
      used[first] = true;
      int seen = -1, partner = -1;
      for (int j = first + 1; j < n; ++j)
        if (!used[j] && ++seen == choice[k]) {
          partner = j;
          break;
        }
      if (partner < 0) {
        ok = false;
        break;
      }
      used[partner] = true;
      p.emplace_back(first, partner);
    }
    if (ok) out.push_back(std::move(p));
    // odometer: depth k has n - 2k - 1 options
    int k = depth - 1;
    while (k >= 0 && ++choice[k] >= n - 2 * k - 1) choice[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

template <class Real>
basic_partition_value<Real> partition_for(const basic_surface<Real>& S) {
  return heisenberg_partition(S.parameters(), S.policy().M);
}

template <class Real>
void check_points(const basic_surface<Real>& S, const std::vector<cplx<Real>>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!in_fundamental_domain(S.parameters(), pts[i]))
      throw error(errc::domain, "insertion point inside a Schottky disc");
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (std::abs(pts[i] - pts[j]) < basic_surface<Real>::pole_eps)
        throw error(errc::pole, "coincident insertion points");
  }
}

// Sum over pairings of prod omega(x_r, x_s), times Z_M. Odd n is exactly 0.
template <class Real>
basic_correlator_value<Real> heisenberg_npoint(const basic_surface<Real>& S, const std::vector<cplx<Real>>& pts) {
  basic_correlator_value<Real> out;
  const int n = static_cast<int>(pts.size());
  if (n % 2) return out;
  check_points(S, pts);
  auto Z = partition_for(S);
  std::vector<std::vector<basic_form_value<Real>>> om(n, std::vector<basic_form_value<Real>>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) om[i][j] = S.bidifferential_omega(pts[i], pts[j]);
  cplx<Real> sum(0);
  Real err = 0;
  for (const auto& p : pairings(n)) {
    cplx<Real> prod(1);
    Real abs_prod = 1, rel = 0;
    for (auto [i, j] : p) {
      prod *= om[i][j].value;
      abs_prod *= std::abs(om[i][j].value);
      rel += om[i][j].tail / std::max(std::abs(om[i][j].value), std::numeric_limits<Real>::min());
    }
    sum += prod;
    err += abs_prod * rel;
    ++out.terms;
  }
  out.value = sum * Z.value;
  out.tail = err * std::abs(Z.value) + std::abs(sum) * Z.tail;
  return out;
}

template <class Real>
basic_correlator_value<Real> virasoro_one_point(const basic_surface<Real>& S, cplx<Real> x) {
  check_points(S, {x});
  auto Z = partition_for(S);
  auto s = S.projective_connection(x);
  return {s.value * Z.value / Real(12), (s.tail * std::abs(Z.value) + std::abs(s.value) * Z.tail) / 12, 1};
}

template <class Real>
basic_correlator_value<Real> virasoro_two_point(const basic_surface<Real>& S, cplx<Real> x, cplx<Real> y) {
  check_points(S, {x, y});
  auto Z = partition_for(S);
  auto sx = S.projective_connection(x), sy = S.projective_connection(y);
  auto w = S.bidifferential_omega(x, y);
  cplx<Real> f = sx.value * sy.value / Real(144) + w.value * w.value / Real(2);
  Real ferr = (sx.tail * std::abs(sy.value) + std::abs(sx.value) * sy.tail) / 144 + std::abs(w.value) * w.tail;
  return {f * Z.value, ferr * std::abs(Z.value) + std::abs(f) * Z.tail, 2};
}

struct lattice_spec {
  int rank = 0;
  std::vector<std::vector<long>> gram;

  void validate() const {
    if (rank < 0 || static_cast<int>(gram.size()) != rank)
      throw error(errc::invalid_parameter, "gram matrix size does not match rank");
    Eigen::MatrixXd G(rank, rank);
    for (int i = 0; i < rank; ++i) {
      if (static_cast<int>(gram[i].size()) != rank) throw error(errc::invalid_parameter, "gram row length");
      if (gram[i][i] % 2) throw error(errc::invalid_parameter, "lattice is not even");
      for (int j = 0; j < rank; ++j) {
        if (gram[i][j] != gram[j][i]) throw error(errc::invalid_parameter, "gram matrix not symmetric");
        G(i, j) = static_cast<double>(gram[i][j]);
      }
    }
    if (rank > 0 && Eigen::LLT<Eigen::MatrixXd>(G).info() != Eigen::Success)
      throw error(errc::invalid_parameter, "gram matrix not positive definite");
  }

  static lattice_spec block_diagonal(const lattice_spec& a, const lattice_spec& b) {
    lattice_spec out;
    out.rank = a.rank + b.rank;
    out.gram.assign(out.rank, std::vector<long>(out.rank, 0));
    for (int i = 0; i < a.rank; ++i)
      for (int j = 0; j < a.rank; ++j) out.gram[i][j] = a.gram[i][j];
    for (int i = 0; i < b.rank; ++i)
      for (int j = 0; j < b.rank; ++j) out.gram[a.rank + i][a.rank + j] = b.gram[i][j];
    return out;
  }
};

template <class Real>
struct basic_theta_value {
  cplx<Real> value{};
  Real tail = 0;
  Real radius = 0;
  std::size_t vectors = 0;  // lattice vectors per handle inside the cutoff
};

template <class Real>
Real im_min_eigenvalue(const cmatrix<Real>& Omega) {
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> im = Omega.imag();
  im = (im + im.transpose()).eval() / Real(2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> es(im);
  return es.eigenvalues().minCoeff();
}

// Radius at which the Gaussian tail bound drops below eps.
template <class Real>
Real default_theta_radius(const cmatrix<Real>& Omega, const lattice_spec& lat, Real eps = Real(1e-17)) {
  Real lmin = im_min_eigenvalue(Omega);
  if (!(lmin > 0)) throw error(errc::domain, "Im Omega is not positive definite");
  Real gd = Real(std::max<long>(1, Omega.rows() * static_cast<long>(lat.rank)));
  return std::sqrt(std::log(gd / eps) / (boost::math::constants::pi<Real>() * lmin));
}

// sum over lambda in L^g with every |lambda_a|^2 <= R^2 of
// exp(i pi sum_ab Omega_ab (lambda_a, lambda_b))
template <class Real>
basic_theta_value<Real> siegel_theta(const cmatrix<Real>& Omega, const lattice_spec& lat, Real R) {
  lat.validate();
  const int g = static_cast<int>(Omega.rows()), d = lat.rank;
  const Real lmin = im_min_eigenvalue(Omega);
  if (!(lmin > 0)) throw error(errc::domain, "Im Omega is not positive definite");
  basic_theta_value<Real> out;
  out.radius = R;
  if (d == 0) {
    out.value = 1;
    out.vectors = 1;
    return out;
  }
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = static_cast<double>(lat.gram[i][j]);
  Eigen::MatrixXd Ginv = G.inverse();

  // integer coordinates inside the ellipsoid n^T G n <= R^2
  std::vector<long> bound(d);
  for (int i = 0; i < d; ++i) bound[i] = static_cast<long>(std::floor(R * std::sqrt(Ginv(i, i)) + 1e-12));
  std::vector<Eigen::VectorXd> vecs;
  std::vector<long> n(d);
  for (int i = 0; i < d; ++i) n[i] = -bound[i];
  for (;;) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = static_cast<double>(n[i]);
    if (v.dot(G * v) <= static_cast<double>(R * R) + 1e-9) vecs.push_back(v);
    int k = 0;
    while (k < d && ++n[k] > bound[k]) n[k] = -bound[k], ++k;
    if (k == d) break;
  }
  out.vectors = vecs.size();

  // products (lambda_i, lambda_j) for all pairs of enumerated vectors
  const std::size_t nv = vecs.size();
  Eigen::MatrixXd ip(nv, nv);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nv; ++j) ip(i, j) = vecs[i].dot(G * vecs[j]);

  const cplx<Real> ipi(0, boost::math::constants::pi<Real>());
  std::vector<std::size_t> pick(g, 0);
  cplx<Real> sum(0);
  Real abs_sum = 0;
  for (;;) {
    cplx<Real> e(0);
    for (int a = 0; a < g; ++a)
      for (int b = 0; b < g; ++b) e += Omega(a, b) * Real(ip(pick[a], pick[b]));
    cplx<Real> t = std::exp(ipi * e);
    sum += t;
    abs_sum += std::abs(t);
    int k = 0;
    while (k < g && ++pick[k] >= nv) pick[k++] = 0;
    if (k == g) break;
  }
  out.value = sum;
  out.tail = Real(g * d) * std::exp(-boost::math::constants::pi<Real>() * lmin * R * R) +
             Real(64) * std::numeric_limits<Real>::epsilon() * abs_sum;
  return out;
}

template <class Real>
basic_correlator_value<Real> lattice_partition(const basic_surface<Real>& S, const lattice_spec& lat,
                                               const basic_period_result<Real>* periods = nullptr) {
  lat.validate();
  if (lat.rank == 0) return {cplx<Real>(1), 0, 1};
  basic_period_result<Real> own;
  if (!periods) {
    own = S.period_matrix();
    periods = &own;
  }
  auto th = siegel_theta(periods->omega, lat, default_theta_radius(periods->omega, lat));
  auto Z = partition_for(S);
  cplx<Real> zd = std::pow(Z.value, lat.rank);
  // first-order propagation; the Omega error enters through d Theta/d Omega,
  // bounded here by pi * |lambda|^2 max * sum |terms|
  Real dth = boost::math::constants::pi<Real>() * th.radius * th.radius * std::abs(th.value) * periods->tail;
  Real tail = (th.tail + dth) * std::abs(zd) +
              std::abs(th.value) * lat.rank * std::pow(std::abs(Z.value), lat.rank - 1) * Z.tail;
  return {th.value * zd, tail, th.vectors};
}

using correlator_value = basic_correlator_value<double>;
using theta_value = basic_theta_value<double>;

}  // namespace schottky
