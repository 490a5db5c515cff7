#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "schottky/error.hpp"
#include "schottky/forms.hpp"
#include "schottky/kernel.hpp"
#include "schottky/schottky_core.hpp"

namespace schottky {

template <class Real>
using cmatrix = Eigen::Matrix<cplx<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using cvector = Eigen::Matrix<cplx<Real>, Eigen::Dynamic, 1>;

struct mode_index {
  int a;
  int m;
};

// a-major (1, -1, 2, -2, ...), then m ascending
inline int mode_offset(int a, int m, int M) { return letter_rank(a) * M + m; }

inline std::vector<mode_index> mode_layout(int g, int M) {
  std::vector<mode_index> out;
  for (int a : signed_indices(g))
    for (int m = 0; m < M; ++m) out.push_back({a, m});
  return out;
}

// Fixed square roots of rho_a, one per handle. flip[a-1] = true picks the
// other sign; outputs must not depend on it.
template <class Real>
struct basic_half_powers {
  std::vector<cplx<Real>> root;

  basic_half_powers(const basic_params<Real>& sp, const std::vector<bool>& flip = {}) {
    for (int a = 1; a <= sp.genus(); ++a) {
      cplx<Real> s = std::sqrt(sp.rho_of(a));
      if (static_cast<int>(flip.size()) >= a && flip[a - 1]) s = -s;
      root.push_back(s);
    }
  }
  // rho_a^{p/2}
  cplx<Real> operator()(int a, int p) const {
    cplx<Real> s = root[std::abs(a) - 1], v(1);
    for (int i = 0; i < p; ++i) v *= s;
    return v;
  }
};

template <class Real>
Real binomial(int n, int k) {
  Real v = 1;
  for (int i = 1; i <= k; ++i) v = v * Real(n - k + i) / Real(i);
  return v;
}

template <class Real>
cmatrix<Real> build_rtilde(const basic_params<Real>& sp, int N, int M,
                           const std::vector<bool>& flip = {}) {
  if (N < 1 || M < 1) throw error(errc::configuration, "build_rtilde needs N >= 1 and M >= 1");
  const int g = sp.genus();
  const basic_half_powers<Real> hp(sp, flip);
  const Real sgnN = (N % 2) ? Real(-1) : Real(1);
  cmatrix<Real> R = cmatrix<Real>::Zero(2 * g * M, 2 * g * M);
  for (int a : signed_indices(g)) {
    for (int b : signed_indices(g)) {
      if (a == -b) continue;
      const cplx<Real> inv = Real(1) / (sp.w(-a) - sp.w(b));
      for (int m = 0; m < M; ++m) {
        const cplx<Real> left = sgnN * hp(a, m + 1) * ((m % 2) ? Real(-1) : Real(1));
        for (int n = 0; n < M; ++n) {
          const int k = n + 2 * N;
          R(mode_offset(a, m, M), mode_offset(b, n, M)) =
              left * hp(b, n + 2 * N - 1) * binomial<Real>(k + m - 1, m) * std::pow(inv, k + m);
        }
      }
    }
  }
  return R;
}

template <class Real>
struct basic_mode_vectors {
  cvector<Real> p, q;
};

template <class Real>
basic_mode_vectors<Real> build_ptilde_q(const basic_params<Real>& sp, int M, cplx<Real> x, cplx<Real> y,
                                        const basic_kernel<Real>& k, const std::vector<bool>& flip = {}) {
  if (!in_fundamental_domain(sp, x) || !in_fundamental_domain(sp, y))
    throw error(errc::domain, "evaluation point inside a Schottky disc");
  const int g = sp.genus(), N = k.N;
  const basic_half_powers<Real> hp(sp, flip);
  const Real sgnN = (N % 2) ? Real(-1) : Real(1);
  basic_mode_vectors<Real> v;
  v.p.resize(2 * g * M);
  v.q.resize(2 * g * M);
  for (int a : signed_indices(g)) {
    for (int m = 0; m < M; ++m) {
      const int i = mode_offset(a, m, M);
      v.p(i) = hp(a, m + 2 * N - 1) * std::pow(x - sp.w(a), -(m + 2 * N));
      v.q(i) = sgnN * hp(a, m + 1) * k.dx_taylor(m, sp.w(-a), y);
    }
  }
  return v;
}

template <class Real>
struct basic_matrix_psi {
  cplx<Real> value;
  Real rcond = 0;
  Real max_q = 0;
  Real tail = 0;
};

// Psi_N(x,y) = psi0(x,y) + p^T (I - R)^{-1} q, by LU solve.
template <class Real>
basic_matrix_psi<Real> psi_via_matrix(const basic_params<Real>& sp, int M, cplx<Real> x, cplx<Real> y,
                                      const basic_kernel<Real>& k, const std::vector<bool>& flip = {}) {
  cmatrix<Real> R = build_rtilde(sp, k.N, M, flip);
  auto pq = build_ptilde_q(sp, M, x, y, k, flip);
  cmatrix<Real> A = cmatrix<Real>::Identity(R.rows(), R.cols()) - R;
  Eigen::PartialPivLU<cmatrix<Real>> lu(A);
  basic_matrix_psi<Real> out;
  out.rcond = lu.rcond();
  out.max_q = pq.q.cwiseAbs().maxCoeff();
  if (!(out.rcond > Real(1e-8))) {
    std::ostringstream os;
    os << "I - R is ill-conditioned, condition estimate " << (out.rcond > 0 ? 1 / out.rcond : INFINITY);
    throw error(errc::conditioning, os.str());
  }
  cvector<Real> v = lu.solve(pq.q);
  out.value = k(x, y) + pq.p.cwiseProduct(v).sum();
  if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag()))
    throw error(errc::divergence, "matrix evaluation of Psi_N is not finite");
  return out;
}

// Default-kernel form: the third-kind kernel for N=1, the Bers kernel for
// N>=2. Drift between M and M/2 is reported as the tail. A drift above 1e-3
// relative means the mode expansion does not converge for this kernel, which
// is what happens when its anchors sit inside the discs.
template <class Real>
basic_matrix_psi<Real> psi_via_matrix(const basic_surface<Real>& S, int N, int M, cplx<Real> x,
                                      cplx<Real> y) {
  const auto k = N == 1 ? S.psi1_kernel() : S.bers_kernel(N);
  auto full = psi_via_matrix(S.parameters(), M, x, y, k);
  auto half = psi_via_matrix(S.parameters(), std::max(1, M / 2), x, y, k);
  full.tail = std::abs(full.value - half.value);
  if (full.tail > Real(1e-3) * std::max(Real(1), std::abs(full.value))) {
    std::ostringstream os;
    os << "mode expansion of Psi_" << N << " drifts by " << full.tail << " between M=" << M / 2
       << " and M=" << M << " (largest q entry " << full.max_q << ")";
    throw error(errc::divergence, os.str());
  }
  return full;
}

// Spectral radius estimate by power iteration from a fixed start vector.
template <class Real>
Real spectral_radius_estimate(const cmatrix<Real>& R, int iters = 50) {
  cvector<Real> v = cvector<Real>::Ones(R.rows());
  v /= v.norm();
  Real lambda = 0;
  for (int i = 0; i < iters; ++i) {
    cvector<Real> w = R * v;
    Real n = w.norm();
    if (n == Real(0)) return 0;
    lambda = n;
    v = w / n;
  }
  return lambda;
}

template <class Real>
struct basic_partition_value {
  cplx<Real> value;
  Real tail = 0;  // |Z(M) - Z(M/2)| plus roundoff
  Real spectral_radius = 0;
  int M = 0;
};

template <class Real>
cplx<Real> heisenberg_det_value(const basic_params<Real>& sp, int M, Real* rho_out,
                                const std::vector<bool>& flip = {}) {
  cmatrix<Real> R = build_rtilde(sp, 1, M, flip);
  Real rad = spectral_radius_estimate<Real>(R);
  if (rho_out) *rho_out = rad;
  if (rad >= Real(1)) {
    std::ostringstream os;
    os << "spectral radius of R estimated at " << rad;
    throw error(errc::divergence, os.str());
  }
  cmatrix<Real> A = cmatrix<Real>::Identity(R.rows(), R.cols()) - R;
  Eigen::PartialPivLU<cmatrix<Real>> lu(A);
  return Real(1) / std::sqrt(lu.determinant());
}

// Z_M = det(1 - R)^{-1/2} at N = 1, principal square root.
template <class Real>
basic_partition_value<Real> heisenberg_partition(const basic_params<Real>& sp, int M,
                                                 const std::vector<bool>& flip = {}) {
  if (M < 1) throw error(errc::configuration, "mode cutoff must be >= 1");
  basic_partition_value<Real> out;
  out.M = M;
  out.value = heisenberg_det_value(sp, M, &out.spectral_radius, flip);
  cplx<Real> half = M >= 2 ? heisenberg_det_value<Real>(sp, M / 2, nullptr, flip) : cplx<Real>(1);
  out.tail = std::abs(out.value - half) + Real(64) * std::numeric_limits<Real>::epsilon() * std::abs(out.value);
  return out;
}

using half_powers = basic_half_powers<double>;
using mode_vectors = basic_mode_vectors<double>;
using matrix_psi = basic_matrix_psi<double>;
using partition_value = basic_partition_value<double>;

}  // namespace schottky
