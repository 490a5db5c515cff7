#pragma once

#include <complex>
#include <vector>

#include "schottky/error.hpp"

namespace schottky {

// Genus-zero kernel psi_N^(0)(x,y) = 1/(x-y) * prod_j (y-A_j)/(x-A_j) with
// 2N-1 anchors. N=1 with the single anchor c gives 1/(x-y) - 1/(x-c).
template <class Real>
struct basic_kernel {
  using C = std::complex<Real>;

  int N = 1;
  std::vector<C> anchors;

  basic_kernel() = default;
  basic_kernel(int n, std::vector<C> a) : N(n), anchors(std::move(a)) {
    if (N < 1) throw error(errc::configuration, "kernel weight N must be >= 1");
    if (static_cast<int>(anchors.size()) != 2 * N - 1)
      throw error(errc::configuration, "kernel needs 2N-1 anchors");
  }

  C operator()(C x, C y) const {
    C v = Real(1) / (x - y);
    for (const C& A : anchors) {
      // x sits exactly on an anchor only when a deep generator power has
      // collapsed onto its fixed point; that summand is negligible.
      if (x == A) return C(0);
      v *= (y - A) / (x - A);
    }
    return v;
  }

  // d/dy
  C dy(C x, C y) const {
    C v = (*this)(x, y);
    if (v == C(0)) return v;
    C s = Real(1) / (x - y);
    for (const C& A : anchors) s += Real(1) / (y - A);
    return v * s;
  }

  // Lagrange basis L_i(y) on the anchors
  C lagrange(std::size_t i, C y) const {
    C l(1);
    for (std::size_t j = 0; j < anchors.size(); ++j)
      if (j != i) l *= (y - anchors[j]) / (anchors[i] - anchors[j]);
    return l;
  }

  // (1/m!) d^m/dx^m by partial fractions:
  // psi0 = 1/(x-y) - sum_i L_i(y)/(x-A_i)
  C dx_taylor(int m, C x, C y) const {
    C v = std::pow(x - y, -m - 1);
    for (std::size_t i = 0; i < anchors.size(); ++i)
      v -= lagrange(i, y) * std::pow(x - anchors[i], -m - 1);
    return (m % 2 ? Real(-1) : Real(1)) * v;
  }
};

using kernel = basic_kernel<double>;

}  // namespace schottky
