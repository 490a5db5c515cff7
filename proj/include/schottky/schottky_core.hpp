#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "schottky/error.hpp"

namespace schottky {

template <class Real>
using cplx = std::complex<Real>;

// A point of the Riemann sphere. Infinity is a flag, not a huge number,
// because w_a = gamma_{-a}(inf) has to come out exact.
template <class Real>
struct basic_point {
  cplx<Real> z{};
  bool inf = false;

  basic_point() = default;
  basic_point(cplx<Real> v) : z(v) {}
  static basic_point infinity() {
    basic_point p;
    p.inf = true;
    return p;
  }
  bool operator==(const basic_point& o) const {
    return inf ? o.inf : (!o.inf && z == o.z);
  }
};

template <class Real>
struct basic_mobius {
  cplx<Real> a{1}, b{0}, c{0}, d{1};

  static basic_mobius identity() { return {}; }

  cplx<Real> det() const { return a * d - b * c; }

  basic_mobius normalized() const {
    cplx<Real> s = std::sqrt(det());
    return {a / s, b / s, c / s, d / s};
  }

  // (*this)∘o
  basic_mobius operator*(const basic_mobius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }

  // valid for det = 1
  basic_mobius inverse() const { return {d, -b, -c, a}; }

  cplx<Real> operator()(cplx<Real> z) const { return (a * z + b) / (c * z + d); }

  basic_point<Real> apply(const basic_point<Real>& p) const {
    if (p.inf) {
      if (c == cplx<Real>(0)) return basic_point<Real>::infinity();
      return basic_point<Real>(a / c);
    }
    cplx<Real> den = c * p.z + d;
    if (den == cplx<Real>(0)) return basic_point<Real>::infinity();
    return basic_point<Real>((a * p.z + b) / den);
  }

  // first and second derivatives, det = 1 assumed
  cplx<Real> deriv(cplx<Real> z) const {
    cplx<Real> t = c * z + d;
    return Real(1) / (t * t);
  }
  cplx<Real> deriv2(cplx<Real> z) const {
    cplx<Real> t = c * z + d;
    return Real(-2) * c / (t * t * t);
  }

  Real distance(const basic_mobius& o) const {
    // up to the overall sign ambiguity of SL2
    Real p = std::abs(a - o.a) + std::abs(b - o.b) + std::abs(c - o.c) + std::abs(d - o.d);
    Real m = std::abs(a + o.a) + std::abs(b + o.b) + std::abs(c + o.c) + std::abs(d + o.d);
    return std::min(p, m);
  }
};

// Generator order 1, -1, 2, -2, ...
inline std::vector<int> signed_indices(int g) {
  std::vector<int> out;
  for (int a = 1; a <= g; ++a) {
    out.push_back(a);
    out.push_back(-a);
  }
  return out;
}

inline int letter_rank(int a) { return a > 0 ? 2 * (a - 1) : 2 * (-a - 1) + 1; }

template <class Real>
struct basic_params {
  std::vector<cplx<Real>> w_plus, w_minus, rho;

  basic_params() = default;
  basic_params(std::vector<cplx<Real>> wp, std::vector<cplx<Real>> wm, std::vector<cplx<Real>> r)
      : w_plus(std::move(wp)), w_minus(std::move(wm)), rho(std::move(r)) {
    if (w_plus.size() != w_minus.size() || w_plus.size() != rho.size())
      throw error(errc::invalid_parameter, "handle arrays differ in length");
  }

  int genus() const { return static_cast<int>(rho.size()); }
  cplx<Real> w(int a) const { return a > 0 ? w_plus[a - 1] : w_minus[-a - 1]; }
  cplx<Real>& w(int a) { return a > 0 ? w_plus[a - 1] : w_minus[-a - 1]; }
  cplx<Real> rho_of(int a) const { return rho[std::abs(a) - 1]; }
  cplx<Real>& rho_of(int a) { return rho[std::abs(a) - 1]; }
  Real radius(int a) const { return std::sqrt(std::abs(rho_of(a))); }
};

template <class Real>
struct basic_classical {
  std::vector<cplx<Real>> W_plus, W_minus, q;
  int genus() const { return static_cast<int>(q.size()); }
  cplx<Real> W(int a) const { return a > 0 ? W_plus[a - 1] : W_minus[-a - 1]; }
};

struct truncation_policy {
  int L = 6;
  int M = 20;
  double tol = 1e-10;
};

template <class Real>
basic_params<Real> params_from_classical(const basic_classical<Real>& cp) {
  basic_params<Real> sp;
  for (int a = 0; a < cp.genus(); ++a) {
    cplx<Real> q = cp.q[a], Wp = cp.W_plus[a], Wm = cp.W_minus[a];
    cplx<Real> one_q = Real(1) - q;
    if (std::abs(one_q) == Real(0))
      throw error(errc::invalid_parameter, "q = 1 for handle " + std::to_string(a + 1));
    sp.w_plus.push_back((Wp - q * Wm) / one_q);
    sp.w_minus.push_back((Wm - q * Wp) / one_q);
    sp.rho.push_back(-q * (Wp - Wm) * (Wp - Wm) / (one_q * one_q));
  }
  return sp;
}

template <class Real>
basic_mobius<Real> generator_map(const basic_params<Real>& sp, int a) {
  // z -> w_{-a} + rho_a/(z - w_a), det = -rho_a before normalization
  cplx<Real> wa = sp.w(a), wma = sp.w(-a), r = sp.rho_of(a);
  return basic_mobius<Real>{wma, r - wma * wa, cplx<Real>(1), -wa}.normalized();
}

template <class Real>
cplx<Real> apply_mobius(const basic_mobius<Real>& m, cplx<Real> z) {
  return m(z);
}

template <class Real>
basic_point<Real> apply_mobius(const basic_mobius<Real>& m, const basic_point<Real>& z) {
  return m.apply(z);
}

// Fixed points of gamma_a: z^2 - (w_a + w_{-a}) z + w_a w_{-a} - rho_a = 0.
// Repelling root is W_a, attracting root W_{-a}; q_a = gamma_a'(W_{-a}).
template <class Real>
basic_classical<Real> classical_from_params(const basic_params<Real>& sp) {
  basic_classical<Real> cp;
  for (int a = 1; a <= sp.genus(); ++a) {
    cplx<Real> wa = sp.w(a), wma = sp.w(-a), r = sp.rho_of(a);
    cplx<Real> s = wa + wma;
    cplx<Real> disc = (wa - wma) * (wa - wma) + Real(4) * r;
    Real scale = std::max({std::abs(wa - wma) * std::abs(wa - wma), std::abs(r), Real(1e-300)});
    if (std::abs(disc) <= Real(64) * std::numeric_limits<Real>::epsilon() * scale)
      throw error(errc::degenerate_map, "parabolic generator " + std::to_string(a));
    cplx<Real> sq = std::sqrt(disc);
    cplx<Real> z1 = (s + sq) / Real(2), z2 = (s - sq) / Real(2);
    auto mult = [&](cplx<Real> z) { return -r / ((z - wa) * (z - wa)); };
    cplx<Real> m1 = mult(z1), m2 = mult(z2);
    if (std::abs(m1) < std::abs(m2)) {
      cp.W_minus.push_back(z1);
      cp.W_plus.push_back(z2);
      cp.q.push_back(m1);
    } else {
      cp.W_minus.push_back(z2);
      cp.W_plus.push_back(z1);
      cp.q.push_back(m2);
    }
  }
  return cp;
}

template <class Real>
struct basic_group_element {
  std::vector<int> letters;
  basic_mobius<Real> m;
  int length() const { return static_cast<int>(letters.size()); }
};

inline std::size_t group_size(int g, int L) {
  std::size_t n = 1, shell = 2 * static_cast<std::size_t>(g);
  for (int k = 1; k <= L; ++k) {
    n += shell;
    shell *= 2 * static_cast<std::size_t>(g) - 1;
  }
  return n;
}

// All reduced words of length <= L, by length then lexicographic in the
// letter order 1, -1, 2, -2, ...  The matrix of a1 a2 ... ak is
// gamma_{a1} gamma_{a2} ... gamma_{ak}.
template <class Real>
std::vector<basic_group_element<Real>> enumerate_group(const basic_params<Real>& sp, int L) {
  const int g = sp.genus();
  std::vector<basic_group_element<Real>> out;
  out.reserve(group_size(g, L));
  out.push_back({{}, basic_mobius<Real>::identity()});
  std::vector<basic_mobius<Real>> gens;
  const auto idx = signed_indices(g);
  for (int a : idx) gens.push_back(generator_map(sp, a));
  std::size_t begin = 0, end = 1;
  for (int k = 1; k <= L; ++k) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const int b = idx[j];
        if (!out[i].letters.empty() && out[i].letters.back() == -b) continue;
        basic_group_element<Real> e;
        e.letters = out[i].letters;
        e.letters.push_back(b);
        e.m = out[i].m * gens[j];
        out.push_back(std::move(e));
      }
    }
    begin = end;
    end = out.size();
  }
  return out;
}

struct disc_violation {
  int a, b;
  double margin;
};

struct validity_report {
  bool valid = true;
  double min_margin = 0;
  std::vector<disc_violation> violations;

  std::string describe() const {
    std::ostringstream os;
    if (valid) {
      os << "valid, min margin " << min_margin;
    } else {
      os << "discs overlap:";
      for (const auto& v : violations) os << " (" << v.a << "," << v.b << ") margin " << v.margin;
    }
    return os.str();
  }
};

template <class Real>
validity_report validate(const basic_params<Real>& sp) {
  validity_report rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  if (sp.genus() < 1) {
    rep.valid = false;
    return rep;
  }
  for (int a = 1; a <= sp.genus(); ++a) {
    if (sp.rho_of(a) == cplx<Real>(0)) {
      rep.valid = false;
      rep.violations.push_back({a, a, 0.0});
    }
  }
  const auto idx = signed_indices(sp.genus());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      int a = idx[i], b = idx[j];
      Real margin = std::abs(sp.w(a) - sp.w(b)) - sp.radius(a) - sp.radius(b);
      rep.min_margin = std::min(rep.min_margin, static_cast<double>(margin));
      if (!(margin > Real(0))) {
        rep.valid = false;
        rep.violations.push_back({a, b, static_cast<double>(margin)});
      }
    }
  }
  return rep;
}

template <class Real>
void require_valid(const basic_params<Real>& sp) {
  auto rep = validate(sp);
  if (!rep.valid) throw error(errc::invalid_parameter, rep.describe());
}

template <class Real>
basic_params<Real> mobius_act_on_params(const basic_params<Real>& sp, const basic_mobius<Real>& m0,
                                        bool check = true) {
  const auto m = m0.normalized();
  const cplx<Real> A = m.a, B = m.b, C = m.c, D = m.d;
  basic_params<Real> out = sp;
  for (int a : signed_indices(sp.genus())) {
    cplx<Real> wa = sp.w(a), wma = sp.w(-a), r = sp.rho_of(a);
    cplx<Real> den = (C * wa + D) * (C * wma + D) - r * C * C;
    out.w(a) = ((A * wa + B) * (C * wma + D) - r * A * C) / den;
    if (a > 0) out.rho_of(a) = r / (den * den);
  }
  if (check) {
    auto rep = validate(out);
    if (!rep.valid) throw error(errc::domain_exit, "image parameters invalid: " + rep.describe());
  }
  return out;
}

template <class Real>
bool in_fundamental_domain(const basic_params<Real>& sp, const basic_point<Real>& z) {
  if (z.inf) return true;
  for (int a : signed_indices(sp.genus()))
    if (std::abs(z.z - sp.w(a)) < sp.radius(a)) return false;
  return true;
}

template <class Real>
bool in_fundamental_domain(const basic_params<Real>& sp, cplx<Real> z) {
  return in_fundamental_domain(sp, basic_point<Real>(z));
}

using point = basic_point<double>;
using mobius = basic_mobius<double>;
using params = basic_params<double>;
using classical_params = basic_classical<double>;
using group_element = basic_group_element<double>;
using complex = std::complex<double>;

}  // namespace schottky
