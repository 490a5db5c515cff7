#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "schottky/error.hpp"
#include "schottky/kernel.hpp"
#include "schottky/schottky_core.hpp"

namespace schottky {

template <class Real>
struct basic_form_value {
  cplx<Real> value{};
  int weight_x = 0;
  int weight_y = 0;
  Real tail = 0;  // estimated truncation error
};

template <class Real>
struct basic_theta_set {
  int N = 0, a = 0;
  std::vector<basic_form_value<Real>> values;  // l = 0 .. 2N-2
  int nodes = 0;
  Real quadrature_error = 0;
};

template <class Real>
struct basic_beta_path {
  std::vector<cplx<Real>> vertices;  // z0, ..., gamma_a z0
  Real phi = 0;
  Real ext = 0;
  int panels = 0;  // Gauss-Legendre panels per leg
  Real clearance = 0;
};

template <class Real>
struct basic_period_result {
  Eigen::Matrix<cplx<Real>, Eigen::Dynamic, Eigen::Dynamic> omega;
  std::vector<basic_beta_path<Real>> paths;
  Real tail = 0;
  Real asymmetry = 0;
  bool im_positive_definite = false;
};

inline std::string word_name(const std::vector<int>& letters) {
  if (letters.empty()) return "Id";
  std::ostringstream os;
  for (std::size_t i = 0; i < letters.size(); ++i) os << (i ? " " : "") << "g" << letters[i];
  return os.str();
}

// (1/2 pi i) * closed integral of f over |z - c| = r, counter-clockwise,
// by the n-point trapezoidal rule.
template <class Real, class F>
cplx<Real> contour_integral(cplx<Real> c, Real r, int n, F&& f) {
  const Real two_pi = boost::math::constants::two_pi<Real>();
  cplx<Real> s(0);
  for (int k = 0; k < n; ++k) {
    cplx<Real> e = std::polar(Real(1), two_pi * k / n);
    s += f(c + r * e) * (r * e);
  }
  return s / Real(n);
}

// Cached group and evaluators over one fixed point of the parameter space.
template <class Real>
class basic_surface {
 public:
  using C = cplx<Real>;
  using value_type = basic_form_value<Real>;

  static constexpr Real pole_eps = Real(1e-9);

  basic_surface(const basic_params<Real>& sp, truncation_policy pol = {}) : sp_(sp), pol_(pol) {
    require_valid(sp_);
    if (pol_.L < 0 || pol_.M < 1 || !(pol_.tol > 0))
      throw error(errc::invalid_parameter, "truncation policy out of range");
    words_ = enumerate_group(sp_, pol_.L);
    const int g = sp_.genus();
    for (int a : signed_indices(g)) gens_.push_back(generator_map(sp_, a));

    centroid_ = C(0);
    for (int a : signed_indices(g)) centroid_ += sp_.w(a);
    centroid_ /= Real(2 * g);
    scale_ = 0;
    for (int a : signed_indices(g))
      scale_ = std::max(scale_, std::abs(sp_.w(a) - centroid_) + sp_.radius(a));

    base_ = C(0);
    for (int a : signed_indices(g))
      if (std::abs(sp_.w(a)) <= sp_.radius(a) * Real(1 + 1e-6)) {
        base_ = centroid_ + Real(1.5) * scale_ * std::polar(Real(1), Real(0.3));
        break;
      }
    probes_ = {centroid_ + Real(3) * scale_ * std::polar(Real(1), Real(0.7)),
               centroid_ + Real(3) * scale_ * std::polar(Real(1), Real(2.9))};
  }

  const basic_params<Real>& parameters() const { return sp_; }
  const truncation_policy& policy() const { return pol_; }
  const std::vector<basic_group_element<Real>>& words() const { return words_; }
  int genus() const { return sp_.genus(); }
  C base_point() const { return base_; }
  C centroid() const { return centroid_; }
  Real domain_scale() const { return scale_; }
  const basic_mobius<Real>& generator(int a) const { return gens_[letter_rank(a)]; }

  // --- Poincare sums -----------------------------------------------------

  template <class F>
  value_type sum_words(F&& term, int wx, int wy, bool skip_identity = false) const {
    C total(0);
    Real abs_all = 0, abs_last = 0;
    for (const auto& e : words_) {
      if (skip_identity && e.letters.empty()) continue;
      C t = term(e);
      total += t;
      Real at = std::abs(t);
      abs_all += at;
      if (e.length() == pol_.L) abs_last += at;
    }
    if (!std::isfinite(total.real()) || !std::isfinite(total.imag()))
      throw error(errc::convergence, "non-finite Poincare sum");
    return {total, wx, wy, abs_last + Real(64) * std::numeric_limits<Real>::epsilon() * abs_all};
  }

  basic_kernel<Real> psi1_kernel() const { return basic_kernel<Real>(1, {base_}); }

  // Sum over gamma of psi0(gamma x, y) (gamma'(x))^N for an arbitrary kernel.
  value_type psi_n(C x, C y, const basic_kernel<Real>& k) const {
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          return k(gx, y) * std::pow(e.m.deriv(x), k.N);
        },
        k.N, 1 - k.N);
  }

  // d/dy of the same sum
  value_type psi_n_dy(C x, C y, const basic_kernel<Real>& k) const {
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          return k.dy(gx, y) * std::pow(e.m.deriv(x), k.N);
        },
        k.N, -k.N);
  }

  value_type psi1_third_kind(C x, C y) const {
    auto k = psi1_kernel();
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          check_pole(gx, base_, e);
          return k(gx, y) * e.m.deriv(x);
        },
        1, 0);
  }

  value_type bidifferential_omega(C x, C y) const {
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          C d = gx - y;
          return e.m.deriv(x) / (d * d);
        },
        1, 1);
  }

  // d/dx omega(x,y)
  value_type omega_dx(C x, C y) const {
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          C d = gx - y, g1 = e.m.deriv(x);
          return e.m.deriv2(x) / (d * d) - Real(2) * g1 * g1 / (d * d * d);
        },
        2, 1);
  }

  // d/dy omega(x,y)
  value_type omega_dy(C x, C y) const {
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          C d = gx - y;
          return Real(2) * e.m.deriv(x) / (d * d * d);
        },
        1, 2);
  }

  // nu_b(x) = sum_gamma [1/(gamma x - p) - 1/(gamma x - gamma_b p)] gamma'(x),
  // all b at once.
  std::vector<value_type> nu_all(C x, int probe = 0) const {
    const int g = genus();
    const C p = probes_.at(probe);
    std::vector<C> pb(g);
    for (int b = 1; b <= g; ++b) pb[b - 1] = generator(b)(p);
    std::vector<C> tot(g, C(0));
    std::vector<Real> all(g, 0), last(g, 0);
    for (const auto& e : words_) {
      C gx = e.m(x), d1 = e.m.deriv(x);
      check_pole(gx, p, e);
      C t0 = Real(1) / (gx - p);
      for (int b = 0; b < g; ++b) {
        check_pole(gx, pb[b], e);
        C t = (t0 - Real(1) / (gx - pb[b])) * d1;
        tot[b] += t;
        all[b] += std::abs(t);
        if (e.length() == pol_.L) last[b] += std::abs(t);
      }
    }
    std::vector<value_type> out(g);
    for (int b = 0; b < g; ++b)
      out[b] = {tot[b], 1, 0, last[b] + Real(64) * std::numeric_limits<Real>::epsilon() * all[b]};
    return out;
  }

  value_type nu(int a, C x, int probe = 0) const {
    check_handle(a);
    return nu_all(x, probe)[a - 1];
  }

  // d/dx nu_a(x)
  value_type nu_dx(int a, C x, int probe = 0) const {
    check_handle(a);
    const C p = probes_.at(probe), pa = generator(a)(p);
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x), d1 = e.m.deriv(x), d2 = e.m.deriv2(x);
          check_pole(gx, p, e);
          check_pole(gx, pa, e);
          C u = Real(1) / (gx - p), v = Real(1) / (gx - pa);
          return d2 * (u - v) - d1 * d1 * (u * u - v * v);
        },
        2, 0);
  }

  // nu_a evaluated with both probes; the discrepancy is folded into the tail.
  value_type holomorphic_one_form(int a, C x) const {
    value_type v0 = nu(a, x, 0), v1 = nu(a, x, 1);
    Real diff = std::abs(v0.value - v1.value);
    Real allowed = std::max(Real(pol_.tol), Real(10) * (v0.tail + v1.tail)) * (1 + std::abs(v0.value));
    if (diff > allowed) {
      std::ostringstream os;
      os << "nu_" << a << " depends on the probe point: |difference| = " << diff;
      throw error(errc::convergence, os.str());
    }
    v0.tail = std::max(v0.tail, diff);
    return v0;
  }

  // s(x) = 6 lim_{y->x} (omega(x,y) - 1/(x-y)^2) = 6 sum_{gamma != Id} gamma'(x)/(gamma x - x)^2
  value_type projective_connection(C x) const {
    auto v = sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, x, e);
          C d = gx - x;
          return Real(6) * e.m.deriv(x) / (d * d);
        },
        2, 0, true);
    return v;
  }

  value_type projective_connection_dx(C x) const {
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, x, e);
          C d = gx - x, g1 = e.m.deriv(x);
          return Real(6) * (e.m.deriv2(x) / (d * d) - Real(2) * g1 * (g1 - Real(1)) / (d * d * d));
        },
        3, 0, true);
  }

  value_type lambda_n(C x, C y, int N) const {
    if (N < 1) throw error(errc::configuration, "lambda_n needs N >= 1");
    return sum_words(
        [&](const basic_group_element<Real>& e) {
          C gx = e.m(x);
          check_pole(gx, y, e);
          C d = gx - y;
          return std::pow(e.m.deriv(x) / (d * d), N);
        },
        N, N);
  }

  // --- Bers kernel ---------------------------------------------------------

  // 2N-1 distinct limit points: generator fixed points W_1, W_-1, W_2, ...,
  // then fixed points of longer words in enumeration order.
  std::vector<C> bers_anchors(int N) const {
    if (N < 2) throw error(errc::configuration, "Bers anchors are for N >= 2");
    const std::size_t need = static_cast<std::size_t>(2 * N - 1);
    std::vector<C> pts;
    auto add = [&](C z) {
      for (const C& p : pts)
        if (std::abs(p - z) <= Real(1e-8) * (1 + scale_)) return;
      pts.push_back(z);
    };
    auto cp = classical_from_params(sp_);
    for (int a = 1; a <= genus() && pts.size() < need; ++a) {
      add(cp.W(a));
      if (pts.size() < need) add(cp.W(-a));
    }
    if (pts.size() < need) {
      auto longer = enumerate_group(sp_, 2);
      for (const auto& e : longer) {
        if (e.length() < 2 || pts.size() >= need) continue;
        const auto& m = e.m;
        C disc = std::sqrt((m.d - m.a) * (m.d - m.a) + Real(4) * m.b * m.c);
        if (m.c == C(0)) continue;
        add((m.a - m.d + disc) / (Real(2) * m.c));
        if (pts.size() < need) add((m.a - m.d - disc) / (Real(2) * m.c));
      }
    }
    if (pts.size() < need) {
      std::ostringstream os;
      os << "Bers kernel with N=" << N << " needs " << need << " distinct limit points, found "
         << pts.size() << " at genus " << genus();
      throw error(errc::configuration, os.str());
    }
    return pts;
  }

  basic_kernel<Real> bers_kernel(int N) const { return basic_kernel<Real>(N, bers_anchors(N)); }

  value_type psi_n_bers(C x, C y, int N) const { return psi_n(x, y, bers_kernel(N)); }

  // --- Theta extraction ----------------------------------------------------

  // Laurent data of the quasi-period on C_a, by trapezoidal quadrature with
  // node doubling. N=1 uses the third-kind kernel, N>=2 the Bers kernel.
  basic_theta_set<Real> theta_n_forms(int N, int a, C x, int nodes = 256) const {
    return theta_n_forms(N, a, x, N == 1 ? psi1_kernel() : bers_kernel(N), nodes);
  }

  basic_theta_set<Real> theta_n_forms(int N, int a, C x, const basic_kernel<Real>& k,
                                      int nodes = 256) const {
    check_handle(a);
    if (nodes < 32 || (nodes & (nodes - 1)) != 0)
      throw error(errc::configuration, "contour node count must be a power of two >= 32");
    const int nl = 2 * N - 1;
    const C rho = sp_.rho_of(a);
    const Real r = sp_.radius(a);
    const Real two_pi = boost::math::constants::two_pi<Real>();
    for (int n = nodes; n <= 4096; n *= 2) {
      // chi[s][l] for s = +a, -a, using n nodes and the n/2 even subset
      std::vector<C> chi_full[2], chi_half[2];
      Real tmax = 0;
      for (int s = 0; s < 2; ++s) {
        const C c = sp_.w(s == 0 ? a : -a);
        chi_full[s].assign(nl, C(0));
        chi_half[s].assign(nl, C(0));
        for (int j = 0; j < n; ++j) {
          C e = std::polar(Real(1), two_pi * j / n);
          auto v = psi_n(x, c + r * e, k);
          tmax = std::max(tmax, v.tail);
          C re = r * e, pw(1);
          for (int l = 0; l < nl; ++l) {
            chi_full[s][l] += v.value * pw;
            if (j % 2 == 0) chi_half[s][l] += v.value * pw;
            pw /= re;
          }
        }
        for (int l = 0; l < nl; ++l) {
          chi_full[s][l] /= Real(n);
          chi_half[s][l] /= Real(n / 2);
        }
      }
      auto theta_of = [&](const std::vector<C>* chi, int l) {
        return chi[0][l] + ((N % 2) ? Real(-1) : Real(1)) * std::pow(rho, N - 1 - l) * chi[1][nl - 1 - l];
      };
      basic_theta_set<Real> out;
      out.N = N;
      out.a = a;
      out.nodes = n;
      Real scale = 0, diff = 0;
      for (int l = 0; l < nl; ++l) {
        C full = theta_of(chi_full, l), half = theta_of(chi_half, l);
        scale = std::max(scale, std::abs(full) * std::pow(r, l));
        diff = std::max(diff, std::abs(full - half) * std::pow(r, l));
        out.values.push_back({full, N, 0, Real(2) * tmax * std::pow(r, -l)});
      }
      out.quadrature_error = diff;
      if (diff <= Real(1e-10) * std::max(scale, Real(1e-300)) || diff == Real(0)) {
        for (int l = 0; l < nl; ++l) out.values[l].tail += diff * std::pow(r, -l);
        return out;
      }
    }
    throw error(errc::quadrature, "theta extraction did not converge under node doubling");
  }

  // --- Period matrix -------------------------------------------------------

  // Polyline z0 -> gamma_a z0: radially out of C_a, across, radially into
  // C_{-a}. phi places z0 = w_a + r e^{i phi}; ext is the radial leg length
  // in units of r. The candidate with the most clearance from all discs wins.
  basic_beta_path<Real> choose_beta_path(int a, int samples = 720) const {
    const Real two_pi = boost::math::constants::two_pi<Real>();
    basic_beta_path<Real> best;
    best.clearance = -std::numeric_limits<Real>::infinity();
    for (Real ext : {Real(0.25), Real(0.5), Real(1), Real(2)}) {
      for (int k = 0; k < samples; ++k) {
        auto p = path_at(a, two_pi * k / samples, ext);
        if (p.clearance > best.clearance) best = p;
      }
    }
    if (!(best.clearance > 0))
      throw error(errc::path, "no beta path for handle " + std::to_string(a) + " stays in the fundamental domain");
    return best;
  }

  basic_beta_path<Real> path_at(int a, Real phi, Real ext) const {
    const Real r = sp_.radius(a);
    const Real psi = std::arg(sp_.rho_of(a)) - phi;
    basic_beta_path<Real> p;
    p.phi = phi;
    p.ext = ext;
    p.vertices = {sp_.w(a) + std::polar(r, phi), sp_.w(a) + std::polar(r * (1 + ext), phi),
                  sp_.w(-a) + std::polar(r * (1 + ext), psi), sp_.w(-a) + std::polar(r, psi)};
    p.clearance = path_clearance(a, p.vertices);
    return p;
  }

  // 2 pi i Omega_ab = int over beta_a of nu_b, with beta_a run from gamma_a z0
  // back to z0. Together with alpha_a = C_{-a} traversed clockwise (as part of
  // the boundary of D) this is the orientation under which nu_a, defined by
  // the quasi-period of Psi_1, has unit alpha-periods and Im Omega > 0.
  // Passing `frozen`
  // reuses path geometry and panel counts, which keeps finite differences smooth.
  basic_period_result<Real> period_matrix(const std::vector<basic_beta_path<Real>>* frozen = nullptr) const {
    const int g = genus();
    using boost::math::quadrature::gauss;
    constexpr int GN = 20;
    const auto& xs = gauss<Real, GN>::abscissa();
    const auto& ws = gauss<Real, GN>::weights();
    const C two_pi_i(0, boost::math::constants::two_pi<Real>());

    basic_period_result<Real> res;
    res.omega.resize(g, g);
    for (int a = 1; a <= g; ++a) {
      basic_beta_path<Real> path;
      if (frozen) {
        const auto& f = frozen->at(a - 1);
        path = path_at(a, f.phi, f.ext);
        path.panels = f.panels;
        if (!(path.clearance > 0)) throw error(errc::path, "frozen beta path leaves the fundamental domain");
      } else {
        path = choose_beta_path(a);
      }
      // same panel count on every leg
      auto integrate = [&](int panels, Real* tail) {
        std::vector<C> acc(g, C(0));
        Real t = 0;
        for (std::size_t s = 0; s + 1 < path.vertices.size(); ++s) {
          const C z0 = path.vertices[s], dz = path.vertices[s + 1] - z0;
          std::vector<C> leg(g, C(0));
          Real lt = 0;
          for (int p = 0; p < panels; ++p) {
            Real mid = (Real(p) + Real(0.5)) / panels, half = Real(0.5) / panels;
            for (std::size_t i = 0; i < xs.size(); ++i) {
              for (int sgn : {-1, 1}) {
                if (xs[i] == Real(0) && sgn < 0) continue;
                auto nus = nu_all(z0 + (mid + sgn * half * xs[i]) * dz, 0);
                for (int b = 0; b < g; ++b) {
                  leg[b] += ws[i] * half * nus[b].value;
                  lt += ws[i] * half * nus[b].tail;
                }
              }
            }
          }
          for (int b = 0; b < g; ++b) acc[b] += leg[b] * dz / two_pi_i;
          t += lt * std::abs(dz) / std::abs(two_pi_i);
        }
        if (tail) *tail = t;
        return acc;
      };
      Real tail = 0, qerr = 0;
      std::vector<C> row;
      if (path.panels > 0) {
        row = integrate(path.panels, &tail);
      } else {
        int panels = 1;
        std::vector<C> prev = integrate(panels, nullptr);
        for (;;) {
          row = integrate(2 * panels, &tail);
          qerr = 0;
          for (int b = 0; b < g; ++b) qerr = std::max(qerr, std::abs(row[b] - prev[b]));
          panels *= 2;
          if (qerr <= Real(1e-13) || panels >= 128) break;
          prev = row;
        }
        if (qerr > Real(1e-8))
          throw error(errc::quadrature, "beta-path quadrature did not converge for handle " + std::to_string(a));
        path.panels = panels;
      }
      for (int b = 1; b <= g; ++b) res.omega(a - 1, b - 1) = -row[b - 1];
      res.tail = std::max(res.tail, tail + qerr);
      res.paths.push_back(path);
    }
    // A path in D may differ from the canonical beta cycle by alpha cycles,
    // which shifts Omega_ba by an integer.
    for (int a = 0; a < g; ++a)
      for (int b = a + 1; b < g; ++b) {
        Real n = std::round((res.omega(b, a) - res.omega(a, b)).real());
        res.omega(b, a) -= n;
        res.asymmetry = std::max(res.asymmetry, std::abs(res.omega(b, a) - res.omega(a, b)));
      }
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> im = res.omega.imag();
    im = (im + im.transpose()).eval() / Real(2);
    Eigen::LLT<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> llt(im);
    res.im_positive_definite = llt.info() == Eigen::Success;
    Real allowed = std::max({Real(pol_.tol), Real(10) * res.tail, Real(1e-8)});
    if (res.asymmetry > allowed) {
      std::ostringstream os;
      os << "period matrix asymmetry " << res.asymmetry << " exceeds " << allowed;
      throw error(errc::convergence, os.str());
    }
    return res;
  }

 private:
  void check_handle(int a) const {
    if (a < 1 || a > genus()) throw error(errc::configuration, "handle index out of range");
  }

  static void check_pole(C gx, C y, const basic_group_element<Real>& e) {
    if (std::abs(gx - y) < pole_eps) {
      std::ostringstream os;
      os << "image under " << word_name(e.letters) << " lies within " << pole_eps << " of a pole";
      throw error(errc::pole, os.str());
    }
  }

  // Smallest relative clearance (distance minus radius, over radius) of the
  // polyline from every disc. The radial legs touch their own circle at one
  // end and are exempt from that disc only.
  Real path_clearance(int a, const std::vector<C>& v) const {
    Real score = std::numeric_limits<Real>::infinity();
    const std::size_t legs = v.size() - 1;
    for (std::size_t s = 0; s < legs; ++s) {
      const C z0 = v[s], d = v[s + 1] - z0;
      const Real len2 = std::norm(d);
      for (int b : signed_indices(genus())) {
        if ((s == 0 && b == a) || (s == legs - 1 && b == -a)) continue;
        const C c = sp_.w(b);
        Real t = len2 > 0 ? std::clamp(std::real(std::conj(d) * (c - z0)) / len2, Real(0), Real(1)) : Real(0);
        Real dist = std::abs(z0 + t * d - c);
        score = std::min(score, (dist - sp_.radius(b)) / sp_.radius(b));
      }
    }
    return score;
  }

  basic_params<Real> sp_;
  truncation_policy pol_;
  std::vector<basic_group_element<Real>> words_;
  std::vector<basic_mobius<Real>> gens_;
  C centroid_, base_;
  Real scale_ = 0;
  std::vector<C> probes_;
};

using form_value = basic_form_value<double>;
using theta_set = basic_theta_set<double>;
using beta_path = basic_beta_path<double>;
using period_result = basic_period_result<double>;
using surface = basic_surface<double>;

}  // namespace schottky
