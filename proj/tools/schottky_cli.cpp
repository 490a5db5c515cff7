// schottky: command-line front end.
//
//   schottky validate   --params FILE
//   schottky periods    --params FILE
//   schottky eval       --params FILE --form psi1|omega|nu|s|lambda2|psi2 [--x re,im ...] [--y re,im] [--a N]
//   schottky partition  --params FILE [--lattice FILE]
//   schottky correlator --params FILE --kind heisenberg|virasoro1|virasoro2 [--n N] [--x re,im ...]
//   schottky check      --params FILE
//
// Exit status: 0 success, 1 computational or identity failure, 2 input error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "schottky/io.hpp"
#include "schottky/schottky.hpp"

namespace {

using namespace schottky;
using json = nlohmann::json;
using C = std::complex<double>;

constexpr int exit_fail = 1;
constexpr int exit_input = 2;

struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct run_config {
  std::string params_path, out_path, format = "json";
  std::optional<int> L, M;
  std::optional<double> tol;
  unsigned threads = 0;

  // eval / correlator
  std::string form = "omega", kind = "heisenberg", lattice_path;
  std::vector<std::string> xs;
  std::string y;
  int a = 1, n = 2;
};

C parse_point(const std::string& s) {
  auto comma = s.find(',');
  try {
    if (comma == std::string::npos) return {std::stod(s), 0.0};
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw input_error("bad point '" + s + "', expected re,im");
  }
}

struct loaded {
  params sp;
  truncation_policy pol;
};

loaded load(const run_config& cfg, bool require_valid_params = true) {
  auto pf = io::load_params(cfg.params_path);
  truncation_policy pol;
  pol.L = cfg.L.value_or(pf.L.value_or(pol.L));
  pol.M = cfg.M.value_or(pf.M.value_or(pol.M));
  pol.tol = cfg.tol.value_or(pf.tol.value_or(pol.tol));
  if (pol.L < 0 || pol.M < 1 || !(pol.tol > 0)) throw input_error("truncation policy out of range");
  if (require_valid_params) {
    auto rep = validate(pf.sp);
    if (!rep.valid) throw input_error("invalid parameters: " + rep.describe());
  }
  return {pf.sp, pol};
}

// Sample points on a circle that clears every disc.
std::vector<C> default_points(const surface& S, int n) {
  std::vector<C> out;
  for (int k = 0; k < n; ++k)
    out.push_back(S.centroid() + 1.25 * S.domain_scale() * std::polar(1.0, 0.9 + 2.3 * k / std::max(1, n)));
  return out;
}

std::vector<C> points_or_default(const run_config& cfg, const surface& S, int n) {
  if (cfg.xs.empty()) return default_points(S, n);
  std::vector<C> out;
  for (const auto& s : cfg.xs) out.push_back(parse_point(s));
  return out;
}

void emit(const run_config& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out_path);
  if (!f) throw input_error("cannot write " + cfg.out_path);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json matrix_json(const cmatrix<double>& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(io::to_json(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

json report_json(const identity_report& r) {
  return {{"name", r.name},
          {"max_residual", r.max_residual},
          {"tolerance", r.tolerance},
          {"truncation_floor", r.truncation_floor},
          {"passed", r.passed},
          {"classification", r.classification()}};
}

// --- commands ---------------------------------------------------------------

int cmd_validate(const run_config& cfg) {
  auto pf = io::load_params(cfg.params_path);
  auto rep = validate(pf.sp);
  json j = io::to_json(rep);
  j["params"] = io::to_json(pf.sp);
  emit(cfg, dump(j));
  if (!rep.valid) std::cerr << "schottky: " << rep.describe() << "\n";
  return rep.valid ? 0 : exit_fail;
}

int cmd_periods(const run_config& cfg) {
  auto in = load(cfg);
  surface S(in.sp, in.pol);
  auto P = S.period_matrix();
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "a,b,re_value,im_value\n";
    for (int a = 0; a < P.omega.rows(); ++a)
      for (int b = 0; b < P.omega.cols(); ++b)
        os << a + 1 << ',' << b + 1 << ',' << io::format_real(P.omega(a, b).real()) << ','
           << io::format_real(P.omega(a, b).imag()) << '\n';
    emit(cfg, os.str());
  } else {
    emit(cfg, dump({{"omega", matrix_json(P.omega)},
                    {"tail_estimate", P.tail},
                    {"asymmetry", P.asymmetry},
                    {"im_positive_definite", P.im_positive_definite},
                    {"L", in.pol.L}}));
  }
  return P.im_positive_definite ? 0 : exit_fail;
}

int cmd_eval(const run_config& cfg) {
  auto in = load(cfg);
  surface S(in.sp, in.pol);
  auto xs = points_or_default(cfg, S, 8);
  C y = cfg.y.empty() ? S.centroid() + 1.25 * S.domain_scale() * std::polar(1.0, -2.0) : parse_point(cfg.y);
  const auto& f = cfg.form;
  const bool needs_y = f == "psi1" || f == "omega" || f == "lambda2" || f == "psi2";
  if (f != "nu" && f != "s" && !needs_y) throw input_error("unknown form '" + f + "'");
  if (f == "nu" && (cfg.a < 1 || cfg.a > in.sp.genus())) throw input_error("handle index out of range");

  std::vector<C> vals;
  json rec = json::array();
  for (C x : xs) {
    form_value v;
    if (f == "psi1") v = S.psi1_third_kind(x, y);
    if (f == "omega") v = S.bidifferential_omega(x, y);
    if (f == "lambda2") v = S.lambda_n(x, y, 2);
    if (f == "psi2") v = S.psi_n_bers(x, y, 2);
    if (f == "nu") v = S.holomorphic_one_form(cfg.a, x);
    if (f == "s") v = S.projective_connection(x);
    vals.push_back(v.value);
    rec.push_back({{"x", io::to_json(x)},
                   {"value", io::to_json(v.value)},
                   {"tail_estimate", v.tail},
                   {"weight_x", v.weight_x},
                   {"weight_y", v.weight_y}});
  }
  if (cfg.format == "csv") {
    emit(cfg, io::to_csv(xs, vals));
  } else {
    json j = {{"form", f}, {"values", rec}};
    if (needs_y) j["y"] = io::to_json(y);
    if (f == "nu") j["a"] = cfg.a;
    emit(cfg, dump(j));
  }
  return 0;
}

int cmd_partition(const run_config& cfg) {
  auto in = load(cfg);
  json j;
  if (cfg.lattice_path.empty()) {
    auto Z = heisenberg_partition(in.sp, in.pol.M);
    j = {{"Z_M", io::to_json(Z.value)}, {"tail_estimate", Z.tail}, {"spectral_radius", Z.spectral_radius}, {"M", Z.M}};
  } else {
    auto lat = io::parse_lattice_json(io::read_file(cfg.lattice_path));
    surface S(in.sp, in.pol);
    auto v = lattice_partition(S, lat);
    j = {{"Z_lattice", io::to_json(v.value)}, {"tail_estimate", v.tail}, {"rank", lat.rank}, {"M", in.pol.M}};
  }
  if (cfg.format == "csv") {
    C v = j.contains("Z_M") ? C(j["Z_M"][0], j["Z_M"][1]) : C(j["Z_lattice"][0], j["Z_lattice"][1]);
    emit(cfg, "re_value,im_value,tail_estimate\n" + io::format_real(v.real()) + "," + io::format_real(v.imag()) + "," +
                  io::format_real(j["tail_estimate"].get<double>()) + "\n");
  } else {
    emit(cfg, dump(j));
  }
  return 0;
}

int cmd_correlator(const run_config& cfg) {
  auto in = load(cfg);
  surface S(in.sp, in.pol);
  int n = cfg.kind == "virasoro1" ? 1 : cfg.kind == "virasoro2" ? 2 : cfg.n;
  if (cfg.kind != "heisenberg" && cfg.kind != "virasoro1" && cfg.kind != "virasoro2")
    throw input_error("unknown correlator kind '" + cfg.kind + "'");
  if (n < 0) throw input_error("--n must be non-negative");
  auto pts = points_or_default(cfg, S, n);
  if (static_cast<int>(pts.size()) != n) throw input_error("number of points does not match the correlator");
  correlator_value v;
  if (cfg.kind == "heisenberg") v = heisenberg_npoint(S, pts);
  if (cfg.kind == "virasoro1") v = virasoro_one_point(S, pts[0]);
  if (cfg.kind == "virasoro2") v = virasoro_two_point(S, pts[0], pts[1]);
  json p = json::array();
  for (C z : pts) p.push_back(io::to_json(z));
  if (cfg.format == "csv") {
    emit(cfg, "re_value,im_value,tail_estimate\n" + io::format_real(v.value.real()) + "," +
                  io::format_real(v.value.imag()) + "," + io::format_real(v.tail) + "\n");
  } else {
    emit(cfg, dump({{"kind", cfg.kind},
                    {"points", p},
                    {"value_re", v.value.real()},
                    {"value_im", v.value.imag()},
                    {"tail_estimate", v.tail},
                    {"terms", v.terms}}));
  }
  return 0;
}

// Runs a check; an exception becomes a failed report carrying the message.
template <class F>
void guarded(std::vector<identity_report>& out, const std::string& name, F&& f) {
  try {
    f(out);
  } catch (const error& e) {
    identity_report r;
    r.name = name + " (" + e.what() + ")";
    r.max_residual = std::numeric_limits<double>::infinity();
    r.passed = false;
    out.push_back(r);
  }
}

int cmd_check(const run_config& cfg) {
  auto in = load(cfg);
  surface S(in.sp, in.pol);
  const auto& sp = in.sp;
  const int g = sp.genus();
  fd_config fd{1e-4};
  std::vector<identity_report> reps;

  guarded(reps, "nu normalization", [&](auto& out) {
    identity_report r;
    r.name = "nu normalization";
    r.tolerance = 1e-6;
    for (int a = 1; a <= g; ++a)
      for (int b = 1; b <= g; ++b) {
        C v = -contour_integral<double>(sp.w(-a), sp.radius(a), 256, [&](C x) { return S.nu(b, x).value; });
        r.add(std::abs(v - C(a == b ? 1 : 0)));
        r.truncation_floor = std::max(r.truncation_floor, double(S.nu(b, sp.w(-a) + sp.radius(a)).tail));
      }
    r.finish();
    out.push_back(r);
  });
  guarded(reps, "period matrix", [&](auto& out) {
    auto P = S.period_matrix();
    identity_report r;
    r.name = "period matrix symmetry";
    r.tolerance = std::max(in.pol.tol, 1e-8);
    r.truncation_floor = P.tail;
    r.add(P.asymmetry);
    r.finish();
    out.push_back(r);
    identity_report pd;
    pd.name = "Im Omega positive definite";
    pd.tolerance = 0;
    pd.add(P.im_positive_definite ? 0.0 : 1.0);
    pd.finish();
    out.push_back(pd);
  });
  guarded(reps, "sl2", [&](auto& out) {
    for (auto& r : check_sl2_invariance(S, fd)) out.push_back(r);
  });
  if (g >= 2) {
    auto pts = default_points(S, 5);
    pde_samples smp{{pts[0], pts[1], pts[2]}, pts[3], pts[4]};
    guarded(reps, "ward pdes", [&](auto& out) {
      for (auto& r : check_ward_pdes(S, smp, fd)) out.push_back(r);
    });
    guarded(reps, "rauch", [&](auto& out) { out.push_back(check_rauch(S, smp.x, fd)); });
  }

  bool all = true;
  json arr = json::array();
  for (const auto& r : reps) {
    all = all && r.passed;
    arr.push_back(report_json(r));
  }
  std::fprintf(stderr, "%-34s %-11s %-11s %-11s %s\n", "identity", "residual", "tolerance", "trunc.floor", "result");
  for (const auto& r : reps)
    std::fprintf(stderr, "%-34s %-11.3e %-11.3e %-11.3e %s\n", r.name.c_str(), r.max_residual, r.tolerance,
                 r.truncation_floor, r.classification().c_str());
  if (g < 2) std::fprintf(stderr, "(Ward PDEs and Rauch need g >= 2 and were skipped)\n");
  emit(cfg, dump({{"identities", arr}, {"passed", all}, {"L", in.pol.L}, {"M", in.pol.M}}));
  if (!all) {
    std::cerr << "schottky: failing identities:";
    for (const auto& r : reps)
      if (!r.passed) std::cerr << " [" << r.name << "]";
    std::cerr << "\n";
  }
  return all ? 0 : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schottky uniformization: forms, periods and Heisenberg/lattice correlators"};
  app.require_subcommand(1);
  run_config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--params", cfg.params_path, "parameter file (text or JSON)")->required();
    sub->add_option("--L", cfg.L, "maximum word length");
    sub->add_option("--M", cfg.M, "mode cutoff");
    sub->add_option("--tol", cfg.tol, "tolerance");
    sub->add_option("--out", cfg.out_path, "write output here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", cfg.threads, "upper bound on worker threads");
  };
  auto* v = app.add_subcommand("validate", "check the disc condition");
  auto* p = app.add_subcommand("periods", "period matrix");
  auto* e = app.add_subcommand("eval", "evaluate a form at sample points");
  auto* z = app.add_subcommand("partition", "Heisenberg or lattice partition function");
  auto* c = app.add_subcommand("correlator", "Heisenberg or Virasoro correlation function");
  auto* k = app.add_subcommand("check", "run the identity suite");
  for (auto* s : {v, p, e, z, c, k}) common(s);
  e->add_option("--form", cfg.form, "psi1, omega, nu, s, lambda2 or psi2");
  e->add_option("--x", cfg.xs, "evaluation point re,im (repeatable)");
  e->add_option("--y", cfg.y, "second point re,im");
  e->add_option("--a", cfg.a, "handle for nu");
  z->add_option("--lattice", cfg.lattice_path, "lattice JSON {rank, gram}");
  c->add_option("--kind", cfg.kind, "heisenberg, virasoro1 or virasoro2");
  c->add_option("--n", cfg.n, "number of Heisenberg insertions");
  c->add_option("--x", cfg.xs, "insertion point re,im (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int rc = app.exit(err);
    return rc == 0 ? 0 : exit_input;
  }
  set_max_threads(cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency()));

  try {
    if (v->parsed()) return cmd_validate(cfg);
    if (p->parsed()) return cmd_periods(cfg);
    if (e->parsed()) return cmd_eval(cfg);
    if (z->parsed()) return cmd_partition(cfg);
    if (c->parsed()) return cmd_correlator(cfg);
    if (k->parsed()) return cmd_check(cfg);
  } catch (const input_error& err) {
    std::cerr << "schottky: " << err.what() << "\n";
    return exit_input;
  } catch (const error& err) {
    std::cerr << "schottky: " << err.what() << "\n";
    bool input = err.code() == errc::parse || err.code() == errc::invalid_parameter || err.code() == errc::domain ||
                 err.code() == errc::configuration;
    return input ? exit_input : exit_fail;
  } catch (const std::exception& err) {
    std::cerr << "schottky: " << err.what() << "\n";
    return exit_fail;
  }
  return exit_input;
}
