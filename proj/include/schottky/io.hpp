#pragma once

#include <cctype>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "schottky/error.hpp"
#include "schottky/schottky_core.hpp"
#include "schottky/voa_correlators.hpp"

namespace schottky::io {

using json = nlohmann::json;

// Parameters plus the optional truncation keys a file may carry.
struct param_file {
  params sp;
  std::optional<int> L, M;
  std::optional<double> tol;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& tok, const std::string& key) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw error(errc::parse, "bad number '" + tok + "' for key " + key);
  }
}

inline int parse_int(const std::string& tok, const std::string& key) {
  double v = parse_real(tok, key);
  if (v != static_cast<int>(v)) throw error(errc::parse, "key " + key + " needs an integer");
  return static_cast<int>(v);
}

inline std::complex<double> complex_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw error(errc::parse, "key " + key + " must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline param_file assemble(int g, const std::map<std::string, std::complex<double>>& vals) {
  if (g < 1) throw error(errc::parse, "g must be a positive integer");
  param_file pf;
  for (int a = 1; a <= g; ++a) {
    for (const char* k : {"w_plus", "w_minus", "rho"}) {
      std::string key = std::string(k) + "_" + std::to_string(a);
      if (!vals.count(key)) throw error(errc::parse, "missing key " + key);
    }
    pf.sp.w_plus.push_back(vals.at("w_plus_" + std::to_string(a)));
    pf.sp.w_minus.push_back(vals.at("w_minus_" + std::to_string(a)));
    pf.sp.rho.push_back(vals.at("rho_" + std::to_string(a)));
  }
  return pf;
}

}  // namespace detail

// Plain text: one "key = value" per line, '#' starts a comment.
//   g = 2
//   w_plus_1 = 1.0 0.0      (real and imaginary part)
//   w_minus_1 = -1.0 0.0
//   rho_1 = -0.05 0.0
// Optional: L, M, tol. Unknown, duplicate or missing keys are errors.
inline param_file parse_params_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  std::map<std::string, std::complex<double>> vals;
  std::optional<int> g;
  param_file extra;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error(errc::parse, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq)), rest = detail::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw error(errc::parse, "duplicate key " + key);
    std::istringstream toks(rest);
    std::vector<std::string> parts;
    for (std::string t; toks >> t;) parts.push_back(t);
    if (key == "g" || key == "L" || key == "M" || key == "tol") {
      if (parts.size() != 1) throw error(errc::parse, "key " + key + " takes one value");
      if (key == "g") g = detail::parse_int(parts[0], key);
      if (key == "L") extra.L = detail::parse_int(parts[0], key);
      if (key == "M") extra.M = detail::parse_int(parts[0], key);
      if (key == "tol") extra.tol = detail::parse_real(parts[0], key);
      continue;
    }
    if (parts.size() != 2) throw error(errc::parse, "key " + key + " takes two reals (re im)");
    vals[key] = {detail::parse_real(parts[0], key), detail::parse_real(parts[1], key)};
  }
  if (!g) throw error(errc::parse, "missing key g");
  for (const auto& [k, v] : vals) {
    auto us = k.rfind('_');
    bool known = false;
    if (us != std::string::npos) {
      std::string stem = k.substr(0, us), idx = k.substr(us + 1);
      bool digits = !idx.empty() && std::all_of(idx.begin(), idx.end(), [](char c) { return std::isdigit(c); });
      known = digits && (stem == "w_plus" || stem == "w_minus" || stem == "rho") && std::stoi(idx) >= 1 &&
              std::stoi(idx) <= *g;
    }
    if (!known) throw error(errc::parse, "unknown key " + k);
  }
  auto pf = detail::assemble(*g, vals);
  pf.L = extra.L;
  pf.M = extra.M;
  pf.tol = extra.tol;
  return pf;
}

// JSON: {"g": 2, "handles": [{"w_plus": [re, im], "w_minus": [..], "rho": [..]}, ...],
//        "L": 6, "M": 20, "tol": 1e-10}   (the last three optional)
inline param_file parse_params_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(errc::parse, e.what());
  }
  if (!j.is_object()) throw error(errc::parse, "top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "g" && it.key() != "handles" && it.key() != "L" && it.key() != "M" && it.key() != "tol")
      throw error(errc::parse, "unknown key " + it.key());
  if (!j.contains("g") || !j["g"].is_number_integer()) throw error(errc::parse, "missing key g");
  if (!j.contains("handles") || !j["handles"].is_array()) throw error(errc::parse, "missing key handles");
  const int g = j["g"].get<int>();
  if (static_cast<int>(j["handles"].size()) != g) throw error(errc::parse, "handles must list g entries");
  std::map<std::string, std::complex<double>> vals;
  for (int a = 1; a <= g; ++a) {
    const json& h = j["handles"][a - 1];
    if (!h.is_object()) throw error(errc::parse, "handle entries must be objects");
    for (auto it = h.begin(); it != h.end(); ++it) {
      if (it.key() != "w_plus" && it.key() != "w_minus" && it.key() != "rho")
        throw error(errc::parse, "unknown key " + it.key() + " in handle " + std::to_string(a));
      std::string key = it.key() + "_" + std::to_string(a);
      vals[key] = detail::complex_from_json(it.value(), key);
    }
  }
  auto pf = detail::assemble(g, vals);
  if (j.contains("L")) {
    if (!j["L"].is_number_integer()) throw error(errc::parse, "L must be an integer");
    pf.L = j["L"].get<int>();
  }
  if (j.contains("M")) {
    if (!j["M"].is_number_integer()) throw error(errc::parse, "M must be an integer");
    pf.M = j["M"].get<int>();
  }
  if (j.contains("tol")) {
    if (!j["tol"].is_number()) throw error(errc::parse, "tol must be a number");
    pf.tol = j["tol"].get<double>();
  }
  return pf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw error(errc::parse, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// JSON if the first non-blank character is '{', text otherwise.
inline param_file parse_params(const std::string& text) {
  auto t = detail::trim(text);
  if (!t.empty() && t.front() == '{') return parse_params_json(text);
  return parse_params_text(text);
}

inline param_file load_params(const std::string& path) { return parse_params(read_file(path)); }

inline lattice_spec parse_lattice_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(errc::parse, e.what());
  }
  if (!j.is_object()) throw error(errc::parse, "lattice must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "rank" && it.key() != "gram") throw error(errc::parse, "unknown key " + it.key());
  if (!j.contains("rank") || !j.contains("gram")) throw error(errc::parse, "lattice needs rank and gram");
  lattice_spec lat;
  try {
    lat.rank = j["rank"].get<int>();
    lat.gram = j["gram"].get<std::vector<std::vector<long>>>();
  } catch (const json::exception& e) {
    throw error(errc::parse, std::string("lattice: ") + e.what());
  }
  lat.validate();
  return lat;
}

inline json to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const params& sp) {
  json h = json::array();
  for (int a = 1; a <= sp.genus(); ++a)
    h.push_back({{"w_plus", to_json(sp.w(a))}, {"w_minus", to_json(sp.w(-a))}, {"rho", to_json(sp.rho_of(a))}});
  return {{"g", sp.genus()}, {"handles", h}};
}

inline json to_json(const validity_report& r) {
  json v = json::array();
  for (const auto& d : r.violations) v.push_back({{"a", d.a}, {"b", d.b}, {"margin", d.margin}});
  return {{"valid", r.valid}, {"min_margin", r.min_margin}, {"violations", v}};
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// CSV with columns re(x), im(x), re(value), im(value)
inline std::string to_csv(const std::vector<std::complex<double>>& xs, const std::vector<std::complex<double>>& vs) {
  std::ostringstream os;
  os << "re_x,im_x,re_value,im_value\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    os << format_real(xs[i].real()) << ',' << format_real(xs[i].imag()) << ',' << format_real(vs[i].real()) << ','
       << format_real(vs[i].imag()) << '\n';
  return os.str();
}

}  // namespace schottky::io
