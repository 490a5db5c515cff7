#pragma once

#include <stdexcept>
#include <string>

namespace schottky {

enum class errc {
  invalid_parameter,
  degenerate_map,
  domain_exit,
  domain,
  pole,
  path,
  convergence,
  quadrature,
  configuration,
  conditioning,
  divergence,
  step_too_large,
  parse,
};

inline const char* errc_name(errc e) {
  switch (e) {
    case errc::invalid_parameter: return "invalid-parameter";
    case errc::degenerate_map: return "degenerate-map";
    case errc::domain_exit: return "domain-exit";
    case errc::domain: return "domain";
    case errc::pole: return "pole";
    case errc::path: return "path";
    case errc::convergence: return "convergence";
    case errc::quadrature: return "quadrature";
    case errc::configuration: return "configuration";
    case errc::conditioning: return "conditioning";
    case errc::divergence: return "divergence";
    case errc::step_too_large: return "step-too-large";
    case errc::parse: return "parse";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace schottky
