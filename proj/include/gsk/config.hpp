#pragma once

// Run configuration: JSON in, JSON out, dotted-path overrides, and the
// kernel / quadrature / roots it describes.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsk/common.hpp"
#include "gsk/kernels.hpp"
#include "gsk/quadrature.hpp"
#include "gsk/roots.hpp"

namespace gsk {

using Json = nlohmann::json;

struct KernelSpec {
  std::string name = "boson";              // boson | xxz | entire_test
  std::map<std::string, cplx> params;      // real values have zero imaginary part
};

struct QuadratureSpec {
  double cutoff = 7.0;
  int panels = 28;
  int order = 20;
};

struct Tolerances {
  double root_tol = 1e-10;
  double jump_tol = 1e-9;
  double tail_tol = 1e-12;
};

struct Outputs {
  std::string csv_path;
  int verbosity = 1;
};

struct RunConfig {
  KernelSpec kernel;
  std::vector<double> x_grid;
  int N = 0;
  QuadratureSpec quadrature;
  Tolerances tolerances;
  Outputs outputs;
  std::string roots = "auto";        // auto | closed_form | newton
  std::string inject_fault;          // "" | nu_sign
  int resolvent_points = 101;
  double resolvent_span = 5.0;       // resolvent grid on [-span, span]
};

namespace detail {

inline cplx complex_from_json(const Json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  if (v.is_object() && v.contains("re")) {
    return {v.at("re").get<double>(), v.value("im", 0.0)};
  }
  fail(ErrorKind::config, "config: parameter '" + key + "' must be a number or [re, im]");
}

inline Json complex_to_json(cplx c) {
  if (c.imag() == 0.0) return c.real();
  return Json::array({c.real(), c.imag()});
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::config, std::string("config: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  if (c.kernel.name != "boson" && c.kernel.name != "xxz" && c.kernel.name != "entire_test") {
    fail(ErrorKind::config, "config: unknown kernel '" + c.kernel.name +
                                "' (expected boson, xxz or entire_test)");
  }
  for (std::size_t i = 0; i < c.x_grid.size(); ++i) {
    if (!(c.x_grid[i] > 0.0)) fail(ErrorKind::config, "config: x_grid entries must be positive");
    if (i > 0 && !(c.x_grid[i] > c.x_grid[i - 1])) {
      fail(ErrorKind::config, "config: x_grid must be strictly increasing");
    }
  }
  if (c.N < 0) fail(ErrorKind::config, "config: N must be >= 0");
  if (!(c.quadrature.cutoff > 0.0) || c.quadrature.panels < 1 || c.quadrature.order < 1) {
    fail(ErrorKind::config, "config: quadrature needs cutoff > 0, panels >= 1, order >= 1");
  }
  if (!(c.tolerances.root_tol > 0.0 && c.tolerances.jump_tol > 0.0 && c.tolerances.tail_tol > 0.0)) {
    fail(ErrorKind::config, "config: tolerances must be positive");
  }
  if (c.roots != "auto" && c.roots != "closed_form" && c.roots != "newton") {
    fail(ErrorKind::config, "config: roots must be auto, closed_form or newton");
  }
  if (!c.inject_fault.empty() && c.inject_fault != "nu_sign") {
    fail(ErrorKind::config, "config: unknown debug.inject_fault '" + c.inject_fault + "'");
  }
  if (c.resolvent_points < 2 || !(c.resolvent_span > 0.0)) {
    fail(ErrorKind::config, "config: resolvent grid needs >= 2 points and a positive span");
  }
}

inline RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "config: top level must be an object");
  RunConfig c;
  if (j.contains("kernel")) {
    const Json& k = j.at("kernel");
    c.kernel.name = detail::get_or<std::string>(k, "name", c.kernel.name);
    if (k.contains("params")) {
      if (!k.at("params").is_object()) fail(ErrorKind::config, "config: kernel.params must be an object");
      for (const auto& [key, v] : k.at("params").items()) {
        c.kernel.params[key] = detail::complex_from_json(v, key);
      }
    }
  }
  if (j.contains("x_grid")) {
    const Json& g = j.at("x_grid");
    if (g.is_array()) {
      for (const auto& v : g) {
        if (!v.is_number()) fail(ErrorKind::config, "config: x_grid entries must be numbers");
        c.x_grid.push_back(v.get<double>());
      }
    } else if (g.is_object()) {
      const double lo = detail::get_or<double>(g, "min", 0.0);
      const double hi = detail::get_or<double>(g, "max", 0.0);
      const int steps = detail::get_or<int>(g, "steps", 0);
      if (steps < 1) fail(ErrorKind::config, "config: x_grid.steps must be >= 1");
      for (int i = 0; i < steps; ++i) {
        c.x_grid.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
      }
    } else {
      fail(ErrorKind::config, "config: x_grid must be a list or {min, max, steps}");
    }
  }
  c.N = detail::get_or<int>(j, "N", c.N);
  if (j.contains("quadrature")) {
    const Json& q = j.at("quadrature");
    c.quadrature.cutoff = detail::get_or<double>(q, "cutoff", c.quadrature.cutoff);
    c.quadrature.panels = detail::get_or<int>(q, "panels", c.quadrature.panels);
    c.quadrature.order = detail::get_or<int>(q, "order", c.quadrature.order);
  }
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    c.tolerances.root_tol = detail::get_or<double>(t, "root_tol", c.tolerances.root_tol);
    c.tolerances.jump_tol = detail::get_or<double>(t, "jump_tol", c.tolerances.jump_tol);
    c.tolerances.tail_tol = detail::get_or<double>(t, "tail_tol", c.tolerances.tail_tol);
  }
  if (j.contains("outputs")) {
    const Json& o = j.at("outputs");
    c.outputs.csv_path = detail::get_or<std::string>(o, "csv_path", c.outputs.csv_path);
    c.outputs.verbosity = detail::get_or<int>(o, "verbosity", c.outputs.verbosity);
  }
  c.roots = detail::get_or<std::string>(j, "roots", c.roots);
  if (j.contains("resolvent")) {
    const Json& r = j.at("resolvent");
    c.resolvent_points = detail::get_or<int>(r, "points", c.resolvent_points);
    c.resolvent_span = detail::get_or<double>(r, "span", c.resolvent_span);
  }
  if (j.contains("debug")) {
    c.inject_fault = detail::get_or<std::string>(j.at("debug"), "inject_fault", c.inject_fault);
  }
  validate(c);
  return c;
}

inline Json config_to_json(const RunConfig& c) {
  Json params = Json::object();
  for (const auto& [key, v] : c.kernel.params) params[key] = detail::complex_to_json(v);
  Json j;
  j["kernel"] = {{"name", c.kernel.name}, {"params", params}};
  j["x_grid"] = c.x_grid;
  j["N"] = c.N;
  j["quadrature"] = {{"cutoff", c.quadrature.cutoff},
                     {"panels", c.quadrature.panels},
                     {"order", c.quadrature.order}};
  j["tolerances"] = {{"root_tol", c.tolerances.root_tol},
                     {"jump_tol", c.tolerances.jump_tol},
                     {"tail_tol", c.tolerances.tail_tol}};
  j["outputs"] = {{"csv_path", c.outputs.csv_path}, {"verbosity", c.outputs.verbosity}};
  j["roots"] = c.roots;
  j["resolvent"] = {{"points", c.resolvent_points}, {"span", c.resolvent_span}};
  if (!c.inject_fault.empty()) j["debug"] = {{"inject_fault", c.inject_fault}};
  return j;
}

/// Sets j[a][b][c] = value for path "a.b.c". The value is parsed as JSON
/// when possible and kept as a string otherwise.
inline void apply_override(Json& j, const std::string& path, const std::string& value) {
  if (path.empty()) fail(ErrorKind::config, "override: empty key");
  Json parsed = Json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) fail(ErrorKind::config, "override: malformed key '" + path + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    Json& next = (*node)[parts[i]];
    if (!next.is_object()) {
      if (!next.is_null()) fail(ErrorKind::config, "override: '" + parts[i] + "' is not an object");
      next = Json::object();
    }
    node = &next;
  }
  (*node)[parts.back()] = parsed;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::config, "config file '" + path + "' is not valid JSON");
  return j;
}

/// The built-in default: boson gas, h = 1, T = 1, beta = 0.5, N = 3.
inline Json default_config_json() {
  return Json::parse(R"({
    "kernel": {"name": "boson", "params": {"h": 1.0, "T": 1.0, "beta": 0.5, "pole_count": 8}},
    "x_grid": [4, 6, 8, 10, 12, 14, 16],
    "N": 3,
    "quadrature": {"cutoff": 7.0, "panels": 28, "order": 20}
  })");
}

// ---------------------------------------------------------------------------

namespace detail {

inline cplx param(const KernelSpec& k, const std::string& key, cplx fallback) {
  const auto it = k.params.find(key);
  return it == k.params.end() ? fallback : it->second;
}

inline double real_param(const KernelSpec& k, const std::string& key, double fallback) {
  const cplx v = param(k, key, fallback);
  if (v.imag() != 0.0) fail(ErrorKind::config, "kernel parameter '" + key + "' must be real");
  return v.real();
}

inline int int_param(const KernelSpec& k, const std::string& key, int fallback) {
  const double v = real_param(k, key, fallback);
  if (v != std::floor(v)) fail(ErrorKind::config, "kernel parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

}  // namespace detail

inline GskKernel make_kernel(const KernelSpec& spec) {
  if (spec.name == "boson") {
    return boson_kernel(detail::real_param(spec, "h", 1.0), detail::real_param(spec, "T", 1.0),
                        detail::param(spec, "beta", 0.5), detail::int_param(spec, "pole_count", 8));
  }
  if (spec.name == "xxz") {
    return xxz_kernel(detail::real_param(spec, "zeta", 1.0),
                      detail::int_param(spec, "pole_count", 16));
  }
  if (spec.name == "entire_test") {
    return entire_test_kernel(detail::param(spec, "gamma", 0.5),
                              detail::real_param(spec, "width", 1.0));
  }
  fail(ErrorKind::config, "unknown kernel '" + spec.name + "'");
}

inline QuadratureRule make_rule(const QuadratureSpec& q) {
  return truncated_line_rule(q.cutoff, q.panels, q.order);
}

/// Roots of order <= n in every series: n + 1 per series when available, so
/// the remainder scale of the first n can be formed.
inline RootSet find_roots(const GskKernel& k, int n, const std::string& policy, double residual_tol) {
  const bool closed = policy == "closed_form" || (policy == "auto" && k.closed_form_roots);
  if (closed) return closed_form_roots(k, n + 1, residual_tol);
  // Newton roots are ranked per half-plane as a single series.
  return newton_roots(k, 1e-13, residual_tol);
}

}  // namespace gsk
