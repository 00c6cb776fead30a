#pragma once

// Comparison sweeps (asymptotic formulas vs the Nystrom oracle), the verify
// suite and the CSV surface.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gsk/asymptotics.hpp"
#include "gsk/cauchy.hpp"
#include "gsk/config.hpp"
#include "gsk/oracle.hpp"
#include "gsk/roots.hpp"

namespace gsk {

/// Everything x-independent, built once per run.
struct RunContext {
  RunConfig config;
  GskKernel kernel;
  QuadratureRule rule;
  std::optional<CauchyData> data;
  RootSet all_roots;  // up to order N in every series
  RootData root_data;  // the retained ones, order < N
  double a = 0.0;
  std::string a_source;
  double b = 0.0;  // decay rate of the f+- / resolvent remainder

  RunContext() = default;
  RunContext(const RunContext&) = delete;
  RunContext& operator=(const RunContext&) = delete;
};

inline std::unique_ptr<RunContext> make_context(const RunConfig& config) {
  validate(config);
  auto ctx = std::make_unique<RunContext>();
  ctx->config = config;
  ctx->kernel = make_kernel(config.kernel);
  ctx->rule = make_rule(config.quadrature);
  CauchyOptions options;
  options.tail_tol = config.tolerances.tail_tol;
  options.inject_nu_sign_fault = config.inject_fault == "nu_sign";
  ctx->data.emplace(CauchyData::build(ctx->kernel, ctx->rule, options));
  ctx->all_roots = find_roots(ctx->kernel, config.N, config.roots, config.tolerances.root_tol);
  const RootSet retained = ctx->all_roots.retained(config.N);
  ctx->root_data = build_h(*ctx->data, retained);
  if (ctx->all_roots.plus.empty() && ctx->all_roots.minus.empty()) {
    // no roots: the remainder is set by the nearest singularities of nu
    ctx->a = 2.0 * ctx->kernel.nu_halfwidth;
    ctx->a_source = "no roots, 2 x nu half-width";
    ctx->b = ctx->kernel.nu_halfwidth;
  } else {
    ctx->a = remainder_scale(ctx->all_roots, config.N);
    ctx->a_source = "first dropped root pair";
    ctx->b = first_dropped_distance(ctx->all_roots, config.N);
  }
  return ctx;
}

struct ComparisonRow {
  double x = 0.0;
  cplx logdet_oracle;
  cplx logdet_thm2;
  cplx logdet_thm3;
  double abs_err_thm2 = 0.0;
  double thm2_thm3_gap = 0.0;
  double resolvent_sup_err = 0.0;
  double xder_gap = 0.0;
};

/// Side measurements of one x, used by the verify suite.
struct RowDiagnostics {
  double det_identity_gap = 0.0;   // |det(I - A) - det(I - A~)| / (1 + |det(I - A)|)
  double cd_residual = 0.0;
  double xder_closed_gap = 0.0;    // closed form vs quadrature route
  double xder_oracle = 0.0;        // |x_derivative_asym - oracle derivative|
};

struct ComparisonReport {
  std::vector<std::string> metadata;  // '#' lines without the prefix
  std::vector<ComparisonRow> rows;
};

inline std::vector<double> resolvent_grid(const RunConfig& c) {
  std::vector<double> g(static_cast<std::size_t>(c.resolvent_points));
  for (int i = 0; i < c.resolvent_points; ++i) {
    g[static_cast<std::size_t>(i)] =
        -c.resolvent_span + 2.0 * c.resolvent_span * i / (c.resolvent_points - 1);
  }
  return g;
}

inline ComparisonRow compare_at(const RunContext& ctx, double x, RowDiagnostics* diag = nullptr) {
  const AsymptoticModel m = build_model(*ctx.data, ctx.root_data, x);
  const NystromSolution s = nystrom_solve(ctx.kernel, x, ctx.rule);
  ComparisonRow row;
  row.x = x;
  row.logdet_oracle = s.logdet;
  row.logdet_thm2 = logdet_thm2(m);
  row.logdet_thm3 = logdet_thm3(m);
  row.abs_err_thm2 = std::abs(log_difference(row.logdet_oracle, row.logdet_thm2));
  row.thm2_thm3_gap = std::abs(log_difference(row.logdet_thm2, row.logdet_thm3));

  const std::vector<double> grid = resolvent_grid(ctx.config);
  if (!(ctx.config.resolvent_span < ctx.rule.cutoff())) {
    fail(ErrorKind::config, "resolvent.span must be below the quadrature cutoff");
  }
  const Matrix asym = resolvent_asym_grid(m, grid);
  const Matrix oracle = nystrom_resolvent_on_grid(ctx.kernel, s, grid);
  row.resolvent_sup_err = (asym - oracle).cwiseAbs().maxCoeff();

  const cplx xder = x_derivative_asym(m);
  row.xder_gap = std::abs(xder - s.dlogdet_dx);
  if (diag) {
    const cplx d = std::exp(m.logdet_correction.value);
    const cplx dt = std::exp(m.logdet_correction_tilde.value);
    diag->det_identity_gap = std::abs(d - dt) / (1.0 + std::abs(d));
    diag->cd_residual = std::max(m.residual_plus, m.residual_minus);
    diag->xder_closed_gap = std::abs(xder - x_derivative_closed_form(m));
    diag->xder_oracle = row.xder_gap;
  }
  return row;
}

/// Worker count: hardware threads, capped by GSK_THREADS when set.
inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GSK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      fail(ErrorKind::config, std::string("GSK_THREADS must be a positive integer, got '") + env + "'");
    }
    n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs f(i) for i in [0, count) on worker threads. The first failure in
/// index order is rethrown, annotated with its x.
template <class F>
void parallel_over_x(const std::vector<double>& xs, F&& f) {
  const std::size_t count = xs.size();
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = worker_count(count);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    std::ostringstream at;
    at << " (at x = " << xs[i] << ")";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what() + at.str());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::numeric, e.what() + at.str());
    }
  }
}

namespace detail {

inline std::string shortest_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

inline std::vector<std::string> report_metadata(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  std::vector<std::string> md;
  md.push_back(std::string("gsk ") + version);
  md.push_back("kernel: " + ctx.kernel.label);
  Json params = Json::object();
  for (const auto& [key, v] : c.kernel.params) params[key] = detail::complex_to_json(v);
  md.push_back("params: " + Json({{"name", c.kernel.name}, {"params", params}}).dump());
  md.push_back("N: " + std::to_string(c.N) + " (N+ = " + std::to_string(ctx.root_data.n_plus()) +
               ", N- = " + std::to_string(ctx.root_data.n_minus()) + ")");
  md.push_back("a: " + detail::shortest_real(ctx.a) + " (" + ctx.a_source + ")");
  md.push_back("quadrature: cutoff=" + detail::shortest_real(c.quadrature.cutoff) +
               " panels=" + std::to_string(c.quadrature.panels) +
               " order=" + std::to_string(c.quadrature.order));
  md.push_back("resolvent grid: " + std::to_string(c.resolvent_points) + " points on [-" +
               detail::shortest_real(c.resolvent_span) + ", " +
               detail::shortest_real(c.resolvent_span) + "]");
  return md;
}

inline ComparisonReport run_compare(const RunContext& ctx) {
  ComparisonReport report;
  report.metadata = report_metadata(ctx);
  const auto& xs = ctx.config.x_grid;
  report.rows.resize(xs.size());
  parallel_over_x(xs, [&](std::size_t i) { report.rows[i] = compare_at(ctx, xs[i]); });
  return report;
}

inline ComparisonReport run_compare(const RunConfig& config) { return run_compare(*make_context(config)); }

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* csv_header =
    "x,logdet_oracle_re,logdet_oracle_im,logdet_thm2_re,logdet_thm2_im,logdet_thm3_re,"
    "logdet_thm3_im,abs_err_thm2,thm2_thm3_gap,resolvent_sup_err,xder_gap";

/// 17 significant digits, '.' separator, independent of the C locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    // from_chars rejects "inf"/"nan" spellings produced by to_chars on some libraries
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    fail(ErrorKind::io, "csv: cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

inline std::string format_csv(const ComparisonReport& report) {
  std::string out;
  for (const auto& line : report.metadata) out += "# " + line + "\n";
  out += csv_header;
  out += "\n";
  for (const auto& r : report.rows) {
    const double fields[] = {r.x,
                             r.logdet_oracle.real(), r.logdet_oracle.imag(),
                             r.logdet_thm2.real(), r.logdet_thm2.imag(),
                             r.logdet_thm3.real(), r.logdet_thm3.imag(),
                             r.abs_err_thm2, r.thm2_thm3_gap, r.resolvent_sup_err, r.xder_gap};
    bool first = true;
    for (double f : fields) {
      if (!first) out += ',';
      out += format_number(f);
      first = false;
    }
    out += '\n';
  }
  return out;
}

inline void emit_csv(const ComparisonReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << format_csv(report);
  out.flush();
  if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
}

inline ComparisonReport parse_csv(const std::string& text) {
  ComparisonReport report;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line.rfind("# ", 0) == 0) {
        report.metadata.push_back(line.substr(2));
        continue;
      }
      if (line.rfind('#', 0) == 0) {
        report.metadata.push_back(line.substr(1));
        continue;
      }
      if (line != csv_header) fail(ErrorKind::io, "csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> f;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      f.push_back(parse_number(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 11) fail(ErrorKind::io, "csv: expected 11 fields, got " + std::to_string(f.size()));
    ComparisonRow r;
    r.x = f[0];
    r.logdet_oracle = {f[1], f[2]};
    r.logdet_thm2 = {f[3], f[4]};
    r.logdet_thm3 = {f[5], f[6]};
    r.abs_err_thm2 = f[7];
    r.thm2_thm3_gap = f[8];
    r.resolvent_sup_err = f[9];
    r.xder_gap = f[10];
    report.rows.push_back(r);
  }
  if (!header_seen) fail(ErrorKind::io, "csv: header row missing");
  return report;
}

// ---------------------------------------------------------------------------
// Verify suite

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyResult {
  std::vector<Check> checks;

  [[nodiscard]] bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

namespace detail {

inline Check below(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value < threshold};
}

inline std::string at_x(const std::string& name, double x) {
  return name + " x=" + shortest_real(x);
}

}  // namespace detail

/// max |alpha-/alpha+ - (1 + phi)| over the points of the rule.
inline double jump_residual(const CauchyData& data) {
  const GskKernel& k = data.kernel();
  double worst = 0.0;
  for (double t : data.rule().nodes) {
    const cplx ratio = data.alpha_pm(t, Side::minus) / data.alpha_pm(t, Side::plus);
    worst = std::max(worst, std::abs(ratio - (1.0 + k.phi(t))));
  }
  return worst;
}

/// max relative error of alpha- against the Gamma-function closed form on
/// 25 real points of [-4, 4] and 10 points below the axis.
inline double alpha_closed_form_error(const CauchyData& data) {
  const GskKernel& k = data.kernel();
  if (!k.closed_form_alpha_minus) fail(ErrorKind::config, k.label + ": no closed-form alpha");
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    double t = -4.0 + 8.0 * i / 24.0;
    const cplx num = data.alpha_pm(t, Side::minus);
    worst = std::max(worst, std::abs(num / k.closed_form_alpha_minus(t) - 1.0));
  }
  for (int i = 0; i < 10; ++i) {
    const cplx z(-3.0 + 0.6 * i, -0.25 - 0.15 * i);
    worst = std::max(worst, std::abs(data.alpha_at(z) / k.closed_form_alpha_minus(z) - 1.0));
  }
  return worst;
}

inline VerifyResult run_verify(const RunContext& ctx) {
  const RunConfig& c = ctx.config;
  const GskKernel& k = ctx.kernel;
  const CauchyData& data = *ctx.data;
  VerifyResult out;
  auto add = [&](Check ch) { out.checks.push_back(std::move(ch)); };

  add(detail::below("kernel.admissible sup|phi|", sup_abs_phi(k, ctx.rule.lo, ctx.rule.hi, 4001).sup, 1.0));
  add(detail::below("cauchy.tail |nu(+-cutoff)|",
                    std::max(std::abs(data.nu_at(ctx.rule.lo)), std::abs(data.nu_at(ctx.rule.hi))),
                    c.tolerances.tail_tol));
  add(detail::below("cauchy.jump", jump_residual(data), c.tolerances.jump_tol));
  {
    const double y = 10.0 * ctx.rule.cutoff();
    const cplx z = I * y;
    const double err = std::abs(data.alpha_at(z) - 1.0 - data.alpha1() / z);
    double moment = 0.0;  // int |l nu|
    for (std::size_t i = 0; i < ctx.rule.size(); ++i) {
      moment += ctx.rule.weights[i] * std::abs(ctx.rule.nodes[i] * data.nu_samples()[i]);
    }
    add(detail::below("cauchy.alpha_large_z", err,
                      10.0 * (1.0 + std::norm(data.alpha1()) + moment) / (y * y)));
  }
  {
    double worst = 0.0;
    for (const auto& r : ctx.all_roots.plus) worst = std::max(worst, std::abs(1.0 + k.phi(r.value)));
    for (const auto& r : ctx.all_roots.minus) worst = std::max(worst, std::abs(1.0 + k.phi(r.value)));
    add(detail::below("roots.residual", worst, c.tolerances.root_tol));
  }
  if (k.phi_real_on_axis) {
    double worst = 0.0;
    for (const auto& p : ctx.all_roots.plus) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : ctx.all_roots.minus) best = std::min(best, std::abs(std::conj(p.value) - m.value));
      if (!ctx.all_roots.minus.empty()) worst = std::max(worst, best);
    }
    add(detail::below("roots.conjugate_symmetry", worst, 1e-10));
  }

  const auto& xs = c.x_grid;
  std::vector<ComparisonRow> rows(xs.size());
  std::vector<RowDiagnostics> diags(xs.size());
  parallel_over_x(xs, [&](std::size_t i) { rows[i] = compare_at(ctx, xs[i], &diags[i]); });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double envelope = 10.0 * std::exp(-ctx.a * x);
    add(detail::below(detail::at_x("asym.det_identity", x), diags[i].det_identity_gap, 1e-12));
    add(detail::below(detail::at_x("asym.cd_residual", x), diags[i].cd_residual, 1e-12));
    add(detail::below(detail::at_x("asym.thm2_thm3", x),
                      rows[i].thm2_thm3_gap / (1.0 + std::abs(rows[i].logdet_thm2)), 1e-10));
    add(detail::below(detail::at_x("asym.xder_closed_form", x), diags[i].xder_closed_gap,
                      std::max(envelope, 1e-9)));
    add(detail::below(detail::at_x("asym.xder_vs_oracle", x), diags[i].xder_oracle,
                      std::max(envelope, 1e-9)));
  }
  if (!xs.empty()) {
    const double x = xs.front();
    const AsymptoticModel m = build_model(data, ctx.root_data, x);
    add(detail::below(detail::at_x("asym.int_eq_residual", x), integral_equation_residual(m),
                      10.0 * std::exp(-ctx.b * x)));
  }
  if (c.kernel.name == "xxz") {
    add(detail::below("xxz.alpha_closed_form", alpha_closed_form_error(data), 1e-7));
    if (!xs.empty()) {
      const double x = xs.front();
      const double zeta = detail::real_param(c.kernel, "zeta", 1.0);
      const int panels = std::max(4, static_cast<int>(std::ceil(2.0 * x)));
      const cplx wh = wiener_hopf_logdet(zeta, x, panels, 20);
      add(detail::below(detail::at_x("xxz.fourier_reduction", x),
                        std::abs(log_difference(wh, rows.front().logdet_oracle)), 1e-6));
    }
  }
  return out;
}

inline VerifyResult run_verify(const RunConfig& config) { return run_verify(*make_context(config)); }

}  // namespace gsk
