// gsk: asymptotics of generalized sine-kernel determinants vs a Nystrom oracle.
//
//   gsk compare   [config.json] [--csv out.csv] [--kernel.params.T=0.5 ...]
//   gsk verify    [config.json]
//   gsk roots     [config.json]
//   gsk det       [config.json] --x 10 --method thm2|thm3|oracle
//   gsk resolvent [config.json] --x 10 [--csv out.csv]
//
// Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gsk/gsk.hpp"

namespace {

int exit_code(gsk::ErrorKind kind) {
  switch (kind) {
    case gsk::ErrorKind::numeric:
      return 3;
    case gsk::ErrorKind::config:
    case gsk::ErrorKind::domain:
    case gsk::ErrorKind::io:
      return 2;
  }
  return 2;
}

// Pulls "--a.b.c=value" (and top-level "--N=3" style) arguments out of argv; CLI11 sees the rest.
std::vector<std::pair<std::string, std::string>> take_overrides(std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> rest;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (a.rfind("--", 0) == 0 && eq != std::string::npos) {
      const std::string key = a.substr(2, eq - 2);
      if (key.find('.') != std::string::npos || key == "N" || key == "x_grid" || key == "roots") {
        out.emplace_back(key, a.substr(eq + 1));
        continue;
      }
    }
    rest.push_back(a);
  }
  args = std::move(rest);
  return out;
}

gsk::RunConfig load_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  gsk::Json j = path.empty() ? gsk::default_config_json() : gsk::read_json_file(path);
  for (const auto& [key, value] : overrides) gsk::apply_override(j, key, value);
  return gsk::config_from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) gsk::fail(gsk::ErrorKind::io, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) gsk::fail(gsk::ErrorKind::io, "write to '" + path + "' failed");
}

int cmd_compare(const gsk::RunConfig& config, std::string csv) {
  if (csv.empty()) csv = config.outputs.csv_path;
  const auto ctx = gsk::make_context(config);
  const gsk::ComparisonReport report = gsk::run_compare(*ctx);
  write_text(csv, gsk::format_csv(report));
  return 0;
}

int cmd_verify(const gsk::RunConfig& config) {
  const auto ctx = gsk::make_context(config);
  const gsk::VerifyResult result = gsk::run_verify(*ctx);
  for (const auto& c : result.checks) {
    std::printf("%s  %-40s value=%-12.4g threshold=%.4g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.value, c.threshold);
  }
  const auto failed = std::count_if(result.checks.begin(), result.checks.end(),
                                    [](const gsk::Check& c) { return !c.pass; });
  std::printf("%zu checks, %ld failed\n", result.checks.size(), static_cast<long>(failed));
  return result.ok() ? 0 : 1;
}

int cmd_roots(const gsk::RunConfig& config) {
  const auto ctx = gsk::make_context(config);
  const gsk::RootSet& roots = ctx->all_roots;
  std::printf("# kernel: %s\n", ctx->kernel.label.c_str());
  std::printf("# N = %d retained per series, a = %.17g (%s)\n", config.N, ctx->a, ctx->a_source.c_str());
  std::printf("half,series,order,retained,re,im,residual,pole_re,pole_im\n");
  auto dump = [&](const std::vector<gsk::Root>& v, const std::vector<gsk::cplx>& poles, const char* half) {
    for (const auto& r : v) {
      const double res = std::abs(1.0 + ctx->kernel.phi(r.value));
      const gsk::cplx pole = r.seed >= 0 ? poles[static_cast<std::size_t>(r.seed)] : gsk::cplx{NAN, NAN};
      std::printf("%s,%d,%d,%d,%s,%s,%.3g,%s,%s\n", half, r.series + 1, r.order, r.order < config.N ? 1 : 0,
                  gsk::format_number(r.value.real()).c_str(), gsk::format_number(r.value.imag()).c_str(),
                  res, gsk::format_number(pole.real()).c_str(), gsk::format_number(pole.imag()).c_str());
    }
  };
  dump(roots.plus, ctx->kernel.poles_plus, "+");
  dump(roots.minus, ctx->kernel.poles_minus, "-");
  for (const auto& w : roots.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& f : roots.failures) std::fprintf(stderr, "root failure: %s\n", f.reason.c_str());
  return 0;
}

int cmd_det(const gsk::RunConfig& config, double x, const std::string& method) {
  const auto ctx = gsk::make_context(config);
  gsk::cplx value;
  double estimate = 0.0;
  if (method == "oracle") {
    const gsk::NystromResult r = gsk::nystrom_logdet(ctx->kernel, x, ctx->rule);
    value = r.logdet;
    estimate = r.error_estimate;
  } else {
    const gsk::AsymptoticModel m = gsk::build_model(*ctx->data, ctx->root_data, x);
    value = method == "thm2" ? gsk::logdet_thm2(m) : gsk::logdet_thm3(m);
  }
  std::printf("x,method,logdet_re,logdet_im,error_estimate\n%s,%s,%s,%s,%s\n",
              gsk::format_number(x).c_str(), method.c_str(), gsk::format_number(value.real()).c_str(),
              gsk::format_number(value.imag()).c_str(), gsk::format_number(estimate).c_str());
  return 0;
}

int cmd_resolvent(const gsk::RunConfig& config, double x, const std::string& csv) {
  const auto ctx = gsk::make_context(config);
  const std::vector<double> grid = gsk::resolvent_grid(config);
  const gsk::AsymptoticModel m = gsk::build_model(*ctx->data, ctx->root_data, x);
  const gsk::NystromSolution s = gsk::nystrom_solve(ctx->kernel, x, ctx->rule);
  const gsk::Matrix asym = gsk::resolvent_asym_grid(m, grid);
  const gsk::Matrix oracle = gsk::nystrom_resolvent_on_grid(ctx->kernel, s, grid);
  std::string out = "lambda,mu,asym_re,asym_im,oracle_re,oracle_im\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto a = asym(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const auto o = oracle(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out += gsk::format_number(grid[i]) + ',' + gsk::format_number(grid[j]) + ',' +
             gsk::format_number(a.real()) + ',' + gsk::format_number(a.imag()) + ',' +
             gsk::format_number(o.real()) + ',' + gsk::format_number(o.imag()) + '\n';
    }
  }
  write_text(csv, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto overrides = take_overrides(args);

  CLI::App app{"Large-x asymptotics of generalized sine-kernel Fredholm determinants"};
  app.set_version_flag("--version", std::string(gsk::version));
  app.require_subcommand(1);

  std::string config_path, csv;
  double x = 0.0;
  std::string method = "thm2";

  auto* compare = app.add_subcommand("compare", "oracle vs asymptotic formulas over the x grid, as CSV");
  compare->add_option("config", config_path, "JSON config (default: built-in boson config)");
  compare->add_option("--csv", csv, "output path, '-' for stdout");

  auto* verify = app.add_subcommand("verify", "run the invariant suite; exit 1 on any failure");
  verify->add_option("config", config_path, "JSON config");

  auto* roots = app.add_subcommand("roots", "print the root set");
  roots->add_option("config", config_path, "JSON config");

  auto* det = app.add_subcommand("det", "log-determinant at one x");
  det->add_option("config", config_path, "JSON config");
  det->add_option("--x", x, "x > 0")->required();
  det->add_option("--method", method, "thm2, thm3 or oracle")
      ->check(CLI::IsMember({"thm2", "thm3", "oracle"}));

  auto* resolvent = app.add_subcommand("resolvent", "resolvent grid dump at one x");
  resolvent->add_option("config", config_path, "JSON config");
  resolvent->add_option("--x", x, "x > 0")->required();
  resolvent->add_option("--csv", csv, "output path, '-' for stdout");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const gsk::RunConfig config = load_config(config_path, overrides);
    if (*compare) return cmd_compare(config, csv);
    if (*verify) return cmd_verify(config);
    if (*roots) return cmd_roots(config);
    if (*det) return cmd_det(config, x, method);
    if (*resolvent) return cmd_resolvent(config, x, csv);
  } catch (const gsk::Error& e) {
    std::fprintf(stderr, "gsk: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gsk: %s\n", e.what());
    return 3;
  }
  return 0;
}
