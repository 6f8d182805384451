// backflow: command-line surface of the quantum backflow library.
//
// Subcommands:
//   bm-lambda      supremum of the canonical straight-boundary eigenproblem
//   mu-scan        mu_sup(epsilon) scan for the Gaussian-bump family
//   verify         independent wavepacket checks of the eigenvalue predictions
//   boundary-dump  (p, s(p)) samples of the boundary curves
//   kernel-dump    kernel values on a grid as CSV
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "backflow/cache.hpp"
#include "backflow/config.hpp"
#include "backflow/csv.hpp"
#include "backflow/kernels.hpp"
#include "backflow/oracle.hpp"
#include "backflow/perturbation.hpp"
#include "backflow/quadrature.hpp"
#include "backflow/scales.hpp"
#include "backflow/spectral.hpp"
#include "backflow/svg.hpp"

namespace {

using namespace backflow;

constexpr double kLambdaRef = 0.0384517;  // reference value of the supremum constant

const std::vector<double> kDefaultLList = {10.0, 15.0, 20.0, 30.0};
const std::vector<double> kDefaultNList = {250.0, 500.0, 1000.0, 2000.0};

struct CommandContext {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool dry_run = false;

  RunConfig effective(const std::string& command) const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    for (const auto& [k, v] : overrides)
      if (!v.empty()) cfg.set(k, v);
    cfg.set("command", command);
    return cfg;
  }
};

void add_common_options(CLI::App* cmd, CommandContext& ctx,
                        const std::vector<std::string>& keys) {
  cmd->add_option("--config", ctx.config_path, "key = value configuration file");
  for (const auto& key : keys) {
    std::string flag = "--" + key;
    for (auto& c : flag)
      if (c == '_') c = '-';
    cmd->add_option(flag, ctx.overrides[key], "override config key '" + key + "'");
  }
}

std::vector<int> int_list(const RunConfig& cfg, const std::string& key,
                          const std::vector<double>& fallback) {
  std::vector<int> out;
  for (double v : cfg.get_list(key, fallback)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("config: '" + key + "' must contain integers");
    out.push_back(i);
  }
  return out;
}

int thread_count(const RunConfig& cfg) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int n = cfg.get_int("threads", hw > 0 ? hw : 1);
  if (n < 1) throw ConfigError("config: threads must be >= 1");
  return n;
}

std::filesystem::path resolve_cache_dir(const RunConfig& cfg) {
  return cache_directory(cfg.get("cache_dir", ""));
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& key,
                                  const std::string& fallback) {
  const std::filesystem::path dir(cfg.get("output_dir", "."));
  std::filesystem::create_directories(dir);
  return dir / cfg.get(key, fallback);
}

EstimateOptions make_estimate_options(const RunConfig& cfg, SeriesTermCache* term_cache) {
  EstimateOptions opts;
  opts.threads = thread_count(cfg);
  opts.term_cache = term_cache;
  const std::filesystem::path cache_dir = resolve_cache_dir(cfg);
  if (!cache_dir.empty())
    opts.assembler = [cache_dir](const BoundaryShape& shape, const GridSpec& grid, int order,
                                 const QuadratureRule& rule, const AssemblyOptions& aopts) {
      return assemble_cached(cache_dir, shape, grid, order, rule, aopts);
    };
  return opts;
}

BoundaryShape shape_from_config(const RunConfig& cfg) {
  const std::string shape = cfg.get("shape", "bump");
  if (shape == "straight") return BoundaryShape::straight(cfg.get_double("slope", 2.0));
  if (shape == "bump") return BoundaryShape::gaussian_bump(cfg.get_double("epsilon", 0.0));
  throw ConfigError("config: shape must be 'straight' or 'bump'");
}

int cmd_bm_lambda(const CommandContext& ctx) {
  const RunConfig cfg = ctx.effective("bm-lambda");
  const auto L_list = cfg.get_list("L_list", kDefaultLList);
  const auto N_list = int_list(cfg, "N_list", kDefaultNList);
  if (ctx.dry_run) {
    std::printf("planned eigenproblems:\n");
    for (double L : L_list)
      for (int N : N_list) std::printf("  L=%g N=%d matrix %dx%d\n", L, N, N + 1, N + 1);
    return 0;
  }
  const QuadratureRule rule = gauss_legendre(cfg.get_int("quad", kDefaultQuadratureCount));
  EstimateOptions opts = make_estimate_options(cfg, nullptr);
  opts.family = KernelFamily::kBrackenMelloy;
  const BoundaryShape shape = BoundaryShape::straight(2.0);
  const SupremumEstimate est = estimate_supremum(shape, L_list, N_list, 0, rule, opts);

  CsvWriter csv(output_path(cfg, "output", "bm_lambda.csv").string(), cfg.hash_string(), "L,N,mu");
  for (const auto& row : est.per_N) csv.numeric_row({row.L, static_cast<double>(row.N), row.mu});
  std::printf("lambda_sup = %.7f (reference %.7f, final fit residual %.2e)\n", est.value,
              kLambdaRef, est.final_residual);
  for (const auto& pl : est.per_L)
    std::printf("  L=%-4g mu_L=%.7f slope=%.4g%s\n", pl.L, pl.mu_L, pl.slope,
                pl.non_monotone ? " [non-monotone refinement]" : "");
  return 0;
}

std::vector<double> scan_epsilons(const RunConfig& cfg) {
  if (cfg.has("epsilons")) return cfg.get_list("epsilons", {});
  const double lo = cfg.get_double("eps_min", -0.4);
  const double hi = cfg.get_double("eps_max", 0.4);
  const double step = cfg.get_double("eps_step", 0.1);
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("config: bad epsilon range");
  std::vector<double> eps;
  for (double e = lo; e <= hi + 0.5 * step; e += step) eps.push_back(std::abs(e) < 1e-12 ? 0.0 : e);
  return eps;
}

int cmd_mu_scan(const CommandContext& ctx) {
  const RunConfig cfg = ctx.effective("mu-scan");
  const auto L_list = cfg.get_list("L_list", kDefaultLList);
  const auto N_list = int_list(cfg, "N_list", kDefaultNList);
  const int order = cfg.get_int("order", kDefaultSeriesOrder);
  const std::vector<double> eps_list = scan_epsilons(cfg);
  for (double e : eps_list)
    if (!(e > -1.0) || std::abs(e) >= 1.0)
      throw ConfigError("config: scan epsilons must lie in (-1, 1); the series "
                        "representation is unreliable beyond |epsilon| ~ 0.5");
  if (ctx.dry_run) {
    std::printf("planned scan: %zu epsilon values, %zu x %zu (L, N) grids each\n",
                eps_list.size(), L_list.size(), N_list.size());
    return 0;
  }
  const QuadratureRule rule = gauss_legendre(cfg.get_int("quad", kDefaultQuadratureCount));
  SeriesTermCache term_cache;
  const EstimateOptions opts = make_estimate_options(cfg, &term_cache);

  // Tangent-line reference: mu_sup(0) and the first-order slope.
  const SupremumEstimate base =
      estimate_supremum(BoundaryShape::gaussian_bump(0.0), L_list, N_list, 0, rule, opts);
  const ExtrapolatedSlope slope =
      first_order_extrapolated(L_list, int_list(cfg, "N_list", kDefaultNList), rule, &term_cache,
                               thread_count(cfg));

  struct Row {
    double eps, mu_sup, mu_linear;
    bool failed;
  };
  std::vector<Row> rows;
  bool any_failed = false;
  for (double eps : eps_list) {
    Row row{eps, std::nan(""), linear_prediction(base.value, slope.mu1, eps), false};
    try {
      if (eps == 0.0) {
        row.mu_sup = base.value;
      } else {
        row.mu_sup = estimate_supremum(BoundaryShape::gaussian_bump(eps), L_list, N_list, order,
                                       rule, opts)
                         .value;
      }
    } catch (const Error& e) {
      row.failed = true;
      any_failed = true;
      std::fprintf(stderr, "mu-scan: epsilon=%g failed: %s\n", eps, e.what());
    }
    rows.push_back(row);
    std::printf("epsilon=%-8g mu_sup=%s mu_linear=%.7f\n", eps,
                row.failed ? "FAILED" : format_number(row.mu_sup).c_str(), row.mu_linear);
  }

  CsvWriter csv(output_path(cfg, "output", "mu_scan.csv").string(), cfg.hash_string(),
                "epsilon,mu_sup,mu_linear,lambda_ref");
  for (const auto& r : rows) {
    csv.row({format_number(r.eps), r.failed ? "failed" : format_number(r.mu_sup),
             format_number(r.mu_linear), format_number(kLambdaRef)});
  }

  if (cfg.has("svg")) {
    PlotSeries mu{"mu_sup", "black", {}}, lin{"linear", "blue", {}}, ref{"lambda_ref", "red", {}};
    for (const auto& r : rows) {
      if (!r.failed) mu.points.emplace_back(r.eps, r.mu_sup);
      lin.points.emplace_back(r.eps, r.mu_linear);
      ref.points.emplace_back(r.eps, kLambdaRef);
    }
    write_svg_plot(output_path(cfg, "svg", "mu_scan.svg").string(), "mu_sup(epsilon)",
                   {mu, lin, ref});
  }
  return any_failed ? 3 : 0;
}

int cmd_verify(const CommandContext& ctx) {
  const RunConfig cfg = ctx.effective("verify");
  const double eps = cfg.get_double("epsilon", 0.0);
  const GridSpec grid(cfg.get_double("L", 20.0), cfg.get_int("N", 1000));
  const int order = (eps == 0.0) ? 0 : cfg.get_int("order", kDefaultSeriesOrder);
  const double T = cfg.get_double("T", 4.0);
  const QuadratureRule rule = gauss_legendre(cfg.get_int("quad", kDefaultQuadratureCount));
  if (ctx.dry_run) {
    std::printf("planned verification: epsilon=%g grid L=%g N=%d T=%g\n", eps, grid.L, grid.N, T);
    return 0;
  }

  bool all_pass = true;
  auto report = [&all_pass](const char* name, bool pass, double value, double tol) {
    std::printf("%-34s %s  (value %.3e, tolerance %.0e)\n", name, pass ? "PASS" : "FAIL", value,
                tol);
    if (!pass) all_pass = false;
  };

  const BoundaryShape shape = BoundaryShape::gaussian_bump(eps);
  AssemblyOptions aopts;
  const KernelMatrix A = assemble(shape, grid, order, rule, aopts);
  const EigenPair top = max_eigenpair(A);
  std::printf("discretized eigenvalue mu = %.7f (grid L=%g N=%d, epsilon=%g)\n", top.value,
              grid.L, grid.N, eps);

  const WavepacketState state = state_from_eigvec(top.vector, grid, shape);
  report("reconstruction norm defect", state.norm_defect < 1e-3, state.norm_defect, 1e-3);

  const TransferMeasurement m = delta_direct(state, 0.0, T);
  const ProbLeftResult total_end = prob_left_detail(state, T);
  report("probability conservation", std::abs(total_end.total - 1.0) <= 1e-3,
         std::abs(total_end.total - 1.0), 1e-3);
  if (T == 0.0) {
    report("delta at T=0", std::abs(m.delta) <= 1e-12, std::abs(m.delta), 1e-12);
  } else {
    report("|delta - mu|", std::abs(m.delta - top.value) <= 2e-3, std::abs(m.delta - top.value),
           2e-3);
  }

  {
    CsvWriter trace(output_path(cfg, "trace_output", "p_left_trace.csv").string(),
                    cfg.hash_string(), "t,P_left");
    const int steps = 8;
    for (int i = 0; i <= steps; ++i) {
      const double t = T * i / steps;
      trace.numeric_row({t, prob_left_detail(state, t).left});
    }
  }

  // Correlated-state structure: a packet supported on x < 0 has no weight on
  // z < 0 in the p - (m/t) x eigenbasis after free evolution.
  {
    MomentumWindow window;
    window.P = 600.0;
    window.J = 1 << 17;
    const WavepacketState gauss = gaussian_state(0.0, 1.0 / (2.0 * std::sqrt(2.0)), -10.0, window);
    const auto density = z_projection(gauss, 1.0, -60.0, 80.0, 2801);
    double total = 0.0, neg = 0.0;
    const double dz = density[1].z - density[0].z;
    for (std::size_t i = 0; i < density.size(); ++i) {
      double w = dz;
      if (i == 0 || i + 1 == density.size()) w *= 0.5;
      total += w * density[i].density;
      if (density[i].z < 0.0) neg += w * density[i].density;
    }
    report("z-density normalization", std::abs(total - 1.0) <= 1e-4, std::abs(total - 1.0), 1e-4);
    report("z<0 weight (x<0 packet)", neg <= 1e-4, neg, 1e-4);

    CsvWriter zcsv(output_path(cfg, "z_output", "z_density.csv").string(), cfg.hash_string(),
                   "z,density");
    for (const auto& s : density) zcsv.numeric_row({s.z, s.density});
  }

  return all_pass ? 0 : 1;
}

int cmd_boundary_dump(const CommandContext& ctx) {
  const RunConfig cfg = ctx.effective("boundary-dump");
  const std::vector<double> eps_list = cfg.get_list("epsilons", {0.0});
  const double p_min = cfg.get_double("p_min", -5.0);
  const double p_max = cfg.get_double("p_max", 5.0);
  const int samples = cfg.get_int("samples", 201);
  if (ctx.dry_run) {
    std::printf("planned boundary dump: %zu curves, %d samples each\n", eps_list.size(), samples);
    return 0;
  }
  for (double eps : eps_list) {
    const BoundaryShape shape = BoundaryShape::gaussian_bump(eps);
    char name[64];
    std::snprintf(name, sizeof name, "boundary_eps%s.csv", detail::sanitize_number(eps).c_str());
    CsvWriter csv(output_path(cfg, "output_prefix", name).string(), cfg.hash_string(), "p,s_of_p");
    for (const auto& s : boundary_samples(shape, p_min, p_max, samples))
      csv.numeric_row({s.p, s.s});
    std::printf("wrote %s\n", name);
  }
  return 0;
}

int cmd_kernel_dump(const CommandContext& ctx) {
  const RunConfig cfg = ctx.effective("kernel-dump");
  const BoundaryShape shape = shape_from_config(cfg);
  const GridSpec grid(cfg.get_double("L", 10.0), cfg.get_int("N", 100));
  const int order = cfg.get_int("order", kDefaultSeriesOrder);
  if (ctx.dry_run) {
    std::printf("planned kernel dump: %dx%d matrix\n", grid.point_count(), grid.point_count());
    return 0;
  }
  const QuadratureRule rule = gauss_legendre(cfg.get_int("quad", kDefaultQuadratureCount));
  const KernelMatrix matrix =
      assemble_cached(resolve_cache_dir(cfg), shape, grid, order, rule, {});
  const double w = grid.weight();
  CsvWriter csv(output_path(cfg, "output", "kernel.csv").string(), cfg.hash_string(),
                "u,u_prime,re,im");
  for (int a = 0; a < grid.point_count(); ++a)
    for (int b = 0; b < grid.point_count(); ++b) {
      const Complex v = matrix.entries(a, b) / w;  // kernel values, quadrature weight removed
      csv.numeric_row({grid.point(a), grid.point(b), v.real(), v.imag()});
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum backflow numerics"};
  app.require_subcommand(1);

  CommandContext bm_ctx, scan_ctx, verify_ctx, boundary_ctx, kernel_ctx;

  auto* bm = app.add_subcommand("bm-lambda", "supremum of the canonical eigenproblem");
  add_common_options(bm, bm_ctx,
                     {"L_list", "N_list", "quad", "threads", "cache_dir", "output_dir", "output"});
  bm->add_flag("--dry-run", bm_ctx.dry_run, "print the plan and exit");

  auto* scan = app.add_subcommand("mu-scan", "mu_sup(epsilon) scan");
  add_common_options(scan, scan_ctx,
                     {"L_list", "N_list", "quad", "order", "threads", "cache_dir", "output_dir",
                      "output", "svg", "epsilons", "eps_min", "eps_max", "eps_step"});
  scan->add_flag("--dry-run", scan_ctx.dry_run, "print the plan and exit");

  auto* verify = app.add_subcommand("verify", "wavepacket verification of the eigenvalues");
  add_common_options(verify, verify_ctx,
                     {"epsilon", "L", "N", "T", "quad", "order", "output_dir", "trace_output",
                      "z_output"});
  verify->add_flag("--dry-run", verify_ctx.dry_run, "print the plan and exit");

  auto* boundary = app.add_subcommand("boundary-dump", "boundary curve samples");
  add_common_options(boundary, boundary_ctx,
                     {"epsilons", "p_min", "p_max", "samples", "output_dir", "output_prefix"});
  boundary->add_flag("--dry-run", boundary_ctx.dry_run, "print the plan and exit");

  auto* kernel = app.add_subcommand("kernel-dump", "kernel values as CSV");
  add_common_options(kernel, kernel_ctx,
                     {"shape", "slope", "epsilon", "L", "N", "order", "quad", "cache_dir",
                      "output_dir", "output"});
  kernel->add_flag("--dry-run", kernel_ctx.dry_run, "print the plan and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bm->parsed()) return cmd_bm_lambda(bm_ctx);
    if (scan->parsed()) return cmd_mu_scan(scan_ctx);
    if (verify->parsed()) return cmd_verify(verify_ctx);
    if (boundary->parsed()) return cmd_boundary_dump(boundary_ctx);
    if (kernel->parsed()) return cmd_kernel_dump(kernel_ctx);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
