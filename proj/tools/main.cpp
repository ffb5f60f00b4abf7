// fraclap: discretize the 1D integral fractional Laplacian on unions of
// intervals, solve Dirichlet problems, and maximize the fractional Dirichlet
// energy over bang-bang densities of fixed mass.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "fraclap/config.hpp"
#include "fraclap/io.hpp"
#include "fraclap/maximizer.hpp"
#include "fraclap/validation.hpp"

namespace {

using namespace fraclap;

struct CliFlags {
  std::string config_path;
  std::int64_t seed_override = -1;
  bool strict = false;
  int threads = 1;
  std::string out_dir = ".";
  bool out_dir_set = false;
  bool dump_matrix = false;
};

nlohmann::json metadata_json(int threads) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  char host[256] = "unknown";
  if (std::getenv("HOSTNAME")) std::snprintf(host, sizeof(host), "%s", std::getenv("HOSTNAME"));
  return {{"timestamp", buf}, {"hostname", host}, {"threads", threads}};
}

std::filesystem::path out_path(const CliFlags& flags, const RunConfig& cfg,
                               const std::string& name) {
  std::string dir = flags.out_dir;
  if (!flags.out_dir_set && !cfg.out_dir.empty()) dir = cfg.out_dir;
  std::filesystem::create_directories(dir);
  return std::filesystem::path(dir) / name;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

void print_snap_report(const Grid& grid) {
  for (const auto& r : grid.snap_report)
    if (r.given_left != r.snapped_left || r.given_right != r.snapped_right)
      std::cerr << "snap: (" << fmt17(r.given_left) << ", "
                << fmt17(r.given_right) << ") -> (" << fmt17(r.snapped_left)
                << ", " << fmt17(r.snapped_right) << ")\n";
}

double single_s(const RunConfig& cfg) {
  if (cfg.s_values.size() != 1)
    throw ConfigError(
        "config: this command needs a single 's' value (list given)");
  return cfg.s_values.front();
}

RunConfig load_with_overrides(const CliFlags& flags) {
  RunConfig cfg = load_config(flags.config_path);
  if (flags.seed_override >= 0)
    cfg.opts.seed = static_cast<std::uint64_t>(flags.seed_override);
  cfg.opts.threads = flags.threads;
  return cfg;
}

int cmd_validate(const CliFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  const auto results = run_validation(cfg);
  bool all_hard_pass = true;
  std::printf("%-28s %-6s %s\n", "check", "status", "detail");
  for (const auto& r : results) {
    const char* status = r.pass ? "PASS" : (r.hard ? "FAIL" : "WARN");
    if (!r.pass && r.hard) all_hard_pass = false;
    std::printf("%-28s %-6s %s\n", r.name.c_str(), status, r.detail.c_str());
  }
  std::printf("validate: %s\n", all_hard_pass ? "all hard checks passed"
                                              : "hard check failure");
  return all_hard_pass ? 0 : 1;
}

int cmd_solve(const CliFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  const double s = single_s(cfg);
  const Grid grid = grid_from_config(cfg);
  print_snap_report(grid);
  const Operator op = assemble(grid, s);
  if (flags.dump_matrix)
    write_matrix_csv(out_path(flags, cfg, "matrix.csv"), op.matrix);

  Vector f;
  if (cfg.f_source == "ones")
    f = Vector::Ones(grid.n);
  else
    f = read_density_csv(cfg.f_source, grid.n);

  const SolveReport rep = solve_direct(op, f);
  const double e = grid.h * f.dot(rep.u);

  write_xy_csv(out_path(flags, cfg, "u.csv"), "x,u", grid.cells, rep.u);
  write_xy_csv(out_path(flags, cfg, "f.csv"), "x,f", grid.cells, f);
  nlohmann::json summary = solve_summary_to_json(grid, s, rep, e);
  summary["metadata"] = metadata_json(flags.threads);
  write_json(out_path(flags, cfg, "summary.json"), summary);

  std::printf("solve: n=%d s=%s energy=%s residual=%s\n", grid.n,
              fmt17(s).c_str(), fmt17(e).c_str(),
              fmt17(rep.residual_inf).c_str());
  return 0;
}

int run_maximizer_command(const CliFlags& flags, bool brute) {
  const RunConfig cfg = load_with_overrides(flags);
  const double s = single_s(cfg);
  const Grid grid = grid_from_config(cfg);
  print_snap_report(grid);
  const MassSnap ms = mass_from_config(grid, cfg);
  if (ms.discrepancy > 0.0)
    std::cerr << "snap: beta " << fmt17(cfg.beta) << " -> "
              << fmt17(ms.beta_eff) << " (k=" << ms.k << ")\n";
  const Operator op = assemble(grid, s);
  if (flags.dump_matrix)
    write_matrix_csv(out_path(flags, cfg, "matrix.csv"), op.matrix);

  const AscentResult res =
      brute ? brute_force(op, ms.k, cfg.brute_limit, cfg.opts.threads)
            : ascend(op, ms.k, cfg.opts);
  // the residual gate follows the solver tolerance but never drops below the
  // acceptance threshold
  const VerificationReport ver =
      verify(op, res, std::max(1e-8, 100.0 * cfg.opts.solver_tol));

  nlohmann::json doc = result_to_json(brute ? "brute" : "maximize", grid, s,
                                      ms.k, ms.beta_eff, cfg.opts, res, ver);
  doc["metadata"] = metadata_json(flags.threads);
  write_json(out_path(flags, cfg, "result.json"), doc);
  write_xy_csv(out_path(flags, cfg, "u.csv"), "x,u", grid.cells, res.u_hat);
  write_xy_csv(out_path(flags, cfg, "f.csv"), "x,f", grid.cells,
               res.f_hat.as_vector());
  write_trace_csv(out_path(flags, cfg, "trace.csv"), res.trace);

  std::printf(
      "%s: energy=%s alpha_mid=%s iterations=%d residual=%s ties=%d%s\n",
      brute ? "brute" : "maximize", fmt17(res.energy).c_str(),
      fmt17(res.alpha_mid).c_str(), res.iterations,
      fmt17(res.obstacle_residual_inf).c_str(), res.tie_cells,
      res.converged ? "" : " (not converged)");

  if (flags.strict && (!res.converged || !ver.pass)) return 1;
  return 0;
}

int cmd_sweep(const CliFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  const Grid grid = grid_from_config(cfg);
  print_snap_report(grid);
  if (!cfg.has_beta) throw ConfigError("config: missing field 'beta'");
  const auto rows = sweep(grid, cfg.s_values, cfg.beta, cfg.opts);
  write_sweep_csv(out_path(flags, cfg, "sweep.csv"), rows);
  bool any_error = false;
  for (const auto& r : rows) {
    if (r.ok)
      std::printf("sweep: s=%s k=%d energy=%s iterations=%d ties=%d\n",
                  fmt17(r.s).c_str(), r.k, fmt17(r.energy).c_str(),
                  r.iterations, r.tie_cells);
    else {
      any_error = true;
      std::printf("sweep: s=%s error: %s\n", fmt17(r.s).c_str(),
                  r.error.c_str());
    }
  }
  return (flags.strict && any_error) ? 1 : 0;
}

int cmd_twoball(const CliFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  const double s = single_s(cfg);
  if (cfg.domain.size() != 2)
    throw ConfigError("config: twoball needs exactly two domain intervals");
  const Grid grid = grid_from_config(cfg);
  print_snap_report(grid);
  const MassSnap ms = mass_from_config(grid, cfg);

  ConcentrationReport rep;
  try {
    rep = two_component_experiment({grid.intervals[0].left, grid.intervals[0].right},
                                   {grid.intervals[1].left, grid.intervals[1].right},
                                   cfg.h, s, ms.k, cfg.opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const Operator op = assemble(grid, s);
  const VerificationReport ver =
      verify(op, rep.result, std::max(1e-8, 100.0 * cfg.opts.solver_tol));

  nlohmann::json doc = twoball_to_json(grid, s, ms.k, cfg.opts, rep, ver);
  doc["metadata"] = metadata_json(flags.threads);
  write_json(out_path(flags, cfg, "twoball.json"), doc);
  write_xy_csv(out_path(flags, cfg, "u.csv"), "x,u", grid.cells,
               rep.result.u_hat);
  write_xy_csv(out_path(flags, cfg, "f.csv"), "x,f", grid.cells,
               rep.result.f_hat.as_vector());

  std::printf(
      "twoball: frac=(%s, %s) energy=%s J_hat=%s J_copied=%s improves=%s\n",
      fmt17(rep.frac_left).c_str(), fmt17(rep.frac_right).c_str(),
      fmt17(rep.result.energy).c_str(), fmt17(rep.J_hat).c_str(),
      fmt17(rep.J_copied).c_str(), rep.copied_improves ? "yes" : "no");

  if (flags.strict && (!rep.result.converged || !ver.pass)) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D integral fractional Laplacian: Dirichlet solves and "
               "rearrangement energy maximization"};
  app.require_subcommand(1);

  CliFlags flags;
  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON config file")
        ->required();
    cmd->add_option("--seed", flags.seed_override, "override config seed");
    cmd->add_flag("--strict", flags.strict,
                  "exit 1 on non-convergence or failed verification");
    cmd->add_option("--threads", flags.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", flags.out_dir, "output directory")
        ->each([&flags](const std::string&) { flags.out_dir_set = true; });
    cmd->add_flag("--dump-matrix", flags.dump_matrix,
                  "write the assembled operator as matrix.csv");
  };

  CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
  CLI::App* solve = app.add_subcommand("solve", "solve A u = f");
  CLI::App* maximize =
      app.add_subcommand("maximize", "alternating linear-oracle ascent");
  CLI::App* brute =
      app.add_subcommand("brute", "exhaustive subset enumeration");
  CLI::App* sweep = app.add_subcommand("sweep", "ascent across an s list");
  CLI::App* twoball =
      app.add_subcommand("twoball", "two-component concentration experiment");
  for (CLI::App* cmd : {validate, solve, maximize, brute, sweep, twoball})
    add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(flags);
    if (solve->parsed()) return cmd_solve(flags);
    if (maximize->parsed()) return run_maximizer_command(flags, false);
    if (brute->parsed()) return run_maximizer_command(flags, true);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (twoball->parsed()) return cmd_twoball(flags);
  } catch (const fraclap::BruteBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const fraclap::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
