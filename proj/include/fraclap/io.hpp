#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclap/config.hpp"
#include "fraclap/maximizer.hpp"

namespace fraclap {

constexpr const char* kResultSchema = "fraclap.result.v1";
constexpr const char* kSolveSchema = "fraclap.solve.v1";
constexpr const char* kTwoballSchema = "fraclap.twoball.v1";

// 17 significant digits: round-trip exact for binary64.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// -infinity (k = n case) maps to null; JSON has no infinities.
inline nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline void write_xy_csv(const std::string& path, const char* header,
                         const std::vector<double>& x, const Vector& y) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << header << "\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << fmt17(x[i]) << "," << fmt17(y[static_cast<Eigen::Index>(i)]) << "\n";
}

inline void write_trace_csv(const std::string& path,
                            const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,energy\n";
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << (i + 1) << "," << fmt17(trace[i]) << "\n";
}

inline void write_sweep_csv(const std::string& path,
                            const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "s,k,energy,alpha_mid,iterations,residual,tie_cells,status\n";
  for (const auto& r : rows) {
    if (r.ok)
      out << fmt17(r.s) << "," << r.k << "," << fmt17(r.energy) << ","
          << fmt17(r.alpha_mid) << "," << r.iterations << ","
          << fmt17(r.residual) << "," << r.tie_cells << ",ok\n";
    else
      out << fmt17(r.s) << ",,,,,,," << "error: " << r.error << "\n";
  }
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << fmt17(m(i, j));
    out << "\n";
  }
}

// Reads a per-cell density/load column. Accepts one- or two-column numeric
// rows (the value is the last column, so our own f.csv round-trips) and an
// optional header line. Throws ConfigError naming the offending line.
inline Vector read_density_csv(const std::string& path, int expected_n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input CSV: " + path);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.empty() || fields.size() > 2)
      throw ConfigError(path + ": line " + std::to_string(lineno) +
                        ": expected 1 or 2 comma-separated fields");
    try {
      std::size_t pos = 0;
      const double v = std::stod(fields.back(), &pos);
      while (pos < fields.back().size() &&
             std::isspace(static_cast<unsigned char>(fields.back()[pos])))
        ++pos;
      if (pos != fields.back().size()) throw std::invalid_argument("trailing");
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
      values.push_back(v);
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header line
      throw ConfigError(path + ": line " + std::to_string(lineno) +
                        ": not a number: '" + fields.back() + "'");
    }
  }
  if (static_cast<int>(values.size()) != expected_n)
    throw ConfigError(path + ": expected " + std::to_string(expected_n) +
                      " values, got " + std::to_string(values.size()));
  Vector v(expected_n);
  for (int i = 0; i < expected_n; ++i) v[i] = values[static_cast<std::size_t>(i)];
  return v;
}

inline nlohmann::json grid_to_json(const Grid& grid) {
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& iv : grid.intervals)
    intervals.push_back({iv.left, iv.right});
  return {{"intervals", intervals}, {"h", grid.h},   {"n", grid.n},
          {"diam", grid.diam},      {"gaps", grid.gaps}};
}

inline const char* init_name(InitMode mode) {
  switch (mode) {
    case InitMode::random: return "random";
    case InitMode::centered: return "centered";
    case InitMode::uniform_then_snap: return "uniform-then-snap";
  }
  return "centered";
}

inline nlohmann::json options_to_json(const AscentOptions& opts) {
  return {{"init", init_name(opts.init)},
          {"max_iter", opts.max_iter},
          {"restarts", opts.restarts},
          {"seed", opts.seed},
          {"solver_tol", opts.solver_tol}};
}

inline nlohmann::json verification_to_json(const VerificationReport& v) {
  return {{"bang_bang", v.bang_bang},
          {"separated", v.separated},
          {"alpha", json_number(v.alpha)},
          {"gamma", json_number(v.gamma)},
          {"alpha_mid", json_number(v.alpha_mid)},
          {"tie_cells", v.tie_cells},
          {"tie_mass", v.tie_mass},
          {"mass_exact", v.mass_exact},
          {"residual_checked", v.residual_checked},
          {"residual_skip_reason", v.residual_skip_reason},
          {"obstacle_residual_inf", v.obstacle_residual_inf},
          {"pass", v.pass}};
}

inline nlohmann::json result_to_json(const std::string& command,
                                     const Grid& grid, double s, int k,
                                     double beta_eff,
                                     const AscentOptions& opts,
                                     const AscentResult& res,
                                     const VerificationReport& ver) {
  nlohmann::json problem = grid_to_json(grid);
  problem["s"] = s;
  problem["k"] = k;
  problem["beta_eff"] = beta_eff;
  return {{"schema_version", kResultSchema},
          {"command", command},
          {"problem", problem},
          {"options", options_to_json(opts)},
          {"result",
           {{"energy", res.energy},
            {"alpha", json_number(res.alpha)},
            {"gamma", json_number(res.gamma)},
            {"alpha_mid", json_number(res.alpha_mid)},
            {"iterations", res.iterations},
            {"restarts_used", res.restarts_used},
            {"converged", res.converged},
            {"bang_bang", res.bang_bang},
            {"separated", res.separated},
            {"tie_cells", res.tie_cells},
            {"obstacle_residual_inf", res.obstacle_residual_inf},
            {"solver_residual_inf", res.solver_residual_inf},
            {"J_value", res.J_value},
            {"selected", res.f_hat.selected()},
            {"trace", res.trace}}},
          {"verification", verification_to_json(ver)}};
}

inline nlohmann::json solve_summary_to_json(const Grid& grid, double s,
                                            const SolveReport& rep,
                                            double e) {
  Eigen::Index mid = 0;
  const double xc = 0.5 * (grid.intervals.front().left +
                           grid.intervals.back().right);
  for (int i = 1; i < grid.n; ++i)
    if (std::abs(grid.cells[static_cast<std::size_t>(i)] - xc) <
        std::abs(grid.cells[static_cast<std::size_t>(mid)] - xc))
      mid = i;
  nlohmann::json problem = grid_to_json(grid);
  problem["s"] = s;
  return {{"schema_version", kSolveSchema},
          {"problem", problem},
          {"result",
           {{"energy", e},
            {"residual_inf", rep.residual_inf},
            {"iterations", rep.iterations},
            {"method",
             rep.method == SolveMethod::direct ? "direct" : "iterative"},
            {"u_mid", rep.u[mid]},
            {"u_max", rep.u.maxCoeff()}}}};
}

inline nlohmann::json twoball_to_json(const Grid& grid, double s, int k,
                                      const AscentOptions& opts,
                                      const ConcentrationReport& rep,
                                      const VerificationReport& ver) {
  nlohmann::json problem = grid_to_json(grid);
  problem["s"] = s;
  problem["k"] = k;
  return {{"schema_version", kTwoballSchema},
          {"problem", problem},
          {"options", options_to_json(opts)},
          {"result",
           {{"frac_left", rep.frac_left},
            {"frac_right", rep.frac_right},
            {"dominant_fraction", rep.dominant_fraction},
            {"energy", rep.result.energy},
            {"alpha_mid", json_number(rep.result.alpha_mid)},
            {"iterations", rep.result.iterations},
            {"converged", rep.result.converged},
            {"J_hat", rep.J_hat},
            {"J_copied", rep.J_copied},
            {"copied_improves", rep.copied_improves},
            {"selected", rep.result.f_hat.selected()}}},
          {"verification", verification_to_json(ver)}};
}

}  // namespace fraclap
