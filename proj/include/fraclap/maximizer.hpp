#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fraclap/linear_solver.hpp"
#include "fraclap/rearrangement.hpp"

namespace fraclap {

enum class InitMode { random, centered, uniform_then_snap };

struct AscentOptions {
  InitMode init = InitMode::centered;
  int max_iter = 100;
  int restarts = 10;
  std::uint64_t seed = 1;
  double solver_tol = 1e-10;
  int threads = 1;
};

// Diagnostics for one restart of the ascent.
struct RestartReport {
  std::vector<double> trace;  // energy per iteration, nondecreasing
  int iterations = 0;
  bool converged = false;
  bool revisited_set = false;  // a non-consecutive selected set reappeared
};

struct AscentResult {
  Density f_hat;
  Vector u_hat;
  double alpha = 0.0;
  double gamma = 0.0;
  double alpha_mid = 0.0;
  double energy = 0.0;  // Phi_s = h * f_hat . u_hat
  std::vector<double> trace;
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
  double obstacle_residual_inf = 0.0;  // max_i |(A u)_i - chi_{u > alpha_mid}(i)|
  bool bang_bang = false;
  bool separated = false;
  int tie_cells = 0;
  double J_value = 0.0;
  double solver_residual_inf = 0.0;
  std::vector<RestartReport> restart_reports;
};

// J(u) = [u]_s^2 - 2 * integral of u over {u > level}; the maximizer's field
// attains J = -Phi_s at its own level.
inline double compute_J(const Operator& op, const Vector& u, double level) {
  if (u.size() != op.n())
    throw std::invalid_argument("compute_J: dimension mismatch");
  double lin = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u[i] > level) lin += u[i];
  return energy(op, u) - 2.0 * op.grid.h * lin;
}

namespace detail {

struct RestartOutcome {
  Density f;
  Vector u;
  RestartReport report;
};

inline std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ULL *
                               static_cast<std::uint64_t>(restart + 1));
}

// k cells nearest the hull midpoint, ties toward lower index: the contiguous
// central block on a single interval.
inline Density centered_init(const Grid& grid, int k) {
  const double xc =
      0.5 * (grid.intervals.front().left + grid.intervals.back().right);
  std::vector<int> order(static_cast<std::size_t>(grid.n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = std::abs(grid.cells[static_cast<std::size_t>(a)] - xc);
    const double db = std::abs(grid.cells[static_cast<std::size_t>(b)] - xc);
    if (da != db) return da < db;
    return a < b;
  });
  std::vector<int> sel(order.begin(), order.begin() + k);
  std::sort(sel.begin(), sel.end());
  return make_bangbang(sel, grid.n, grid.h);
}

// One pass of the alternating ascent: solve, then take the linear oracle
// step, until the selected set maps to itself. The energy strictly increases
// whenever the set changes (h d'A^-1 d > 0 for the step d), so revisits are
// impossible and termination is guaranteed; the visited log asserts this.
inline RestartOutcome run_restart(const DirectSolver& solver, int k,
                                  Density f, int max_iter) {
  const Operator& op = solver.op();
  const double h = op.grid.h;
  RestartOutcome out;
  std::set<std::vector<int>> visited;
  visited.insert(f.selected());

  Vector u;
  for (int t = 1; t <= max_iter; ++t) {
    const Vector fv = f.as_vector();
    u = solver.solve(fv).u;
    out.report.trace.push_back(h * fv.dot(u));
    Density next = linmax(u, k, h);
    if (next.selected() == f.selected()) {
      out.report.converged = true;
      out.report.iterations = t;
      break;
    }
    if (!visited.insert(next.selected()).second) out.report.revisited_set = true;
    f = std::move(next);
  }
  if (!out.report.converged) {
    const Vector fv = f.as_vector();
    u = solver.solve(fv).u;
    out.report.trace.push_back(h * fv.dot(u));
    out.report.iterations = static_cast<int>(out.report.trace.size());
  }
  out.f = std::move(f);
  out.u = std::move(u);
  return out;
}

// Energy first, then lexicographically smallest selected set. Total order, so
// the reduction result is independent of evaluation order.
inline bool better(const RestartOutcome& a, const RestartOutcome& b) {
  const double ea = a.report.trace.back();
  const double eb = b.report.trace.back();
  if (ea != eb) return ea > eb;
  return a.f.selected() < b.f.selected();
}

// Shared post-processing for ascend and brute_force results.
inline AscentResult finalize_result(const Operator& op, Density f, Vector u,
                                    double solver_residual) {
  AscentResult res;
  const ThresholdReport th = threshold(u, f);
  res.alpha = th.alpha;
  res.gamma = th.gamma;
  res.alpha_mid = th.alpha_mid;
  res.separated = th.separated;
  res.tie_cells = th.tie_cells;
  res.energy = op.grid.h * f.as_vector().dot(u);
  res.bang_bang = f.bang_bang;
  const Density chi = indicator_above(u, th.alpha_mid, op.grid.h);
  res.obstacle_residual_inf =
      (op.matrix * u - chi.as_vector()).lpNorm<Eigen::Infinity>();
  res.J_value = compute_J(op, u, th.alpha_mid);
  res.solver_residual_inf = solver_residual;
  res.f_hat = std::move(f);
  res.u_hat = std::move(u);
  return res;
}

}  // namespace detail

// Alternating linear-oracle ascent for max Phi_s(f) = h f'u_f over bang-bang
// densities with k unit cells. Runs `restarts` independent starts (first one
// deterministic per opts.init, the rest seeded random subsets) and returns
// the best by energy, ties to the lexicographically smallest selected set.
// Restarts may run on several threads; the reduction is order-independent.
inline AscentResult ascend(const Operator& op, int k,
                           const AscentOptions& opts) {
  if (k < 1 || k > op.n()) throw std::invalid_argument("ascend: k out of range");
  if (opts.max_iter < 1 || opts.restarts < 1)
    throw std::invalid_argument("ascend: max_iter and restarts must be >= 1");

  const DirectSolver solver(op, opts.solver_tol);
  const int n = op.n();
  const double h = op.grid.h;

  std::vector<Density> inits;
  inits.reserve(static_cast<std::size_t>(opts.restarts));
  for (int r = 0; r < opts.restarts; ++r) {
    if (r == 0 && opts.init == InitMode::centered) {
      inits.push_back(detail::centered_init(op.grid, k));
    } else if (r == 0 && opts.init == InitMode::uniform_then_snap) {
      const Vector f_unif =
          Vector::Constant(n, static_cast<double>(k) / static_cast<double>(n));
      inits.push_back(linmax(solver.solve(f_unif).u, k, h));
    } else {
      inits.push_back(
          random_bangbang(n, k, detail::restart_seed(opts.seed, r), h));
    }
  }

  std::vector<detail::RestartOutcome> outcomes(
      static_cast<std::size_t>(opts.restarts));
  const int threads = std::max(1, opts.threads);
  if (threads == 1 || opts.restarts == 1) {
    for (int r = 0; r < opts.restarts; ++r)
      outcomes[static_cast<std::size_t>(r)] =
          detail::run_restart(solver, k, inits[static_cast<std::size_t>(r)],
                              opts.max_iter);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int r = t; r < opts.restarts; r += threads)
          outcomes[static_cast<std::size_t>(r)] = detail::run_restart(
              solver, k, inits[static_cast<std::size_t>(r)], opts.max_iter);
      });
    for (auto& th : pool) th.join();
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < outcomes.size(); ++r)
    if (detail::better(outcomes[r], outcomes[best])) best = r;

  // Re-solve the winner so the reported residual matches the returned field.
  const SolveReport final_solve =
      solver.solve(outcomes[best].f.as_vector());
  AscentResult res = detail::finalize_result(
      op, std::move(outcomes[best].f), final_solve.u, final_solve.residual_inf);
  res.trace = std::move(outcomes[best].report.trace);
  res.iterations = outcomes[best].report.iterations;
  res.converged = outcomes[best].report.converged;
  res.restarts_used = opts.restarts;
  res.restart_reports.reserve(outcomes.size());
  for (auto& o : outcomes) res.restart_reports.push_back(std::move(o.report));
  return res;
}

// Number of k-subsets if it does not exceed limit, otherwise nullopt.
inline std::optional<std::uint64_t> subset_count(int n, int k,
                                                 std::uint64_t limit) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  // c = C(n-k+i, i) after step i, exact at every step.
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (c > UINT64_MAX / num) return std::nullopt;
    c = c * num / static_cast<std::uint64_t>(i);
    if (c > limit) return std::nullopt;
  }
  return c;
}

namespace detail {

// Lexicographic unranking of k-subsets of {0..n-1} (combinadic order).
inline std::vector<int> unrank_subset(int n, int k, std::uint64_t rank) {
  std::vector<int> sel;
  sel.reserve(static_cast<std::size_t>(k));
  int c = 0;
  for (int p = 0; p < k; ++p) {
    while (true) {
      const auto tail = subset_count(n - 1 - c, k - 1 - p, UINT64_MAX / 2);
      if (!tail || rank < *tail) break;  // nullopt: tail beyond any valid rank
      rank -= *tail;
      ++c;
    }
    sel.push_back(c++);
  }
  return sel;
}

inline bool next_subset(std::vector<int>& sel, int n) {
  const int k = static_cast<int>(sel.size());
  int i = k - 1;
  while (i >= 0 && sel[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++sel[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j)
    sel[static_cast<std::size_t>(j)] = sel[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

}  // namespace detail

struct BruteBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive global oracle: enumerates every k-subset in lexicographic order
// and returns the maximizer of h f'u_f. First subset in lex order wins exact
// energy ties. Batches may run on several threads; chunk reduction preserves
// the lex tie-break.
inline AscentResult brute_force(const Operator& op, int k,
                                std::uint64_t limit = 10'000'000,
                                int threads = 1) {
  if (k < 1 || k > op.n())
    throw std::invalid_argument("brute_force: k out of range");
  const auto count = subset_count(op.n(), k, limit);
  if (!count)
    throw BruteBudgetExceeded(
        "brute_force: C(n,k) exceeds the combinatorial budget of " +
        std::to_string(limit));

  const DirectSolver solver(op);
  const int n = op.n();
  const double h = op.grid.h;

  struct ChunkBest {
    double e = -std::numeric_limits<double>::infinity();
    std::vector<int> sel;
  };

  auto scan = [&](std::uint64_t first, std::uint64_t last) {
    ChunkBest best;
    if (first >= last) return best;
    std::vector<int> sel = detail::unrank_subset(n, k, first);
    Vector f = Vector::Zero(n);
    for (std::uint64_t r = first; r < last; ++r) {
      for (int i : sel) f[i] = 1.0;
      const Vector u = solver.solve(f).u;
      const double e = h * f.dot(u);
      if (e > best.e) {
        best.e = e;
        best.sel = sel;
      }
      for (int i : sel) f[i] = 0.0;
      detail::next_subset(sel, n);
    }
    return best;
  };

  const std::uint64_t total = *count;
  const int nthreads =
      static_cast<int>(std::min<std::uint64_t>(std::max(1, threads), total));
  std::vector<ChunkBest> chunk(static_cast<std::size_t>(nthreads));
  if (nthreads == 1) {
    chunk[0] = scan(0, total);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
      const std::uint64_t first = total * static_cast<std::uint64_t>(t) /
                                  static_cast<std::uint64_t>(nthreads);
      const std::uint64_t last = total * static_cast<std::uint64_t>(t + 1) /
                                 static_cast<std::uint64_t>(nthreads);
      pool.emplace_back(
          [&chunk, &scan, t, first, last] { chunk[static_cast<std::size_t>(t)] = scan(first, last); });
    }
    for (auto& th : pool) th.join();
  }
  ChunkBest best;  // chunks are in lex order; strict > keeps the earliest tie
  for (const auto& c : chunk)
    if (c.e > best.e) best = c;

  Density f_hat = make_bangbang(best.sel, n, h);
  const SolveReport rep = solver.solve(f_hat.as_vector());
  AscentResult res =
      detail::finalize_result(op, std::move(f_hat), rep.u, rep.residual_inf);
  res.trace = {res.energy};
  res.iterations = 0;
  res.restarts_used = 0;
  res.converged = true;
  return res;
}

struct VerificationReport {
  bool bang_bang = false;
  bool separated = false;
  double alpha = 0.0;
  double gamma = 0.0;
  double alpha_mid = 0.0;
  int tie_cells = 0;
  double tie_mass = 0.0;  // h * tie_cells, discrete plateau measure
  bool mass_exact = false;
  bool residual_checked = false;
  std::string residual_skip_reason;
  double obstacle_residual_inf = 0.0;
  bool pass = false;
};

// Independent re-derivation of the maximizer structure: bang-bang form,
// threshold separation, plateau mass, exact mass, and the fixed-point
// identity A u = chi_{u > alpha_mid} (checked only when the cut is tie-free,
// since a plateau makes the indicator ambiguous at the cut).
inline VerificationReport verify(const Operator& op, const AscentResult& result,
                                 double residual_tol = 1e-8) {
  VerificationReport rep;
  const Density& f = result.f_hat;
  const Vector& u = result.u_hat;

  rep.bang_bang = true;
  int ones = 0;
  for (double v : f.values) {
    if (v == 1.0)
      ++ones;
    else if (v != 0.0)
      rep.bang_bang = false;
  }
  if (ones != f.k) rep.bang_bang = false;

  const ThresholdReport th = threshold(u, f);
  rep.alpha = th.alpha;
  rep.gamma = th.gamma;
  rep.alpha_mid = th.alpha_mid;
  rep.separated = th.separated;
  rep.tie_cells = th.tie_cells;
  rep.tie_mass = op.grid.h * static_cast<double>(th.tie_cells);

  double sum = 0.0;
  for (double v : f.values) sum += v;
  rep.mass_exact =
      op.grid.h * sum == static_cast<double>(f.k) * op.grid.h;

  if (th.tie_cells == 0) {
    const Density chi = indicator_above(u, th.alpha_mid, op.grid.h);
    rep.obstacle_residual_inf =
        (op.matrix * u - chi.as_vector()).lpNorm<Eigen::Infinity>();
    rep.residual_checked = true;
  } else {
    rep.residual_skip_reason =
        "tie cells at the cut: indicator of {u > alpha_mid} is ambiguous";
  }

  rep.pass = rep.bang_bang && rep.separated && rep.mass_exact &&
             (!rep.residual_checked || rep.obstacle_residual_inf <= residual_tol);
  return rep;
}

struct ConcentrationReport {
  AscentResult result;
  double frac_left = 0.0;   // fraction of selected cells in the left component
  double frac_right = 0.0;
  double dominant_fraction = 0.0;
  double J_hat = 0.0;    // J(u_hat, alpha_mid)
  double J_copied = 0.0; // J of the profile duplicated onto both components
  bool copied_improves = false;  // J_copied < J_hat
};

// Two equal components: runs the ascent and probes the concentration
// heuristic. The copied field v duplicates the dominant component's profile
// onto the other component (local-index translation); for small k, J(v)
// should undercut J(u_hat) even though u_hat maximizes Phi_s.
inline ConcentrationReport two_component_experiment(const Interval& left,
                                                    const Interval& right,
                                                    double h, double s, int k,
                                                    const AscentOptions& opts) {
  const Grid grid =
      build_grid({{left.left, left.right}, {right.left, right.right}}, h);
  if (grid.intervals.size() != 2)
    throw std::invalid_argument("two_component_experiment: need two components");
  const auto off = grid.component_offsets();
  const int n_left = off[1] - off[0];
  const int n_right = off[2] - off[1];
  if (n_left != n_right)
    throw std::invalid_argument(
        "two_component_experiment: components must have equal snapped length");
  if (k < 1 || k > grid.n)
    throw std::invalid_argument("two_component_experiment: k out of range");

  const Operator op = assemble(grid, s);
  ConcentrationReport rep;
  rep.result = ascend(op, k, opts);

  int in_left = 0;
  for (int i : rep.result.f_hat.selected())
    if (i < off[1]) ++in_left;
  rep.frac_left = static_cast<double>(in_left) / static_cast<double>(k);
  rep.frac_right = 1.0 - rep.frac_left;
  rep.dominant_fraction = std::max(rep.frac_left, rep.frac_right);

  const int dom = (in_left * 2 >= k) ? 0 : 1;
  Vector v = rep.result.u_hat;
  for (int j = 0; j < n_left; ++j) {
    const int src = off[dom] + j;
    const int dst = off[1 - dom] + j;
    v[dst] = rep.result.u_hat[src];
  }
  rep.J_hat = compute_J(op, rep.result.u_hat, rep.result.alpha_mid);
  rep.J_copied = compute_J(op, v, rep.result.alpha_mid);
  rep.copied_improves = rep.J_copied < rep.J_hat;
  return rep;
}

struct SweepRow {
  double s = 0.0;
  int k = 0;
  double energy = 0.0;
  double alpha_mid = 0.0;
  int iterations = 0;
  double residual = 0.0;  // obstacle residual at the returned iterate
  int tie_cells = 0;
  bool ok = false;
  std::string error;
};

// One ascend per s value; failures are recorded per row and the sweep
// continues.
inline std::vector<SweepRow> sweep(const Grid& grid,
                                   const std::vector<double>& s_values,
                                   double beta, const AscentOptions& opts) {
  std::vector<SweepRow> rows;
  for (double s : s_values) {
    SweepRow row;
    row.s = s;
    try {
      const MassSnap ms = snap_mass(grid, beta);
      row.k = ms.k;
      const Operator op = assemble(grid, s);
      const AscentResult res = ascend(op, ms.k, opts);
      row.energy = res.energy;
      row.alpha_mid = res.alpha_mid;
      row.iterations = res.iterations;
      row.residual = res.obstacle_residual_inf;
      row.tie_cells = res.tie_cells;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fraclap
