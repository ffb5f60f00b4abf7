#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclap {

struct Interval {
  double left = 0.0;
  double right = 0.0;
};

// One endpoint-snap record from grid construction.
struct SnapRecord {
  double given_left, given_right;
  double snapped_left, snapped_right;
};

// Lattice-aligned union of disjoint intervals. Cell i lives on
// [m_i*h, (m_i+1)*h] with center (m_i + 1/2)*h, m_i the global lattice index.
// Immutable after construction.
struct Grid {
  std::vector<Interval> intervals;  // snapped, sorted, disjoint
  double h = 0.0;
  std::vector<double> cells;          // cell centers, left to right
  std::vector<std::int64_t> indices;  // global lattice index per cell
  int n = 0;
  double diam = 0.0;          // hull length: max endpoint - min endpoint
  std::vector<double> gaps;   // lengths of complement intervals between components
  std::vector<SnapRecord> snap_report;

  double mass() const { return static_cast<double>(n) * h; }

  // First cell index of each component plus a terminating n, so component c
  // covers cells [offsets[c], offsets[c+1]).
  std::vector<int> component_offsets() const {
    std::vector<int> off;
    int cell = 0;
    for (const auto& iv : intervals) {
      off.push_back(cell);
      cell += static_cast<int>(std::llround((iv.right - iv.left) / h));
    }
    off.push_back(cell);
    return off;
  }
};

namespace detail {

// Nearest lattice point m*h, ties toward -inf: m = ceil(x/h - 1/2).
inline std::int64_t snap_index(double x, double h) {
  return static_cast<std::int64_t>(std::ceil(x / h - 0.5));
}

}  // namespace detail

// Builds the grid from raw interval endpoints. Endpoints snap to the nearest
// lattice point (ties toward -inf) so every cell across all components sits on
// one global lattice; kernel weights then depend only on integer index
// distance and the assembled operator is symmetric by construction.
inline Grid build_grid(const std::vector<std::pair<double, double>>& intervals,
                       double h) {
  if (!(h > 0.0)) throw std::invalid_argument("build_grid: h must be > 0");
  if (intervals.empty())
    throw std::invalid_argument("build_grid: no intervals given");
  for (const auto& [l, r] : intervals)
    if (!(r > l))
      throw std::invalid_argument("build_grid: interval has nonpositive length");

  std::vector<std::pair<double, double>> sorted = intervals;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (!(sorted[i].second <= sorted[i + 1].first))
      throw std::invalid_argument("build_grid: intervals overlap");

  Grid g;
  g.h = h;
  std::vector<std::pair<std::int64_t, std::int64_t>> idx;
  for (const auto& [l, r] : sorted) {
    const std::int64_t li = detail::snap_index(l, h);
    const std::int64_t ri = detail::snap_index(r, h);
    if (ri <= li)
      throw std::invalid_argument(
          "build_grid: interval (" + std::to_string(l) + ", " +
          std::to_string(r) + ") collapses to zero cells after snapping");
    if (!idx.empty() && li <= idx.back().second)
      throw std::invalid_argument(
          "build_grid: intervals overlap or touch after snapping");
    idx.emplace_back(li, ri);
    g.snap_report.push_back({l, r, static_cast<double>(li) * h,
                             static_cast<double>(ri) * h});
  }

  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto [li, ri] = idx[c];
    g.intervals.push_back({static_cast<double>(li) * h,
                           static_cast<double>(ri) * h});
    for (std::int64_t m = li; m < ri; ++m) {
      g.indices.push_back(m);
      g.cells.push_back((static_cast<double>(m) + 0.5) * h);
    }
    if (c + 1 < idx.size())
      g.gaps.push_back(static_cast<double>(idx[c + 1].first - ri) * h);
  }
  g.n = static_cast<int>(g.cells.size());
  g.diam = g.intervals.back().right - g.intervals.front().left;
  return g;
}

struct MassSnap {
  int k = 0;
  double beta_eff = 0.0;
  double discrepancy = 0.0;  // |beta - beta_eff|
};

// Snaps the mass constraint to an integer number of unit cells. Integer k
// keeps bang-bang iterates inside the discrete rearrangement class exactly.
inline MassSnap snap_mass(const Grid& grid, double beta) {
  if (!(beta > 0.0) || beta > grid.mass() * (1.0 + 1e-12))
    throw std::invalid_argument("snap_mass: beta must lie in (0, n*h]");
  long long k = std::llround(beta / grid.h);
  if (k < 1) k = 1;
  if (k > grid.n) k = grid.n;
  MassSnap s;
  s.k = static_cast<int>(k);
  s.beta_eff = static_cast<double>(k) * grid.h;
  s.discrepancy = std::abs(beta - s.beta_eff);
  return s;
}

// Geometric constant of the fractional Poincare inequality in 1D:
//   min over balls B in R \ D of diam(D u B)^(1+2s) / |B|.
// A ball is an interval here, so the minimum is attained either by an
// exterior ball adjacent to the hull (optimal length diam/(2s), computed in
// closed form) or by a ball filling an interior gap.
inline double poincare_constant(const Grid& grid, double s) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("poincare_constant: s must lie in (0,1)");
  const double d = grid.diam;
  // Adjacent exterior ball, length L: (d+L)^(1+2s)/L, minimized at L = d/(2s).
  double best = 2.0 * s * std::pow(d, 2.0 * s) *
                std::pow(1.0 + 1.0 / (2.0 * s), 1.0 + 2.0 * s);
  // Ball inside a gap leaves the hull unchanged; the largest one is the gap.
  for (double g : grid.gaps)
    best = std::min(best, std::pow(d, 1.0 + 2.0 * s) / g);
  return best;
}

}  // namespace fraclap
