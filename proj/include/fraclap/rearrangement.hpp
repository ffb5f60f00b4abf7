#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fraclap/fractional_operator.hpp"
#include "fraclap/rng.hpp"

namespace fraclap {

// Per-cell density with values in [0,1]. The ascent only ever visits
// bang-bang densities (0/1 entries, exactly k ones): those are the extreme
// points of the discrete rearrangement class.
struct Density {
  std::vector<double> values;
  int k = 0;            // number of unit cells when bang-bang
  double mass = 0.0;    // h * sum(values)
  bool bang_bang = false;
  bool selection_tie = false;  // k-th and (k+1)-th ranked u values coincide

  Vector as_vector() const {
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
      v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
  }

  // Indices of selected cells, ascending. Only meaningful when bang-bang.
  std::vector<int> selected() const {
    std::vector<int> sel;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] == 1.0) sel.push_back(static_cast<int>(i));
    return sel;
  }
};

inline Density make_bangbang(const std::vector<int>& selected, int n, double h) {
  Density d;
  d.values.assign(static_cast<std::size_t>(n), 0.0);
  for (int i : selected) d.values[static_cast<std::size_t>(i)] = 1.0;
  d.k = static_cast<int>(selected.size());
  d.mass = static_cast<double>(d.k) * h;
  d.bang_bang = true;
  return d;
}

// Discrete ties are detected relative to the field scale; exact plateaus have
// measure zero in the continuum but do occur on symmetric grids.
inline double tie_tolerance(const Vector& u) {
  return 1e-12 * std::max(1.0, u.lpNorm<Eigen::Infinity>());
}

struct ThresholdReport {
  double alpha = -std::numeric_limits<double>::infinity();  // max u over f=0
  double gamma = std::numeric_limits<double>::infinity();   // min u over f=1
  double alpha_mid = 0.0;  // canonical level (alpha+gamma)/2
  bool separated = false;  // gamma >= alpha - tie tolerance
  int tie_cells = 0;       // cells within tie tolerance of the cut value
};

// Linear maximization oracle: the bang-bang density on the k cells with
// largest u, ties broken by ascending cell index. Maximizes h * sum f_i u_i
// over all densities with entries in [0,1] and sum f_i = k.
inline Density linmax(const Vector& u, int k, double h) {
  const int n = static_cast<int>(u.size());
  if (k < 1 || k > n) throw std::invalid_argument("linmax: k out of range");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   [&u](int a, int b) {
                     if (u[a] != u[b]) return u[a] > u[b];
                     return a < b;
                   });
  std::vector<int> sel(order.begin(), order.begin() + k);
  std::sort(sel.begin(), sel.end());
  Density d = make_bangbang(sel, n, h);
  if (k < n) {
    const double tol = tie_tolerance(u);
    double kth = std::numeric_limits<double>::infinity();
    for (int i : sel) kth = std::min(kth, u[i]);
    double next = -std::numeric_limits<double>::infinity();
    std::vector<char> in_sel(static_cast<std::size_t>(n), 0);
    for (int i : sel) in_sel[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < n; ++i)
      if (!in_sel[static_cast<std::size_t>(i)]) next = std::max(next, u[i]);
    d.selection_tie = (kth - next) <= tol;
  }
  return d;
}

// Level thresholds of a bang-bang density against its field: alpha is the
// essential-sup analogue over unselected cells, gamma the essential-inf over
// selected ones. Maximizers must have gamma >= alpha.
inline ThresholdReport threshold(const Vector& u, const Density& f) {
  if (static_cast<int>(f.values.size()) != static_cast<int>(u.size()))
    throw std::invalid_argument("threshold: dimension mismatch");
  if (!f.bang_bang)
    throw std::invalid_argument("threshold: density is not bang-bang");
  ThresholdReport rep;
  for (int i = 0; i < static_cast<int>(u.size()); ++i) {
    if (f.values[static_cast<std::size_t>(i)] == 1.0)
      rep.gamma = std::min(rep.gamma, u[i]);
    else
      rep.alpha = std::max(rep.alpha, u[i]);
  }
  rep.alpha_mid = 0.5 * (rep.alpha + rep.gamma);
  const double tol = tie_tolerance(u);
  rep.separated = rep.gamma >= rep.alpha - tol;
  if (std::isfinite(rep.alpha) && rep.gamma - rep.alpha <= tol) {
    const double cut = 0.5 * (rep.alpha + rep.gamma);
    for (int i = 0; i < static_cast<int>(u.size()); ++i)
      if (std::abs(u[i] - cut) <= tol) ++rep.tie_cells;
  }
  return rep;
}

// Characteristic density of the strict superlevel set {u > level}.
inline Density indicator_above(const Vector& u, double level, double h) {
  std::vector<int> sel;
  for (int i = 0; i < static_cast<int>(u.size()); ++i)
    if (u[i] > level) sel.push_back(i);
  return make_bangbang(sel, static_cast<int>(u.size()), h);
}

// Uniformly random k-subset (partial Fisher-Yates); same seed, same subset.
inline Density random_bangbang(int n, int k, std::uint64_t seed, double h) {
  if (k < 1 || k > n)
    throw std::invalid_argument("random_bangbang: k out of range");
  SeededRng rng(seed);
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.next_below(
                           static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> sel(pool.begin(), pool.begin() + k);
  std::sort(sel.begin(), sel.end());
  return make_bangbang(sel, n, h);
}

}  // namespace fraclap
