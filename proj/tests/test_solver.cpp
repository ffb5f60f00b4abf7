#include "fraclap/linear_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <iostream>

#include "fraclap/grid.hpp"
#include "fraclap/rng.hpp"

using namespace fraclap;

namespace {

std::vector<Grid> grid_pool() {
  return {build_grid({{-1.0, 1.0}}, 0.125),
          build_grid({{0.0, 1.0}}, 1.0 / 40.0),
          build_grid({{0.0, 1.0}, {2.0, 3.0}}, 0.125),
          build_grid({{-2.0, -1.0}, {0.0, 0.5}}, 0.25)};
}

Vector random_field(SeededRng& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_in(lo, hi);
  return v;
}

}  // namespace

TEST(SolveDirect, ZeroLoad) {
  const Operator op = assemble(build_grid({{-1.0, 1.0}}, 0.25), 0.5);
  const SolveReport rep = solve_direct(op, Vector::Zero(op.n()));
  EXPECT_EQ(rep.u.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(rep.residual_inf, 0.0);
  EXPECT_EQ(rep.iterations, 0);
}

TEST(SolveDirect, SingleCellInverseOfRowConstant) {
  const Operator op = assemble(build_grid({{0.0, 1.0}}, 1.0), 0.5);
  Vector f(1);
  f << 1.0;
  EXPECT_DOUBLE_EQ(solve_direct(op, f).u[0], 0.25);
}

TEST(SolveDirect, TorsionMidpointValue) {
  const Grid g = build_grid({{-1.0, 1.0}}, 2.0 / 512.0);
  const Operator op = assemble(g, 0.5);
  const SolveReport rep = solve_direct(op, Vector::Ones(g.n));
  double u_mid = 0.0;
  for (int i = 0; i < g.n; ++i)
    if (std::abs(g.cells[i]) < g.h) u_mid = std::max(u_mid, rep.u[i]);
  EXPECT_NEAR(u_mid, std::sin(M_PI * 0.5) / M_PI, 0.01);
}

TEST(SolveDirect, ResidualContract) {
  SeededRng rng(51);
  for (const Grid& g : grid_pool())
    for (double s : {0.25, 0.5, 0.75}) {
      const Operator op = assemble(g, s);
      const Vector f = random_field(rng, g.n, -3.0, 3.0);
      const SolveReport rep = solve_direct(op, f);
      EXPECT_LE(rep.residual_inf,
                1e-10 * (1.0 + f.lpNorm<Eigen::Infinity>()));
    }
}

TEST(SolveDirect, RejectsNonSpdMatrix) {
  Operator op = assemble(build_grid({{0.0, 1.0}}, 0.25), 0.5);
  op.matrix(1, 1) = -op.matrix(1, 1);  // violated invariant, not a user error
  EXPECT_THROW(DirectSolver{op}, std::runtime_error);
}

TEST(SolveIterative, ZeroLoadConvergesInZeroIterations) {
  const Operator op = assemble(build_grid({{-1.0, 1.0}}, 0.25), 0.5);
  const SolveReport rep = solve_iterative(op, Vector::Zero(op.n()), 1e-10, 100);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(rep.u.lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(SolveIterative, ConjugateDirectionIterationBound) {
  SeededRng rng(52);
  for (const Grid& g : grid_pool()) {
    const Operator op = assemble(g, 0.5);
    const Vector f = random_field(rng, g.n, -1.0, 1.0);
    const SolveReport rep = solve_iterative(op, f, 1e-10, g.n + 5);
    EXPECT_LE(rep.iterations, g.n + 5);
    EXPECT_LE((op.matrix * rep.u - f).norm(), 10.0 * 1e-10 * f.norm());
  }
}

TEST(SolveIterative, AgreesWithDirect) {
  SeededRng rng(53);
  const Grid g = build_grid({{-1.0, 1.0}}, 2.0 / 64.0);
  const Operator op = assemble(g, 0.5);
  const Vector f = random_field(rng, g.n, -1.0, 1.0);
  const Vector ud = solve_direct(op, f).u;
  const Vector ui = solve_iterative(op, f, 1e-10, g.n + 5).u;
  EXPECT_LE((ud - ui).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(SolveIterative, ThrowsWhenBudgetExhausted) {
  const Grid g = build_grid({{-1.0, 1.0}}, 0.125);
  const Operator op = assemble(g, 0.5);
  SeededRng rng(54);
  const Vector f = random_field(rng, g.n, -1.0, 1.0);
  EXPECT_THROW(solve_iterative(op, f, 1e-15, 1), std::runtime_error);
  EXPECT_THROW(solve_iterative(op, f, 0.0, 10), std::invalid_argument);
  EXPECT_THROW(solve_iterative(op, f, 1e-10, 0), std::invalid_argument);
}

// h f'u = h u'Au, the discrete weak-solution identity; exact linear algebra
// up to solver residual.
TEST(Solver, WeakSolutionIdentity) {
  SeededRng rng(55);
  const auto pool = grid_pool();
  for (int t = 0; t < 100; ++t) {
    const Grid& g = pool[t % pool.size()];
    const double s = 0.2 + 0.15 * (t % 5);
    const Operator op = assemble(g, s);
    const Vector f = random_field(rng, g.n, -1.0, 1.0);
    const SolveReport rep = solve_direct(op, f);
    const double phi = g.h * f.dot(rep.u);
    const double e = energy(op, rep.u);
    EXPECT_LE(std::abs(phi - e), 1e-10 * std::max(1.0, std::abs(phi)));
  }
}

TEST(Solver, DiscreteMaximumPrinciple) {
  SeededRng rng(56);
  const auto pool = grid_pool();
  for (int t = 0; t < 100; ++t) {
    const Grid& g = pool[t % pool.size()];
    const Operator op = assemble(g, 0.25 + 0.5 * rng.next_unit());
    const Vector f = random_field(rng, g.n, 0.0, 1.0);
    EXPECT_GE(solve_direct(op, f).u.minCoeff(), -1e-12);
  }
}

TEST(Solver, SolutionMonotoneInLoad) {
  SeededRng rng(57);
  const Grid g = build_grid({{-1.0, 1.0}}, 0.125);
  const Operator op = assemble(g, 0.6);
  const DirectSolver solver(op);
  for (int t = 0; t < 50; ++t) {
    const Vector f = random_field(rng, g.n, -1.0, 1.0);
    Vector gload = f;
    for (int i = 0; i < g.n; ++i) gload[i] += rng.next_unit();
    const Vector uf = solver.solve(f).u;
    const Vector ug = solver.solve(gload).u;
    EXPECT_LE((uf - ug).maxCoeff(), 1e-12);
  }
}

// Discrete Poincare check with the closed-form geometric constant; the 1.1
// slack absorbs quadrature error between the discrete form and the continuum
// statement.
TEST(Solver, PoincareInequalityWithSlack) {
  SeededRng rng(58);
  double worst = 0.0;
  for (const Grid& g : grid_pool())
    for (double s : {0.25, 0.5, 0.75}) {
      const double c = poincare_constant(g, s);
      const Operator op = assemble(g, s);
      for (int t = 0; t < 200; ++t) {
        const Vector u = random_field(rng, g.n, -1.0, 1.0);
        worst = std::max(worst, g.h * u.squaredNorm() / (c * energy(op, u)));
      }
    }
  if (worst > 1.0)
    std::cout << "[ note ] Poincare ratio above 1 within slack: " << worst
              << "\n";
  ASSERT_LE(worst, 1.1) << "hard Poincare violation, worst ratio " << worst;
}
