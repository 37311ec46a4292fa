#include <gtest/gtest.h>

#include <cmath>

#include "aa/aa1_stabilized.hpp"
#include "aa/solve.hpp"

namespace aa {
namespace {

Vector v2(double a, double b) {
  Vector out(2);
  out << a, b;
  return out;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

FixedPointProblem half_map() {
  FixedPointProblem p;
  p.dim = 1;
  p.map = [](const Vector& x) { return Vector(x / 2); };
  p.regime = Regime::contractive(0.5, "l2");
  return p;
}

/// f(x) = M x + c with ||M||_2 < 1.
FixedPointProblem affine_problem(SeededRng& rng, Eigen::Index n, double norm) {
  Matrix m = gaussian(rng, n, n);
  m *= norm / spectral_norm(m);
  const Vector c = gaussian_vector(rng, n);
  FixedPointProblem p;
  p.dim = n;
  p.map = [m, c](const Vector& x) { return Vector(m * x + c); };
  p.known_solution = (Matrix::Identity(n, n) - m).partialPivLu().solve(c);
  return p;
}

TEST(PowellTheta, FirstBranch) { EXPECT_EQ(powell_theta(0.8, 0.5), 1.0); }

TEST(PowellTheta, SignOfZeroIsPositive) { EXPECT_DOUBLE_EQ(powell_theta(0.0, 0.5), 0.5); }

TEST(PowellTheta, NegativeEta) { EXPECT_DOUBLE_EQ(powell_theta(-0.25, 0.5), 1.2); }

TEST(PowellTheta, BoundaryIsUndamped) {
  EXPECT_EQ(powell_theta(0.5, 0.5), 1.0);
  EXPECT_EQ(powell_theta(-0.5, 0.5), 1.0);
}

TEST(PowellTheta, RangeAndFloorProperty) {
  SeededRng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double theta_bar = 0.001 + 0.998 * rng.uniform();
    const double eta = 4.0 * rng.uniform() - 2.0;
    const double theta = powell_theta(eta, theta_bar);
    EXPECT_GE(theta, 1.0 - theta_bar - 1e-15);
    EXPECT_LE(theta, 1.0 + theta_bar + 1e-15);
    // The damped eta never comes closer to zero than theta_bar.
    EXPECT_GE(std::abs(1.0 - theta * (1.0 - eta)), theta_bar - 1e-12);
  }
}

TEST(Safeguard, HugeThresholdAccepts) { EXPECT_TRUE(safeguard_check(1.0, 0, 1e6, 1e-6, 2.0)); }

TEST(Safeguard, TinyThresholdRejects) { EXPECT_FALSE(safeguard_check(1.0, 0, 1e-9, 1e-6, 1.0)); }

TEST(Safeguard, DecayWithAcceptedSteps) {
  // Threshold 4^-2 = 0.0625.
  EXPECT_FALSE(safeguard_check(0.07, 3, 1.0, 1.0, 1.0));
  EXPECT_TRUE(safeguard_check(0.0625, 3, 1.0, 1.0, 1.0));
}

TEST(GramSchmidt, EmptyBasisAccepts) {
  AcceleratorState st(2, 5);
  const auto r = st.gram_schmidt_append(v2(3, 4), 0.001);
  ASSERT_FALSE(r.restart);
  EXPECT_EQ(r.s_hat, v2(3, 4));
  EXPECT_DOUBLE_EQ(r.s_hat.norm(), 5.0);
  ASSERT_EQ(st.basis().size(), 1u);
  EXPECT_NEAR(st.basis()[0].norm(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(st.basis_norms()[0], 5.0);
}

TEST(GramSchmidt, ParallelUpdateRestarts) {
  AcceleratorState st(2, 5);
  st.gram_schmidt_append(v2(1, 0), 0.001);
  EXPECT_TRUE(st.gram_schmidt_append(v2(1, 0), 0.001).restart);
}

TEST(GramSchmidt, HandOrthogonalization) {
  AcceleratorState st(2, 5);
  st.gram_schmidt_append(v2(1, 0), 0.5);
  const auto r = st.gram_schmidt_append(v2(1, 1), 0.5);
  ASSERT_FALSE(r.restart);
  EXPECT_NEAR(r.s_hat(0), 0.0, 1e-15);
  EXPECT_NEAR(r.s_hat(1), 1.0, 1e-15);
}

TEST(GramSchmidt, FullMemoryRestarts) {
  AcceleratorState st(4, 2);
  st.gram_schmidt_append(Vector::Unit(4, 0), 0.001);
  st.gram_schmidt_append(Vector::Unit(4, 1), 0.001);
  EXPECT_TRUE(st.gram_schmidt_append(Vector::Unit(4, 2), 0.001).restart);
}

TEST(GramSchmidt, ZeroUpdateThrows) {
  AcceleratorState st(2, 5);
  EXPECT_THROW(st.gram_schmidt_append(Vector::Zero(2), 0.001), ZeroUpdate);
}

TEST(GramSchmidt, BasisStaysOrthonormal) {
  SeededRng rng(3);
  AcceleratorState st(10, 8);
  for (int i = 0; i < 8; ++i) st.gram_schmidt_append(gaussian_vector(rng, 10), 0.001);
  ASSERT_EQ(st.basis().size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_NEAR(st.basis()[i].dot(st.basis()[j]), i == j ? 1.0 : 0.0, 1e-8);
    }
  }
}

TEST(RestartWith, ClearsAndSeeds) {
  AcceleratorState st(2, 5);
  st.gram_schmidt_append(v2(1, 0), 0.001);
  st.update_H(v2(1, 0), v2(0.5, 0), v2(1, 0), v2(-1, 0), 0.01);
  EXPECT_EQ(st.memory_count(), 1);
  const Vector s_hat = st.restart_with(v2(0, 2));
  EXPECT_EQ(s_hat, v2(0, 2));
  EXPECT_EQ(st.memory_count(), 0);
  EXPECT_EQ(st.basis().size(), 1u);
  EXPECT_EQ(st.apply_H(v2(1, 1)), v2(1, 1));
}

TEST(ApplyH, EmptyIsIdentity) {
  AcceleratorState st(3, 5);
  const Vector w = Vector::LinSpaced(3, 1, 3);
  EXPECT_EQ(st.apply_H(w), w);
  EXPECT_EQ(st.apply_H_transpose(w), w);
}

TEST(ApplyH, SingleFactor) {
  // H = I with s = (0,1), y = (-1,1): gamma = 1, theta = 1, so
  // u = (s - y)/(s'y) = (1,0) and v = s = (0,1).
  AcceleratorState st(2, 5);
  const Vector s = v2(0, 1);
  st.gram_schmidt_append(s, 0.001);
  st.update_H(s, v2(-1, 1), s, v2(0, 0), 0.01);
  ASSERT_EQ(st.factors().size(), 1u);
  EXPECT_EQ(st.factors()[0].u, v2(1, 0));
  EXPECT_EQ(st.factors()[0].v, v2(0, 1));
  EXPECT_EQ(st.apply_H(v2(0, 2)), v2(2, 2));
  EXPECT_EQ(st.apply_H_transpose(v2(2, 0)), v2(2, 2));
}

TEST(UpdateH, ScalarAlgebra) {
  AcceleratorState st(1, 5);
  st.gram_schmidt_append(scalar(1), 0.01);
  const HUpdate up = st.update_H(scalar(1), scalar(0.5), scalar(1), scalar(-1), 0.01);
  EXPECT_DOUBLE_EQ(up.gamma, 0.5);
  EXPECT_EQ(up.theta, 1.0);
  EXPECT_DOUBLE_EQ(up.y_tilde(0), 0.5);
  EXPECT_DOUBLE_EQ(st.apply_H(scalar(1))(0), 2.0);
  EXPECT_DOUBLE_EQ(st.apply_H(up.y_tilde)(0), 1.0);
}

TEST(UpdateH, SecantAlreadySatisfied) {
  AcceleratorState st(2, 5);
  const Vector s = v2(1, 2);
  st.gram_schmidt_append(s, 0.001);
  st.update_H(s, s, s, v2(0, 0), 0.01);
  EXPECT_EQ(st.factors()[0].u, Vector::Zero(2));
}

TEST(UpdateH, InverseSecantProperty) {
  SeededRng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    AcceleratorState st(6, 4);
    for (int i = 0; i < 4; ++i) {
      const Vector s = gaussian_vector(rng, 6);
      const Vector y = gaussian_vector(rng, 6);
      const auto gs = st.gram_schmidt_append(s, 0.001);
      if (gs.restart) break;
      const HUpdate up = st.update_H(s, y, gs.s_hat, gaussian_vector(rng, 6), 0.01);
      EXPECT_LE((st.apply_H(up.y_tilde) - s).norm(), 1e-10 * (1 + s.norm()));
    }
  }
}

TEST(UpdateH, DebugJacobianIsInverse) {
  SeededRng rng(9);
  AcceleratorState st(5, 4, true);
  for (int i = 0; i < 4; ++i) {
    const Vector s = gaussian_vector(rng, 5);
    const auto gs = st.gram_schmidt_append(s, 0.001);
    ASSERT_FALSE(gs.restart);
    st.update_H(s, gaussian_vector(rng, 5), gs.s_hat, gaussian_vector(rng, 5), 0.01);
    const Matrix hb = st.materialize_H() * st.jacobian();
    EXPECT_LE((hb - Matrix::Identity(5, 5)).norm(), 1e-8);
  }
}

TEST(UpdateH, DegenerateDenominatorLeavesStateAlone) {
  // theta_bar -> 0 and y orthogonal to s after H = I: s_hat'y~ = 0.
  AcceleratorState st(2, 5);
  const Vector s = v2(1, 0);
  st.gram_schmidt_append(s, 0.001);
  auto no_damping = [](double, double) { return 1.0; };
  EXPECT_THROW(st.update_H(s, v2(0, 1), s, v2(0, 0), 0.01, no_damping), DegenerateDenominator);
  EXPECT_EQ(st.memory_count(), 0);
}

TEST(UpdateH, JacobianNeedsDebugMode) {
  AcceleratorState st(2, 5);
  EXPECT_THROW(st.jacobian(), std::logic_error);
}

TEST(RankOneJacobian, MatchesClosedForm) {
  SeededRng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix s = gaussian(rng, 6, 3);
    const Matrix y = gaussian(rng, 6, 3);
    const Matrix closed =
        Matrix::Identity(6, 6) + (y - s) * (s.transpose() * s).inverse() * s.transpose();
    const Matrix b = rank_one_jacobian(s, y, 0.0);
    EXPECT_LE((b - closed).cwiseAbs().maxCoeff(), 1e-10);
    // Multi-secant condition B S = Y.
    EXPECT_LE((b * s - y).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RankOneJacobian, DampedKeepsDeterminantBound) {
  SeededRng rng(12);
  const double theta_bar = 0.1;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix s = gaussian(rng, 4, 3);
    // Nearly singular secant pairs.
    const Matrix y = s * 1e-3 + 1e-3 * gaussian(rng, 4, 3);
    const double det = std::abs(rank_one_jacobian(s, y, theta_bar).determinant());
    EXPECT_GE(det, std::pow(theta_bar, 3) * (1 - 1e-8));
  }
}

TEST(Aa1s, FirstIterationSolvesScalarLinearMap) {
  SolveConfig c;
  c.alpha = 1.0;
  StabilizedAnderson acc(1, Aa1sParams::from(c));
  FixedPointProblem p = half_map();
  ResidualEvaluator eval(p);
  const Vector x0 = scalar(1);
  const Step first = acc.step(0, x0, eval.residual(x0), eval);
  EXPECT_DOUBLE_EQ(first.x(0), 0.5);
  const StepOutcome out = acc.iterate(first.x, eval.residual(first.x), eval);
  EXPECT_EQ(out.step_type, StepType::aa);
  EXPECT_DOUBLE_EQ(out.gamma, 0.5);
  EXPECT_EQ(out.theta_used, 1.0);
  EXPECT_DOUBLE_EQ(acc.state().apply_H(scalar(1))(0), 2.0);
  EXPECT_EQ(out.next_x(0), 0.0);
}

TEST(Aa1s, RunConvergesInTwoIterationsOnScalarMap) {
  SolveConfig c;
  c.alpha = 1.0;
  const SolveResult r = run(half_map(), scalar(1), c, Method::aa1s);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations(), 2);
  EXPECT_EQ(r.final_x(0), 0.0);
}

TEST(Aa1s, SafeguardFailureFallsBackToKm) {
  SolveConfig c;
  c.safeguard_d = 1e-12;
  StabilizedAnderson acc(1, Aa1sParams::from(c));
  FixedPointProblem p = half_map();
  ResidualEvaluator eval(p);
  const Vector x0 = scalar(1);
  const Step first = acc.step(0, x0, eval.residual(x0), eval);
  const Vector g1 = eval.residual(first.x);
  const StepOutcome out = acc.iterate(first.x, g1, eval);
  EXPECT_EQ(out.step_type, StepType::km);
  EXPECT_DOUBLE_EQ(out.next_x(0), first.x(0) - c.alpha * g1(0));
  EXPECT_EQ(acc.accepted_steps(), 0);
  // The H update still happened.
  EXPECT_EQ(acc.state().memory_count(), 1);
}

TEST(Aa1s, FEvaluationBudget) {
  SeededRng rng(4);
  FixedPointProblem p = affine_problem(rng, 20, 0.95);
  for (double d : {1e6, 1e-3}) {
    SolveConfig c;
    c.safeguard_d = d;
    c.k_max = 200;
    c.tol = 1e-12;
    const SolveResult r = run(p, gaussian_vector(rng, 20), c, Method::aa1s);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      const long cost = r.trace[i].f_evals_cum - r.trace[i - 1].f_evals_cum;
      const bool prev_accepted = i >= 2 && r.trace[i - 1].step_type == StepType::aa;
      if (i >= 2 && prev_accepted) {
        EXPECT_EQ(cost, 1) << "k=" << i;
      }
      EXPECT_LE(cost, 2) << "k=" << i;
    }
  }
}

TEST(Aa1s, RestartsWhenMemoryFills) {
  SeededRng rng(5);
  FixedPointProblem p = affine_problem(rng, 30, 0.99);
  SolveConfig c;
  c.memory = 2;
  c.tol = 1e-10;
  const SolveResult r = run(p, gaussian_vector(rng, 30), c, Method::aa1s);
  EXPECT_GT(r.restarts, 0);
  EXPECT_TRUE(r.converged);
}

TEST(Aa1s, ConvergesOnAffineContraction) {
  SeededRng rng(6);
  for (int t = 0; t < 5; ++t) {
    FixedPointProblem p = affine_problem(rng, 40, 0.99);
    SolveConfig c;
    c.tol = 1e-10;
    const SolveResult r = run(p, gaussian_vector(rng, 40), c, Method::aa1s);
    EXPECT_TRUE(r.converged);
    EXPECT_LE((r.final_x - *p.known_solution).norm(), 1e-6 * (1 + p.known_solution->norm()));
    SolveConfig km = c;
    const SolveResult base = run(p, gaussian_vector(rng, 40), km, Method::km);
    EXPECT_LT(r.iterations(), base.iterations());
  }
}

TEST(Aa1s, IterateBeforeInitializationThrows) {
  StabilizedAnderson acc(1, Aa1sParams{});
  FixedPointProblem p = half_map();
  ResidualEvaluator eval(p);
  EXPECT_THROW(acc.iterate(scalar(1), scalar(1), eval), std::logic_error);
}

TEST(Aa1s, ParamsFromConfig) {
  SolveConfig c;
  c.theta_bar = 0.2;
  c.tau = 0.3;
  c.memory = 7;
  c.debug_invariants = true;
  const Aa1sParams p = Aa1sParams::from(c);
  EXPECT_EQ(p.theta_bar, 0.2);
  EXPECT_EQ(p.tau, 0.3);
  EXPECT_EQ(p.memory, 7);
  EXPECT_TRUE(p.debug);
}

}  // namespace
}  // namespace aa
