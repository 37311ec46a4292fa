#include "aa/invariants.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "aa/baselines.hpp"
#include "aa/solve.hpp"

namespace aa {

double norm_bound(double theta_bar, double tau, int memory) {
  return 3.0 * std::pow((1.0 + theta_bar + tau) / tau, memory) - 2.0;
}

double log_condition_bound(double theta_bar, double tau, int memory, Eigen::Index n) {
  return static_cast<double>(n) * std::log(norm_bound(theta_bar, tau, memory)) -
         memory * std::log(theta_bar);
}

namespace {

double log_abs_det(const Matrix& m) {
  Eigen::PartialPivLU<Matrix> lu(m);
  return lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
}

double log_condition(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return std::log(sv(0)) - std::log(sv(sv.size() - 1));
}

}  // namespace

Aa1sAudit audit_aa1s(const FixedPointProblem& problem, const Vector& x0,
                     SolveConfig config, ThetaRule theta_rule) {
  config.debug_invariants = true;
  config.validate(problem.regime, Method::aa1s);
  Aa1sParams params = Aa1sParams::from(config);
  params.theta_rule = theta_rule;
  StabilizedAnderson acc(problem.dim, params);

  Aa1sAudit audit;
  audit.det_margin = std::numeric_limits<double>::infinity();
  audit.norm_margin = std::numeric_limits<double>::infinity();
  audit.log_cond_margin = std::numeric_limits<double>::infinity();
  audit.denominator_floor_margin = std::numeric_limits<double>::infinity();
  const double theta_bar = config.theta_bar;
  const double b_bound = norm_bound(theta_bar, config.tau, config.memory);
  const double cond_bound =
      log_condition_bound(theta_bar, config.tau, config.memory, problem.dim);
  const Matrix eye = Matrix::Identity(problem.dim, problem.dim);

  auto observe = [&](const IterationView& view) {
    if (view.k < 1) return;
    ++audit.iterations;
    const AcceleratorState& state = acc.state();
    const Matrix& b = state.jacobian();
    const Matrix h = state.materialize_H();
    const int m_k = state.memory_count();

    audit.det_margin = std::min(
        audit.det_margin,
        log_abs_det(b) - m_k * std::log(theta_bar) - std::log1p(-1e-8));
    audit.norm_margin = std::min(audit.norm_margin, b_bound - spectral_norm(b));
    audit.inverse_error = std::max(audit.inverse_error, spectral_norm(h * b - eye));
    audit.log_cond_margin = std::min(audit.log_cond_margin, cond_bound - log_condition(h));

    const StepOutcome& out = acc.last_outcome();
    if (view.k >= 2 && !out.degenerate && out.s_hat_sq > 0.0) {
      const double factor = 1.0 - out.theta_used * (1.0 - out.gamma);
      audit.denominator_error =
          std::max(audit.denominator_error,
                   std::abs(out.denominator - out.s_hat_sq * factor) / out.s_hat_sq);
      audit.denominator_floor_margin =
          std::min(audit.denominator_floor_margin, std::abs(factor) - theta_bar);
      audit.theta_min = std::min(audit.theta_min, out.theta_used);
      audit.theta_max = std::max(audit.theta_max, out.theta_used);
    }
  };
  audit.result = run(problem, x0, config, acc, observe);
  audit.restarts = acc.restarts();
  audit.degenerate = acc.fallbacks();
  return audit;
}

KmDecreaseAudit audit_km_decrease(const FixedPointProblem& problem, const Vector& x0,
                                  const SolveConfig& config, Method method, double tol) {
  if (!problem.known_solution) {
    throw std::invalid_argument("audit_km_decrease: problem has no known solution");
  }
  const Vector& y = *problem.known_solution;
  const double alpha = method == Method::aa1s ? config.alpha : config.km_alpha;
  KmDecreaseAudit audit;
  Vector prev_x;
  Vector prev_g;
  auto observe = [&](const IterationView& view) {
    if (view.k >= 1 && view.step_type == StepType::km) {
      ++audit.km_iterations;
      const double excess = (view.x - y).squaredNorm() - (prev_x - y).squaredNorm() +
                            alpha * (1.0 - alpha) * prev_g.squaredNorm();
      audit.worst_excess = std::max(audit.worst_excess, excess);
      if (excess > tol) ++audit.violations;
    }
    prev_x = view.x;
    prev_g = view.g;
  };
  audit.result = run(problem, x0, config, method, observe);
  return audit;
}

namespace {

/// A pair at a random separation between 1e-3 and 10 times `scale`.
std::pair<Vector, Vector> random_pair(SeededRng& rng, Eigen::Index n, double scale) {
  Vector x = scale * gaussian_vector(rng, n);
  const double spread = scale * std::pow(10.0, -3.0 + 4.0 * rng.uniform());
  Vector z = x + random_vector_with_norm(rng, n, spread);
  return {std::move(x), std::move(z)};
}

}  // namespace

double max_expansion(const FixedPointProblem& problem, SeededRng& rng, int probes,
                     double scale) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < probes; ++i) {
    auto [x, z] = random_pair(rng, problem.dim, scale);
    const double grow = (problem.map(x) - problem.map(z)).norm() - (x - z).norm();
    worst = std::max(worst, grow);
  }
  return worst;
}

double max_bellman_excess(const MdpInstance& mdp, SeededRng& rng, int probes) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < probes; ++i) {
    auto [v, w] = random_pair(rng, mdp.states, 10.0);
    const double lhs = (bellman_op(mdp, v) - bellman_op(mdp, w)).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, lhs - mdp.gamma * (v - w).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

double hb_spectral_radius(const HbInstance& inst) {
  Eigen::EigenSolver<Matrix> eig(hb_iteration_matrix(inst), false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double undamped_theta(double, double) { return 1.0; }

// ---------------------------------------------------------------------------
// Suites.

namespace {

class Report {
 public:
  void fail(const std::string& what) {
    passed_ = false;
    if (!out_.str().empty()) out_ << "; ";
    out_ << what;
  }
  template <typename... Args>
  void note(Args&&... args) {
    if (!out_.str().empty()) out_ << "; ";
    (out_ << ... << args);
  }
  CheckResult done() const { return {passed_, out_.str()}; }

 private:
  bool passed_ = true;
  std::ostringstream out_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

// NNLS n = 30 runs plus a slow rotation, on which undamped updates drive
// det B_k below theta_bar.
std::vector<Aa1sAudit> aa1s_audits(const VerifyOptions& opts) {
  std::vector<Aa1sAudit> out;
  SolveConfig config;
  config.record_timing = false;
  for (int i = 0; i < 10; ++i) {
    SeededRng rng(opts.seed + i);
    auto gp = generate(Family::pgd_nnls, rng, {{"m", 15}, {"n", 30}});
    out.push_back(audit_aa1s(gp.problem, gp.x0, config, opts.theta_rule));
  }
  FixedPointProblem rot;
  rot.dim = 4;
  rot.name = "rotation";
  rot.map = [](const Vector& x) {
    Vector out(4);
    const double a = 0.05, b = 0.08;
    out << std::cos(a) * x(0) - std::sin(a) * x(1), std::sin(a) * x(0) + std::cos(a) * x(1),
        std::cos(b) * x(2) - std::sin(b) * x(3), std::sin(b) * x(2) + std::cos(b) * x(3);
    return out;
  };
  SeededRng rng(opts.seed);
  out.push_back(audit_aa1s(rot, random_vector_with_norm(rng, 4, 1.0), config,
                           opts.theta_rule));
  return out;
}

CheckResult suite_lu_round_trip(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  double worst = 0.0;
  int tested = 0;
  while (tested < 100) {
    const Matrix m = gaussian(rng, 10, 10);
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) / sv(9) >= 1e6) continue;
    const Vector b = gaussian_vector(rng, 10);
    worst = std::max(worst, (m * lu_solve(m, b) - b).norm() / (1.0 + b.norm()));
    ++tested;
  }
  if (worst > 1e-8) r.fail("residual " + fmt(worst));
  bool threw = false;
  try {
    Matrix singular = Matrix::Ones(3, 3);
    lu_solve(singular, Vector::Ones(3));
  } catch (const SingularMatrix&) {
    threw = true;
  }
  if (!threw) r.fail("singular matrix not detected");
  r.note("worst scaled residual ", fmt(worst));
  return r.done();
}

CheckResult suite_equilibrate(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Matrix a = gaussian(rng, 8, 12);
    const Vector b = gaussian_vector(rng, 8);
    const Equilibration eq = equilibrate(a, b);
    const Matrix left = eq.row_scale.cwiseInverse().asDiagonal() * a;
    worst = std::max(worst, (left.cwiseAbs().rowwise().sum().array() - 1.0).abs().maxCoeff());
    worst = std::max(worst,
                     (eq.scaled.cwiseAbs().colwise().sum().array() - 1.0).abs().maxCoeff());
  }
  if (worst > 1e-12) r.fail("unit sums off by " + fmt(worst));
  bool threw = false;
  try {
    Matrix a = Matrix::Ones(3, 3);
    a.row(1).setZero();
    equilibrate(a, Vector::Ones(3));
  } catch (const ZeroRow& e) {
    threw = e.row == 1;
  }
  if (!threw) r.fail("zero row not reported");
  r.note("max deviation ", fmt(worst));
  return r.done();
}

CheckResult suite_rng(const VerifyOptions& opts) {
  Report r;
  SeededRng a(opts.seed), b(opts.seed), c(opts.seed + 1);
  int differ = 0;
  for (int i = 0; i < opts.probes; ++i) {
    const auto va = a.next_u64();
    if (va != b.next_u64()) {
      r.fail("streams diverge at draw " + std::to_string(i));
      break;
    }
    differ += va != c.next_u64();
  }
  SeededRng n1(opts.seed), n2(opts.seed);
  for (int i = 0; i < opts.probes; ++i) {
    if (n1.normal() != n2.normal()) {
      r.fail("normal streams diverge");
      break;
    }
  }
  if (differ == 0) r.fail("different seeds gave the same stream");
  return r.done();
}

CheckResult suite_initial_residual(const VerifyOptions& opts) {
  Report r;
  for (Family f : all_families()) {
    SeededRng rng(opts.seed);
    auto gp = generate(f, rng);
    SolveConfig config;
    config.k_max = 3;
    config.record_timing = false;
    const auto res = run(gp.problem, gp.x0, config, Method::km);
    if (res.trace.front().relative_residual != 1.0) {
      r.fail(std::string(to_string(f)) + " starts at " + fmt(res.trace.front().relative_residual));
    }
  }
  return r.done();
}

CheckResult suite_km_decrease(const VerifyOptions& opts) {
  Report r;
  SolveConfig config;
  config.km_alpha = 0.5;
  config.k_max = 300;
  config.tol = 1e-12;
  config.record_timing = false;
  const std::pair<Family, FamilyParams> cases[] = {
      {Family::scs_lp, {{"m", 15}, {"n", 20}}},
      {Family::scs_socp, {{"m", 15}, {"n", 20}}},
      {Family::ap_lp, {{"m", 10}, {"n", 30}, {"density", 0.3}}},
  };
  for (const auto& [family, params] : cases) {
    SeededRng rng(opts.seed);
    auto gp = generate(family, rng, params);
    const auto audit = audit_km_decrease(gp.problem, gp.x0, config, Method::km);
    if (audit.violations > 0) {
      r.fail(std::string(to_string(family)) + ": " + std::to_string(audit.violations) +
             " violations, worst " + fmt(audit.worst_excess));
    }
  }
  return r.done();
}

CheckResult suite_nonexpansive(const VerifyOptions& opts) {
  Report r;
  for (Family f : nonexpansive_families()) {
    SeededRng rng(opts.seed);
    auto gp = generate(f, rng);
    const double worst = max_expansion(gp.problem, rng, opts.probes);
    if (worst > 1e-9) r.fail(std::string(to_string(f)) + " expands by " + fmt(worst));
  }
  return r.done();
}

template <typename Pred>
CheckResult over_audits(const VerifyOptions& opts, Pred pred) {
  Report r;
  const auto audits = aa1s_audits(opts);
  for (std::size_t i = 0; i < audits.size(); ++i) {
    std::string why;
    if (!pred(audits[i], why)) r.fail("run " + std::to_string(i) + ": " + why);
  }
  return r.done();
}

CheckResult suite_determinant(const VerifyOptions& opts) {
  return over_audits(opts, [](const Aa1sAudit& a, std::string& why) {
    why = "log-det margin " + fmt(a.det_margin);
    return a.det_margin >= 0.0;
  });
}

CheckResult suite_norm(const VerifyOptions& opts) {
  return over_audits(opts, [](const Aa1sAudit& a, std::string& why) {
    why = "norm margin " + fmt(a.norm_margin);
    return a.norm_margin >= 0.0;
  });
}

CheckResult suite_inverse(const VerifyOptions& opts) {
  return over_audits(opts, [](const Aa1sAudit& a, std::string& why) {
    why = "||HB - I|| = " + fmt(a.inverse_error);
    return a.inverse_error <= 1e-6;
  });
}

CheckResult suite_condition(const VerifyOptions& opts) {
  return over_audits(opts, [](const Aa1sAudit& a, std::string& why) {
    why = "log-cond margin " + fmt(a.log_cond_margin);
    return a.log_cond_margin >= 0.0;
  });
}

CheckResult suite_denominator(const VerifyOptions& opts) {
  return over_audits(opts, [](const Aa1sAudit& a, std::string& why) {
    why = "identity error " + fmt(a.denominator_error) + ", floor margin " +
          fmt(a.denominator_floor_margin);
    return a.denominator_error <= 1e-8 && a.denominator_floor_margin >= -1e-8;
  });
}

CheckResult suite_theta(const VerifyOptions& opts) {
  const double theta_bar = SolveConfig{}.theta_bar;
  return over_audits(opts, [&](const Aa1sAudit& a, std::string& why) {
    why = "theta in [" + fmt(a.theta_min) + ", " + fmt(a.theta_max) + "]";
    return a.theta_min >= 1.0 - theta_bar - 1e-15 && a.theta_max <= 1.0 + theta_bar + 1e-15;
  });
}

CheckResult suite_closed_form(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Matrix s = gaussian(rng, 6, 3);
    const Matrix y = gaussian(rng, 6, 3);
    const Matrix closed = Matrix::Identity(6, 6) +
                          (y - s) * (s.transpose() * s).inverse() * s.transpose();
    worst = std::max(worst, (rank_one_jacobian(s, y, 0.0) - closed).cwiseAbs().maxCoeff());
  }
  if (worst > 1e-10) r.fail("max deviation " + fmt(worst));
  return r.done();
}

CheckResult suite_weights(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Matrix s = gaussian(rng, 8, 4);
    const Matrix y = gaussian(rng, 8, 4);
    const Vector g = gaussian_vector(rng, 8);
    worst = std::max(worst, std::abs(aa1_weights(s, y, g).alpha.sum() - 1.0));
    worst = std::max(worst, std::abs(aa2_weights(y, g).alpha.sum() - 1.0));
  }
  if (worst > 1e-12) r.fail("weights sum off by " + fmt(worst));
  return r.done();
}

CheckResult suite_aa2_optimality(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 20; ++i) {
    const Matrix y = gaussian(rng, 8, 4);
    const Vector g = gaussian_vector(rng, 8);
    const Vector gamma = aa2_weights(y, g).gamma;
    const double best = (g - y * gamma).norm();
    for (int j = 0; j < 100; ++j) {
      const Vector other = gamma + std::pow(10.0, -4.0 + 4.0 * rng.uniform()) *
                                       gaussian_vector(rng, 4);
      worst = std::max(worst, best - (g - y * other).norm());
    }
  }
  if (worst > 1e-9) r.fail("a random gamma beat the solution by " + fmt(worst));
  return r.done();
}

CheckResult suite_aa1_woodbury(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Matrix m = 0.5 * gaussian(rng, 8, 8) / std::sqrt(8.0);
    const Vector c = gaussian_vector(rng, 8);
    SlidingMemory mem(3);
    for (int j = 0; j < 4; ++j) {
      const Vector x = gaussian_vector(rng, 8);
      mem.push(x, x - (m * x + c));
    }
    const Matrix s = mem.s_matrix();
    const Matrix y = mem.y_matrix();
    const Matrix b = Matrix::Identity(8, 8) +
                     (y - s) * (s.transpose() * s).inverse() * s.transpose();
    const Vector& xk = mem.x(3);
    const Vector expected = xk - b.partialPivLu().solve(mem.g(3));
    const BaselineStep step = baseline_step(mem, Method::aa1);
    worst = std::max(worst, (step.x - expected).norm() / (1.0 + expected.norm()));
  }
  if (worst > 1e-8) r.fail("max deviation " + fmt(worst));
  return r.done();
}

CheckResult suite_bellman(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  const MdpInstance mdp = gen_mdp(rng, 50, 20, 0.9);
  const double worst = max_bellman_excess(mdp, rng, opts.probes);
  if (worst > 1e-12) r.fail("contraction violated by " + fmt(worst));
  return r.done();
}

CheckResult suite_hb(const VerifyOptions& opts) {
  Report r;
  for (int i = 0; i < 3; ++i) {
    for (bool scale : {true, false}) {
      SeededRng rng(opts.seed + i);
      const HbInstance inst = gen_hb_linear(rng, 30, scale);
      const double rho = hb_spectral_radius(inst);
      // Unscaled, lambda_min(A) = mu exactly and T has a double eigenvalue
      // there, which the eigensolver only resolves to about sqrt(eps).
      if (rho > inst.rate_bound() + 1e-6) {
        r.fail("rho " + fmt(rho) + " > bound " + fmt(inst.rate_bound()));
      }
    }
  }
  return r.done();
}

CheckResult suite_projections(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  const ConeSpec mixed{{ConeKind::free, 2}, {ConeKind::zero, 2}, {ConeKind::nonneg, 3},
                       {ConeKind::soc, 4}};
  double worst = 0.0;
  for (int i = 0; i < opts.probes; ++i) {
    const Vector x = 3.0 * gaussian_vector(rng, 11);
    auto check = [&](const Vector& p, const Vector& pp) {
      worst = std::max(worst, (pp - p).lpNorm<Eigen::Infinity>());
    };
    const Vector ps = project_simplex(x);
    check(ps, project_simplex(ps));
    const Vector pc = project_soc(x);
    check(pc, project_soc(pc));
    const Vector pn = project_nonneg(x);
    check(pn, project_nonneg(pn));
    const Vector pm = mixed.project(x);
    check(pm, mixed.project(pm));
  }
  if (worst > 1e-12) r.fail("P(P(x)) differs from P(x) by " + fmt(worst));
  return r.done();
}

CheckResult suite_skew(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  const ConicProgram lp = gen_cone_lp(rng, 10, 15);
  const ConicProgram socp = gen_cone_socp(rng, 10, 15);
  const ApLpInstance ap = gen_lp_sdhe(rng, 10, 20, 0.3);
  for (const Matrix* q : {&lp.q, &socp.q, &ap.q}) {
    if ((*q + q->transpose()).cwiseAbs().maxCoeff() != 0.0) r.fail("Q + Q' is not zero");
  }
  return r.done();
}

/// (x, y, tau, r, s, kappa) from a stacked SCS point and its optimality
/// residuals relative to the data scale.
double scs_solution_error(const ConicProgram& prog, const Vector& w) {
  const Eigen::Index n = prog.a.cols();
  const Eigen::Index m = prog.a.rows();
  const Eigen::Index d = prog.embedded_dim();
  const double tau = w(n + m);
  if (!(tau > 0.0)) return std::numeric_limits<double>::infinity();
  const Vector x = w.head(n) / tau;
  const Vector y = w.segment(n, m) / tau;
  const Vector s = w.segment(d + n, m) / tau;
  const double scale = 1.0 + x.norm() + y.norm() + s.norm();
  double err = (prog.a * x + s - prog.b).norm();
  err = std::max(err, (prog.a.transpose() * y + prog.c).norm());
  err = std::max(err, std::abs(prog.c.dot(x) + prog.b.dot(y)));
  err = std::max(err, (prog.cone.project(s) - s).norm());
  err = std::max(err, (prog.cone.dual().project(y) - y).norm());
  return err / scale;
}

CheckResult suite_scs_equivalence(const VerifyOptions& opts) {
  Report r;
  for (Family f : {Family::scs_lp, Family::scs_socp}) {
    SeededRng rng(opts.seed);
    auto gp = generate(f, rng, {{"m", 10}, {"n", 15}});
    const auto& prog = std::get<ConicProgram>(*gp.instance);
    const Vector& w_star = *gp.problem.known_solution;
    const std::string name(to_string(f));
    // Solution -> fixed point.
    const double fp = (gp.problem.map(w_star) - w_star).norm() / (1.0 + w_star.norm());
    if (fp > 1e-9) r.fail(name + ": certificate moves by " + fmt(fp));
    if (scs_solution_error(prog, w_star) > 1e-9) r.fail(name + ": certificate is not optimal");
    // Fixed point -> solution.
    SolveConfig config;
    config.tol = 1e-12;
    config.k_max = 5000;
    config.record_timing = false;
    const auto res = run(gp.problem, gp.x0, config, Method::aa1s);
    const Vector& w = res.final_x;
    const double moved = (gp.problem.map(w) - w).norm() / (1.0 + w.norm());
    const double err = scs_solution_error(prog, w);
    if (moved > 1e-8 || err > 1e-6) {
      r.fail(name + ": fixed point residual " + fmt(moved) + ", optimality error " + fmt(err));
    }
  }
  return r.done();
}

CheckResult suite_certificates(const VerifyOptions& opts) {
  Report r;
  SeededRng rng(opts.seed);
  {
    const ApLpInstance raw = gen_lp_sdhe(rng, 3, 6, 0.9, false);
    const double primal = (raw.a * *raw.x_star - raw.b).norm();
    const double dual = (raw.a.transpose() * *raw.y_star + *raw.s_star - raw.c).norm();
    if (primal > 1e-12 || dual > 1e-12) r.fail("LP certificate off");
  }
  {
    auto gp = generate(Family::ap_lp, rng, {{"m", 10}, {"n", 30}, {"density", 0.3}});
    const Vector& w = *gp.problem.known_solution;
    if ((gp.problem.map(w) - w).norm() > 1e-9 * (1.0 + w.norm())) {
      r.fail("scaled LP certificate is not a fixed point of the AP map");
    }
  }
  for (int i = 0; i < 20; ++i) {
    const ConicProgram socp = gen_cone_socp(rng, 8, 12);
    const double gap = std::abs(socp.s_star->dot(*socp.y_star));
    if (gap > 1e-10) r.fail("SOCP complementarity " + fmt(gap));
    if (!socp.cone.contains(*socp.s_star) || !socp.cone.contains(*socp.y_star)) {
      r.fail("SOCP certificate leaves the cone");
    }
  }
  {
    const MdpInstance mdp = gen_mdp(rng, 5, 3, 0.9);
    for (const auto& p : mdp.transitions) {
      const Matrix dense(p);
      if ((dense.rowwise().sum().array() - 1.0).abs().maxCoeff() > 1e-12 ||
          dense.minCoeff() < 0.0) {
        r.fail("transition matrix is not row-stochastic");
      }
    }
  }
  {
    auto gp = generate(Family::hb_linear, rng, {{"n", 20}});
    const Vector& z = *gp.problem.known_solution;
    if ((gp.problem.map(z) - z).norm() > 1e-9 * (1.0 + z.norm())) {
      r.fail("HB solution is not a fixed point");
    }
  }
  return r.done();
}

}  // namespace

const std::vector<InvariantSuite>& invariant_suites() {
  static const std::vector<InvariantSuite> suites = {
      {"lu_round_trip", "linalg_kernel", suite_lu_round_trip},
      {"equilibrate_unit_sums", "linalg_kernel", suite_equilibrate},
      {"rng_reproducible", "linalg_kernel", suite_rng},
      {"initial_relative_residual", "fixed_point_core", suite_initial_residual},
      {"km_decrease", "fixed_point_core", suite_km_decrease},
      {"nonexpansive_maps", "fixed_point_core", suite_nonexpansive},
      {"determinant_bound", "aa1_stabilized", suite_determinant},
      {"norm_bound", "aa1_stabilized", suite_norm},
      {"inverse_consistency", "aa1_stabilized", suite_inverse},
      {"condition_bound", "aa1_stabilized", suite_condition},
      {"rank_one_closed_form", "aa1_stabilized", suite_closed_form},
      {"denominator_identity", "aa1_stabilized", suite_denominator},
      {"theta_range", "aa1_stabilized", suite_theta},
      {"weight_normalization", "accel_baselines", suite_weights},
      {"aa2_optimality", "accel_baselines", suite_aa2_optimality},
      {"aa1_woodbury", "accel_baselines", suite_aa1_woodbury},
      {"bellman_contraction", "problem_library", suite_bellman},
      {"hb_spectral_radius", "problem_library", suite_hb},
      {"projection_idempotence", "problem_library", suite_projections},
      {"sdhe_skew_symmetry", "problem_library", suite_skew},
      {"scs_fixed_point_equivalence", "problem_library", suite_scs_equivalence},
      {"generator_certificates", "problem_library", suite_certificates},
  };
  return suites;
}

std::vector<SuiteReport> run_invariant_suites(const VerifyOptions& options) {
  std::vector<SuiteReport> out;
  for (const auto& suite : invariant_suites()) {
    SuiteReport rep{suite.name, suite.module, {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      rep.result = suite.run(options);
    } catch (const std::exception& e) {
      rep.result = {false, std::string("exception: ") + e.what()};
    }
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace aa
