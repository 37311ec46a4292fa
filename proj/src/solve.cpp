#include "aa/solve.hpp"

#include <chrono>
#include <stdexcept>

#include "aa/aa1_stabilized.hpp"
#include "aa/baselines.hpp"

namespace aa {

std::unique_ptr<Accelerator> make_accelerator(Method method,
                                              const SolveConfig& config,
                                              Eigen::Index n) {
  switch (method) {
    case Method::km:
      return std::make_unique<KmAccelerator>(config.km_alpha);
    case Method::aa1:
    case Method::aa2:
      return std::make_unique<BaselineAnderson>(method, config.memory);
    case Method::aa1s:
      return std::make_unique<StabilizedAnderson>(n, Aa1sParams::from(config));
  }
  throw std::invalid_argument("make_accelerator: unknown method");
}

SolveResult run(const FixedPointProblem& problem, const Vector& x0,
                const SolveConfig& config, Accelerator& accelerator,
                const Observer& observer) {
  if (x0.size() != problem.dim) {
    throw std::invalid_argument("run: x0 has dimension " +
                                std::to_string(x0.size()) + ", problem has " +
                                std::to_string(problem.dim));
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] {
    if (!config.record_timing) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  ResidualEvaluator eval(problem);
  SolveResult result;
  Vector x = x0;
  Vector g = eval.residual(x);
  result.g0_norm = g.norm();

  auto record = [&](int k, StepType type) {
    IterationRecord rec;
    rec.k = k;
    rec.residual_l2 = g.norm();
    rec.relative_residual =
        result.g0_norm > 0.0 ? rec.residual_l2 / result.g0_norm : 0.0;
    rec.step_type = type;
    rec.f_evals_cum = eval.evaluations();
    rec.elapsed_s = elapsed();
    result.trace.push_back(rec);
    if (observer) observer(IterationView{k, x, g, type, accelerator});
  };

  if (!x.allFinite() || !g.allFinite()) {
    result.status = SolveStatus::non_finite;
    result.final_x = x;
    return result;
  }
  record(0, StepType::initial);

  for (int k = 0;; ++k) {
    if (result.trace.back().relative_residual <= config.tol) {
      result.status = SolveStatus::converged;
      break;
    }
    if (k == config.k_max) {
      result.status = SolveStatus::max_iterations;
      break;
    }
    Step step = accelerator.step(k, x, g, eval);
    if (!step.x.allFinite()) {
      result.status = SolveStatus::non_finite;
      break;
    }
    Vector g_next = eval.residual(step.x);
    if (!g_next.allFinite()) {
      result.status = SolveStatus::non_finite;
      break;
    }
    x = std::move(step.x);
    g = std::move(g_next);
    if (step.type == StepType::aa) ++result.aa_steps;
    record(k + 1, step.type);
  }

  result.converged = result.status == SolveStatus::converged;
  result.final_x = x;
  result.restarts = accelerator.restarts();
  result.fallbacks = accelerator.fallbacks();
  return result;
}

SolveResult run(const FixedPointProblem& problem, const Vector& x0,
                const SolveConfig& config, Method method,
                const Observer& observer) {
  config.validate(problem.regime, method);
  auto accelerator = make_accelerator(method, config, problem.dim);
  return run(problem, x0, config, *accelerator, observer);
}

}  // namespace aa
