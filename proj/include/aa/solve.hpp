#pragma once

#include <functional>
#include <memory>

#include "aa/fixed_point.hpp"

namespace aa {

/// What an observer sees after every iterate is formed and its residual
/// evaluated. `step_type` is the kind of step that produced x.
struct IterationView {
  int k;
  const Vector& x;
  const Vector& g;
  StepType step_type;
  const Accelerator& accelerator;
};

using Observer = std::function<void(const IterationView&)>;

std::unique_ptr<Accelerator> make_accelerator(Method method,
                                              const SolveConfig& config,
                                              Eigen::Index n);

/// Iterates from x0 until ||g_k||/||g_0|| <= tol or k = k_max. A
/// non-finite iterate ends the run with status non_finite.
SolveResult run(const FixedPointProblem& problem, const Vector& x0,
                const SolveConfig& config, Accelerator& accelerator,
                const Observer& observer = {});

SolveResult run(const FixedPointProblem& problem, const Vector& x0,
                const SolveConfig& config, Method method,
                const Observer& observer = {});

}  // namespace aa
