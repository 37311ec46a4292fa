#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aa/linalg.hpp"

namespace aa {

enum class NormRegime { nonexpansive_l2, contractive };

/// Which convergence theory applies to a map: l2 nonexpansive, or
/// gamma-contractive in the norm named by `norm`.
struct Regime {
  NormRegime kind = NormRegime::nonexpansive_l2;
  double gamma = 1.0;
  std::string norm = "l2";

  static Regime nonexpansive() { return {}; }
  static Regime contractive(double gamma, std::string norm) {
    return {NormRegime::contractive, gamma, std::move(norm)};
  }
};

using Map = std::function<Vector(const Vector&)>;

/// Find x with x = f(x).
struct FixedPointProblem {
  Eigen::Index dim = 0;
  Map map;
  std::optional<Vector> known_solution;
  Regime regime;
  std::string name;
};

enum class Method { km, aa1, aa1s, aa2 };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct SolveConfig {
  double theta_bar = 0.01;
  double tau = 0.001;
  double safeguard_d = 1e6;
  double safeguard_eps = 1e-6;
  /// Averaging weight of the safeguard fallback f_alpha.
  double alpha = 0.1;
  /// Averaging weight of the km baseline; 1 runs the plain algorithm f.
  double km_alpha = 1.0;
  int memory = 5;
  int k_max = 1000;
  double tol = 1e-5;
  std::uint64_t seed = 456;
  /// Materialize B_k / H_k in aa1s for invariant checks (n <= 50).
  bool debug_invariants = false;
  /// When false, elapsed_s is recorded as 0 so traces are reproducible.
  bool record_timing = true;

  /// Throws std::invalid_argument on out-of-range values. For aa1s,
  /// alpha = 1 is only accepted on contractive problems.
  void validate(const Regime& regime, Method method = Method::aa1s) const;
};

enum class StepType { initial, aa, km };

std::string_view to_string(StepType t);

struct IterationRecord {
  int k = 0;
  double residual_l2 = 0.0;
  double relative_residual = 0.0;
  StepType step_type = StepType::initial;
  long f_evals_cum = 0;
  double elapsed_s = 0.0;
};

enum class SolveStatus { converged, max_iterations, non_finite };

std::string_view to_string(SolveStatus s);

struct SolveResult {
  Vector final_x;
  bool converged = false;
  SolveStatus status = SolveStatus::max_iterations;
  std::vector<IterationRecord> trace;
  double g0_norm = 0.0;  // "res0"
  int aa_steps = 0;
  int restarts = 0;
  /// Iterations where an inner system was singular or degenerate and the
  /// method fell back to a plain step.
  int fallbacks = 0;

  /// Last relative residual, +inf if the run produced a non-finite iterate.
  double final_relative_residual() const;
  int iterations() const { return trace.empty() ? 0 : trace.back().k; }
  long f_evals() const { return trace.empty() ? 0 : trace.back().f_evals_cum; }
};

/// g(x) = x - f(x); one evaluation of f.
Vector residual(const FixedPointProblem& problem, const Vector& x);

/// (1 - alpha) x + alpha f(x).
Vector km_step(const FixedPointProblem& problem, const Vector& x, double alpha);

/// Residual oracle that counts evaluations of f.
class ResidualEvaluator {
 public:
  explicit ResidualEvaluator(const FixedPointProblem& problem)
      : problem_(problem) {}

  Vector residual(const Vector& x) {
    ++count_;
    return x - problem_.map(x);
  }
  long evaluations() const { return count_; }
  const FixedPointProblem& problem() const { return problem_; }

 private:
  const FixedPointProblem& problem_;
  long count_ = 0;
};

struct Step {
  Vector x;
  StepType type = StepType::km;
};

/// One accelerator drives one solve. step() is called with k = 0, 1, ...
/// and the residual g_k = g(x_k) the loop already computed.
class Accelerator {
 public:
  virtual ~Accelerator() = default;
  virtual Step step(int k, const Vector& x, const Vector& g,
                    ResidualEvaluator& eval) = 0;
  virtual int restarts() const { return 0; }
  virtual int fallbacks() const { return 0; }
};

/// Plain averaged iteration x - alpha g(x).
class KmAccelerator final : public Accelerator {
 public:
  explicit KmAccelerator(double alpha) : alpha_(alpha) {}
  Step step(int, const Vector& x, const Vector& g, ResidualEvaluator&) override {
    return {x - alpha_ * g, StepType::km};
  }

 private:
  double alpha_;
};

}  // namespace aa
