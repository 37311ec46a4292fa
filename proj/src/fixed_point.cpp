#include "aa/fixed_point.hpp"

#include <limits>
#include <stdexcept>

namespace aa {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::km: return "km";
    case Method::aa1: return "aa1";
    case Method::aa1s: return "aa1s";
    case Method::aa2: return "aa2";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "km") return Method::km;
  if (name == "aa1") return Method::aa1;
  if (name == "aa1s") return Method::aa1s;
  if (name == "aa2") return Method::aa2;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string_view to_string(StepType t) {
  switch (t) {
    case StepType::initial: return "init";
    case StepType::aa: return "AA";
    case StepType::km: return "KM";
  }
  return "?";
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::non_finite: return "non_finite";
  }
  return "?";
}

void SolveConfig::validate(const Regime& regime, Method method) const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(theta_bar)) throw std::invalid_argument("theta_bar must lie in (0,1)");
  if (!open_unit(tau)) throw std::invalid_argument("tau must lie in (0,1)");
  if (!(safeguard_d > 0.0)) throw std::invalid_argument("safeguard D must be > 0");
  if (!(safeguard_eps > 0.0)) throw std::invalid_argument("safeguard eps must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (method == Method::aa1s && alpha == 1.0 &&
      regime.kind != NormRegime::contractive) {
    throw std::invalid_argument("alpha = 1 requires a contractive problem");
  }
  if (!(km_alpha > 0.0 && km_alpha <= 1.0)) throw std::invalid_argument("km_alpha must lie in (0,1]");
  if (memory < 1) throw std::invalid_argument("memory must be positive");
  if (k_max < 1) throw std::invalid_argument("k_max must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
}

double SolveResult::final_relative_residual() const {
  if (status == SolveStatus::non_finite || trace.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  return trace.back().relative_residual;
}

Vector residual(const FixedPointProblem& problem, const Vector& x) {
  if (x.size() != problem.dim) {
    throw std::invalid_argument("residual: dimension mismatch");
  }
  return x - problem.map(x);
}

Vector km_step(const FixedPointProblem& problem, const Vector& x, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("km_step: alpha must lie in (0,1]");
  }
  return (1.0 - alpha) * x + alpha * problem.map(x);
}

}  // namespace aa
