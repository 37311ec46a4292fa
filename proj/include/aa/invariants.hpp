#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "aa/aa1_stabilized.hpp"
#include "aa/fixed_point.hpp"
#include "aa/problems.hpp"

namespace aa {

// ---------------------------------------------------------------------------
// Audits: measurements over a run or over random probes. Each reports the
// worst case it saw; the suites below turn them into pass/fail.

/// Per-iteration checks of an AA-I-S run in debug mode. Margins are signed
/// so that >= 0 means the bound held.
struct Aa1sAudit {
  int iterations = 0;
  int restarts = 0;
  int degenerate = 0;
  /// min over k of log|det B_k| - m_k log(theta_bar) - log(1 - 1e-8).
  double det_margin = 0.0;
  /// min over k of bound - ||B_k||_2, bound = 3((1+theta_bar+tau)/tau)^m - 2.
  double norm_margin = 0.0;
  /// max over k of ||H_k B_k - I||_2.
  double inverse_error = 0.0;
  /// min over k of log(cond bound) - log cond(H_k).
  double log_cond_margin = 0.0;
  /// max over k of |s_hat'H y~ - ||s_hat||^2 (1 - theta (1 - gamma))| / ||s_hat||^2.
  double denominator_error = 0.0;
  /// min over k of |1 - theta (1 - gamma)| - theta_bar.
  double denominator_floor_margin = 0.0;
  double theta_min = 1.0;
  double theta_max = 1.0;
  SolveResult result;
};

double norm_bound(double theta_bar, double tau, int memory);
double log_condition_bound(double theta_bar, double tau, int memory, Eigen::Index n);

/// Runs AA-I-S with debug_invariants forced on and audits every iterate.
Aa1sAudit audit_aa1s(const FixedPointProblem& problem, const Vector& x0,
                     SolveConfig config, ThetaRule theta_rule = powell_theta);

struct KmDecreaseAudit {
  int km_iterations = 0;
  int violations = 0;
  /// max over KM-typed iterations of
  /// ||x+ - y||^2 - ||x - y||^2 + alpha (1 - alpha) ||g||^2.
  double worst_excess = -std::numeric_limits<double>::infinity();
  SolveResult result;
};

/// Checks the KM decrease inequality against problem.known_solution on every
/// KM-typed step of a run. alpha is config.alpha for aa1s and
/// config.km_alpha for km.
KmDecreaseAudit audit_km_decrease(const FixedPointProblem& problem, const Vector& x0,
                                  const SolveConfig& config, Method method,
                                  double tol = 1e-9);

/// max over random pairs of ||f(x) - f(z)||_2 - ||x - z||_2.
double max_expansion(const FixedPointProblem& problem, SeededRng& rng, int probes,
                     double scale = 1.0);

/// max over random pairs of ||TV - TW||_inf - gamma ||V - W||_inf.
double max_bellman_excess(const MdpInstance& mdp, SeededRng& rng, int probes);

/// Spectral radius of the heavy-ball iteration matrix.
double hb_spectral_radius(const HbInstance& inst);

// ---------------------------------------------------------------------------
// Suites.

struct CheckResult {
  bool passed = true;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 456;
  int probes = 1000;
  /// Damping rule handed to AA-I-S; replaced only for fault injection.
  ThetaRule theta_rule = powell_theta;
};

struct InvariantSuite {
  std::string name;
  std::string module;
  std::function<CheckResult(const VerifyOptions&)> run;
};

/// Every suite, in report order. Names are unique.
const std::vector<InvariantSuite>& invariant_suites();

struct SuiteReport {
  std::string name;
  std::string module;
  CheckResult result;
  double seconds = 0.0;
};

/// Runs all suites; an exception inside a suite is reported as a failure.
std::vector<SuiteReport> run_invariant_suites(const VerifyOptions& options);

/// A damping rule that never damps, for mutation testing.
double undamped_theta(double eta, double theta_bar);

}  // namespace aa
