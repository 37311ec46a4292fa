#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "aa/fixed_point.hpp"
#include "aa/linalg.hpp"

namespace aa {

/// Powell-type damping: 1 if |eta| >= theta_bar, otherwise
/// (1 - sign(eta) theta_bar) / (1 - eta) with sign(0) = 1. The result lies
/// in [1 - theta_bar, 1 + theta_bar]. theta_bar = 0 disables the damping.
double powell_theta(double eta, double theta_bar);

using ThetaRule = double (*)(double eta, double theta_bar);

/// ||g|| <= D * u_bar * (n_aa + 1)^-(1 + eps).
bool safeguard_check(double g_norm, int n_aa, double d, double eps, double u_bar);

/// The update direction s was zero: the previous iterate is a fixed point.
class ZeroUpdate : public std::runtime_error {
 public:
  ZeroUpdate() : std::runtime_error("Gram-Schmidt: zero update direction") {}
};

/// s_hat' H y_tilde vanished numerically despite the damping.
class DegenerateDenominator : public std::runtime_error {
 public:
  explicit DegenerateDenominator(double value)
      : std::runtime_error("rank-one update: degenerate denominator"),
        value(value) {}
  double value;
};

struct GramSchmidtResult {
  bool restart = false;
  Vector s_hat;  // unnormalized remainder; meaningful when !restart
};

struct HUpdate {
  double gamma = 0.0;        // s_hat' H y / ||s_hat||^2
  double theta = 1.0;
  double denominator = 0.0;  // s_hat' H y_tilde
  Vector y_tilde;
};

struct RankOneFactor {
  Vector u;
  Vector v;
};

/// Memory of the stabilized accelerator. H_k = I + sum_i u_i v_i' is kept as
/// a factor list and never formed, except in debug mode where the dense
/// B_k (with H_k = B_k^-1) is tracked alongside for invariant checks.
class AcceleratorState {
 public:
  AcceleratorState(Eigen::Index n, int memory_limit, bool debug = false);

  Eigen::Index dim() const { return n_; }
  int memory_limit() const { return memory_limit_; }
  /// m_k: number of stored directions (equal to the number of factors once
  /// the iteration's update has been applied).
  int memory_count() const { return static_cast<int>(factors_.size()); }

  const std::vector<Vector>& basis() const { return basis_; }
  const std::vector<double>& basis_norms() const { return basis_norms_; }
  const std::vector<RankOneFactor>& factors() const { return factors_; }

  /// Orthogonalizes s against the stored directions. Signals a restart when
  /// the memory is full or ||s_hat|| < tau ||s||; otherwise stores s_hat.
  GramSchmidtResult gram_schmidt_append(const Vector& s, double tau);

  /// Clears directions and factors (H = I) and stores s as the sole
  /// direction. Returns s_hat = s.
  Vector restart_with(const Vector& s);

  /// Clears directions and factors (H = I).
  void clear();

  /// Damped rank-one update H <- H + (s - H y~) s_hat' H / (s_hat' H y~),
  /// with y~ = theta y + (1 - theta) B s. B s equals -g_prev while H carries
  /// factors (s = -H g_prev by construction) and s when H = I.
  /// Throws DegenerateDenominator without modifying the state.
  HUpdate update_H(const Vector& s, const Vector& y, const Vector& s_hat,
                   const Vector& g_prev, double theta_bar,
                   ThetaRule rule = powell_theta);

  Vector apply_H(const Vector& w) const;
  Vector apply_H_transpose(const Vector& w) const;

  /// Dense H_k, assembled column by column from apply_H.
  Matrix materialize_H() const;

  bool debug() const { return jacobian_.has_value(); }
  /// Dense B_k (debug mode only).
  const Matrix& jacobian() const;

 private:
  Eigen::Index n_;
  int memory_limit_;
  std::vector<Vector> basis_;  // unit vectors
  std::vector<double> basis_norms_;
  std::vector<RankOneFactor> factors_;
  std::optional<Matrix> jacobian_;
};

struct Aa1sParams {
  double theta_bar = 0.01;
  double tau = 0.001;
  double safeguard_d = 1e6;
  double safeguard_eps = 1e-6;
  double alpha = 0.1;
  int memory = 5;
  bool debug = false;
  ThetaRule theta_rule = powell_theta;

  static Aa1sParams from(const SolveConfig& config);
};

struct StepOutcome {
  Vector next_x;
  StepType step_type = StepType::km;
  bool restarted = false;
  double gamma = 0.0;
  double theta_used = 1.0;
  double denominator = 0.0;
  double s_hat_sq = 0.0;
  /// The update was skipped (zero direction or vanishing denominator) and
  /// the memory cleared.
  bool degenerate = false;
};

/// Stabilized type-I Anderson acceleration AA-I-S-m: restarted
/// Gram-Schmidt memory, Powell-damped rank-one inverse updates and a
/// residual safeguard with KM fallback.
class StabilizedAnderson final : public Accelerator {
 public:
  StabilizedAnderson(Eigen::Index n, Aa1sParams params);

  Step step(int k, const Vector& x, const Vector& g,
            ResidualEvaluator& eval) override;

  /// Loop body for k >= 1; requires step(0, ...) to have run.
  StepOutcome iterate(const Vector& x, const Vector& g, ResidualEvaluator& eval);

  int restarts() const override { return restarts_; }
  int fallbacks() const override { return fallbacks_; }
  int accepted_steps() const { return n_aa_; }
  double u_bar() const { return u_bar_; }

  const AcceleratorState& state() const { return state_; }
  const StepOutcome& last_outcome() const { return last_; }
  const Aa1sParams& params() const { return params_; }

 private:
  Aa1sParams params_;
  AcceleratorState state_;
  int n_aa_ = 0;
  double u_bar_ = 0.0;
  Vector prev_x_;
  Vector prev_g_;
  Vector trial_x_;
  bool trial_is_current_ = false;
  int restarts_ = 0;
  int fallbacks_ = 0;
  StepOutcome last_;
};

/// Dense B built from identity by the damped rank-one recursion over the
/// columns of s and y (Gram-Schmidt on s, eta from B^-1 y). With
/// theta_bar = 0 this is the undamped recursion, which reproduces
/// I + (Y - S)(S'S)^-1 S' for full-rank S.
Matrix rank_one_jacobian(const Matrix& s, const Matrix& y, double theta_bar);

}  // namespace aa
