#include "aa/aa1_stabilized.hpp"

#include <cmath>
#include <stdexcept>

namespace aa {

double powell_theta(double eta, double theta_bar) {
  if (std::abs(eta) >= theta_bar) return 1.0;
  const double sign = eta >= 0.0 ? 1.0 : -1.0;
  return (1.0 - sign * theta_bar) / (1.0 - eta);
}

bool safeguard_check(double g_norm, int n_aa, double d, double eps, double u_bar) {
  return g_norm <= d * u_bar * std::pow(n_aa + 1.0, -(1.0 + eps));
}

AcceleratorState::AcceleratorState(Eigen::Index n, int memory_limit, bool debug)
    : n_(n), memory_limit_(memory_limit) {
  if (n < 1) throw std::invalid_argument("AcceleratorState: dimension must be >= 1");
  if (memory_limit < 1) throw std::invalid_argument("AcceleratorState: memory must be >= 1");
  if (debug) jacobian_ = Matrix::Identity(n, n);
}

GramSchmidtResult AcceleratorState::gram_schmidt_append(const Vector& s, double tau) {
  const double s_norm = s.norm();
  if (s_norm == 0.0) throw ZeroUpdate();
  GramSchmidtResult out;
  if (static_cast<int>(basis_.size()) + 1 > memory_limit_) {
    out.restart = true;
    return out;
  }
  // Modified Gram-Schmidt against the unit basis.
  out.s_hat = s;
  for (const auto& q : basis_) out.s_hat -= q.dot(out.s_hat) * q;
  const double remainder = out.s_hat.norm();
  if (remainder < tau * s_norm) {
    out.restart = true;
    return out;
  }
  basis_.push_back(out.s_hat / remainder);
  basis_norms_.push_back(remainder);
  return out;
}

void AcceleratorState::clear() {
  basis_.clear();
  basis_norms_.clear();
  factors_.clear();
  if (jacobian_) jacobian_->setIdentity();
}

Vector AcceleratorState::restart_with(const Vector& s) {
  clear();
  const double s_norm = s.norm();
  if (s_norm == 0.0) throw ZeroUpdate();
  basis_.push_back(s / s_norm);
  basis_norms_.push_back(s_norm);
  return s;
}

Vector AcceleratorState::apply_H(const Vector& w) const {
  Vector out = w;
  for (const auto& f : factors_) out.noalias() += f.v.dot(w) * f.u;
  return out;
}

Vector AcceleratorState::apply_H_transpose(const Vector& w) const {
  Vector out = w;
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    out.noalias() += it->u.dot(w) * it->v;
  }
  return out;
}

HUpdate AcceleratorState::update_H(const Vector& s, const Vector& y,
                                   const Vector& s_hat, const Vector& g_prev,
                                   double theta_bar, ThetaRule rule) {
  const double s_hat_sq = s_hat.squaredNorm();
  if (s_hat_sq == 0.0) throw ZeroUpdate();

  HUpdate up;
  const Vector hy = apply_H(y);
  up.gamma = s_hat.dot(hy) / s_hat_sq;
  up.theta = rule(up.gamma, theta_bar);

  // B_{k-1} s_{k-1}: -g_{k-1} when the trial point came from the current H,
  // and s itself when H has just been reset to the identity.
  const Vector bs = factors_.empty() ? s : Vector(-g_prev);
  up.y_tilde = up.theta * y + (1.0 - up.theta) * bs;

  const Vector hy_tilde = apply_H(up.y_tilde);
  up.denominator = s_hat.dot(hy_tilde);
  if (!(std::abs(up.denominator) > 1e-14 * s_hat.norm() * up.y_tilde.norm())) {
    throw DegenerateDenominator(up.denominator);
  }

  RankOneFactor f;
  f.v = apply_H_transpose(s_hat);
  f.u = (s - hy_tilde) / up.denominator;
  factors_.push_back(std::move(f));

  if (jacobian_) {
    Matrix& b = *jacobian_;
    const Vector b_s = b * s;
    b.noalias() += (up.y_tilde - b_s) * (s_hat.transpose() / s_hat.dot(s));
  }
  return up;
}

Matrix AcceleratorState::materialize_H() const {
  Matrix h(n_, n_);
  Vector e = Vector::Zero(n_);
  for (Eigen::Index j = 0; j < n_; ++j) {
    e(j) = 1.0;
    h.col(j) = apply_H(e);
    e(j) = 0.0;
  }
  return h;
}

const Matrix& AcceleratorState::jacobian() const {
  if (!jacobian_) throw std::logic_error("jacobian(): debug mode is off");
  return *jacobian_;
}

Aa1sParams Aa1sParams::from(const SolveConfig& config) {
  Aa1sParams p;
  p.theta_bar = config.theta_bar;
  p.tau = config.tau;
  p.safeguard_d = config.safeguard_d;
  p.safeguard_eps = config.safeguard_eps;
  p.alpha = config.alpha;
  p.memory = config.memory;
  p.debug = config.debug_invariants;
  return p;
}

StabilizedAnderson::StabilizedAnderson(Eigen::Index n, Aa1sParams params)
    : params_(params), state_(n, params.memory, params.debug) {}

Step StabilizedAnderson::step(int k, const Vector& x, const Vector& g,
                              ResidualEvaluator& eval) {
  if (k == 0) {
    // x1 = x~1 = f_alpha(x0).
    u_bar_ = g.norm();
    prev_x_ = x;
    prev_g_ = g;
    trial_x_ = x - params_.alpha * g;
    trial_is_current_ = true;
    last_ = StepOutcome{};
    last_.next_x = trial_x_;
    return {trial_x_, StepType::km};
  }
  StepOutcome out = iterate(x, g, eval);
  return {out.next_x, out.step_type};
}

StepOutcome StabilizedAnderson::iterate(const Vector& x, const Vector& g,
                                        ResidualEvaluator& eval) {
  if (prev_x_.size() == 0) {
    throw std::logic_error("StabilizedAnderson::iterate before initialization");
  }
  // g(x~k) is g_k when the trial point was accepted last iteration.
  const Vector trial_g = trial_is_current_ ? g : eval.residual(trial_x_);
  const Vector s = trial_x_ - prev_x_;
  const Vector y = trial_g - prev_g_;

  StepOutcome out;
  try {
    GramSchmidtResult gs = state_.gram_schmidt_append(s, params_.tau);
    Vector s_hat;
    if (gs.restart) {
      out.restarted = true;
      ++restarts_;
      s_hat = state_.restart_with(s);
    } else {
      s_hat = std::move(gs.s_hat);
    }
    out.s_hat_sq = s_hat.squaredNorm();
    const HUpdate up = state_.update_H(s, y, s_hat, prev_g_, params_.theta_bar,
                                       params_.theta_rule);
    out.gamma = up.gamma;
    out.theta_used = up.theta;
    out.denominator = up.denominator;
  } catch (const DegenerateDenominator& e) {
    state_.clear();
    out.degenerate = true;
    out.denominator = e.value;
    ++fallbacks_;
  } catch (const ZeroUpdate&) {
    state_.clear();
    out.degenerate = true;
    ++fallbacks_;
  }

  Vector trial = x - state_.apply_H(g);
  const bool accept =
      !out.degenerate && safeguard_check(g.norm(), n_aa_, params_.safeguard_d,
                                         params_.safeguard_eps, u_bar_);
  if (accept) {
    out.next_x = trial;
    out.step_type = StepType::aa;
    ++n_aa_;
  } else {
    out.next_x = x - params_.alpha * g;
    out.step_type = StepType::km;
  }
  trial_is_current_ = accept;
  prev_x_ = x;
  prev_g_ = g;
  trial_x_ = std::move(trial);
  last_ = out;
  return out;
}

Matrix rank_one_jacobian(const Matrix& s, const Matrix& y, double theta_bar) {
  if (s.rows() != y.rows() || s.cols() != y.cols()) {
    throw std::invalid_argument("rank_one_jacobian: S and Y shapes differ");
  }
  const Eigen::Index n = s.rows();
  Matrix b = Matrix::Identity(n, n);
  std::vector<Vector> hats;
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    const Vector si = s.col(i);
    Vector hat = si;
    for (const auto& h : hats) hat -= (h.dot(si) / h.squaredNorm()) * h;
    const double hat_sq = hat.squaredNorm();
    if (hat_sq == 0.0) throw ZeroUpdate();
    const Vector yi = y.col(i);
    const Vector bs = b * si;
    double theta = 1.0;
    if (theta_bar > 0.0) {
      const double eta = hat.dot(lu_solve(b, yi)) / hat_sq;
      theta = powell_theta(eta, theta_bar);
    }
    const Vector y_tilde = theta * yi + (1.0 - theta) * bs;
    b.noalias() += (y_tilde - bs) * (hat.transpose() / hat.dot(si));
    hats.push_back(hat);
  }
  return b;
}

}  // namespace aa
