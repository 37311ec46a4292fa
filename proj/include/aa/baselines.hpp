#pragma once

#include <deque>

#include "aa/fixed_point.hpp"
#include "aa/linalg.hpp"

namespace aa {

/// Mixing coefficients over the stored iterates, oldest first. `gamma` are
/// the difference-form coefficients; `alpha` sums to one.
struct AaWeights {
  Vector gamma;
  Vector alpha;
};

/// alpha_0 = gamma_0, alpha_i = gamma_i - gamma_{i-1}, alpha_m = 1 - gamma_{m-1}.
Vector weights_from_gamma(const Vector& gamma);

/// Type-I weights: (S'Y) gamma = S'g. Throws SingularMatrix when S'Y is
/// numerically singular.
AaWeights aa1_weights(const Matrix& s, const Matrix& y, const Vector& g);

/// Type-II weights: gamma = argmin ||g - Y gamma||_2, minimum-norm when Y is
/// rank deficient.
AaWeights aa2_weights(const Matrix& y, const Vector& g);

/// Last m + 1 iterates and residuals, oldest first.
class SlidingMemory {
 public:
  explicit SlidingMemory(int m);

  void push(const Vector& x, const Vector& g);

  int capacity() const { return m_; }
  /// m_k = min(m, k): number of difference columns available.
  int depth() const { return static_cast<int>(xs_.size()) - 1; }

  const Vector& x(int i) const { return xs_[i]; }
  const Vector& g(int i) const { return gs_[i]; }
  Vector f(int i) const { return xs_[i] - gs_[i]; }

  /// Columns s_i = x_{i+1} - x_i.
  Matrix s_matrix() const;
  /// Columns y_i = g_{i+1} - g_i.
  Matrix y_matrix() const;

 private:
  int m_;
  std::deque<Vector> xs_;
  std::deque<Vector> gs_;
};

struct BaselineStep {
  Vector x;
  bool singular = false;
};

/// x_{k+1} = sum_j alpha_j f(x_{k-m_k+j}) for aa1 / aa2, or the KM average
/// of the newest iterate for km. A singular type-I system degrades to
/// f(x_k).
BaselineStep baseline_step(const SlidingMemory& memory, Method method,
                           double km_alpha = 1.0);

/// Unstabilized AA-I-m or AA-II-m with m_k = min(m, k).
class BaselineAnderson final : public Accelerator {
 public:
  BaselineAnderson(Method method, int memory);

  Step step(int k, const Vector& x, const Vector& g,
            ResidualEvaluator& eval) override;
  int fallbacks() const override { return fallbacks_; }

 private:
  Method method_;
  SlidingMemory memory_;
  int fallbacks_ = 0;
};

}  // namespace aa
