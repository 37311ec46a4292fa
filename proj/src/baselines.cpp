#include "aa/baselines.hpp"

#include <stdexcept>

namespace aa {

Vector weights_from_gamma(const Vector& gamma) {
  const Eigen::Index m = gamma.size();
  Vector alpha(m + 1);
  if (m == 0) {
    alpha(0) = 1.0;
    return alpha;
  }
  alpha(0) = gamma(0);
  for (Eigen::Index i = 1; i < m; ++i) alpha(i) = gamma(i) - gamma(i - 1);
  alpha(m) = 1.0 - gamma(m - 1);
  return alpha;
}

AaWeights aa1_weights(const Matrix& s, const Matrix& y, const Vector& g) {
  if (s.cols() < 1 || s.cols() != y.cols()) {
    throw std::invalid_argument("aa1_weights: need matching S, Y with m_k >= 1");
  }
  AaWeights w;
  w.gamma = lu_solve(s.transpose() * y, s.transpose() * g);
  w.alpha = weights_from_gamma(w.gamma);
  return w;
}

AaWeights aa2_weights(const Matrix& y, const Vector& g) {
  if (y.cols() < 1) throw std::invalid_argument("aa2_weights: m_k must be >= 1");
  AaWeights w;
  w.gamma = y.completeOrthogonalDecomposition().solve(g);
  w.alpha = weights_from_gamma(w.gamma);
  return w;
}

SlidingMemory::SlidingMemory(int m) : m_(m) {
  if (m < 1) throw std::invalid_argument("SlidingMemory: m must be >= 1");
}

void SlidingMemory::push(const Vector& x, const Vector& g) {
  xs_.push_back(x);
  gs_.push_back(g);
  while (static_cast<int>(xs_.size()) > m_ + 1) {
    xs_.pop_front();
    gs_.pop_front();
  }
}

Matrix SlidingMemory::s_matrix() const {
  const int m = depth();
  Matrix out(xs_.front().size(), std::max(m, 0));
  for (int i = 0; i < m; ++i) out.col(i) = xs_[i + 1] - xs_[i];
  return out;
}

Matrix SlidingMemory::y_matrix() const {
  const int m = depth();
  Matrix out(gs_.front().size(), std::max(m, 0));
  for (int i = 0; i < m; ++i) out.col(i) = gs_[i + 1] - gs_[i];
  return out;
}

BaselineStep baseline_step(const SlidingMemory& memory, Method method,
                           double km_alpha) {
  const int m = memory.depth();
  if (m < 0) throw std::logic_error("baseline_step: empty memory");
  const Vector& x = memory.x(m);
  const Vector& g = memory.g(m);
  if (method == Method::km) return {x - km_alpha * g, false};
  if (method != Method::aa1 && method != Method::aa2) {
    throw std::invalid_argument("baseline_step: unsupported method");
  }
  if (m == 0) return {x - g, false};

  Vector alpha;
  try {
    alpha = method == Method::aa1
                ? aa1_weights(memory.s_matrix(), memory.y_matrix(), g).alpha
                : aa2_weights(memory.y_matrix(), g).alpha;
  } catch (const SingularMatrix&) {
    return {x - g, true};
  }
  Vector next = Vector::Zero(x.size());
  for (int j = 0; j <= m; ++j) next.noalias() += alpha(j) * memory.f(j);
  return {next, false};
}

BaselineAnderson::BaselineAnderson(Method method, int memory)
    : method_(method), memory_(memory) {
  if (method != Method::aa1 && method != Method::aa2) {
    throw std::invalid_argument("BaselineAnderson: method must be aa1 or aa2");
  }
}

Step BaselineAnderson::step(int, const Vector& x, const Vector& g,
                            ResidualEvaluator&) {
  memory_.push(x, g);
  BaselineStep out = baseline_step(memory_, method_);
  if (out.singular) ++fallbacks_;
  const StepType type = memory_.depth() == 0 || out.singular ? StepType::km
                                                             : StepType::aa;
  return {std::move(out.x), type};
}

}  // namespace aa
