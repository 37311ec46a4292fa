#pragma once

#include <vector>

#include "aa/linalg.hpp"

namespace aa {

/// Componentwise sign(x_i) (|x_i| - kappa)_+.
Vector shrinkage(const Vector& x, double kappa);

Vector project_nonneg(const Vector& x);

/// Projection onto {s : ||s_{1:d-1}||_2 <= s_d}.
Vector project_soc(const Vector& s);

/// Euclidean projection onto {u >= 0, sum u = 1} (sort and threshold).
Vector project_simplex(const Vector& x);

/// prox of t ||.||_2: (1 - t / ||v||_2)_+ v.
Vector prox_l2_norm(const Vector& v, double t = 1.0);

enum class ConeKind { free, zero, nonneg, soc };

struct ConeBlock {
  ConeKind kind;
  Eigen::Index dim;
};

/// Cartesian product of simple cones, in order.
class ConeSpec {
 public:
  ConeSpec() = default;
  ConeSpec(std::initializer_list<ConeBlock> blocks);

  ConeSpec& add(ConeKind kind, Eigen::Index dim);

  const std::vector<ConeBlock>& blocks() const { return blocks_; }
  Eigen::Index dim() const { return dim_; }

  /// free <-> zero; nonneg and soc are self-dual.
  ConeSpec dual() const;

  Vector project(const Vector& x) const;

  /// Distance to the cone is at most tol.
  bool contains(const Vector& x, double tol = 1e-10) const;

 private:
  std::vector<ConeBlock> blocks_;
  Eigen::Index dim_ = 0;
};

}  // namespace aa
