#include "aa/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace aa {

Vector shrinkage(const Vector& x, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("shrinkage: kappa must be >= 0");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x(i)) - kappa;
    out(i) = mag > 0.0 ? std::copysign(mag, x(i)) : 0.0;
  }
  return out;
}

Vector project_nonneg(const Vector& x) { return x.cwiseMax(0.0); }

Vector project_soc(const Vector& s) {
  const Eigen::Index d = s.size();
  if (d < 1) throw std::invalid_argument("project_soc: empty vector");
  const double t = s(d - 1);
  const double r = s.head(d - 1).norm();
  if (r <= t) return s;
  if (r <= -t) return Vector::Zero(d);
  const double scale = (r + t) / 2.0;
  Vector out(d);
  out.head(d - 1) = s.head(d - 1) * (scale / r);
  out(d - 1) = scale;
  return out;
}

Vector project_simplex(const Vector& x) {
  const Eigen::Index n = x.size();
  if (n < 1) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) shift = candidate;
  }
  return (x.array() - shift).cwiseMax(0.0).matrix();
}

Vector prox_l2_norm(const Vector& v, double t) {
  const double norm = v.norm();
  if (norm <= t) return Vector::Zero(v.size());
  return (1.0 - t / norm) * v;
}

ConeSpec::ConeSpec(std::initializer_list<ConeBlock> blocks) {
  for (const auto& b : blocks) add(b.kind, b.dim);
}

ConeSpec& ConeSpec::add(ConeKind kind, Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("ConeSpec: block dimension must be >= 1");
  blocks_.push_back({kind, dim});
  dim_ += dim;
  return *this;
}

ConeSpec ConeSpec::dual() const {
  ConeSpec out;
  for (const auto& b : blocks_) {
    ConeKind kind = b.kind;
    if (kind == ConeKind::free) kind = ConeKind::zero;
    else if (kind == ConeKind::zero) kind = ConeKind::free;
    out.add(kind, b.dim);
  }
  return out;
}

Vector ConeSpec::project(const Vector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("ConeSpec::project: size mismatch");
  Vector out(dim_);
  Eigen::Index offset = 0;
  for (const auto& b : blocks_) {
    auto in = x.segment(offset, b.dim);
    switch (b.kind) {
      case ConeKind::free: out.segment(offset, b.dim) = in; break;
      case ConeKind::zero: out.segment(offset, b.dim).setZero(); break;
      case ConeKind::nonneg: out.segment(offset, b.dim) = in.cwiseMax(0.0); break;
      case ConeKind::soc: out.segment(offset, b.dim) = project_soc(in); break;
    }
    offset += b.dim;
  }
  return out;
}

bool ConeSpec::contains(const Vector& x, double tol) const {
  return (project(x) - x).norm() <= tol;
}

}  // namespace aa
