#include "aa/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace aa {

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(what + ": non-finite entry");
  }
}

LuFactorization::LuFactorization(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("LuFactorization: matrix is " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  lu_.compute(m);
  const auto& packed = lu_.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (!(std::abs(packed(i, i)) > kPivotTolerance * scale)) {
      throw SingularMatrix("LU pivot " + std::to_string(i) +
                           " below relative threshold");
    }
  }
}

Vector LuFactorization::solve(const Vector& b) const {
  if (b.size() != lu_.rows()) {
    throw std::invalid_argument("LuFactorization::solve: size mismatch");
  }
  return lu_.solve(b);
}

Vector lu_solve(const Matrix& m, const Vector& b) {
  return LuFactorization(m).solve(b);
}

Matrix gaussian(SeededRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows, cols);
  // Row-major fill so the stream order matches the documented layout.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  return out;
}

Vector gaussian_vector(SeededRng& rng, Eigen::Index n) {
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = rng.normal();
  return out;
}

Vector random_vector_with_norm(SeededRng& rng, Eigen::Index n, double norm) {
  Vector v = gaussian_vector(rng, n);
  const double len = v.norm();
  return len > 0.0 ? Vector(v * (norm / len)) : v;
}

namespace {

template <typename Draw>
SparseMatrix sparse_random(SeededRng& rng, Eigen::Index rows,
                           Eigen::Index cols, double density, Draw draw) {
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("sparse density must lie in (0, 1]");
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(density * rows * cols * 1.2) + 8);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (rng.bernoulli(density)) entries.emplace_back(i, j, draw());
    }
  }
  SparseMatrix out(rows, cols);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

SparseMatrix sparse_gaussian(SeededRng& rng, Eigen::Index rows,
                             Eigen::Index cols, double density) {
  return sparse_random(rng, rows, cols, density, [&] { return rng.normal(); });
}

SparseMatrix sparse_uniform(SeededRng& rng, Eigen::Index rows,
                            Eigen::Index cols, double density) {
  return sparse_random(rng, rows, cols, density, [&] { return rng.uniform(); });
}

Equilibration equilibrate(const Matrix& a, const Vector& b,
                          const std::optional<Vector>& c) {
  if (b.size() != a.rows()) {
    throw std::invalid_argument("equilibrate: b has wrong length");
  }
  if (c && c->size() != a.cols()) {
    throw std::invalid_argument("equilibrate: c has wrong length");
  }
  Equilibration eq;
  eq.row_scale = a.cwiseAbs().rowwise().sum();
  for (Eigen::Index i = 0; i < eq.row_scale.size(); ++i) {
    if (eq.row_scale(i) == 0.0) throw ZeroRow(i);
  }
  const Matrix left = eq.row_scale.cwiseInverse().asDiagonal() * a;
  eq.col_scale = left.cwiseAbs().colwise().sum().transpose();
  for (Eigen::Index j = 0; j < eq.col_scale.size(); ++j) {
    if (eq.col_scale(j) == 0.0) throw ZeroColumn(j);
  }
  eq.scaled = left * eq.col_scale.cwiseInverse().asDiagonal();
  eq.b = b.cwiseQuotient(eq.row_scale);
  if (c) eq.c = c->cwiseQuotient(eq.col_scale);
  return eq;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  // Eigenvalues of the smaller Gram matrix.
  const Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.transpose())
                                           : Matrix(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace aa
