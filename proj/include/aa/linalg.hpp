#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "aa/rng.hpp"

namespace aa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Compressed sparse rows.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public LinalgError {
 public:
  using LinalgError::LinalgError;
};

class ZeroRow : public LinalgError {
 public:
  explicit ZeroRow(Eigen::Index row)
      : LinalgError("equilibrate: row " + std::to_string(row) + " is all zero"),
        row(row) {}
  Eigen::Index row;
};

class ZeroColumn : public LinalgError {
 public:
  explicit ZeroColumn(Eigen::Index col)
      : LinalgError("equilibrate: column " + std::to_string(col) +
                    " is all zero after row scaling"),
        col(col) {}
  Eigen::Index col;
};

/// Relative pivot threshold used by every LU in the library.
inline constexpr double kPivotTolerance = 1e-12;

bool all_finite(const Vector& v);
void require_finite(const Vector& v, const std::string& what);

/// LU with partial pivoting, factored once and reused. Throws SingularMatrix
/// when a pivot falls below kPivotTolerance * max|M|.
class LuFactorization {
 public:
  LuFactorization() = default;
  explicit LuFactorization(const Matrix& m);

  Vector solve(const Vector& b) const;
  Eigen::Index size() const { return lu_.rows(); }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

Vector lu_solve(const Matrix& m, const Vector& b);

Matrix gaussian(SeededRng& rng, Eigen::Index rows, Eigen::Index cols);
Vector gaussian_vector(SeededRng& rng, Eigen::Index n);

/// Gaussian direction rescaled to the requested l2 norm.
Vector random_vector_with_norm(SeededRng& rng, Eigen::Index n, double norm);

/// Each entry is nonzero independently with probability `density`; nonzero
/// values are standard normal (sparse_gaussian) or uniform on [0,1)
/// (sparse_uniform).
SparseMatrix sparse_gaussian(SeededRng& rng, Eigen::Index rows,
                             Eigen::Index cols, double density);
SparseMatrix sparse_uniform(SeededRng& rng, Eigen::Index rows,
                            Eigen::Index cols, double density);

/// Result of one Sinkhorn-Knopp step on |A|: scaled = D^-1 A E^-1.
struct Equilibration {
  Matrix scaled;
  Vector b;
  std::optional<Vector> c;
  Vector row_scale;  // diagonal of D
  Vector col_scale;  // diagonal of E

  /// x = E^-1 x_scaled.
  Vector unscale_primal(const Vector& x_scaled) const {
    return x_scaled.cwiseQuotient(col_scale);
  }
};

Equilibration equilibrate(const Matrix& a, const Vector& b,
                          const std::optional<Vector>& c = std::nullopt);

/// Largest singular value.
double spectral_norm(const Matrix& a);

}  // namespace aa
