#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aa/fixed_point.hpp"
#include "aa/linalg.hpp"
#include "aa/operators.hpp"
#include "aa/rng.hpp"

namespace aa {

// ---------------------------------------------------------------------------
// Generic proximal-gradient and splitting maps.

using Prox = std::function<Vector(const Vector&)>;
using Gradient = std::function<Vector(const Vector&)>;

/// prox(x - step * grad(x)).
Vector proximal_gradient_map(const Gradient& grad, const Prox& prox, double step,
                             const Vector& x);

/// Douglas-Rachford consensus step on stacked z = (z_1, ..., z_m), each of
/// length `block`: x_i = prox_i(z_i), z_i' = z_i + 2 xbar - x_i - zbar.
/// `prox` is called with the block index.
Vector consensus_map(const std::function<Vector(Eigen::Index, const Vector&)>& prox,
                     Eigen::Index blocks, Eigen::Index block, const Vector& z);

// ---------------------------------------------------------------------------
// Instances.

/// Regularized logistic regression, objective
/// (1/m) sum log(1 + exp(-y_i theta'x_i)) + lambda/2 ||theta||^2.
struct LogRegInstance {
  Matrix features;  // m x n, one sample per row
  Vector labels;    // +-1
  double lambda = 0.01;
  double step = 0.0;
};

struct NnlsInstance {
  Matrix a;
  Vector b;
  double step = 0.0;
};

/// Matrix game in slack form: minimize t + 1/2 ||P'u + s - t 1||^2 over
/// u in the simplex, s >= 0; the variable is stacked (u, s, t).
struct CcmgInstance {
  Matrix payoff;  // m x n
  double step = 0.0;
};

/// Elastic net: 1/2 ||Ax - b||^2 + mu ((1-beta)/2 ||x||^2 + beta ||x||_1).
struct EnrInstance {
  Matrix a;
  Vector b;
  double mu = 0.0;
  double beta = 0.5;
  double step = 0.0;
};

/// Heavy ball on A x + b = 0; the variable is stacked (x', x).
struct HbInstance {
  Matrix a;
  Vector b;
  double mu = 0.0;
  double lipschitz = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  /// Column scaling E when the data was equilibrated (x = E^-1 x_scaled).
  std::optional<Vector> col_scale;

  /// (sqrt(kappa) - 1) / (sqrt(kappa) + 1), kappa = L / mu.
  double rate_bound() const;
};

HbInstance make_hb_instance(Matrix a, Vector b, double mu, double lipschitz);

struct FacilityInstance {
  Matrix clients;  // m x n, one location per row
  double alpha = 1.0;
};

/// min c'x s.t. Ax + s = b, s in K, with its homogeneous self-dual
/// embedding Q u = v over C x C*, C = R^n x K* x R_+.
struct ConicProgram {
  Matrix a;
  Vector b;
  Vector c;
  ConeSpec cone;            // K
  Matrix q;                 // embedding matrix
  ConeSpec embedded;        // C
  LuFactorization i_plus_q; // (I + Q)
  /// Construction certificate (x*, y*, s*) when known.
  std::optional<Vector> x_star, y_star, s_star;

  Eigen::Index embedded_dim() const { return q.rows(); }
};

/// Assembles Q and C and factors I + Q.
ConicProgram make_conic_program(Matrix a, Vector b, Vector c, ConeSpec cone);

/// min c'x s.t. Ax = b, x in K, embedded with
/// Q = [0 -A' c; A 0 -b; -c' b' 0], C = K x R^m x R_+, and solved by
/// alternating projection between {Qu = v} and C x C*.
struct ApLpInstance {
  Matrix a;
  Vector b;
  Vector c;
  ConeSpec cone;      // K
  Matrix q;
  ConeSpec embedded;  // C
  Eigen::LLT<Matrix> normal;  // I + Q'Q
  std::optional<Vector> row_scale, col_scale;
  std::optional<Vector> x_star, y_star, s_star;  // in scaled coordinates

  Eigen::Index embedded_dim() const { return q.rows(); }
};

ApLpInstance make_ap_lp_instance(Matrix a, Vector b, Vector c, ConeSpec cone);

struct MdpInstance {
  Eigen::Index states = 0;
  Eigen::Index actions = 0;
  std::vector<SparseMatrix> transitions;  // one S x S row-stochastic per action
  Matrix rewards;                          // S x A
  double gamma = 0.9;
};

// ---------------------------------------------------------------------------
// Maps.

Vector gd_map(const LogRegInstance& inst, const Vector& theta);
double logreg_objective(const LogRegInstance& inst, const Vector& theta);
Vector logreg_gradient(const LogRegInstance& inst, const Vector& theta);

Vector pgd_map(const NnlsInstance& inst, const Vector& x);
Vector pgd_map(const CcmgInstance& inst, const Vector& x);
Vector ista_map(const EnrInstance& inst, const Vector& x);
Vector hb_map(const HbInstance& inst, const Vector& stacked);
Vector facility_map(const FacilityInstance& inst, const Vector& z);
Vector ap_map(const ApLpInstance& inst, const Vector& w);
Vector scs_map(const ConicProgram& prog, const Vector& w);
Vector bellman_op(const MdpInstance& mdp, const Vector& v);

/// Projection onto {(u, v) : Q u = v}.
Vector ap_subspace_projection(const ApLpInstance& inst, const Vector& w);

/// T with hb_map(z) = T z + const.
Matrix hb_iteration_matrix(const HbInstance& inst);

/// Vanilla value iteration until ||TV - V||_inf <= tol max(1, ||V||_inf).
Vector value_iteration_oracle(const MdpInstance& mdp, double tol = 1e-12,
                              int max_iterations = 1000000);

// ---------------------------------------------------------------------------
// Generators.

enum class Family {
  gd_logreg,
  hb_linear,
  ap_lp,
  pgd_nnls,
  pgd_ccmg,
  ista_enr,
  co_facility,
  scs_lp,
  scs_socp,
  vi_mdp,
};

std::string_view to_string(Family f);
Family parse_family(std::string_view name);
const std::vector<Family>& all_families();
/// The eight l2-nonexpansive families.
const std::vector<Family>& nonexpansive_families();

/// Named sizes and scalars for a family, e.g. {"m": 50, "n": 100}.
using FamilyParams = std::map<std::string, double>;

/// Desk-scale defaults (about a tenth of the published experiment sizes).
FamilyParams default_params(Family f);

LogRegInstance gen_logreg(SeededRng& rng, Eigen::Index samples, Eigen::Index features,
                          double lambda = 0.01);
/// Rows of features followed by a +-1 label; a non-numeric first line is
/// treated as a header.
LogRegInstance load_logreg_csv(const std::string& path, double lambda = 0.01);
NnlsInstance gen_nnls(SeededRng& rng, Eigen::Index m, Eigen::Index n);
CcmgInstance gen_ccmg(SeededRng& rng, Eigen::Index m, Eigen::Index n);
EnrInstance gen_enr(SeededRng& rng, Eigen::Index m, Eigen::Index n);
HbInstance gen_hb_linear(SeededRng& rng, Eigen::Index n, bool scale = true);
FacilityInstance gen_facility(SeededRng& rng, Eigen::Index m, Eigen::Index n,
                              double density = 0.01);
ApLpInstance gen_lp_sdhe(SeededRng& rng, Eigen::Index m, Eigen::Index n,
                         double density = 0.1, bool scale = true);
/// With `scale`, the data is equilibrated and the certificate mapped to the
/// scaled coordinates.
ConicProgram gen_cone_lp(SeededRng& rng, Eigen::Index m, Eigen::Index n,
                         bool scale = true);
ConicProgram gen_cone_socp(SeededRng& rng, Eigen::Index m, Eigen::Index n);
MdpInstance gen_mdp(SeededRng& rng, Eigen::Index states, Eigen::Index actions,
                    double gamma, double density = 0.01);

using ProblemInstance =
    std::variant<LogRegInstance, NnlsInstance, CcmgInstance, EnrInstance,
                 HbInstance, FacilityInstance, ApLpInstance, ConicProgram,
                 MdpInstance>;

/// A generated instance wrapped as a fixed-point problem, with the starting
/// point prescribed for its family.
struct GeneratedProblem {
  Family family;
  std::shared_ptr<const ProblemInstance> instance;
  FixedPointProblem problem;
  Vector x0;
};

/// Draws an instance from `rng` and its starting point from the same stream.
/// `params` entries override default_params(family); "csv" (logistic
/// regression only) is passed as a path through `csv_path`.
GeneratedProblem generate(Family family, SeededRng& rng,
                          const FamilyParams& params = {},
                          const std::string& csv_path = {});

/// Wraps an instance as a fixed-point problem. Known solutions are attached
/// where the construction provides one.
FixedPointProblem as_problem(Family family,
                             std::shared_ptr<const ProblemInstance> instance);

}  // namespace aa
