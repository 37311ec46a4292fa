#include "aa/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aa {

Vector proximal_gradient_map(const Gradient& grad, const Prox& prox, double step,
                             const Vector& x) {
  return prox(x - step * grad(x));
}

Vector consensus_map(const std::function<Vector(Eigen::Index, const Vector&)>& prox,
                     Eigen::Index blocks, Eigen::Index block, const Vector& z) {
  if (blocks < 1 || block < 1 || z.size() != blocks * block) {
    throw std::invalid_argument("consensus_map: z does not split into blocks");
  }
  Matrix xs(block, blocks);
  Vector x_bar = Vector::Zero(block);
  Vector z_bar = Vector::Zero(block);
  for (Eigen::Index i = 0; i < blocks; ++i) {
    const Vector zi = z.segment(i * block, block);
    xs.col(i) = prox(i, zi);
    x_bar += xs.col(i);
    z_bar += zi;
  }
  x_bar /= static_cast<double>(blocks);
  z_bar /= static_cast<double>(blocks);
  Vector out(z.size());
  for (Eigen::Index i = 0; i < blocks; ++i) {
    out.segment(i * block, block) =
        z.segment(i * block, block) + 2.0 * x_bar - xs.col(i) - z_bar;
  }
  return out;
}

// ---------------------------------------------------------------------------

double HbInstance::rate_bound() const {
  const double root_kappa = std::sqrt(lipschitz / mu);
  return (root_kappa - 1.0) / (root_kappa + 1.0);
}

HbInstance make_hb_instance(Matrix a, Vector b, double mu, double lipschitz) {
  if (a.rows() != a.cols() || b.size() != a.rows()) {
    throw std::invalid_argument("make_hb_instance: shape mismatch");
  }
  if (!(mu > 0.0 && lipschitz >= mu)) {
    throw std::invalid_argument("make_hb_instance: need 0 < mu <= L");
  }
  HbInstance inst;
  inst.a = std::move(a);
  inst.b = std::move(b);
  inst.mu = mu;
  inst.lipschitz = lipschitz;
  const double sl = std::sqrt(lipschitz);
  const double sm = std::sqrt(mu);
  inst.alpha = 4.0 / ((sl + sm) * (sl + sm));
  const double q = (sl - sm) / (sl + sm);
  inst.beta = q * q;
  return inst;
}

namespace {

void check_program_shapes(const Matrix& a, const Vector& b, const Vector& c,
                          const ConeSpec& cone) {
  if (b.size() != a.rows() || c.size() != a.cols()) {
    throw std::invalid_argument("conic program: A, b, c shapes disagree");
  }
  if (cone.dim() != a.rows()) {
    throw std::invalid_argument("conic program: cone dimension must equal rows of A");
  }
}

}  // namespace

ConicProgram make_conic_program(Matrix a, Vector b, Vector c, ConeSpec cone) {
  check_program_shapes(a, b, c, cone);
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index d = n + m + 1;
  ConicProgram prog;
  prog.q = Matrix::Zero(d, d);
  prog.q.block(0, n, n, m) = a.transpose();
  prog.q.block(0, n + m, n, 1) = c;
  prog.q.block(n, 0, m, n) = -a;
  prog.q.block(n, n + m, m, 1) = b;
  prog.q.block(n + m, 0, 1, n) = -c.transpose();
  prog.q.block(n + m, n, 1, m) = -b.transpose();
  prog.embedded.add(ConeKind::free, n);
  const ConeSpec dual = cone.dual();
  for (const auto& blk : dual.blocks()) prog.embedded.add(blk.kind, blk.dim);
  prog.embedded.add(ConeKind::nonneg, 1);
  prog.i_plus_q = LuFactorization(Matrix::Identity(d, d) + prog.q);
  prog.a = std::move(a);
  prog.b = std::move(b);
  prog.c = std::move(c);
  prog.cone = std::move(cone);
  return prog;
}

ApLpInstance make_ap_lp_instance(Matrix a, Vector b, Vector c, ConeSpec cone) {
  if (b.size() != a.rows() || c.size() != a.cols() || cone.dim() != a.cols()) {
    throw std::invalid_argument("make_ap_lp_instance: A, b, c, cone shapes disagree");
  }
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index d = n + m + 1;
  ApLpInstance inst;
  inst.q = Matrix::Zero(d, d);
  inst.q.block(0, n, n, m) = -a.transpose();
  inst.q.block(0, n + m, n, 1) = c;
  inst.q.block(n, 0, m, n) = a;
  inst.q.block(n, n + m, m, 1) = -b;
  inst.q.block(n + m, 0, 1, n) = -c.transpose();
  inst.q.block(n + m, n, 1, m) = b.transpose();
  for (const auto& blk : cone.blocks()) inst.embedded.add(blk.kind, blk.dim);
  inst.embedded.add(ConeKind::free, m);
  inst.embedded.add(ConeKind::nonneg, 1);
  inst.normal.compute(Matrix::Identity(d, d) + inst.q.transpose() * inst.q);
  inst.a = std::move(a);
  inst.b = std::move(b);
  inst.c = std::move(c);
  inst.cone = std::move(cone);
  return inst;
}

// ---------------------------------------------------------------------------
// Maps.

namespace {

double log1p_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double logreg_objective(const LogRegInstance& inst, const Vector& theta) {
  const Vector margins = inst.labels.cwiseProduct(inst.features * theta);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) loss += log1p_exp(-margins(i));
  return loss / static_cast<double>(margins.size()) +
         0.5 * inst.lambda * theta.squaredNorm();
}

Vector logreg_gradient(const LogRegInstance& inst, const Vector& theta) {
  const Vector margins = inst.labels.cwiseProduct(inst.features * theta);
  Vector weights(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    weights(i) = -inst.labels(i) * sigmoid(-margins(i));
  }
  return inst.features.transpose() * weights / static_cast<double>(margins.size()) +
         inst.lambda * theta;
}

Vector gd_map(const LogRegInstance& inst, const Vector& theta) {
  return theta - inst.step * logreg_gradient(inst, theta);
}

Vector pgd_map(const NnlsInstance& inst, const Vector& x) {
  const Vector grad = inst.a.transpose() * (inst.a * x - inst.b);
  return project_nonneg(x - inst.step * grad);
}

Vector pgd_map(const CcmgInstance& inst, const Vector& x) {
  const Eigen::Index m = inst.payoff.rows();
  const Eigen::Index n = inst.payoff.cols();
  const auto u = x.head(m);
  const auto s = x.segment(m, n);
  const double t = x(m + n);
  const Vector r = inst.payoff.transpose() * u + s - Vector::Constant(n, t);
  Vector out(x.size());
  out.head(m) = project_simplex(u - inst.step * (inst.payoff * r));
  out.segment(m, n) = project_nonneg(s - inst.step * r);
  out(m + n) = t - inst.step * (1.0 - r.sum());
  return out;
}

Vector ista_map(const EnrInstance& inst, const Vector& x) {
  const Vector grad =
      inst.a.transpose() * (inst.a * x - inst.b) + inst.mu * (1.0 - inst.beta) * x;
  return shrinkage(x - inst.step * grad, inst.step * inst.mu * inst.beta);
}

Vector hb_map(const HbInstance& inst, const Vector& stacked) {
  const Eigen::Index n = inst.a.rows();
  const auto current = stacked.head(n);
  const auto previous = stacked.tail(n);
  Vector out(2 * n);
  out.head(n) = current - inst.alpha * (inst.a * current + inst.b) +
                inst.beta * (current - previous);
  out.tail(n) = current;
  return out;
}

Matrix hb_iteration_matrix(const HbInstance& inst) {
  const Eigen::Index n = inst.a.rows();
  Matrix t = Matrix::Zero(2 * n, 2 * n);
  t.topLeftCorner(n, n) =
      (1.0 + inst.beta) * Matrix::Identity(n, n) - inst.alpha * inst.a;
  t.topRightCorner(n, n) = -inst.beta * Matrix::Identity(n, n);
  t.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  return t;
}

Vector facility_map(const FacilityInstance& inst, const Vector& z) {
  const Eigen::Index m = inst.clients.rows();
  const Eigen::Index n = inst.clients.cols();
  return consensus_map(
      [&](Eigen::Index i, const Vector& zi) {
        const Vector c = inst.clients.row(i).transpose();
        return Vector(c + prox_l2_norm(zi - c, inst.alpha));
      },
      m, n, z);
}

Vector ap_subspace_projection(const ApLpInstance& inst, const Vector& w) {
  const Eigen::Index d = inst.embedded_dim();
  if (w.size() != 2 * d) throw std::invalid_argument("ap map: wrong dimension");
  const Vector u = inst.normal.solve(w.head(d) + inst.q.transpose() * w.tail(d));
  Vector out(2 * d);
  out.head(d) = u;
  out.tail(d) = inst.q * u;
  return out;
}

Vector ap_map(const ApLpInstance& inst, const Vector& w) {
  const Eigen::Index d = inst.embedded_dim();
  if (w.size() != 2 * d) throw std::invalid_argument("ap map: wrong dimension");
  Vector projected(2 * d);
  projected.head(d) = inst.embedded.project(w.head(d));
  projected.tail(d) = inst.embedded.dual().project(w.tail(d));
  return ap_subspace_projection(inst, projected);
}

Vector scs_map(const ConicProgram& prog, const Vector& w) {
  const Eigen::Index d = prog.embedded_dim();
  if (w.size() != 2 * d) throw std::invalid_argument("scs map: wrong dimension");
  const auto u = w.head(d);
  const auto v = w.tail(d);
  const Vector u_tilde = prog.i_plus_q.solve(u + v);
  Vector out(2 * d);
  out.head(d) = prog.embedded.project(u_tilde - v);
  out.tail(d) = v - u_tilde + out.head(d);
  return out;
}

Vector bellman_op(const MdpInstance& mdp, const Vector& v) {
  if (v.size() != mdp.states) throw std::invalid_argument("bellman_op: wrong dimension");
  Vector best = Vector::Constant(mdp.states, -std::numeric_limits<double>::infinity());
  for (Eigen::Index a = 0; a < mdp.actions; ++a) {
    const Vector q = mdp.rewards.col(a) + mdp.gamma * (mdp.transitions[a] * v);
    best = best.cwiseMax(q);
  }
  return best;
}

Vector value_iteration_oracle(const MdpInstance& mdp, double tol, int max_iterations) {
  Vector v = Vector::Zero(mdp.states);
  for (int k = 0; k < max_iterations; ++k) {
    Vector next = bellman_op(mdp, v);
    const double change = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (change <= tol * std::max(1.0, v.lpNorm<Eigen::Infinity>())) return v;
  }
  throw std::runtime_error("value_iteration_oracle: no convergence");
}

// ---------------------------------------------------------------------------
// Families.

namespace {

struct FamilyName {
  Family family;
  std::string_view name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::gd_logreg, "gd_logreg"},   {Family::hb_linear, "hb_linear"},
    {Family::ap_lp, "ap_lp"},           {Family::pgd_nnls, "pgd_nnls"},
    {Family::pgd_ccmg, "pgd_ccmg"},     {Family::ista_enr, "ista_enr"},
    {Family::co_facility, "co_facility"}, {Family::scs_lp, "scs_lp"},
    {Family::scs_socp, "scs_socp"},     {Family::vi_mdp, "vi_mdp"},
};

}  // namespace

std::string_view to_string(Family f) {
  for (const auto& entry : kFamilyNames) {
    if (entry.family == f) return entry.name;
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (const auto& entry : kFamilyNames) {
    if (entry.name == name) return entry.family;
  }
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> families = [] {
    std::vector<Family> out;
    for (const auto& entry : kFamilyNames) out.push_back(entry.family);
    return out;
  }();
  return families;
}

const std::vector<Family>& nonexpansive_families() {
  static const std::vector<Family> families = {
      Family::gd_logreg, Family::ap_lp,       Family::pgd_nnls, Family::pgd_ccmg,
      Family::ista_enr,  Family::co_facility, Family::scs_lp,   Family::scs_socp,
  };
  return families;
}

FamilyParams default_params(Family f) {
  switch (f) {
    case Family::gd_logreg: return {{"m", 200}, {"n", 50}, {"lambda", 0.01}};
    case Family::hb_linear: return {{"n", 100}};
    case Family::ap_lp: return {{"m", 50}, {"n", 100}, {"density", 0.1}};
    case Family::pgd_nnls: return {{"m", 50}, {"n", 100}};
    case Family::pgd_ccmg: return {{"m", 50}, {"n", 150}};
    case Family::ista_enr: return {{"m", 50}, {"n", 100}};
    case Family::co_facility: return {{"m", 50}, {"n", 30}, {"density", 0.01}};
    case Family::scs_lp:
    case Family::scs_socp: return {{"m", 50}, {"n", 70}};
    case Family::vi_mdp:
      return {{"S", 50}, {"A", 20}, {"gamma", 0.9}, {"density", 0.01}};
  }
  throw std::invalid_argument("default_params: unknown family");
}

// ---------------------------------------------------------------------------
// Generators. Each one draws from `rng` in a fixed order so an instance is a
// pure function of the seed.

namespace {

void require_positive(Eigen::Index v, const char* what) {
  if (v < 1) throw std::invalid_argument(std::string(what) + " must be positive");
}

constexpr int kMaxDraws = 100;

}  // namespace

LogRegInstance gen_logreg(SeededRng& rng, Eigen::Index samples, Eigen::Index features,
                          double lambda) {
  require_positive(samples, "samples");
  require_positive(features, "features");
  LogRegInstance inst;
  inst.features = gaussian(rng, samples, features);
  const Vector truth = gaussian_vector(rng, features);
  const Vector noise = gaussian_vector(rng, samples);
  const Vector score = inst.features * truth / std::sqrt(double(features)) + 0.5 * noise;
  inst.labels = score.unaryExpr([](double s) { return s >= 0.0 ? 1.0 : -1.0; });
  inst.lambda = lambda;
  const double s = spectral_norm(inst.features);
  const double l = s * s / (4.0 * samples);
  inst.step = 2.0 / (l + lambda);
  return inst;
}

LogRegInstance load_logreg_csv(const std::string& path, double lambda) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw std::runtime_error(path + ": non-numeric row " + std::to_string(rows.size() + 1));
    }
    first = false;
    if (row.size() < 2) throw std::runtime_error(path + ": need features and a label");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(rows.front().size()) - 1;
  LogRegInstance inst;
  inst.features.resize(m, n);
  inst.labels.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) inst.features(i, j) = rows[i][j];
    const double y = rows[i][n];
    if (y != 1.0 && y != -1.0) {
      throw std::runtime_error(path + ": label on row " + std::to_string(i + 1) +
                               " is not +-1");
    }
    inst.labels(i) = y;
  }
  inst.lambda = lambda;
  const double s = spectral_norm(inst.features);
  inst.step = 2.0 / (s * s / (4.0 * m) + lambda);
  return inst;
}

NnlsInstance gen_nnls(SeededRng& rng, Eigen::Index m, Eigen::Index n) {
  require_positive(m, "m");
  require_positive(n, "n");
  NnlsInstance inst;
  inst.a = gaussian(rng, m, n);
  inst.b = gaussian_vector(rng, m);
  const double s = spectral_norm(inst.a);
  inst.step = 1.8 / (s * s);
  return inst;
}

CcmgInstance gen_ccmg(SeededRng& rng, Eigen::Index m, Eigen::Index n) {
  require_positive(m, "m");
  require_positive(n, "n");
  CcmgInstance inst;
  inst.payoff = gaussian(rng, m, n);
  Matrix gram = inst.payoff.transpose() * inst.payoff;
  gram += Matrix::Identity(n, n);
  gram.array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  inst.step = 1.8 / eig.eigenvalues().maxCoeff();
  return inst;
}

EnrInstance gen_enr(SeededRng& rng, Eigen::Index m, Eigen::Index n) {
  require_positive(m, "m");
  require_positive(n, "n");
  EnrInstance inst;
  inst.a = gaussian(rng, m, n);
  const Vector x_hat = Matrix(sparse_gaussian(rng, n, 1, 0.1)).col(0);
  const Vector w = gaussian_vector(rng, m);
  inst.b = inst.a * x_hat + 0.1 * w;
  inst.beta = 0.5;
  inst.mu = 0.001 * (inst.a.transpose() * inst.b).lpNorm<Eigen::Infinity>();
  const double s = spectral_norm(inst.a);
  inst.step = 1.8 / (s * s + inst.mu * (1.0 - inst.beta));
  return inst;
}

HbInstance gen_hb_linear(SeededRng& rng, Eigen::Index n, bool scale) {
  require_positive(n, "n");
  if (n < 2) throw std::invalid_argument("gen_hb_linear: n must be >= 2");
  const Matrix b_factor = gaussian(rng, n / 2, n);
  Matrix a = b_factor.transpose() * b_factor + 0.005 * Matrix::Identity(n, n);
  Vector b = gaussian_vector(rng, n);
  constexpr double kMu = 0.005;
  if (!scale) {
    const double l = a.norm();
    return make_hb_instance(std::move(a), std::move(b), kMu, l);
  }
  // D^-1 A E^-1 is similar to (DE)^-1/2 A (DE)^-1/2, so its spectrum lies in
  // [kMu * min 1/(d_i e_i), ||D^-1 A E^-1||_F].
  Equilibration eq = equilibrate(a, b);
  const double mu = kMu * eq.row_scale.cwiseProduct(eq.col_scale).cwiseInverse().minCoeff();
  const double l = eq.scaled.norm();
  HbInstance inst = make_hb_instance(std::move(eq.scaled), std::move(eq.b), mu, l);
  inst.col_scale = std::move(eq.col_scale);
  return inst;
}

FacilityInstance gen_facility(SeededRng& rng, Eigen::Index m, Eigen::Index n,
                              double density) {
  require_positive(m, "m");
  require_positive(n, "n");
  FacilityInstance inst;
  inst.clients = Matrix(sparse_gaussian(rng, m, n, density));
  inst.alpha = 1.0;
  return inst;
}

ApLpInstance gen_lp_sdhe(SeededRng& rng, Eigen::Index m, Eigen::Index n,
                         double density, bool scale) {
  require_positive(m, "m");
  require_positive(n, "n");
  // Sparse draws at small sizes can leave a row or column empty, which the
  // scaling cannot handle; redraw a bounded number of times.
  for (int attempt = 1;; ++attempt) {
    const Matrix a = Matrix(sparse_gaussian(rng, m, n, density));
    const Vector z = gaussian_vector(rng, n);
    const Vector y = gaussian_vector(rng, m);
    const Vector x_star = z.cwiseMax(0.0);
    const Vector s_star = (-z).cwiseMax(0.0);
    const Vector b = a * x_star;
    const Vector c = a.transpose() * y + s_star;
    ConeSpec cone{{ConeKind::nonneg, n}};
    if (!scale) {
      ApLpInstance inst = make_ap_lp_instance(a, b, c, std::move(cone));
      inst.x_star = x_star;
      inst.y_star = y;
      inst.s_star = s_star;
      return inst;
    }
    try {
      Equilibration eq = equilibrate(a, b, c);
      ApLpInstance inst =
          make_ap_lp_instance(std::move(eq.scaled), std::move(eq.b), *eq.c, std::move(cone));
      inst.x_star = x_star.cwiseProduct(eq.col_scale);
      inst.y_star = y.cwiseProduct(eq.row_scale);
      inst.s_star = s_star.cwiseQuotient(eq.col_scale);
      inst.row_scale = std::move(eq.row_scale);
      inst.col_scale = std::move(eq.col_scale);
      return inst;
    } catch (const LinalgError&) {
      if (attempt == kMaxDraws) throw;
    }
  }
}

namespace {

Matrix cone_program_matrix(SeededRng& rng, Eigen::Index m, Eigen::Index n) {
  const Eigen::Index half = n / 2;
  Matrix a = Matrix::Zero(m, n);
  if (half > 0) a.leftCols(half) = Matrix(sparse_gaussian(rng, m, half, 0.1));
  a.rightCols(n - half) = Matrix::Identity(m, n - half);
  a += 1e-3 * gaussian(rng, m, n);
  return a;
}

ConicProgram finish_cone_program(SeededRng& rng, Matrix a, const Vector& s_star,
                                 const Vector& y_star, ConeSpec cone) {
  const Vector x_star = gaussian_vector(rng, a.cols());
  Vector b = a * x_star + s_star;
  Vector c = -(a.transpose() * y_star);
  ConicProgram prog = make_conic_program(std::move(a), std::move(b), std::move(c),
                                         std::move(cone));
  prog.x_star = x_star;
  prog.y_star = y_star;
  prog.s_star = s_star;
  return prog;
}

}  // namespace

ConicProgram gen_cone_lp(SeededRng& rng, Eigen::Index m, Eigen::Index n, bool scale) {
  require_positive(m, "m");
  require_positive(n, "n");
  Matrix a = cone_program_matrix(rng, m, n);
  const Vector z = gaussian_vector(rng, m);
  const Vector s_star = z.cwiseMax(0.0);
  const Vector y_star = (-z).cwiseMax(0.0);
  if (!scale) {
    return finish_cone_program(rng, std::move(a), s_star, y_star,
                               ConeSpec{{ConeKind::nonneg, m}});
  }
  // Row scaling maps the nonnegative orthant to itself, so the scaled data
  // is again an LP with certificate (E x*, D y*, D^-1 s*).
  const Vector x_star = gaussian_vector(rng, n);
  const Vector b = a * x_star + s_star;
  const Vector c = -(a.transpose() * y_star);
  Equilibration eq = equilibrate(a, b, c);
  ConicProgram prog = make_conic_program(std::move(eq.scaled), std::move(eq.b), *eq.c,
                                         ConeSpec{{ConeKind::nonneg, m}});
  prog.x_star = x_star.cwiseProduct(eq.col_scale);
  prog.y_star = y_star.cwiseProduct(eq.row_scale);
  prog.s_star = s_star.cwiseQuotient(eq.row_scale);
  return prog;
}

ConicProgram gen_cone_socp(SeededRng& rng, Eigen::Index m, Eigen::Index n) {
  require_positive(m, "m");
  require_positive(n, "n");
  Matrix a = cone_program_matrix(rng, m, n);
  const Vector z = gaussian_vector(rng, m);
  const Vector s = project_soc(z);
  return finish_cone_program(rng, std::move(a), s, s - z, ConeSpec{{ConeKind::soc, m}});
}

MdpInstance gen_mdp(SeededRng& rng, Eigen::Index states, Eigen::Index actions,
                    double gamma, double density) {
  require_positive(states, "S");
  require_positive(actions, "A");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gen_mdp: gamma must lie in (0, 1)");
  }
  MdpInstance mdp;
  mdp.states = states;
  mdp.actions = actions;
  mdp.gamma = gamma;
  SparseMatrix eye(states, states);
  eye.setIdentity();
  for (Eigen::Index a = 0; a < actions; ++a) {
    SparseMatrix p = sparse_uniform(rng, states, states, density);
    p += 0.001 * eye;
    for (Eigen::Index i = 0; i < states; ++i) {
      const double total = p.row(i).sum();
      for (SparseMatrix::InnerIterator it(p, i); it; ++it) it.valueRef() /= total;
    }
    p.makeCompressed();
    mdp.transitions.push_back(std::move(p));
  }
  mdp.rewards = Matrix(sparse_gaussian(rng, states, actions, density));
  return mdp;
}

// ---------------------------------------------------------------------------
// Assembly.

namespace {

template <typename T>
const T& instance_as(const std::shared_ptr<const ProblemInstance>& instance, Family f) {
  const T* p = std::get_if<T>(instance.get());
  if (!p) {
    throw std::invalid_argument("instance does not match family " +
                                std::string(to_string(f)));
  }
  return *p;
}

template <typename T, typename F>
Map bind_map(const std::shared_ptr<const ProblemInstance>& instance, Family family, F f) {
  const T& inst = instance_as<T>(instance, family);
  return [instance, &inst, f](const Vector& x) { return f(inst, x); };
}

}  // namespace

FixedPointProblem as_problem(Family family,
                             std::shared_ptr<const ProblemInstance> instance) {
  if (!instance) throw std::invalid_argument("as_problem: null instance");
  FixedPointProblem p;
  p.name = std::string(to_string(family));
  switch (family) {
    case Family::gd_logreg: {
      const auto& inst = instance_as<LogRegInstance>(instance, family);
      p.dim = inst.features.cols();
      p.map = bind_map<LogRegInstance>(instance, family,
                                   [](const auto& i, const Vector& x) { return gd_map(i, x); });
      break;
    }
    case Family::pgd_nnls: {
      const auto& inst = instance_as<NnlsInstance>(instance, family);
      p.dim = inst.a.cols();
      p.map = bind_map<NnlsInstance>(instance, family,
                                 [](const auto& i, const Vector& x) { return pgd_map(i, x); });
      break;
    }
    case Family::pgd_ccmg: {
      const auto& inst = instance_as<CcmgInstance>(instance, family);
      p.dim = inst.payoff.rows() + inst.payoff.cols() + 1;
      p.map = bind_map<CcmgInstance>(instance, family,
                                 [](const auto& i, const Vector& x) { return pgd_map(i, x); });
      break;
    }
    case Family::ista_enr: {
      const auto& inst = instance_as<EnrInstance>(instance, family);
      p.dim = inst.a.cols();
      p.map = bind_map<EnrInstance>(instance, family,
                                [](const auto& i, const Vector& x) { return ista_map(i, x); });
      break;
    }
    case Family::hb_linear: {
      const auto& inst = instance_as<HbInstance>(instance, family);
      const Eigen::Index n = inst.a.rows();
      p.dim = 2 * n;
      p.map = bind_map<HbInstance>(instance, family,
                               [](const auto& i, const Vector& x) { return hb_map(i, x); });
      p.regime = Regime::contractive(inst.rate_bound(), "hb");
      const Vector x_star = -lu_solve(inst.a, inst.b);
      Vector stacked(2 * n);
      stacked << x_star, x_star;
      p.known_solution = std::move(stacked);
      break;
    }
    case Family::co_facility: {
      const auto& inst = instance_as<FacilityInstance>(instance, family);
      p.dim = inst.clients.size();
      p.map = bind_map<FacilityInstance>(
          instance, family, [](const auto& i, const Vector& x) { return facility_map(i, x); });
      break;
    }
    case Family::ap_lp: {
      const auto& inst = instance_as<ApLpInstance>(instance, family);
      const Eigen::Index d = inst.embedded_dim();
      p.dim = 2 * d;
      p.map = bind_map<ApLpInstance>(instance, family,
                                 [](const auto& i, const Vector& x) { return ap_map(i, x); });
      if (inst.x_star && inst.y_star && inst.s_star) {
        const Eigen::Index n = inst.a.cols();
        const Eigen::Index m = inst.a.rows();
        Vector w = Vector::Zero(2 * d);
        w.head(n) = *inst.x_star;
        w.segment(n, m) = *inst.y_star;
        w(n + m) = 1.0;
        w.segment(d, n) = *inst.s_star;
        p.known_solution = std::move(w);
      }
      break;
    }
    case Family::scs_lp:
    case Family::scs_socp: {
      const auto& prog = instance_as<ConicProgram>(instance, family);
      const Eigen::Index d = prog.embedded_dim();
      p.dim = 2 * d;
      p.map = bind_map<ConicProgram>(instance, family,
                                 [](const auto& i, const Vector& x) { return scs_map(i, x); });
      if (prog.x_star && prog.y_star && prog.s_star) {
        const Eigen::Index n = prog.a.cols();
        const Eigen::Index m = prog.a.rows();
        Vector w = Vector::Zero(2 * d);
        w.head(n) = *prog.x_star;
        w.segment(n, m) = *prog.y_star;
        w(n + m) = 1.0;
        w.segment(d + n, m) = *prog.s_star;
        p.known_solution = std::move(w);
      }
      break;
    }
    case Family::vi_mdp: {
      const auto& mdp = instance_as<MdpInstance>(instance, family);
      p.dim = mdp.states;
      p.map = bind_map<MdpInstance>(instance, family,
                                [](const auto& i, const Vector& x) { return bellman_op(i, x); });
      p.regime = Regime::contractive(mdp.gamma, "linf");
      p.known_solution = value_iteration_oracle(mdp);
      break;
    }
  }
  return p;
}

namespace {

double param(const FamilyParams& params, const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end()) throw std::invalid_argument("missing parameter '" + key + "'");
  return it->second;
}

Eigen::Index size_param(const FamilyParams& params, const std::string& key) {
  const double v = param(params, key);
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw std::invalid_argument("parameter '" + key + "' must be a positive integer");
  }
  return static_cast<Eigen::Index>(v);
}

}  // namespace

GeneratedProblem generate(Family family, SeededRng& rng, const FamilyParams& params,
                          const std::string& csv_path) {
  FamilyParams merged = default_params(family);
  for (const auto& [key, value] : params) {
    if (!merged.count(key)) {
      throw std::invalid_argument("family " + std::string(to_string(family)) +
                                  " has no parameter '" + key + "'");
    }
    merged[key] = value;
  }
  if (!csv_path.empty() && family != Family::gd_logreg) {
    throw std::invalid_argument("a CSV dataset only applies to gd_logreg");
  }

  std::shared_ptr<ProblemInstance> instance;
  switch (family) {
    case Family::gd_logreg:
      instance = std::make_shared<ProblemInstance>(
          csv_path.empty()
              ? gen_logreg(rng, size_param(merged, "m"), size_param(merged, "n"),
                           param(merged, "lambda"))
              : load_logreg_csv(csv_path, param(merged, "lambda")));
      break;
    case Family::hb_linear:
      instance = std::make_shared<ProblemInstance>(gen_hb_linear(rng, size_param(merged, "n")));
      break;
    case Family::ap_lp:
      instance = std::make_shared<ProblemInstance>(gen_lp_sdhe(
          rng, size_param(merged, "m"), size_param(merged, "n"), param(merged, "density")));
      break;
    case Family::pgd_nnls:
      instance = std::make_shared<ProblemInstance>(
          gen_nnls(rng, size_param(merged, "m"), size_param(merged, "n")));
      break;
    case Family::pgd_ccmg:
      instance = std::make_shared<ProblemInstance>(
          gen_ccmg(rng, size_param(merged, "m"), size_param(merged, "n")));
      break;
    case Family::ista_enr:
      instance = std::make_shared<ProblemInstance>(
          gen_enr(rng, size_param(merged, "m"), size_param(merged, "n")));
      break;
    case Family::co_facility:
      instance = std::make_shared<ProblemInstance>(gen_facility(
          rng, size_param(merged, "m"), size_param(merged, "n"), param(merged, "density")));
      break;
    case Family::scs_lp:
      instance = std::make_shared<ProblemInstance>(
          gen_cone_lp(rng, size_param(merged, "m"), size_param(merged, "n")));
      break;
    case Family::scs_socp:
      instance = std::make_shared<ProblemInstance>(
          gen_cone_socp(rng, size_param(merged, "m"), size_param(merged, "n")));
      break;
    case Family::vi_mdp:
      instance = std::make_shared<ProblemInstance>(
          gen_mdp(rng, size_param(merged, "S"), size_param(merged, "A"),
                  param(merged, "gamma"), param(merged, "density")));
      break;
  }

  GeneratedProblem out{family, instance, as_problem(family, instance), Vector()};
  const Eigen::Index d = out.problem.dim;
  switch (family) {
    case Family::gd_logreg:
      out.x0 = random_vector_with_norm(rng, d, 0.001);
      break;
    case Family::hb_linear: {
      const Vector z = random_vector_with_norm(rng, d / 2, 1.0);
      out.x0.resize(d);
      out.x0 << z, z;
      break;
    }
    case Family::vi_mdp:
      out.x0 = Vector::Zero(d);
      break;
    default:
      out.x0 = random_vector_with_norm(rng, d, 1.0);
      break;
  }
  return out;
}

}  // namespace aa
