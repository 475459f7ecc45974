#include "qlsq/lsq.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "qlsq/rng.hpp"

namespace qlsq {

void LinearSystem::validate() const {
  if (design.rows() < design.cols())
    throw ValidationError("linear system must be overdetermined (rows >= cols)");
  if (data.size() != design.rows())
    throw ValidationError("data length does not match the design matrix");
  if (weights) {
    if (weights->size() != design.rows())
      throw ValidationError("weight vector length does not match the design matrix");
    if ((weights->array() <= 0.0).any()) throw ValidationError("weights must be positive");
  }
}

RegularizationConfig RegularizationConfig::tikhonov(double lambda) {
  RegularizationConfig reg;
  reg.method = Method::Tikhonov;
  reg.lambda = lambda;
  reg.validate();
  return reg;
}

RegularizationConfig RegularizationConfig::svd_truncation(double sigma0) {
  RegularizationConfig reg;
  reg.method = Method::SvdTruncation;
  reg.sigma0 = sigma0;
  reg.validate();
  return reg;
}

void RegularizationConfig::validate() const {
  if (method == Method::Tikhonov && !(lambda > 0.0))
    throw ValidationError("Tikhonov lambda must be positive");
  if (method == Method::SvdTruncation && !(sigma0 >= 0.0))
    throw ValidationError("SVD truncation sigma0 must be nonnegative");
}

NormalMatrixInverter::NormalMatrixInverter(const Eigen::MatrixXcd& gram,
                                           const RegularizationConfig& reg) {
  reg.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the normal matrix failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double ev_max = ev.maxCoeff();
  const double ev_min = ev.minCoeff();
  condition_ = ev_max / std::max(ev_min, ev_max * 1e-300);
  if (ev_min <= 0.0) condition_ = std::numeric_limits<double>::infinity();

  Eigen::VectorXd inv_ev(ev.size());
  switch (reg.method) {
    case RegularizationConfig::Method::None:
      if (!(condition_ < kConditionLimit)) {
        throw NumericalError(
            "normal matrix is quasi-singular (condition estimate " +
            std::to_string(condition_) + "); use regularized inversion");
      }
      inv_ev = ev.cwiseInverse();
      break;
    case RegularizationConfig::Method::Tikhonov:
      inv_ev = (ev.array() + reg.lambda * reg.lambda).inverse();
      break;
    case RegularizationConfig::Method::SvdTruncation:
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        inv_ev(i) = std::fabs(ev(i)) < reg.sigma0 ? 0.0 : 1.0 / ev(i);
      break;
  }
  inverse_ = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().adjoint();
}

namespace {

Eigen::MatrixXcd weighted_normal(const LinearSystem& sys, Eigen::VectorXcd& rhs,
                                 bool use_weights) {
  if (use_weights && sys.weights) {
    const auto w = sys.weights->asDiagonal();
    rhs = sys.design.adjoint() * (w * sys.data);
    return sys.design.adjoint() * w * sys.design;
  }
  rhs = sys.design.adjoint() * sys.data;
  return sys.design.adjoint() * sys.design;
}

}  // namespace

Eigen::VectorXcd ls_solve(const LinearSystem& sys) {
  sys.validate();
  Eigen::VectorXcd rhs;
  const Eigen::MatrixXcd normal = weighted_normal(sys, rhs, true);
  return NormalMatrixInverter(normal, RegularizationConfig::none()).apply(rhs);
}

Eigen::VectorXcd tikhonov_solve(const LinearSystem& sys, double lambda) {
  sys.validate();
  Eigen::VectorXcd rhs;
  const Eigen::MatrixXcd normal = weighted_normal(sys, rhs, false);
  return NormalMatrixInverter(normal, RegularizationConfig::tikhonov(lambda)).apply(rhs);
}

Eigen::VectorXcd svd_solve(const LinearSystem& sys, double sigma0) {
  sys.validate();
  Eigen::VectorXcd rhs;
  const Eigen::MatrixXcd normal = weighted_normal(sys, rhs, false);
  return NormalMatrixInverter(normal, RegularizationConfig::svd_truncation(sigma0)).apply(rhs);
}

Eigen::VectorXcd solve(const LinearSystem& sys, const RegularizationConfig& reg) {
  switch (reg.method) {
    case RegularizationConfig::Method::Tikhonov:
      return tikhonov_solve(sys, reg.lambda);
    case RegularizationConfig::Method::SvdTruncation:
      return svd_solve(sys, reg.sigma0);
    default:
      return ls_solve(sys);
  }
}

LCurve l_curve(const LinearSystem& sys, const std::vector<double>& lambdas) {
  sys.validate();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw ValidationError("l_curve lambdas must be positive");
    if (i > 0 && lambdas[i] <= lambdas[i - 1])
      throw ValidationError("l_curve lambdas must be sorted ascending");
  }

  Eigen::VectorXcd rhs;
  const Eigen::MatrixXcd normal = weighted_normal(sys, rhs, false);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(normal);
  const Eigen::VectorXcd rhs_eig = eig.eigenvectors().adjoint() * rhs;

  LCurve curve;
  curve.points.reserve(lambdas.size());
  for (const double lambda : lambdas) {
    const Eigen::VectorXd inv_ev =
        (eig.eigenvalues().array() + lambda * lambda).inverse();
    const Eigen::VectorXcd f =
        eig.eigenvectors() * (inv_ev.array() * rhs_eig.array()).matrix();
    curve.points.push_back({lambda, (sys.data - sys.design * f).norm(), f.norm()});
  }

  if (curve.points.size() < 3) return curve;

  // Log-log coordinates normalized to the sweep's bounding box, so the
  // curvature matches what the plotted L curve shows regardless of how
  // differently the two axes span.
  const std::size_t m = curve.points.size();
  Eigen::VectorXd lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx(i) = std::log10(std::max(curve.points[i].residual_norm, 1e-300));
    ly(i) = std::log10(std::max(curve.points[i].solution_norm, 1e-300));
  }
  const double sx = std::max(lx.maxCoeff() - lx.minCoeff(), 1e-12);
  const double sy = std::max(ly.maxCoeff() - ly.minCoeff(), 1e-12);
  lx = (lx.array() - lx.minCoeff()) / sx;
  ly = (ly.array() - ly.minCoeff()) / sy;

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double ax = lx(i) - lx(i - 1), ay = ly(i) - ly(i - 1);
    const double bx = lx(i + 1) - lx(i), by = ly(i + 1) - ly(i);
    const double cx = lx(i + 1) - lx(i - 1), cy = ly(i + 1) - ly(i - 1);
    const double denom = std::hypot(ax, ay) * std::hypot(bx, by) * std::hypot(cx, cy);
    if (denom < 1e-30) continue;
    // Signed Menger curvature; positive turns point into the L corner.
    const double curvature = 2.0 * (ax * by - ay * bx) / denom;
    if (curvature >= best) {
      best = curvature;
      curve.corner = i;
    }
  }
  return curve;
}

Eigen::VectorXcd bias_estimate(const SolveFn& solve_fn, const ForwardFn& forward,
                               const Eigen::VectorXcd& solution, int replicates,
                               std::uint64_t seed) {
  if (replicates < 2) throw ValidationError("bias_estimate needs at least 2 replicates");
  Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(solution.size());
  for (int j = 0; j < replicates; ++j) {
    std::uint64_t h = seed;
    splitmix64(h);
    h ^= static_cast<std::uint64_t>(j) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    const Eigen::VectorXcd replica = solve_fn(forward(solution, h));
    if (replica.size() != solution.size())
      throw ValidationError("bias_estimate: replica solution has mismatched size");
    mean += replica;
  }
  mean /= static_cast<double>(replicates);
  return mean - solution;
}

}  // namespace qlsq
