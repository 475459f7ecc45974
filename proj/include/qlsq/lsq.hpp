#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qlsq/common.hpp"

namespace qlsq {

/// Overdetermined stochastic linear model y = A f + noise.
///
/// `weights`, when present, holds the positive diagonal of W (the inverse
/// noise covariance); absent means W = I, which still gives the correct
/// averaged inversion at slightly enhanced fluctuation.
struct LinearSystem {
  Eigen::MatrixXcd design;                 ///< A, m0 x n0 with m0 >= n0
  Eigen::VectorXcd data;                   ///< y, length m0
  std::optional<Eigen::VectorXd> weights;  ///< diagonal of W, length m0

  void validate() const;
};

struct RegularizationConfig {
  enum class Method { None, Tikhonov, SvdTruncation };

  Method method = Method::None;
  double lambda = 0.0;  ///< Tikhonov strength (> 0)
  double sigma0 = 0.0;  ///< eigenvalue cutoff of the pseudoinverse (>= 0)

  static RegularizationConfig none() { return {}; }
  static RegularizationConfig tikhonov(double lambda);
  static RegularizationConfig svd_truncation(double sigma0);

  void validate() const;
  bool is_none() const { return method == Method::None; }
};

/// Condition-number estimate above which the unregularized normal equations
/// are refused; roughly the double-precision noise floor.
inline constexpr double kConditionLimit = 1e12;

/// Applies the (optionally regularized) inverse of a Hermitian positive
/// semidefinite normal matrix G:
///   None          F = G^-1              (refused when quasi-singular)
///   Tikhonov      F = (lambda^2 I + G)^-1
///   SvdTruncation F = pseudoinverse of G with eigenvalues below sigma0
///                     treated as zeros
class NormalMatrixInverter {
 public:
  NormalMatrixInverter(const Eigen::MatrixXcd& gram, const RegularizationConfig& reg);

  const Eigen::MatrixXcd& inverse() const { return inverse_; }
  double condition_estimate() const { return condition_; }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& rhs) const { return inverse_ * rhs; }

 private:
  Eigen::MatrixXcd inverse_;
  double condition_ = 0.0;
};

/// Unregularized weighted least squares, f = (A^H W A)^-1 A^H W y.
/// Throws NumericalError advising the regularized path when A^H W A is
/// quasi-singular.
Eigen::VectorXcd ls_solve(const LinearSystem& sys);

/// Tikhonov-regularized solution f = (lambda^2 I + A^H A)^-1 A^H y; always
/// well defined for lambda > 0. Weights are ignored (W = I convention).
Eigen::VectorXcd tikhonov_solve(const LinearSystem& sys, double lambda);

/// Truncated-eigenvalue pseudoinverse solution,
/// f = Pseudoinverse(A^H A; sigma0) A^H y.
Eigen::VectorXcd svd_solve(const LinearSystem& sys, double sigma0);

/// Dispatch on the regularization method.
Eigen::VectorXcd solve(const LinearSystem& sys, const RegularizationConfig& reg);

struct LCurvePoint {
  double lambda = 0.0;
  double residual_norm = 0.0;  ///< ||y - A f||
  double solution_norm = 0.0;  ///< ||f||
};

struct LCurve {
  std::vector<LCurvePoint> points;
  std::optional<std::size_t> corner;  ///< index of the max-curvature point

  std::optional<double> corner_lambda() const {
    if (!corner) return std::nullopt;
    return points[*corner].lambda;
  }
};

/// Tikhonov sweep over ascending positive lambdas. The corner is the
/// interior point of maximum discrete curvature of the log-log polyline,
/// with both axes normalized to the sweep's bounding box (the corner as read
/// off a plot); ties break toward larger lambda. Fewer than 3 lambdas yield
/// points without a corner.
LCurve l_curve(const LinearSystem& sys, const std::vector<double>& lambdas);

using SolveFn = std::function<Eigen::VectorXcd(const Eigen::VectorXcd& data)>;
using ForwardFn =
    std::function<Eigen::VectorXcd(const Eigen::VectorXcd& solution, std::uint64_t seed)>;

/// Parametric-bootstrap bias estimate: synthetic data are generated from the
/// reconstructed solution and re-inverted; the mean shift of the replicas
/// against the original solution estimates the bias. Deterministic for a
/// fixed seed; replicate j uses the derived stream (seed, j).
Eigen::VectorXcd bias_estimate(const SolveFn& solve, const ForwardFn& forward,
                               const Eigen::VectorXcd& solution, int replicates,
                               std::uint64_t seed);

}  // namespace qlsq
