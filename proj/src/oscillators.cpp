#include "qlsq/oscillators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace qlsq {

OscillatorModel OscillatorModel::harmonic(double omega) {
  if (!(omega > 0.0)) throw ValidationError("harmonic frequency must be positive");
  OscillatorModel m;
  m.kind = Kind::Harmonic;
  m.omega_h = omega;
  return m;
}

OscillatorModel OscillatorModel::morse(double a) {
  if (!(a > 0.0)) throw ValidationError("Morse anharmonicity must be positive");
  OscillatorModel m;
  m.kind = Kind::Morse;
  m.anharmonicity = a;
  return m;
}

int bound_state_count(const OscillatorModel& model) {
  if (!model.is_morse())
    throw ValidationError("bound_state_count: harmonic oscillators have no bound-state limit");
  const double a = model.anharmonicity;
  return static_cast<int>(std::floor(1.0 / (a * a) - 0.5));
}

int max_level(const OscillatorModel& model) {
  if (model.is_morse()) return bound_state_count(model);
  return std::numeric_limits<int>::max() - 1;
}

void require_level(const OscillatorModel& model, int n) {
  if (n < 0) throw ValidationError("level index must be nonnegative, got " + std::to_string(n));
  if (model.is_morse() && n > bound_state_count(model)) {
    throw ValidationError("Morse level " + std::to_string(n) + " exceeds the bound spectrum (n_M = " +
                          std::to_string(bound_state_count(model)) + ")");
  }
}

double eigenfrequency(const OscillatorModel& model, int n) {
  require_level(model, n);
  const double nh = n + 0.5;
  if (!model.is_morse()) return model.omega_h * nh;
  const double a2 = model.anharmonicity * model.anharmonicity;
  return nh - 0.5 * a2 * nh * nh;
}

namespace {

// Normalized Hermite-function recurrence; values stay O(1) for all n.
void harmonic_levels(double x, int n_max, double* out) {
  const double pi_quarter = std::pow(std::numbers::pi, -0.25);
  double prev = 0.0;
  double cur = pi_quarter * std::exp(-0.5 * x * x);
  out[0] = cur;
  for (int n = 0; n < n_max; ++n) {
    const double next =
        x * std::sqrt(2.0 / (n + 1.0)) * cur - std::sqrt(n / (n + 1.0)) * prev;
    prev = cur;
    cur = next;
    out[n + 1] = cur;
  }
}

// Morse levels via the generalized Laguerre upward recurrence, with the
// normalization folded in log space. The recurrence values are rescaled
// whenever they grow large so no intermediate overflows.
void morse_levels(double a, double x, int n_max, double* out) {
  const double inv_a2 = 1.0 / (a * a);
  const double z = 2.0 * inv_a2 * std::exp(-a * x);
  const double log_z = std::log(z);
  for (int n = 0; n <= n_max; ++n) {
    const double b = 2.0 * inv_a2 - 2.0 * n - 1.0;
    const double log_norm =
        0.5 * (std::log(a) + std::log(b) + std::lgamma(n + 1.0) - std::lgamma(n + b + 1.0));
    double log_pre = log_norm - 0.5 * z + 0.5 * b * log_z;

    // L_k^b(z) for k = 0..n with periodic rescaling.
    double lkm1 = 0.0;
    double lk = 1.0;
    double log_scale = 0.0;
    for (int k = 0; k < n; ++k) {
      const double next = ((2.0 * k + 1.0 + b - z) * lk - (k + b) * lkm1) / (k + 1.0);
      lkm1 = lk;
      lk = next;
      const double mag = std::max(std::fabs(lk), std::fabs(lkm1));
      if (mag > 1e100) {
        lk /= mag;
        lkm1 /= mag;
        log_scale += std::log(mag);
      }
    }
    if (lk == 0.0) {
      out[n] = 0.0;
    } else {
      const double sign = lk > 0.0 ? 1.0 : -1.0;
      out[n] = sign * std::exp(log_pre + log_scale + std::log(std::fabs(lk)));
    }
  }
}

}  // namespace

Eigen::VectorXd eigenfunctions(const OscillatorModel& model, int n_max, double x) {
  require_level(model, n_max);
  Eigen::VectorXd values(n_max + 1);
  if (model.is_morse())
    morse_levels(model.anharmonicity, x, n_max, values.data());
  else
    harmonic_levels(x, n_max, values.data());
  return values;
}

double eigenfunction(const OscillatorModel& model, int n, double x) {
  return eigenfunctions(model, n, x)(n);
}

void gauss_legendre(int order, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (order < 1) throw ValidationError("Gauss-Legendre order must be >= 1");
  nodes.resize(order);
  weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess, polished by Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes(i) = -x;
    nodes(order - 1 - i) = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights(i) = w;
    weights(order - 1 - i) = w;
  }
}

Eigen::MatrixXd eigenfunction_table(const OscillatorModel& model, int n_max,
                                    const SpatialGrid& grid) {
  Eigen::MatrixXd table(grid.size(), n_max + 1);
  for (Eigen::Index j = 0; j < grid.size(); ++j)
    table.row(j) = eigenfunctions(model, n_max, grid.nodes(j)).transpose();
  return table;
}

double orthonormality_deviation(const OscillatorModel& model, int n_max, const SpatialGrid& grid) {
  const Eigen::MatrixXd psi = eigenfunction_table(model, n_max, grid);
  const Eigen::MatrixXd gram = psi.transpose() * grid.weights.asDiagonal() * psi;
  return (gram - Eigen::MatrixXd::Identity(n_max + 1, n_max + 1)).cwiseAbs().maxCoeff();
}

namespace {

SpatialGrid composite_gauss(double x_min, double x_max, int panels, int order) {
  Eigen::VectorXd gl_nodes, gl_weights;
  gauss_legendre(order, gl_nodes, gl_weights);
  SpatialGrid grid;
  grid.x_min = x_min;
  grid.x_max = x_max;
  grid.nodes.resize(static_cast<Eigen::Index>(panels) * order);
  grid.weights.resize(grid.nodes.size());
  const double width = (x_max - x_min) / panels;
  Eigen::Index at = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = x_min + (p + 0.5) * width;
    for (int i = 0; i < order; ++i, ++at) {
      grid.nodes(at) = mid + 0.5 * width * gl_nodes(i);
      grid.weights(at) = 0.5 * width * gl_weights(i);
    }
  }
  return grid;
}

double max_amplitude(const OscillatorModel& model, int n_max, double x) {
  return eigenfunctions(model, n_max, x).cwiseAbs().maxCoeff();
}

// Walks outward until every |psi_n| falls below tail_tol.
double scan_bound(const OscillatorModel& model, int n_max, double start, double step,
                  double tail_tol) {
  double x = start;
  for (int i = 0; i < 100000; ++i) {
    if (max_amplitude(model, n_max, x) < tail_tol) return x;
    x += step;
  }
  throw NumericalError("build_grid: eigenfunction tails did not fall below the tolerance");
}

}  // namespace

SpatialGrid build_grid(const OscillatorModel& model, int n_max, double tail_tol,
                       double ortho_tol) {
  require_level(model, n_max);
  if (!(tail_tol > 0.0)) throw ValidationError("tail_tol must be positive");
  if (!(ortho_tol > 0.0)) throw ValidationError("ortho_tol must be positive");

  double x_min, x_max;
  if (model.is_morse()) {
    x_min = scan_bound(model, n_max, 0.0, -0.25, tail_tol) - 0.25;
    x_max = scan_bound(model, n_max, 1.0, 1.0, tail_tol) + 1.0;
  } else {
    // Classically allowed region |x| < sqrt(2 n + 1), plus the Gaussian tail.
    const double turning = std::sqrt(2.0 * n_max + 1.0);
    x_max = scan_bound(model, n_max, turning, 0.5, tail_tol) + 0.5;
    x_min = -x_max;
  }

  constexpr int kOrder = 8;
  for (int panels = 64; panels <= 8192; panels *= 2) {
    SpatialGrid grid = composite_gauss(x_min, x_max, panels, kOrder);
    if (orthonormality_deviation(model, n_max, grid) < ortho_tol) return grid;
  }
  throw NumericalError(
      "build_grid: orthonormality tolerance not reached within the panel refinement limit");
}

}  // namespace qlsq
