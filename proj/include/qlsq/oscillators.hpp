#pragma once

#include <Eigen/Core>

#include "qlsq/common.hpp"

namespace qlsq {

/// Harmonic or Morse oscillator in dimensionless units (hbar = m = 1).
///
/// The Morse potential is U(x) = (1/2a^2)(exp(-a x) - 1)^2 with a > 0; it
/// supports bound_state_count(model) + 1 bound levels. The level energies
/// follow the standard dimensionless Morse spectrum
///   omega_n = (n + 1/2) - (a^2/2)(n + 1/2)^2,
/// which reproduces the fractional-revival constant Omega = 1 - a^2/2 for
/// the level spacing near the bottom of the well.
struct OscillatorModel {
  enum class Kind { Harmonic, Morse };

  Kind kind = Kind::Harmonic;
  double omega_h = 1.0;        ///< harmonic frequency (> 0)
  double anharmonicity = 0.0;  ///< Morse parameter a (> 0)

  static OscillatorModel harmonic(double omega = 1.0);
  static OscillatorModel morse(double a);

  bool is_morse() const { return kind == Kind::Morse; }
};

/// Index of the highest bound Morse level, n_M = floor(a^-2 - 1/2).
/// Only defined for Morse models; the harmonic spectrum is unbounded.
int bound_state_count(const OscillatorModel& model);

/// Highest level index usable in a truncated expansion (n_M for Morse,
/// effectively unlimited for harmonic).
int max_level(const OscillatorModel& model);

/// Throws ValidationError unless 0 <= n <= max_level(model).
void require_level(const OscillatorModel& model, int n);

/// Transition-relevant level frequency omega_n.
double eigenfrequency(const OscillatorModel& model, int n);

/// Position-space energy eigenfunction psi_n(x); real and orthonormal.
double eigenfunction(const OscillatorModel& model, int n, double x);

/// psi_0(x) .. psi_{n_max}(x) in one sweep (shares the recurrences).
Eigen::VectorXd eigenfunctions(const OscillatorModel& model, int n_max, double x);

/// Composite Gauss-Legendre quadrature grid covering the eigenfunction
/// support. Satisfies the orthonormality tolerance for all levels up to the
/// n_max it was built for.
struct SpatialGrid {
  Eigen::VectorXd nodes;    ///< strictly increasing quadrature nodes
  Eigen::VectorXd weights;  ///< positive quadrature weights
  double x_min = 0.0;
  double x_max = 0.0;

  Eigen::Index size() const { return nodes.size(); }
  double quad(const Eigen::VectorXd& values) const { return weights.dot(values); }
};

/// Builds a grid on [x_min, x_max] chosen such that |psi_n| < tail_tol
/// outside the interval for every n <= n_max, refining the panel count until
/// the discrete orthonormality error drops below ortho_tol.
///
/// Throws NumericalError if the refinement limit is reached; throws
/// ValidationError on bad arguments.
SpatialGrid build_grid(const OscillatorModel& model, int n_max, double tail_tol = 1e-10,
                       double ortho_tol = 1e-8);

/// Eigenfunction table psi_n(x_j); rows follow grid nodes, column n holds
/// level n.
Eigen::MatrixXd eigenfunction_table(const OscillatorModel& model, int n_max,
                                    const SpatialGrid& grid);

/// Max deviation of the tabulated quadrature Gram from the identity,
/// max_{n,m <= n_max} |sum_j w_j psi_n(x_j) psi_m(x_j) - delta_nm|.
double orthonormality_deviation(const OscillatorModel& model, int n_max, const SpatialGrid& grid);

/// Gauss-Legendre rule of given order on [-1, 1].
void gauss_legendre(int order, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace qlsq
