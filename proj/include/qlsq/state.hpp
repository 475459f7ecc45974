#pragma once

#include <Eigen/Core>
#include <vector>

#include "qlsq/common.hpp"
#include "qlsq/oscillators.hpp"

namespace qlsq {

/// Density matrix over a truncated energy basis, rho(n, n') for n, n' <= n_max.
///
/// Ground-truth states are Hermitian, unit trace and positive semidefinite;
/// reconstructed estimates may violate positivity, which is reported rather
/// than forbidden.
struct DensityMatrix {
  Eigen::MatrixXcd entries;

  DensityMatrix() = default;
  explicit DensityMatrix(Eigen::MatrixXcd m) : entries(std::move(m)) {}
  static DensityMatrix zero(int dim) {
    return DensityMatrix(Eigen::MatrixXcd::Zero(dim, dim));
  }

  int dim() const { return static_cast<int>(entries.rows()); }
  Complex trace() const { return entries.trace(); }
  double hermiticity_deviation() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  }
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;

  /// Checks the ground-truth invariants (Hermitian, trace 1 within 1e-12,
  /// eigenvalues >= -1e-12); throws ValidationError otherwise.
  void require_physical() const;
};

/// Pure state with energy amplitudes c_n proportional to alpha^n / sqrt(n!),
/// normalized over the truncated basis n <= n_max.
DensityMatrix prepare_state(Complex alpha, int n_max);

/// Flat index of element (n, n') in a vectorized density matrix
/// (column-major, matching Eigen reshape order).
inline Eigen::Index vec_index(int n, int n_prime, int dim) {
  return static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(n_prime) * dim;
}

struct LiouvillianSpec {
  enum class Kind { Unitary, AmplitudeDamping };
  Kind kind = Kind::Unitary;
  double gamma = 0.0;  ///< amplitude-damping rate (>= 0)

  static LiouvillianSpec unitary() { return {}; }
  static LiouvillianSpec amplitude_damping(double gamma);
};

/// Master-equation propagator on the truncated basis: tensors U(t) act on
/// vectorized density matrices, rho_vec(t) = U(t) rho_vec(0). Trace
/// preserving by construction; U(0) = I when t = 0 is requested.
struct Propagator {
  int dim = 0;
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> tensors;  ///< dim^2 x dim^2 each

  const Eigen::MatrixXcd& at(std::size_t time_index) const { return tensors.at(time_index); }

  /// Applies U(times[time_index]) to a density matrix.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho, std::size_t time_index) const;

  /// Max deviation of sum_m U_{m,m;n,n'} from delta_{n,n'} over all times.
  double trace_preservation_deviation() const;
};

/// Liouvillian matrix acting on vectorized density matrices. The
/// amplitude-damping dissipator uses the lowering ladder in the energy
/// eigenbasis; for Morse oscillators this ladder form is a modeling choice
/// (the master equation itself is generic), kept because it is trace
/// preserving on the truncated basis.
Eigen::MatrixXcd liouvillian_matrix(const OscillatorModel& model, const LiouvillianSpec& spec,
                                    int dim);

/// Builds U(t) at the requested times. Unitary evolution uses closed-form
/// phases; damped evolution exponentiates the Liouvillian (scaling and
/// squaring), stepping U(t + dt) = U(dt) U(t) on equidistant grids.
Propagator build_propagator(const OscillatorModel& model, const LiouvillianSpec& spec,
                            const std::vector<double>& times, int dim);

}  // namespace qlsq
