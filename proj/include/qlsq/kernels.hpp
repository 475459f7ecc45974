#pragma once

#include <Eigen/Core>
#include <memory>
#include <utility>
#include <vector>

#include "qlsq/common.hpp"
#include "qlsq/lsq.hpp"
#include "qlsq/oscillators.hpp"
#include "qlsq/state.hpp"

namespace qlsq {

/// Which density-matrix elements a reconstruction reports. Only pairs with
/// n <= n' are stored; conjugate elements are filled downstream.
struct ElementIndexMap {
  int n_max = 0;
  std::vector<std::pair<int, int>> pairs;

  static ElementIndexMap upper_triangle(int n_max);
  void validate() const;
};

/// All ordered pairs (n, n'), n, n' <= n_max, in vectorization order
/// (n + n' * dim), matching Propagator tensors.
std::vector<std::pair<int, int>> all_ordered_pairs(int n_max);

/// Level pairs sharing one transition frequency omega_n - omega_{n'}; such
/// elements enter the time signal through the same oscillation and must be
/// inverted jointly.
struct FrequencyClass {
  double omega = 0.0;
  std::vector<std::pair<int, int>> members;  ///< ordered pairs (n, n')
};

/// Partition of all ordered pairs into frequency classes. Frequencies within
/// tol_rel * max|omega| of each other merge into one class; the default
/// merges exact degeneracies (harmonic ladders, diagonals) while keeping
/// distinct Morse frequencies apart. Classes are sorted by frequency.
std::vector<FrequencyClass> frequency_classes(const OscillatorModel& model, int n_max,
                                              double tol_rel = 1e-9);

/// Gaussian instrument windows V(t) = exp[-t^2/(2 sigma_t^2)],
/// W(x) = exp[-x^2/(2 sigma_x^2)]; zero width degenerates to no smearing.
struct SmearingWindows {
  double sigma_t = 0.0;
  double sigma_x = 0.0;

  bool trivial() const { return sigma_t == 0.0 && sigma_x == 0.0; }
  double value_t(double t) const;
  double value_x(double x) const;
  /// |V_{n,n'}| = sqrt(2 pi) sigma_t exp(-sigma_t^2 omega^2 / 2); 1 at zero width.
  double time_attenuation(double omega) const;
  void validate() const;
};

/// Time integration carrier: either the continuous interval [0, T] with
/// closed-form exponential integrals, or discrete measurement times with
/// quadrature weights (sums replace integrals, keeping the discrete
/// biorthogonality exact).
struct TimeAxis {
  bool continuous = true;
  double duration = 0.0;
  std::vector<double> times;    ///< empty when continuous
  std::vector<double> weights;  ///< empty when continuous

  static TimeAxis continuous_interval(double T);
  static TimeAxis sampled(std::vector<double> times, std::vector<double> weights);
  /// n_t midpoint times on [0, T], each carrying weight T / n_t.
  static TimeAxis equidistant(double T, int n_t);

  std::size_t sample_count() const { return times.size(); }
  /// E(omega) = integral (or weighted sum) of e^{i omega t} over the axis.
  Complex phase_overlap(double omega) const;
};

/// Coefficient function S_{n,n'}(x,t) = psi_n(x) psi_{n'}(x)
/// exp[-i(omega_n - omega_{n'}) t] linking element (n,n') to p(x,t).
Complex response_function(const OscillatorModel& model, int n, int n_prime, double x, double t);

/// Family of response functions in spatial-basis x time-coefficient form:
///   S_p(x, t) = sum_q Phi_q(x) C_{q,p}(t).
/// Undamped families have diagonal C (phases, optionally attenuated by the
/// smearing time window) and Phi = eigenfunction products (optionally
/// convolved with the position window); damped families carry the full
/// propagator as C.
struct ResponseFamily {
  OscillatorModel model;
  int n_max = 0;
  std::vector<std::pair<int, int>> pairs;
  Eigen::VectorXd omegas;  ///< transition frequency per pair
  Eigen::VectorXd scales;  ///< time-window attenuation per pair (1 if none)
  SmearingWindows windows;
  std::shared_ptr<const SpatialGrid> grid;  ///< reference grid for psi tables
  Eigen::MatrixXd psi;                      ///< grid nodes x (n_max + 1)
  std::shared_ptr<const Propagator> propagator;  ///< set for damped families

  Eigen::Index count() const { return static_cast<Eigen::Index>(pairs.size()); }
  bool diagonal_time() const { return propagator == nullptr; }

  /// Phi_p(x) for all pairs: plain or window-smeared eigenfunction products.
  Eigen::VectorXd spatial_basis_at(double x) const;
  /// Rows follow `points`, columns follow `pairs`.
  Eigen::MatrixXd spatial_table(const Eigen::VectorXd& points) const;
  /// Diagonal time coefficients scales_p * e^{-i omega_p t}.
  Eigen::VectorXcd time_phases(double t) const;
  /// S_p(x, t); damped families require the propagator time index.
  Complex eval(std::size_t pair_index, double x, double t,
               std::ptrdiff_t time_index = -1) const;
};

/// Undamped responses over all ordered pairs (or an explicit pair list).
ResponseFamily plain_responses(const OscillatorModel& model, int n_max,
                               std::shared_ptr<const SpatialGrid> grid);
ResponseFamily plain_responses(const OscillatorModel& model, int n_max,
                               std::vector<std::pair<int, int>> pairs,
                               std::shared_ptr<const SpatialGrid> grid);

/// Window-smeared family: S_{n,n'}(x,t) = V_{n,n'}(t) W_{n,n'}(x), with the Gaussian
/// time factor in closed form and the position convolution by quadrature.
ResponseFamily smeared_responses(const ResponseFamily& base, const SmearingWindows& windows);

/// Damped responses S_{n,n'}(x,t) = sum_{m,m'} psi_m psi_{m'} U_{m,m';n,n'}(t).
ResponseFamily damped_responses(std::shared_ptr<const Propagator> propagator,
                                const OscillatorModel& model, int n_max,
                                std::shared_ptr<const SpatialGrid> grid);

/// Per-class spatial sampling kernels K_{n,n'}(x) = sum_j F_{(n,n'),j} B_j(x)
/// with F the (regularized) inverse of the Gram of the member products
/// B_j = psi_n psi_{n'}.
struct SpatialKernelSet {
  OscillatorModel model;
  FrequencyClass cls;
  std::shared_ptr<const SpatialGrid> grid;
  Eigen::MatrixXd b_table;  ///< grid nodes x members
  Eigen::MatrixXd gram;     ///< member x member, symmetric positive definite
  Eigen::MatrixXd coeff;    ///< F
  double condition_estimate = 0.0;
  RegularizationConfig reg;

  Eigen::Index member_count() const { return static_cast<Eigen::Index>(cls.members.size()); }
  /// Kernel values K_i(x_j) on the grid (nodes x members).
  Eigen::MatrixXd kernel_table() const { return b_table * coeff.transpose(); }
  /// Kernel values at an arbitrary position.
  Eigen::VectorXd kernels_at(double x) const;
  /// max_{i,j} |quad(K_i B_j) - delta_ij|, the construction identity.
  double biorthogonality_deviation() const;
};

/// Kernels for one frequency class of any (an)harmonic model.
SpatialKernelSet class_kernels(const OscillatorModel& model, const FrequencyClass& cls,
                               std::shared_ptr<const SpatialGrid> grid,
                               const RegularizationConfig& reg = RegularizationConfig::none());

/// Harmonic k-th diagonal kernels K_n^{(k)}, the class {(n + k, n)}.
SpatialKernelSet harmonic_kernels(const OscillatorModel& model, int n_max, int k,
                                  std::shared_ptr<const SpatialGrid> grid,
                                  const RegularizationConfig& reg = RegularizationConfig::none());

/// Functions biorthonormal to the exponentials g_k(t) = e^{-i omega_k t} on
/// the time axis: f_k(t) = sum_l F_{k,l} g_l^*(t) with F the inverse of the
/// exponential Gram. Fails with advice toward the nonfactorable path when
/// the interval is too short for the frequency set.
struct TimeBiorthonormal {
  std::vector<double> omegas;
  TimeAxis axis;
  Eigen::MatrixXcd gram;
  Eigen::MatrixXcd coeff;  ///< F
  double condition_estimate = 0.0;

  Complex eval(std::size_t k, double t) const;
  /// f_k(t_s) for all k (rows) over given times (columns).
  Eigen::MatrixXcd table(const std::vector<double>& times) const;
  /// max |<f_k, g_k'> - delta| over the axis (uses axis weights).
  double biorthogonality_deviation() const;
};

TimeBiorthonormal time_biorthonormal(const std::vector<double>& omegas, const TimeAxis& axis);

/// Space-time sampling kernels K_p(x,t) = sum_q F_{p,q} S_q^*(x,t), built
/// from the response Gram over the joint measure (spatial measure x time
/// axis). `space` is the quadrature grid for continuous-x data or the
/// measurement positions with their cell weights for gridded data.
struct SpaceTimeKernelSet {
  ResponseFamily responses;
  SpatialGrid space;
  TimeAxis time_axis;
  Eigen::MatrixXcd gram;
  Eigen::MatrixXcd coeff;  ///< F
  double condition_estimate = 0.0;
  RegularizationConfig reg;

  Eigen::Index pair_count() const { return responses.count(); }
  /// K values for all pairs at one space-time point (time_index for damped).
  Eigen::VectorXcd kernels_at(double x, double t, std::ptrdiff_t time_index = -1) const;
  /// max deviation of the discrete kernel x response pairing from identity.
  double biorthogonality_deviation() const;
};

SpaceTimeKernelSet spacetime_kernels(const ResponseFamily& responses, const SpatialGrid& space,
                                     const TimeAxis& axis,
                                     const RegularizationConfig& reg = RegularizationConfig::none());

/// Truncation-leakage table: overlaps of the class kernels with
/// above-truncation eigenfunction products sharing the class frequency.
/// Rows follow the kernel members, columns the probe pairs (returned through
/// `probes`). The set's grid must cover the probe levels' support.
Eigen::MatrixXd contamination_matrix(const SpatialKernelSet& set, int n_probe_max,
                                     std::vector<std::pair<int, int>>& probes);

}  // namespace qlsq
