#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "qlsq/common.hpp"
#include "qlsq/kernels.hpp"
#include "qlsq/simulator.hpp"

namespace qlsq {

/// Exact (noiseless) p(x_j, t_s) tables used for roundtrip checks and
/// systematic-error diagnostics.
struct ExactTables {
  SpatialGrid grid;
  std::vector<double> times;
  std::vector<double> time_weights;
  Eigen::MatrixXd values;  ///< grid nodes x times
};

struct Diagnostics {
  double trace = 0.0;
  double min_eigenvalue = 0.0;
  double condition_estimate = 0.0;
  double asymmetry = 0.0;  ///< max |raw - raw^H| over doubly estimated pairs
  RegularizationConfig reg;
};

/// Reconstruction output: the Hermitian-symmetrized estimate plus the raw
/// per-orientation values, per-element statistical standard deviations, and
/// optional bias estimates. Negative diagonals or eigenvalues are flagged in
/// the diagnostics, never clipped.
struct ReconstructionResult {
  DensityMatrix estimate;
  Eigen::MatrixXcd raw;
  Eigen::MatrixXd std_real;
  Eigen::MatrixXd std_imag;
  std::optional<Eigen::MatrixXcd> bias;
  ElementIndexMap estimated;  ///< which (n <= n') elements carry estimates
  Diagnostics diagnostics;

  /// Quadrature combination sqrt(std_real^2 + std_imag^2).
  Eigen::MatrixXd std_combined() const;
};

/// Frequencies of a class list, in order.
std::vector<double> class_frequencies(const std::vector<FrequencyClass>& classes);

/// Time projection p^(k)(x_j) = sum_s tau_s f_k(t_s) p(x_j, t_s) with the
/// biorthonormal weight functions.
Eigen::VectorXcd fourier_project(const ExactTables& tables, const TimeBiorthonormal& fns,
                                 std::size_t freq_index);

/// Plain Fourier projection (1/T) sum_s tau_s e^{i omega t_s} p(x_j, t_s);
/// exact class separation for harmonic data over a full period.
Eigen::VectorXcd fourier_project(const ExactTables& tables, double omega);

/// Factorable reconstruction: per-class spatial kernels applied to the
/// biorthonormally projected data. Classes and time functions must share the
/// same frequency list. Tables must use the kernel grid.
ReconstructionResult reconstruct_factorable(const std::vector<SpatialKernelSet>& kernels,
                                            const TimeBiorthonormal& fns,
                                            const ExactTables& tables);
ReconstructionResult reconstruct_factorable(const std::vector<SpatialKernelSet>& kernels,
                                            const TimeBiorthonormal& fns,
                                            const RawEvents& events);

/// Stationary (infinite-time averaged) diagonal reconstruction from a
/// time-averaged dataset; `kernels` must be the zero-frequency class set.
ReconstructionResult reconstruct_stationary(const SpatialKernelSet& kernels,
                                            const RawEvents& events);
ReconstructionResult reconstruct_stationary(const SpatialKernelSet& kernels,
                                            const Eigen::VectorXd& exact_p);

/// Space-time reconstruction from exact tables, raw events, or gridded
/// counts. The dataset geometry (grid nodes, times, smearing) must match the
/// kernel set.
ReconstructionResult reconstruct_spacetime(const SpaceTimeKernelSet& set,
                                           const ExactTables& tables);
ReconstructionResult reconstruct_spacetime(const SpaceTimeKernelSet& set,
                                           const RawEvents& events);
ReconstructionResult reconstruct_spacetime(const SpaceTimeKernelSet& set,
                                           const GridCounts& counts);
ReconstructionResult reconstruct_spacetime(const SpaceTimeKernelSet& set,
                                           const MeasurementDataset& dataset);

/// Predicted statistical errors alone (the variance half of the
/// reconstruction): Poisson plug-in mapped through the kernel weights.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> statistical_errors(const SpaceTimeKernelSet& set,
                                                               const MeasurementDataset& dataset);

/// Predicted systematic offsets from above-truncation occupation: for each
/// estimated element, the contamination-weighted sum of the true elements
/// beyond the truncation. The full state must extend beyond the kernels'
/// truncation and share their grid support.
Eigen::MatrixXcd truncation_offsets(const DensityMatrix& full_state,
                                    const std::vector<SpatialKernelSet>& kernels,
                                    int truncated_dim);

/// Parametric-bootstrap regularization bias for the gridded pipeline:
/// synthetic count datasets are generated from the reconstructed state and
/// re-inverted; the mean shift estimates the bias. Deterministic for fixed
/// seed.
Eigen::MatrixXcd regularization_bias(const SpaceTimeKernelSet& set, const GridCounts& original,
                                     const ReconstructionResult& result, int replicates,
                                     std::uint64_t seed);

}  // namespace qlsq
