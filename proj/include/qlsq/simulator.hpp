#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qlsq/common.hpp"
#include "qlsq/kernels.hpp"
#include "qlsq/oscillators.hpp"
#include "qlsq/state.hpp"

namespace qlsq {

/// Position distribution p(x, t) on the grid; nonnegative (tiny quadrature
/// undershoots are clipped) and unit norm in the grid quadrature.
Eigen::VectorXd position_distribution(const DensityMatrix& state, const OscillatorModel& model,
                                      const SpatialGrid& grid, double t,
                                      const Propagator* propagator = nullptr,
                                      std::ptrdiff_t time_index = -1);

/// p(x_j, t_s) tables, one column per time; damped evolution uses the
/// propagator (times must match).
Eigen::MatrixXd distribution_tables(const DensityMatrix& state, const OscillatorModel& model,
                                    const SpatialGrid& grid, const std::vector<double>& times,
                                    const Propagator* propagator = nullptr);

/// Infinite-time average of p(x, t): off-diagonal oscillations vanish and
/// only sum_n psi_n(x)^2 rho_{n,n} survives.
Eigen::VectorXd time_averaged_distribution(const DensityMatrix& state,
                                           const OscillatorModel& model, const SpatialGrid& grid);

/// Smearing of tabulated p by quadrature convolution with the windows.
/// Output points must leave enough input margin for the truncated
/// convolution to be accurate; otherwise an IoError-free ValidationError
/// names the required padding.
Eigen::MatrixXd smear_distribution(const SpatialGrid& in_grid, const std::vector<double>& in_times,
                                   const std::vector<double>& in_time_weights,
                                   const Eigen::MatrixXd& p, const SmearingWindows& windows,
                                   const Eigen::VectorXd& out_x,
                                   const std::vector<double>& out_t);

/// Position samples drawn at each measurement time.
struct RawEvents {
  std::vector<double> times;
  std::vector<double> time_weights;            ///< quadrature weights tau_s
  double duration = 0.0;                       ///< observation interval T
  bool time_averaged = false;                  ///< stationary dataset (single slot)
  std::vector<std::vector<double>> positions;  ///< event positions per time
  std::uint64_t seed = 0;

  std::size_t total_events() const;
};

/// Event counts n_{l,k} on a measurement grid {x_l, t_k}; the counts follow
/// independent Poisson draws with the window-convolved means.
struct GridCounts {
  Eigen::VectorXd xs;
  std::vector<double> times;
  double dx = 0.0;
  double dt = 0.0;
  double duration = 0.0;  ///< observation interval T
  double n_total = 0.0;   ///< N_tot normalization of the count means
  Eigen::MatrixXd counts;  ///< N_x rows, N_t columns
  SmearingWindows windows;
  std::uint64_t seed = 0;

  double total_counts() const { return counts.sum(); }
};

/// Draws events_per_time samples from each column of the p tables by
/// inverse-CDF sampling of the piecewise-linear density between grid nodes.
/// Deterministic for a fixed seed; each time uses the derived stream
/// (seed, 1, s).
RawEvents sample_events(const Eigen::MatrixXd& p, const SpatialGrid& grid,
                        const std::vector<double>& times, const std::vector<double>& time_weights,
                        double duration, int events_per_time, std::uint64_t seed);

/// Stationary variant: samples n_events from a single distribution (the
/// time-averaged one), giving a time_averaged dataset.
RawEvents sample_stationary_events(const Eigen::VectorXd& p, const SpatialGrid& grid,
                                   int n_events, std::uint64_t seed);

/// Poisson counts with means (n_total / T) * pbar(x_l, t_k) per cell
/// following the gridded-measurement model; cell (l, k) uses the derived
/// stream (seed, 2, l, k). Negative mean values (possible when pbar comes
/// from a non-positive reconstructed state) clip to zero.
GridCounts grid_counts(const Eigen::MatrixXd& pbar, const Eigen::VectorXd& xs,
                       const std::vector<double>& times, double duration, double n_total,
                       const SmearingWindows& windows, std::uint64_t seed);

/// Exact smeared means pbar(x_l, t_k) = sum_p Sbar_p(x_l, t_k) rho_p from a
/// smeared response family (closed-form time window, quadrature position
/// window).
Eigen::MatrixXd smeared_distribution_at(const ResponseFamily& responses,
                                        const DensityMatrix& state, const Eigen::VectorXd& xs,
                                        const std::vector<double>& times);

/// A measured dataset of either kind.
struct MeasurementDataset {
  std::variant<RawEvents, GridCounts> data;

  bool is_grid() const { return std::holds_alternative<GridCounts>(data); }
  const RawEvents& events() const { return std::get<RawEvents>(data); }
  const GridCounts& grid() const { return std::get<GridCounts>(data); }
};

}  // namespace qlsq
