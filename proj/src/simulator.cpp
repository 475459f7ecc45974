#include "qlsq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qlsq/rng.hpp"

namespace qlsq {

namespace {

constexpr double kNegativeClip = -1e-12;

void check_state(const DensityMatrix& state, const OscillatorModel& model) {
  require_level(model, state.dim() - 1);
}

}  // namespace

Eigen::VectorXd position_distribution(const DensityMatrix& state, const OscillatorModel& model,
                                      const SpatialGrid& grid, double t,
                                      const Propagator* propagator, std::ptrdiff_t time_index) {
  check_state(state, model);
  const int n_max = state.dim() - 1;
  const Eigen::MatrixXd psi = eigenfunction_table(model, n_max, grid);

  Eigen::MatrixXcd rho_t;
  if (propagator) {
    if (time_index < 0) throw ValidationError("damped evolution needs a propagator time index");
    rho_t = propagator->apply(state.entries, static_cast<std::size_t>(time_index));
  } else {
    rho_t = state.entries;
    for (int n = 0; n <= n_max; ++n)
      for (int np = 0; np <= n_max; ++np)
        rho_t(n, np) *=
            std::polar(1.0, -(eigenfrequency(model, n) - eigenfrequency(model, np)) * t);
  }

  // p(x) = psi(x)^T rho(t) psi(x), real by Hermiticity.
  Eigen::VectorXd p(grid.size());
  const Eigen::MatrixXcd mixed = psi.cast<Complex>() * rho_t;
  for (Eigen::Index j = 0; j < grid.size(); ++j)
    p(j) = mixed.row(j).dot(psi.row(j).cast<Complex>()).real();

  const double low = p.minCoeff();
  if (low < kNegativeClip * 1e3)
    throw NumericalError("position distribution fell below the clipping tolerance: " +
                         std::to_string(low));
  p = p.cwiseMax(0.0);
  return p;
}

Eigen::MatrixXd distribution_tables(const DensityMatrix& state, const OscillatorModel& model,
                                    const SpatialGrid& grid, const std::vector<double>& times,
                                    const Propagator* propagator) {
  Eigen::MatrixXd tables(grid.size(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t s = 0; s < times.size(); ++s)
    tables.col(static_cast<Eigen::Index>(s)) = position_distribution(
        state, model, grid, times[s], propagator, static_cast<std::ptrdiff_t>(s));
  return tables;
}

Eigen::VectorXd time_averaged_distribution(const DensityMatrix& state,
                                           const OscillatorModel& model,
                                           const SpatialGrid& grid) {
  check_state(state, model);
  const int n_max = state.dim() - 1;
  const Eigen::MatrixXd psi = eigenfunction_table(model, n_max, grid);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(grid.size());
  for (int n = 0; n <= n_max; ++n)
    p += state.entries(n, n).real() * psi.col(n).cwiseAbs2();
  return p.cwiseMax(0.0);
}

Eigen::MatrixXd smear_distribution(const SpatialGrid& in_grid, const std::vector<double>& in_times,
                                   const std::vector<double>& in_time_weights,
                                   const Eigen::MatrixXd& p, const SmearingWindows& windows,
                                   const Eigen::VectorXd& out_x,
                                   const std::vector<double>& out_t) {
  windows.validate();
  if (p.rows() != in_grid.size() || p.cols() != static_cast<Eigen::Index>(in_times.size()))
    throw ValidationError("p table shape does not match the input grid and times");
  if (in_times.size() != in_time_weights.size())
    throw ValidationError("input time weights do not match the times");

  // Margin for <1e-8 truncated-convolution error: exp(-m^2 / 2 sigma^2) < 1e-8.
  const double margin_factor = std::sqrt(-2.0 * std::log(1e-8));
  const double pad_x = windows.sigma_x * margin_factor;
  const double pad_t = windows.sigma_t * margin_factor;
  if (out_x.size() > 0 && (out_x.minCoeff() - pad_x < in_grid.x_min ||
                           out_x.maxCoeff() + pad_x > in_grid.x_max)) {
    throw ValidationError("smear_distribution: input grid needs at least " +
                          std::to_string(pad_x) + " padding beyond the output positions");
  }
  if (windows.sigma_t > 0.0 && !out_t.empty()) {
    const auto [tmin, tmax] = std::minmax_element(in_times.begin(), in_times.end());
    const auto [omin, omax] = std::minmax_element(out_t.begin(), out_t.end());
    if (*omin - pad_t < *tmin || *omax + pad_t > *tmax)
      throw ValidationError("smear_distribution: input times need at least " +
                            std::to_string(pad_t) + " padding beyond the output times");
  }

  // position convolution first, then the time convolution
  Eigen::MatrixXd x_smeared(out_x.size(), p.cols());
  for (Eigen::Index l = 0; l < out_x.size(); ++l) {
    if (windows.sigma_x == 0.0) {
      // degenerate window: sample p at the nearest node
      Eigen::Index nearest = 0;
      (in_grid.nodes.array() - out_x(l)).abs().minCoeff(&nearest);
      x_smeared.row(l) = p.row(nearest);
    } else {
      Eigen::VectorXd kernel(in_grid.size());
      for (Eigen::Index j = 0; j < in_grid.size(); ++j)
        kernel(j) = windows.value_x(in_grid.nodes(j) - out_x(l)) * in_grid.weights(j);
      x_smeared.row(l) = kernel.transpose() * p;
    }
  }

  Eigen::MatrixXd out(out_x.size(), static_cast<Eigen::Index>(out_t.size()));
  for (std::size_t k = 0; k < out_t.size(); ++k) {
    if (windows.sigma_t == 0.0) {
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < in_times.size(); ++s) {
        const double dist = std::fabs(in_times[s] - out_t[k]);
        if (dist < best) {
          best = dist;
          nearest = s;
        }
      }
      out.col(static_cast<Eigen::Index>(k)) = x_smeared.col(static_cast<Eigen::Index>(nearest));
    } else {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(out_x.size());
      for (std::size_t s = 0; s < in_times.size(); ++s)
        acc += in_time_weights[s] * windows.value_t(in_times[s] - out_t[k]) *
               x_smeared.col(static_cast<Eigen::Index>(s));
      out.col(static_cast<Eigen::Index>(k)) = acc;
    }
  }
  return out;
}

std::size_t RawEvents::total_events() const {
  std::size_t total = 0;
  for (const auto& batch : positions) total += batch.size();
  return total;
}

namespace {

/// Inverse-CDF sampler for the piecewise-linear density interpolating the
/// tabulated values between grid nodes; exact for that interpolant.
class InverseCdfSampler {
 public:
  InverseCdfSampler(const Eigen::VectorXd& values, const SpatialGrid& grid)
      : nodes_(grid.nodes) {
    if (values.minCoeff() < kNegativeClip * 1e3)
      throw ValidationError("sample_events: distribution has a significant negative lobe");
    density_ = values.cwiseMax(0.0);
    cumulative_.resize(nodes_.size());
    cumulative_(0) = 0.0;
    for (Eigen::Index j = 1; j < nodes_.size(); ++j) {
      const double h = nodes_(j) - nodes_(j - 1);
      cumulative_(j) = cumulative_(j - 1) + 0.5 * (density_(j) + density_(j - 1)) * h;
    }
    total_ = cumulative_(nodes_.size() - 1);
    if (std::fabs(total_ - 1.0) > 1e-6)
      throw ValidationError("sample_events: distribution norm " + std::to_string(total_) +
                            " is not 1 within tolerance");
  }

  double draw(Rng& rng) const {
    const double r = rng.uniform01() * total_;
    // locate the segment, then invert the quadratic segment CDF
    Eigen::Index lo = 0, hi = nodes_.size() - 1;
    while (hi - lo > 1) {
      const Eigen::Index mid = (lo + hi) / 2;
      (cumulative_(mid) <= r ? lo : hi) = mid;
    }
    const double h = nodes_(lo + 1) - nodes_(lo);
    const double pa = density_(lo), pb = density_(lo + 1);
    const double rest = r - cumulative_(lo);
    const double slope = (pb - pa) / h;
    double xi;
    if (std::fabs(slope) * h < 1e-14 * std::max(pa, 1e-300)) {
      xi = pa > 0.0 ? rest / pa : 0.5 * h;
    } else {
      const double disc = std::max(pa * pa + 2.0 * slope * rest, 0.0);
      xi = (std::sqrt(disc) - pa) / slope;
    }
    return nodes_(lo) + std::clamp(xi, 0.0, h);
  }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd density_;
  Eigen::VectorXd cumulative_;
  double total_ = 0.0;
};

}  // namespace

RawEvents sample_events(const Eigen::MatrixXd& p, const SpatialGrid& grid,
                        const std::vector<double>& times, const std::vector<double>& time_weights,
                        double duration, int events_per_time, std::uint64_t seed) {
  if (events_per_time < 1) throw ValidationError("events_per_time must be >= 1");
  if (p.rows() != grid.size() || p.cols() != static_cast<Eigen::Index>(times.size()))
    throw ValidationError("p table shape does not match the grid and times");
  if (times.size() != time_weights.size())
    throw ValidationError("time weights do not match the times");

  RawEvents events;
  events.times = times;
  events.time_weights = time_weights;
  events.duration = duration;
  events.seed = seed;
  events.positions.resize(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    InverseCdfSampler sampler(p.col(static_cast<Eigen::Index>(s)), grid);
    Rng rng = Rng::derive(seed, {1, s});
    auto& batch = events.positions[s];
    batch.resize(static_cast<std::size_t>(events_per_time));
    for (auto& x : batch) x = sampler.draw(rng);
  }
  return events;
}

RawEvents sample_stationary_events(const Eigen::VectorXd& p, const SpatialGrid& grid,
                                   int n_events, std::uint64_t seed) {
  Eigen::MatrixXd table(p.size(), 1);
  table.col(0) = p;
  RawEvents events = sample_events(table, grid, {0.0}, {1.0}, 1.0, n_events, seed);
  events.time_averaged = true;
  return events;
}

GridCounts grid_counts(const Eigen::MatrixXd& pbar, const Eigen::VectorXd& xs,
                       const std::vector<double>& times, double duration, double n_total,
                       const SmearingWindows& windows, std::uint64_t seed) {
  if (!(n_total >= 1.0)) throw ValidationError("n_total must be >= 1");
  if (!(duration > 0.0)) throw ValidationError("duration must be positive");
  if (pbar.rows() != xs.size() || pbar.cols() != static_cast<Eigen::Index>(times.size()))
    throw ValidationError("pbar shape does not match the measurement grid");

  GridCounts data;
  data.xs = xs;
  data.times = times;
  data.duration = duration;
  data.n_total = n_total;
  data.windows = windows;
  data.seed = seed;
  data.dx = xs.size() > 1 ? xs(1) - xs(0) : 1.0;
  data.dt = times.size() > 1 ? times[1] - times[0] : duration;
  data.counts.resize(xs.size(), static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index l = 0; l < xs.size(); ++l) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double mean = std::max(n_total / duration * pbar(l, static_cast<Eigen::Index>(k)), 0.0);
      Rng rng = Rng::derive(seed, {2, static_cast<std::uint64_t>(l), k});
      data.counts(l, static_cast<Eigen::Index>(k)) = static_cast<double>(rng.poisson(mean));
    }
  }
  return data;
}

Eigen::MatrixXd smeared_distribution_at(const ResponseFamily& responses,
                                        const DensityMatrix& state, const Eigen::VectorXd& xs,
                                        const std::vector<double>& times) {
  if (!responses.diagonal_time())
    throw ValidationError("smeared means require an undamped response family");
  if (state.dim() != responses.n_max + 1)
    throw ValidationError("state dimension does not match the response family");

  Eigen::VectorXcd rho(responses.count());
  for (Eigen::Index p = 0; p < responses.count(); ++p)
    rho(p) = state.entries(responses.pairs[p].first, responses.pairs[p].second);

  const Eigen::MatrixXd phi = responses.spatial_table(xs);
  Eigen::MatrixXd pbar(xs.size(), static_cast<Eigen::Index>(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Eigen::VectorXcd weighted = responses.time_phases(times[k]).array() * rho.array();
    pbar.col(static_cast<Eigen::Index>(k)) = (phi * weighted).real();
  }
  return pbar;
}

}  // namespace qlsq
