#include "qlsq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace qlsq {

ElementIndexMap ElementIndexMap::upper_triangle(int n_max) {
  ElementIndexMap map;
  map.n_max = n_max;
  for (int n = 0; n <= n_max; ++n)
    for (int np = n; np <= n_max; ++np) map.pairs.emplace_back(n, np);
  return map;
}

void ElementIndexMap::validate() const {
  std::vector<std::pair<int, int>> seen;
  for (const auto& [n, np] : pairs) {
    if (n < 0 || np < 0 || n > n_max || np > n_max)
      throw ValidationError("index map entry exceeds n_max");
    if (n > np) throw ValidationError("index map stores only pairs with n <= n'");
    if (std::find(seen.begin(), seen.end(), std::make_pair(n, np)) != seen.end())
      throw ValidationError("index map contains duplicate pairs");
    seen.emplace_back(n, np);
  }
}

std::vector<std::pair<int, int>> all_ordered_pairs(int n_max) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n_max + 1) * (n_max + 1));
  for (int np = 0; np <= n_max; ++np)
    for (int n = 0; n <= n_max; ++n) pairs.emplace_back(n, np);
  return pairs;
}

std::vector<FrequencyClass> frequency_classes(const OscillatorModel& model, int n_max,
                                              double tol_rel) {
  if (!(tol_rel > 0.0)) throw ValidationError("frequency tolerance must be positive");
  require_level(model, n_max);

  struct Entry {
    double omega;
    std::pair<int, int> pair;
  };
  std::vector<Entry> entries;
  for (const auto& pair : all_ordered_pairs(n_max)) {
    entries.push_back(
        {eigenfrequency(model, pair.first) - eigenfrequency(model, pair.second), pair});
  }
  double omega_scale = 0.0;
  for (const auto& e : entries) omega_scale = std::max(omega_scale, std::fabs(e.omega));
  const double tol = tol_rel * std::max(omega_scale, 1.0);

  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.omega < b.omega; });

  std::vector<FrequencyClass> classes;
  for (const auto& e : entries) {
    if (classes.empty() || e.omega - classes.back().omega > tol) {
      classes.push_back({e.omega, {}});
    }
    classes.back().members.push_back(e.pair);
  }
  for (auto& cls : classes)
    std::sort(cls.members.begin(), cls.members.end());
  return classes;
}

double SmearingWindows::value_t(double t) const {
  if (sigma_t == 0.0) return t == 0.0 ? 1.0 : 0.0;
  return std::exp(-t * t / (2.0 * sigma_t * sigma_t));
}

double SmearingWindows::value_x(double x) const {
  if (sigma_x == 0.0) return x == 0.0 ? 1.0 : 0.0;
  return std::exp(-x * x / (2.0 * sigma_x * sigma_x));
}

double SmearingWindows::time_attenuation(double omega) const {
  if (sigma_t == 0.0) return 1.0;
  return std::sqrt(2.0 * std::numbers::pi) * sigma_t *
         std::exp(-0.5 * sigma_t * sigma_t * omega * omega);
}

void SmearingWindows::validate() const {
  if (!(sigma_t >= 0.0) || !(sigma_x >= 0.0))
    throw ValidationError("smearing widths must be nonnegative");
}

TimeAxis TimeAxis::continuous_interval(double T) {
  if (!(T > 0.0)) throw ValidationError("time interval length must be positive");
  TimeAxis axis;
  axis.continuous = true;
  axis.duration = T;
  return axis;
}

TimeAxis TimeAxis::sampled(std::vector<double> times, std::vector<double> weights) {
  if (times.empty() || times.size() != weights.size())
    throw ValidationError("sampled time axis needs matching nonempty times and weights");
  TimeAxis axis;
  axis.continuous = false;
  axis.times = std::move(times);
  axis.weights = std::move(weights);
  axis.duration = std::accumulate(axis.weights.begin(), axis.weights.end(), 0.0);
  return axis;
}

TimeAxis TimeAxis::equidistant(double T, int n_t) {
  if (!(T > 0.0)) throw ValidationError("time interval length must be positive");
  if (n_t < 1) throw ValidationError("need at least one measurement time");
  std::vector<double> times(n_t), weights(n_t, T / n_t);
  for (int s = 0; s < n_t; ++s) times[s] = (s + 0.5) * T / n_t;
  return sampled(std::move(times), std::move(weights));
}

Complex TimeAxis::phase_overlap(double omega) const {
  if (continuous) {
    const double arg = omega * duration;
    if (std::fabs(arg) < 1e-8) {
      // series of (e^{i a} - 1)/(i omega) around a = 0
      return duration * Complex(1.0 - arg * arg / 6.0, 0.5 * arg);
    }
    return (std::polar(1.0, arg) - Complex(1.0)) / Complex(0.0, omega);
  }
  Complex sum = 0.0;
  for (std::size_t s = 0; s < times.size(); ++s)
    sum += weights[s] * std::polar(1.0, omega * times[s]);
  return sum;
}

Complex response_function(const OscillatorModel& model, int n, int n_prime, double x, double t) {
  require_level(model, n);
  require_level(model, n_prime);
  const int top = std::max(n, n_prime);
  const Eigen::VectorXd psi = eigenfunctions(model, top, x);
  const double omega = eigenfrequency(model, n) - eigenfrequency(model, n_prime);
  return psi(n) * psi(n_prime) * std::polar(1.0, -omega * t);
}

Eigen::VectorXd ResponseFamily::spatial_basis_at(double x) const {
  const Eigen::VectorXd psi_x = eigenfunctions(model, n_max, x);
  Eigen::VectorXd phi(count());
  if (windows.sigma_x == 0.0) {
    for (Eigen::Index p = 0; p < count(); ++p)
      phi(p) = psi_x(pairs[p].first) * psi_x(pairs[p].second);
    return phi;
  }
  // W_{n,n'}(x): convolution with the position window over the reference grid.
  Eigen::VectorXd window(grid->size());
  for (Eigen::Index j = 0; j < grid->size(); ++j)
    window(j) = windows.value_x(grid->nodes(j) - x) * grid->weights(j);
  for (Eigen::Index p = 0; p < count(); ++p) {
    const auto& [n, np] = pairs[p];
    phi(p) = (psi.col(n).array() * psi.col(np).array() * window.array()).sum();
  }
  return phi;
}

Eigen::MatrixXd ResponseFamily::spatial_table(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd table(points.size(), count());
  for (Eigen::Index j = 0; j < points.size(); ++j)
    table.row(j) = spatial_basis_at(points(j)).transpose();
  return table;
}

Eigen::VectorXcd ResponseFamily::time_phases(double t) const {
  Eigen::VectorXcd c(count());
  for (Eigen::Index p = 0; p < count(); ++p) c(p) = scales(p) * std::polar(1.0, -omegas(p) * t);
  return c;
}

Complex ResponseFamily::eval(std::size_t pair_index, double x, double t,
                             std::ptrdiff_t time_index) const {
  const Eigen::VectorXd phi = spatial_basis_at(x);
  const Eigen::Index p = static_cast<Eigen::Index>(pair_index);
  if (diagonal_time())
    return phi(p) * scales(p) * std::polar(1.0, -omegas(p) * t);
  if (time_index < 0) throw ValidationError("damped responses need a propagator time index");
  const Eigen::MatrixXcd& u = propagator->at(static_cast<std::size_t>(time_index));
  Complex value = 0.0;
  for (Eigen::Index q = 0; q < count(); ++q)
    value += phi(q) * u(q, static_cast<Eigen::Index>(pair_index));
  return value;
}

namespace {

ResponseFamily make_family(const OscillatorModel& model, int n_max,
                           std::vector<std::pair<int, int>> pairs,
                           std::shared_ptr<const SpatialGrid> grid) {
  if (!grid) throw ValidationError("response family needs a reference grid");
  require_level(model, n_max);
  ResponseFamily family;
  family.model = model;
  family.n_max = n_max;
  family.pairs = std::move(pairs);
  family.grid = std::move(grid);
  family.psi = eigenfunction_table(model, n_max, *family.grid);
  family.omegas.resize(family.count());
  for (Eigen::Index p = 0; p < family.count(); ++p) {
    const auto& [n, np] = family.pairs[p];
    if (n > n_max || np > n_max) throw ValidationError("response pair exceeds n_max");
    family.omegas(p) = eigenfrequency(model, n) - eigenfrequency(model, np);
  }
  family.scales = Eigen::VectorXd::Ones(family.count());
  return family;
}

}  // namespace

ResponseFamily plain_responses(const OscillatorModel& model, int n_max,
                               std::shared_ptr<const SpatialGrid> grid) {
  return make_family(model, n_max, all_ordered_pairs(n_max), std::move(grid));
}

ResponseFamily plain_responses(const OscillatorModel& model, int n_max,
                               std::vector<std::pair<int, int>> pairs,
                               std::shared_ptr<const SpatialGrid> grid) {
  return make_family(model, n_max, std::move(pairs), std::move(grid));
}

ResponseFamily smeared_responses(const ResponseFamily& base, const SmearingWindows& windows) {
  windows.validate();
  if (base.propagator)
    throw ValidationError("smearing of damped responses is not supported");
  ResponseFamily family = base;
  family.windows = windows;
  for (Eigen::Index p = 0; p < family.count(); ++p)
    family.scales(p) = base.scales(p) * windows.time_attenuation(family.omegas(p));
  return family;
}

ResponseFamily damped_responses(std::shared_ptr<const Propagator> propagator,
                                const OscillatorModel& model, int n_max,
                                std::shared_ptr<const SpatialGrid> grid) {
  if (!propagator) throw ValidationError("damped responses need a propagator");
  if (propagator->dim != n_max + 1)
    throw ValidationError("propagator dimension does not match the truncation");
  ResponseFamily family = make_family(model, n_max, all_ordered_pairs(n_max), std::move(grid));
  family.propagator = std::move(propagator);
  return family;
}

SpatialKernelSet class_kernels(const OscillatorModel& model, const FrequencyClass& cls,
                               std::shared_ptr<const SpatialGrid> grid,
                               const RegularizationConfig& reg) {
  if (cls.members.empty()) throw ValidationError("frequency class has no members");
  if (!grid) throw ValidationError("class kernels need a grid");

  SpatialKernelSet set;
  set.model = model;
  set.cls = cls;
  set.grid = std::move(grid);
  set.reg = reg;

  int top = 0;
  for (const auto& [n, np] : cls.members) top = std::max({top, n, np});
  const Eigen::MatrixXd psi = eigenfunction_table(model, top, *set.grid);

  set.b_table.resize(set.grid->size(), set.member_count());
  for (Eigen::Index j = 0; j < set.member_count(); ++j) {
    const auto& [n, np] = cls.members[j];
    set.b_table.col(j) = psi.col(n).array() * psi.col(np).array();
  }
  set.gram = set.b_table.transpose() * set.grid->weights.asDiagonal() * set.b_table;

  NormalMatrixInverter inverter(set.gram.cast<Complex>(), reg);
  set.coeff = inverter.inverse().real();
  set.condition_estimate = inverter.condition_estimate();
  return set;
}

SpatialKernelSet harmonic_kernels(const OscillatorModel& model, int n_max, int k,
                                  std::shared_ptr<const SpatialGrid> grid,
                                  const RegularizationConfig& reg) {
  if (model.is_morse()) throw ValidationError("harmonic_kernels requires a harmonic model");
  if (k < 0 || k > n_max) throw ValidationError("diagonal shift k must satisfy 0 <= k <= n_max");
  FrequencyClass cls;
  cls.omega = k * model.omega_h;
  for (int n = 0; n + k <= n_max; ++n) cls.members.emplace_back(n + k, n);
  return class_kernels(model, cls, std::move(grid), reg);
}

Eigen::VectorXd SpatialKernelSet::kernels_at(double x) const {
  int top = 0;
  for (const auto& [n, np] : cls.members) top = std::max({top, n, np});
  const Eigen::VectorXd psi = eigenfunctions(model, top, x);
  Eigen::VectorXd b(member_count());
  for (Eigen::Index j = 0; j < member_count(); ++j)
    b(j) = psi(cls.members[j].first) * psi(cls.members[j].second);
  return coeff * b;
}

double SpatialKernelSet::biorthogonality_deviation() const {
  const Eigen::MatrixXd pairing =
      kernel_table().transpose() * grid->weights.asDiagonal() * b_table;
  return (pairing - Eigen::MatrixXd::Identity(member_count(), member_count()))
      .cwiseAbs()
      .maxCoeff();
}

TimeBiorthonormal time_biorthonormal(const std::vector<double>& omegas, const TimeAxis& axis) {
  if (omegas.empty()) throw ValidationError("time_biorthonormal needs at least one frequency");
  for (std::size_t k = 0; k + 1 < omegas.size(); ++k)
    for (std::size_t l = k + 1; l < omegas.size(); ++l)
      if (omegas[k] == omegas[l])
        throw ValidationError("time_biorthonormal frequencies must be distinct");

  TimeBiorthonormal fns;
  fns.omegas = omegas;
  fns.axis = axis;
  const Eigen::Index m = static_cast<Eigen::Index>(omegas.size());
  fns.gram.resize(m, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = 0; l < m; ++l)
      fns.gram(k, l) = axis.phase_overlap(omegas[k] - omegas[l]);

  try {
    NormalMatrixInverter inverter(fns.gram, RegularizationConfig::none());
    fns.coeff = inverter.inverse();
    fns.condition_estimate = inverter.condition_estimate();
  } catch (const NumericalError&) {
    throw NumericalError(
        "the exponentials are nearly linearly dependent on this interval; lengthen the "
        "observation time or use the nonfactorable space-time kernels");
  }
  return fns;
}

Complex TimeBiorthonormal::eval(std::size_t k, double t) const {
  Complex value = 0.0;
  for (std::size_t l = 0; l < omegas.size(); ++l)
    value += coeff(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) *
             std::polar(1.0, omegas[l] * t);
  return value;
}

Eigen::MatrixXcd TimeBiorthonormal::table(const std::vector<double>& times) const {
  Eigen::MatrixXcd g(static_cast<Eigen::Index>(omegas.size()),
                     static_cast<Eigen::Index>(times.size()));
  for (Eigen::Index l = 0; l < g.rows(); ++l)
    for (Eigen::Index s = 0; s < g.cols(); ++s)
      g(l, s) = std::polar(1.0, omegas[l] * times[s]);
  return coeff * g;
}

double TimeBiorthonormal::biorthogonality_deviation() const {
  if (axis.continuous)
    return (coeff * gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()))
        .cwiseAbs()
        .maxCoeff();
  const Eigen::Index m = static_cast<Eigen::Index>(omegas.size());
  Eigen::MatrixXcd pairing = Eigen::MatrixXcd::Zero(m, m);
  for (std::size_t s = 0; s < axis.times.size(); ++s) {
    Eigen::VectorXcd f(m), g(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      f(k) = eval(static_cast<std::size_t>(k), axis.times[s]);
      g(k) = std::polar(1.0, -omegas[k] * axis.times[s]);
    }
    pairing += axis.weights[s] * f * g.transpose();
  }
  return (pairing - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
}

SpaceTimeKernelSet spacetime_kernels(const ResponseFamily& responses, const SpatialGrid& space,
                                     const TimeAxis& axis, const RegularizationConfig& reg) {
  if (!responses.diagonal_time() && axis.continuous)
    throw ValidationError("damped responses require a sampled time axis");

  SpaceTimeKernelSet set;
  set.responses = responses;
  set.space = space;
  set.time_axis = axis;
  set.reg = reg;

  const Eigen::MatrixXd phi = responses.spatial_table(space.nodes);
  const Eigen::MatrixXd spatial_gram = phi.transpose() * space.weights.asDiagonal() * phi;

  const Eigen::Index p_count = responses.count();
  if (responses.diagonal_time()) {
    set.gram.resize(p_count, p_count);
    for (Eigen::Index p = 0; p < p_count; ++p)
      for (Eigen::Index q = 0; q < p_count; ++q)
        set.gram(p, q) = spatial_gram(p, q) * responses.scales(p) * responses.scales(q) *
                         axis.phase_overlap(responses.omegas(p) - responses.omegas(q));
  } else {
    const Propagator& prop = *responses.propagator;
    if (prop.times.size() != axis.times.size())
      throw ValidationError("propagator times do not match the time axis");
    set.gram = Eigen::MatrixXcd::Zero(p_count, p_count);
    for (std::size_t s = 0; s < axis.times.size(); ++s) {
      const Eigen::MatrixXcd& u = prop.at(s);
      set.gram += axis.weights[s] * u.adjoint() * spatial_gram * u;
    }
  }

  try {
    NormalMatrixInverter inverter(set.gram, reg);
    set.coeff = inverter.inverse();
    set.condition_estimate = inverter.condition_estimate();
  } catch (const NumericalError& err) {
    throw NumericalError(std::string(err.what()) +
                         " (space-time Gram; lengthen the observation, coarsen the truncation, "
                         "or regularize)");
  }
  return set;
}

Eigen::VectorXcd SpaceTimeKernelSet::kernels_at(double x, double t,
                                                std::ptrdiff_t time_index) const {
  const Eigen::VectorXd phi = responses.spatial_basis_at(x);
  Eigen::VectorXcd s_values(responses.count());
  if (responses.diagonal_time()) {
    s_values = phi.array() * responses.time_phases(t).array();
  } else {
    if (time_index < 0) throw ValidationError("damped kernels need a propagator time index");
    const Eigen::MatrixXcd& u = responses.propagator->at(static_cast<std::size_t>(time_index));
    s_values = u.transpose() * phi.cast<Complex>();
  }
  return coeff * s_values.conjugate();
}

double SpaceTimeKernelSet::biorthogonality_deviation() const {
  // The discrete pairing of K against S over (space x time) equals F G by
  // construction, so the deviation of F G from identity is exactly the
  // biorthogonality defect in the discrete inner product.
  return (coeff * gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()))
      .cwiseAbs()
      .maxCoeff();
}

Eigen::MatrixXd contamination_matrix(const SpatialKernelSet& set, int n_probe_max,
                                     std::vector<std::pair<int, int>>& probes) {
  int n_max = 0;
  for (const auto& [n, np] : set.cls.members) n_max = std::max({n_max, n, np});
  if (n_probe_max <= n_max)
    throw ValidationError("probe range must exceed the truncation level");
  require_level(set.model, n_probe_max);  // Morse: probes beyond n_M are rejected

  probes.clear();
  const auto extended = frequency_classes(set.model, n_probe_max);
  double omega_scale = 1.0;
  for (const auto& cls : extended) omega_scale = std::max(omega_scale, std::fabs(cls.omega));
  for (const auto& cls : extended) {
    if (std::fabs(cls.omega - set.cls.omega) > 1e-9 * omega_scale) continue;
    for (const auto& pair : cls.members)
      if (pair.first > n_max || pair.second > n_max) probes.push_back(pair);
  }

  const Eigen::MatrixXd psi = eigenfunction_table(set.model, n_probe_max, *set.grid);
  const Eigen::MatrixXd kernels = set.kernel_table();
  Eigen::MatrixXd overlaps(set.member_count(), static_cast<Eigen::Index>(probes.size()));
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const Eigen::VectorXd probe_b =
        psi.col(probes[j].first).array() * psi.col(probes[j].second).array();
    overlaps.col(static_cast<Eigen::Index>(j)) =
        kernels.transpose() * (set.grid->weights.asDiagonal() * probe_b);
  }
  return overlaps;
}

}  // namespace qlsq
