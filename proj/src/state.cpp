#include "qlsq/state.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

namespace qlsq {

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (entries + entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
  return eig.eigenvalues().minCoeff();
}

void DensityMatrix::require_physical() const {
  if (hermiticity_deviation() > 1e-12)
    throw ValidationError("density matrix is not Hermitian");
  if (std::fabs(trace().real() - 1.0) > 1e-12 || std::fabs(trace().imag()) > 1e-12)
    throw ValidationError("density matrix trace differs from 1");
  if (min_eigenvalue() < -1e-12)
    throw ValidationError("density matrix has a negative eigenvalue");
}

DensityMatrix prepare_state(Complex alpha, int n_max) {
  if (n_max < 0) throw ValidationError("n_max must be nonnegative");
  Eigen::VectorXcd c(n_max + 1);
  // log-space magnitude keeps alpha^n/sqrt(n!) finite for any alpha.
  const double log_abs = std::log(std::max(std::abs(alpha), 1e-300));
  const double phase = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    const double mag = std::abs(alpha) == 0.0 && n > 0
                           ? 0.0
                           : std::exp(n * log_abs - 0.5 * std::lgamma(n + 1.0));
    c(n) = std::polar(mag, n * phase);
  }
  c /= c.norm();
  return DensityMatrix(c * c.adjoint());
}

LiouvillianSpec LiouvillianSpec::amplitude_damping(double gamma) {
  if (!(gamma >= 0.0)) throw ValidationError("damping rate must be nonnegative");
  LiouvillianSpec spec;
  spec.kind = Kind::AmplitudeDamping;
  spec.gamma = gamma;
  return spec;
}

Eigen::MatrixXcd Propagator::apply(const Eigen::MatrixXcd& rho, std::size_t time_index) const {
  if (rho.rows() != dim || rho.cols() != dim)
    throw ValidationError("propagator dimension does not match the density matrix");
  const Eigen::VectorXcd vec = Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
  const Eigen::VectorXcd out = at(time_index) * vec;
  return Eigen::Map<const Eigen::MatrixXcd>(out.data(), dim, dim);
}

double Propagator::trace_preservation_deviation() const {
  double worst = 0.0;
  for (const auto& u : tensors) {
    for (int n = 0; n < dim; ++n) {
      for (int np = 0; np < dim; ++np) {
        Complex column_trace = 0.0;
        for (int m = 0; m < dim; ++m) column_trace += u(vec_index(m, m, dim), vec_index(n, np, dim));
        const Complex expected = n == np ? Complex(1.0) : Complex(0.0);
        worst = std::max(worst, std::abs(column_trace - expected));
      }
    }
  }
  return worst;
}

Eigen::MatrixXcd liouvillian_matrix(const OscillatorModel& model, const LiouvillianSpec& spec,
                                    int dim) {
  if (dim < 1) throw ValidationError("propagator dimension must be >= 1");
  require_level(model, dim - 1);
  const Eigen::Index d2 = static_cast<Eigen::Index>(dim) * dim;
  Eigen::MatrixXcd lv = Eigen::MatrixXcd::Zero(d2, d2);

  // Hamiltonian part: element (m, m') rotates at -i (omega_m - omega_m').
  for (int m = 0; m < dim; ++m)
    for (int mp = 0; mp < dim; ++mp)
      lv(vec_index(m, mp, dim), vec_index(m, mp, dim)) =
          Complex(0.0, -(eigenfrequency(model, m) - eigenfrequency(model, mp)));

  if (spec.kind == LiouvillianSpec::Kind::AmplitudeDamping && spec.gamma > 0.0) {
    Eigen::MatrixXd ladder = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) ladder(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd number = ladder.transpose() * ladder;
    // gamma [a rho a^H - (n rho + rho n)/2] on vectorized rho:
    //   vec(A rho B) = (B^T kron A) vec(rho).
    auto kron = [dim, d2](const Eigen::MatrixXd& b_t, const Eigen::MatrixXd& a) {
      Eigen::MatrixXd out(d2, d2);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) out.block(i * dim, j * dim, dim, dim) = b_t(i, j) * a;
      return out;
    };
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd dissipator = kron(ladder, ladder);  // (a^H)^T kron a = a kron a
    dissipator -= 0.5 * kron(identity, number);
    dissipator -= 0.5 * kron(number, identity);
    lv += spec.gamma * dissipator;
  }
  return lv;
}

Propagator build_propagator(const OscillatorModel& model, const LiouvillianSpec& spec,
                            const std::vector<double>& times, int dim) {
  Propagator prop;
  prop.dim = dim;
  prop.times = times;
  prop.tensors.reserve(times.size());
  const Eigen::Index d2 = static_cast<Eigen::Index>(dim) * dim;

  const bool unitary = spec.kind == LiouvillianSpec::Kind::Unitary || spec.gamma == 0.0;
  if (unitary) {
    Eigen::VectorXd omegas(dim);
    for (int n = 0; n < dim; ++n) omegas(n) = eigenfrequency(model, n);
    for (const double t : times) {
      Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d2, d2);
      for (int m = 0; m < dim; ++m)
        for (int mp = 0; mp < dim; ++mp)
          u(vec_index(m, mp, dim), vec_index(m, mp, dim)) =
              std::polar(1.0, -(omegas(m) - omegas(mp)) * t);
      prop.tensors.push_back(std::move(u));
    }
    return prop;
  }

  const Eigen::MatrixXcd lv = liouvillian_matrix(model, spec, dim);
  // Equidistant grids reuse U(t_{s+1}) = U(dt) U(t_s); otherwise each time
  // gets its own exponential.
  bool equidistant = times.size() >= 2;
  const double dt = times.size() >= 2 ? times[1] - times[0] : 0.0;
  for (std::size_t s = 1; s + 1 < times.size(); ++s)
    if (std::fabs((times[s + 1] - times[s]) - dt) > 1e-12 * std::max(1.0, std::fabs(dt)))
      equidistant = false;

  if (equidistant && times.size() >= 2) {
    const Eigen::MatrixXcd step = (lv * dt).exp();
    Eigen::MatrixXcd u = (lv * times.front()).exp();
    for (std::size_t s = 0; s < times.size(); ++s) {
      prop.tensors.push_back(u);
      u = step * u;
    }
  } else {
    for (const double t : times) prop.tensors.push_back((lv * t).exp());
  }
  return prop;
}

}  // namespace qlsq
