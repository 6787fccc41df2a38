#include "esrsim/core_model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace esrsim {

namespace {

constexpr double k_q_gaussian_limit_eps = 1e-4;  // q = 1 evaluated at 1 + eps

double effective_q(double q) {
  if (q < 1.0 || q >= 3.0) {
    throw std::domain_error("q-Gaussian shape parameter must lie in [1, 3), got " +
                            std::to_string(q));
  }
  return q == 1.0 ? 1.0 + k_q_gaussian_limit_eps : q;
}

}  // namespace

void ResonatorParams::validate() const {
  if (!(omega0 > 0.0)) throw std::domain_error("resonator omega0 must be > 0");
  if (!(kappa_i >= 0.0)) throw std::domain_error("resonator kappa_i must be >= 0");
  if (!(kappa_c > 0.0)) throw std::domain_error("resonator kappa_c must be > 0");
}

void QGaussianShape::validate() const {
  if (!(fwhm > 0.0)) throw std::domain_error("lineshape fwhm must be > 0");
  effective_q(q);
}

void RelaxationComponent::validate() const {
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
    throw std::domain_error("relaxation amplitude must be in [0, 1]");
  }
  if (!(t1 > 0.0)) throw std::domain_error("relaxation T1 must be > 0");
  if (lineshape) lineshape->validate();
}

void SpinEnsembleParams::validate() const {
  if (!(g_ens >= 0.0)) throw std::domain_error("g_ens must be >= 0");
  if (!(polarization_scale >= 0.0 && polarization_scale <= 1.0)) {
    throw std::domain_error("polarization scale P must be in [0, 1]");
  }
  lineshape.validate();
  if (relaxation.empty()) throw std::domain_error("at least one relaxation component required");
  double amplitude_sum = 0.0;
  for (const auto& component : relaxation) {
    component.validate();
    amplitude_sum += component.amplitude;
  }
  if (std::abs(amplitude_sum - 1.0) > 1e-6) {
    throw std::domain_error("relaxation amplitudes must sum to 1, got " +
                            std::to_string(amplitude_sum));
  }
}

const QGaussianShape& SpinEnsembleParams::component_shape(std::size_t i) const {
  const auto& component = relaxation.at(i);
  return component.lineshape ? *component.lineshape : lineshape;
}

void PulseSegment::validate() const {
  if (!(duration >= 0.0)) throw std::domain_error("pulse duration must be >= 0");
  if (!(rabi_amplitude >= 0.0)) throw std::domain_error("rabi amplitude must be >= 0");
}

double zeeman_frequency(double g_factor, double b0_tesla) {
  if (b0_tesla < 0.0) throw std::domain_error("magnetic field must be >= 0");
  return g_factor * constants::bohr_magneton * b0_tesla / constants::hbar;
}

double dispersive_shift(double g_ens, double delta) {
  if (delta == 0.0) throw std::domain_error("dispersive shift is singular at delta = 0");
  return g_ens * g_ens / delta;
}

double cooperativity(double g_ens, double kappa, double gamma2_star) {
  if (!(kappa > 0.0) || !(gamma2_star > 0.0)) {
    throw std::domain_error("cooperativity requires kappa > 0 and gamma2* > 0");
  }
  return g_ens * g_ens / (kappa * gamma2_star);
}

double purcell_rate(double g0, double kappa, double delta) {
  if (!(kappa > 0.0)) throw std::domain_error("purcell rate requires kappa > 0");
  const double half_kappa = 0.5 * kappa;
  return kappa * g0 * g0 / (delta * delta + half_kappa * half_kappa);
}

double dispersive_validity(double delta, double g_ens, double kappa) {
  const double abs_delta = std::abs(delta);
  const double vs_coupling =
      g_ens > 0.0 ? abs_delta / g_ens : std::numeric_limits<double>::infinity();
  const double vs_kappa =
      kappa > 0.0 ? abs_delta / kappa : std::numeric_limits<double>::infinity();
  return std::min(vs_coupling, vs_kappa);
}

double qgaussian_width(double fwhm, double q) {
  const double qe = effective_q(q);
  // Half maximum at x = fwhm/2: [1 + (q-1) x^2/delta^2]^(-1/(q-1)) = 1/2.
  const double half = 0.5 * fwhm;
  return std::sqrt((qe - 1.0) * half * half / std::expm1((qe - 1.0) * std::numbers::ln2));
}

double qgaussian_density(double omega, const QGaussianShape& shape) {
  shape.validate();
  const double qe = effective_q(shape.q);
  const double width = qgaussian_width(shape.fwhm, shape.q);
  const double nu = 1.0 / (qe - 1.0);
  const double x = (omega - shape.center) / width;
  // Normalization: sqrt(q-1) * Gamma(nu) / (width * sqrt(pi) * Gamma(nu - 1/2)).
  const double log_norm = 0.5 * std::log(qe - 1.0) - std::log(width) -
                          0.5 * std::log(constants::pi) + std::lgamma(nu) -
                          std::lgamma(nu - 0.5);
  return std::exp(log_norm - nu * std::log1p((qe - 1.0) * x * x));
}

double thermal_sz(double omega, double temperature_k) {
  if (!(temperature_k > 0.0)) return omega > 0.0 ? -1.0 : 0.0;
  return -std::tanh(constants::hbar * omega / (2.0 * constants::boltzmann * temperature_k));
}

}  // namespace esrsim
