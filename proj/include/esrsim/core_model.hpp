#pragma once

#include "esrsim/types.hpp"

namespace esrsim {

// Zeeman transition frequency omega_s = g * mu_B * B0 / hbar (rad/s).
// Throws std::domain_error for b0 < 0.
double zeeman_frequency(double g_factor, double b0_tesla);

// Dispersive cavity pull chi = g_ens^2 / delta (rad/s), sign of delta.
// Throws std::domain_error at delta = 0.
double dispersive_shift(double g_ens, double delta);

// Cooperativity C = g_ens^2 / (kappa * gamma2_star). Rates must be positive.
double cooperativity(double g_ens, double kappa, double gamma2_star);

// Cavity-enhanced spontaneous emission rate for a single spin,
// Gamma_P = kappa * g0^2 / (delta^2 + (kappa/2)^2).
double purcell_rate(double g0, double kappa, double delta);

// Dispersive-regime margin: min(|delta|/g_ens, |delta|/kappa). The caller
// decides what ratio counts as "much greater than".
double dispersive_validity(double delta, double g_ens, double kappa);

// Unit-normalized q-Gaussian density (s/rad) at angular frequency omega.
// q outside (1, 3) is a domain error except q = 1, which is evaluated as the
// Gaussian limit at q = 1 + 1e-4.
double qgaussian_density(double omega, const QGaussianShape& shape);

// Internal width parameter delta of the q-Gaussian such that the half-maximum
// points land at center +/- fwhm/2. Exposed for the fitting module.
double qgaussian_width(double fwhm, double q);

// Thermal equilibrium polarization sz_eq = -tanh(hbar*omega / (2*kB*T)).
// -1 is the fully polarized ground state.
double thermal_sz(double omega, double temperature_k);

}  // namespace esrsim
