#pragma once

#include <complex>
#include <span>
#include <vector>

#include "esrsim/types.hpp"

namespace esrsim {

// Uniform probe frequency axis.
struct FrequencyGrid {
  double start = 0.0;  // rad/s
  double stop = 0.0;   // rad/s
  int points = 0;      // >= 2

  void validate() const;
  std::vector<double> values() const;
};

// Field-frequency transmission map, row-major by field.
struct SpectrumMap {
  std::vector<double> field_axis;          // tesla
  std::vector<double> freq_axis;           // rad/s
  std::vector<std::complex<double>> s21;   // field_axis.size() * freq_axis.size()

  std::complex<double> at(std::size_t field_idx, std::size_t freq_idx) const {
    return s21[field_idx * freq_axis.size() + freq_idx];
  }
};

// Input-output transmission of the bare notch resonator:
// S21 = 1 + kappa_c / (i(omega - omega0) - (kappa_c + kappa_i)).
std::complex<double> s21_bare(double omega, const ResonatorParams& res);

// Transmission with the spin ensemble folded in as a single susceptibility of
// width gamma2*/2; the ensemble coupling enters as g_ens^2 * P.
std::complex<double> s21_coupled(double omega, const ResonatorParams& res,
                                 const SpinEnsembleParams& spins, double omega_s);

// q-Gaussian generalization: the susceptibility summed over discretized bins,
// each a Lorentzian absorber of homogeneous half-width gamma2/2 weighted by
// the bin populations (-sz).
std::complex<double> s21_coupled_binned(double omega, const ResonatorParams& res,
                                        const EnsembleState& state, double gamma2);

// CW map over a field sweep; omega_s per column from the Zeeman relation.
SpectrumMap avoided_crossing_map(std::span<const double> field_axis,
                                 const FrequencyGrid& freq_grid, const ResonatorParams& res,
                                 const SpinEnsembleParams& spins, int threads = 1);

// Hybridized branch frequencies omega_pm = (omega0+omega_s)/2 +/- sqrt(delta^2/4 + g^2).
std::pair<double, double> normal_mode_branches(double omega0, double omega_s, double g_eff);

}  // namespace esrsim
