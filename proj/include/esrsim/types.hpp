#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "esrsim/constants.hpp"
#include "esrsim/errors.hpp"

namespace esrsim {

// Bare notch resonator. All rates angular (rad/s).
struct ResonatorParams {
  double omega0 = 0.0;   // resonance frequency
  double kappa_i = 0.0;  // internal decay rate
  double kappa_c = 0.0;  // feedline coupling decay rate

  double kappa() const { return kappa_i + kappa_c; }
  double q_factor() const { return omega0 / kappa(); }
  void validate() const;
};

// Tsallis q-Gaussian lineshape parameterized by (center, FWHM, q) so that the
// half-maximum points always sit at center +/- fwhm/2. q in (1, 3); q -> 1 is
// the Gaussian limit (evaluated at q = 1 + 1e-4), q = 2 is a Lorentzian.
struct QGaussianShape {
  double center = 0.0;  // rad/s
  double fwhm = 0.0;    // rad/s
  double q = 2.0;

  void validate() const;
};

// One spin-lattice relaxation channel; a sub-ensemble with its own T1 and,
// optionally, its own lineshape.
struct RelaxationComponent {
  double amplitude = 1.0;                   // population fraction in [0, 1]
  double t1 = 1.0;                          // s
  std::optional<QGaussianShape> lineshape;  // falls back to the ensemble shape

  void validate() const;
};

struct SpinEnsembleParams {
  double g_factor = 2.0023;                    // Lande factor
  double g_ens = 0.0;                          // ensemble coupling, rad/s
  QGaussianShape lineshape;                    // center = omega_s, fwhm = gamma2*
  std::vector<RelaxationComponent> relaxation; // amplitudes sum to 1
  double polarization_scale = 1.0;             // P in [0, 1], scales g_ens^2

  void validate() const;
  // Effective lineshape of component i (per-component override or ensemble).
  const QGaussianShape& component_shape(std::size_t i) const;
};

// One element of a frequency-binned inhomogeneous ensemble.
struct SpinBin {
  double omega_k = 0.0;                   // rad/s
  double weight = 0.0;                    // > 0
  double g_k = 0.0;                       // coupling, rad/s
  double sz = -1.0;                       // longitudinal polarization, [-1, 1]
  std::complex<double> s_minus{0.0, 0.0}; // transverse coherence
  std::size_t component_index = 0;        // index into SpinEnsembleParams::relaxation
};

struct EnsembleState {
  std::vector<SpinBin> bins;
  double time = 0.0;   // s
  double sz_eq = -1.0; // shared thermal equilibrium polarization
};

// One constant-amplitude pump segment.
struct PulseSegment {
  double duration = 0.0;        // s
  double omega_p = 0.0;         // pump frequency, rad/s
  double rabi_amplitude = 0.0;  // on-spin Rabi rate, rad/s
  double phase = 0.0;           // rad

  void validate() const;
};

using PulseSequence = std::vector<PulseSegment>;

// Resonator frequency shift relative to the dressed equilibrium.
struct ShiftTrace {
  std::vector<double> times;          // s, strictly increasing
  std::vector<double> delta_omega_r;  // rad/s
  bool dispersive_warning = false;
  // Set by phase_to_shift: nonzero entries mark samples outside the linear
  // calibration range. Empty when every sample was in range.
  std::vector<std::uint8_t> out_of_range;
};

// Demodulated quadrature record; S21(t) = i_vals + i * q_vals.
struct IqTrace {
  std::vector<double> times;  // s
  std::vector<double> i_vals;
  std::vector<double> q_vals;
  bool quasistatic_warning = false;
};

}  // namespace esrsim
