#pragma once

#include <cstdint>

#include "esrsim/constants.hpp"
#include "esrsim/types.hpp"

namespace esrsim {

struct ReadoutConfig {
  double omega_r = 0.0;                     // readout frequency, rad/s
  double if_freq = hz_to_angular(40e6);     // intermediate frequency, rad/s
  double noise_sigma = 0.0;                 // per-quadrature std of additive noise
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Linear phase-readout calibration around the resonance dip.
struct PhaseCalibration {
  double omega_r = 0.0;       // chosen readout point, rad/s
  double slope = 0.0;         // d(phi)/d(omega0) at omega_r, rad per rad/s
  double linear_range = 0.0;  // one-sided shift range with < 5% phase residual
  double phi_ref = 0.0;       // equilibrium phase at omega_r
};

// Quasi-static transmission at the fixed readout frequency:
// S21(t) = s21_bare(omega_r; omega0 + delta_omega_r(t)) plus seeded complex
// Gaussian noise. Sets quasistatic_warning when the shift slews faster than
// 0.1 * kappa^2.
IqTrace transmission_trace(const ShiftTrace& shift, const ResonatorParams& res,
                           const ReadoutConfig& cfg);

// Ideal IF up-conversion followed by demodulation (optionally with a phase
// offset injected at the demodulator). With ideal mixers this is an identity
// up to rounding; it exists to validate the IF bookkeeping. Throws on
// undersampled input.
IqTrace heterodyne_roundtrip(const IqTrace& trace, const ReadoutConfig& cfg,
                             double demod_phase = 0.0);

// Locate the maximum-phase-slope readout point of the notch, its slope with
// respect to resonator shifts, and the shift range over which the phase stays
// linear to 5%.
PhaseCalibration calibrate_phase(const ResonatorParams& res, const ReadoutConfig& cfg,
                                 double probe_span);

// Invert the phase of an IQ trace into a resonator shift trace,
// delta_omega_r(t) = (phi(t) - phi_ref) / slope. Samples beyond the linear
// range are flagged; more than 10% out of range raises an error pointing at
// the non-linear-regime magnitude fit.
ShiftTrace phase_to_shift(const IqTrace& trace, const PhaseCalibration& cal);

}  // namespace esrsim
