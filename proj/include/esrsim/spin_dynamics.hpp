#pragma once

#include <functional>
#include <vector>

#include "esrsim/types.hpp"

namespace esrsim {

struct EvolveOptions {
  // Extra homogeneous dephasing added on top of the lifetime floor 1/(2 T1).
  double gamma2_hom = 0.0;
  // Trajectory sampling stride in integration steps.
  int sample_stride = 1;
};

// Discretize the ensemble into n_bins frequency bins per relaxation component
// over [center - span/2, center + span/2]. Bin weights follow each
// component's q-Gaussian density and sum to the component amplitude; every
// bin couples with g_k = g_ens * sqrt(P) so that sum(w g^2) = g_ens^2 P.
// sz starts at the thermal equilibrium for the ensemble center frequency.
// n_bins < 3 collapses each component to a single bin at its center.
EnsembleState discretize_ensemble(const SpinEnsembleParams& spins, int n_bins, double span,
                                  double temperature_k = 0.065);

// Classic fixed-step RK4 integration of the factorized Bloch equations in the
// frame rotating at pulse.omega_p:
//   d(s-)/dt = -(i (omega_k - omega_p) + gamma2) s- + (i/2) Omega sz
//   d(sz)/dt = -Gamma1 (sz - sz_eq) + i (Omega* s- - Omega s-*)
// with per-bin gamma2 = 1/(2 T1) + gamma2_hom and Omega = rabi * e^{i phase}.
// Stored s_minus is referenced to the lab frame at the state's own time; the
// frame factor is applied on entry/exit. Refuses dt that fails
// dt * max(|omega_k - omega_p|, Omega) < 0.1.
// Returns the sampled trajectory including the initial and final states.
std::vector<EnsembleState> evolve(const EnsembleState& initial, const SpinEnsembleParams& spins,
                                  const PulseSegment& pulse, double dt,
                                  const EvolveOptions& options = {});

// In-place segment integration; on_sample fires every sample_stride steps
// (and at the final step). The workhorse behind evolve and
// saturation_recovery.
void evolve_inplace(EnsembleState& state, const SpinEnsembleParams& spins,
                    const PulseSegment& pulse, double dt, const EvolveOptions& options,
                    const std::function<void(const EnsembleState&)>& on_sample = nullptr);

// Exact propagator for an undriven interval: per-bin exponential relaxation
// of sz toward equilibrium and decaying free precession of s-.
void free_relax(EnsembleState& state, const SpinEnsembleParams& spins, double duration,
                double gamma2_hom = 0.0);

// Dispersive resonator pull: sum_k w_k g_k^2 sz_k / (omega0 - omega_k), rad/s.
double cavity_shift(const EnsembleState& state, double omega0);

// True when every bin satisfies |omega0 - omega_k| >= 10 * gamma2_scale.
bool dispersive_ok(const EnsembleState& state, double omega0, double gamma2_scale);

struct RecoveryOptions {
  int n_bins = 2001;
  double span_fwhm = 8.0;       // bin span as a multiple of the widest FWHM
  double sample_dt = 5e-6;      // s
  double pre_trigger = 0.0;     // equilibrium segment ahead of the sequence
  double gamma2_hom = 0.0;
  double temperature_k = 0.065;
};

// Full pulse-then-recover experiment: returns the resonator shift relative to
// the dressed equilibrium, sampled on [0, t_max]. dt <= 0 selects the finest
// stable step automatically. Driven segments integrate with RK4; undriven
// stretches use the exact relaxation propagator.
ShiftTrace saturation_recovery(const SpinEnsembleParams& spins, const ResonatorParams& res,
                               const PulseSequence& pulse, double t_max, double dt,
                               const RecoveryOptions& options = {});

// Equilibrium dispersive pull of the discretized ensemble (rad/s); the value
// saturation_recovery subtracts from its samples.
double equilibrium_shift(const SpinEnsembleParams& spins, const ResonatorParams& res,
                         const RecoveryOptions& options = {});

// Time-dependent ensemble coupling after a saturating pulse,
// G(t) = g_ens P (1 - sum_c A_c exp(-t / T1_c)).
double coupling_vs_time(const SpinEnsembleParams& spins, double t);

// Same relation with free amplitudes; shared by the non-linear-regime fit
// model so that fit and forward evaluations cannot drift apart.
double gt_coupling(double g_ens, double polarization,
                   const std::vector<RelaxationComponent>& components, double t);

struct ConvergenceReport {
  double err_coarse = 0.0;    // |x(dt) - x(dt/2)|
  double err_fine = 0.0;      // |x(dt/2) - x(dt/4)|
  double observed_order = 0.0;
};

// dt-halving self-check for the RK4 scheme on one segment.
ConvergenceReport rk4_convergence(const EnsembleState& initial, const SpinEnsembleParams& spins,
                                  const PulseSegment& pulse, double dt,
                                  const EvolveOptions& options = {});

}  // namespace esrsim
