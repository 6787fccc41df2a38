#include "esrsim/spin_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "esrsim/core_model.hpp"

namespace esrsim {

namespace {

constexpr double k_max_phase_per_step = 0.1;  // dt * max(|detuning|, Omega) bound

struct Mat3 {
  double m[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};  // row-major

  static Mat3 identity() {
    Mat3 r;
    r.m[0] = r.m[4] = r.m[8] = 1.0;
    return r;
  }
};

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.m[3 * i + j] = a.m[3 * i] * b.m[j] + a.m[3 * i + 1] * b.m[3 + j] +
                       a.m[3 * i + 2] * b.m[6 + j];
    }
  }
  return r;
}

void add_scaled(Mat3& into, const Mat3& other, double s) {
  for (int i = 0; i < 9; ++i) into.m[i] += s * other.m[i];
}

// Bloch generator in the rotating frame for state x = (Re s-, Im s-, sz).
Mat3 bloch_generator(double detuning, double gamma2, double gamma1, double omega_re,
                     double omega_im) {
  Mat3 a;
  a.m[0] = -gamma2;
  a.m[1] = detuning;
  a.m[2] = -0.5 * omega_im;
  a.m[3] = -detuning;
  a.m[4] = -gamma2;
  a.m[5] = 0.5 * omega_re;
  a.m[6] = 2.0 * omega_im;
  a.m[7] = -2.0 * omega_re;
  a.m[8] = -gamma1;
  return a;
}

// Classic RK4 applied to the linear system x' = A x + c collapses to the
// degree-4 Taylor propagator: x(t+h) = R x(t) + d with
//   R = I + B + B^2/2 + B^3/6 + B^4/24,        B = h A
//   d = (I + B/2 + B^2/6 + B^3/24) h c
void rk4_step_operator(const Mat3& a, double h, const double c[3], Mat3& r_out,
                       double d_out[3]) {
  Mat3 b = a;
  for (int i = 0; i < 9; ++i) b.m[i] *= h;
  const Mat3 b2 = multiply(b, b);
  const Mat3 b3 = multiply(b2, b);
  const Mat3 b4 = multiply(b3, b);

  Mat3 r = Mat3::identity();
  add_scaled(r, b, 1.0);
  add_scaled(r, b2, 1.0 / 2.0);
  add_scaled(r, b3, 1.0 / 6.0);
  add_scaled(r, b4, 1.0 / 24.0);
  r_out = r;

  Mat3 s = Mat3::identity();
  add_scaled(s, b, 1.0 / 2.0);
  add_scaled(s, b2, 1.0 / 6.0);
  add_scaled(s, b3, 1.0 / 24.0);
  for (int row = 0; row < 3; ++row) {
    d_out[row] = h * (s.m[3 * row] * c[0] + s.m[3 * row + 1] * c[1] + s.m[3 * row + 2] * c[2]);
  }
}

// Structure-of-arrays layout so the per-step update vectorizes across bins.
struct PackedEnsemble {
  std::size_t n = 0;
  std::vector<double> r00, r01, r02, r10, r11, r12, r20, r21, r22;
  std::vector<double> d0, d1, d2;
  std::vector<double> u, v, z;

  void resize(std::size_t count) {
    n = count;
    for (auto* vec : {&r00, &r01, &r02, &r10, &r11, &r12, &r20, &r21, &r22, &d0, &d1, &d2, &u,
                      &v, &z}) {
      vec->resize(count);
    }
  }

  void step() {
    const double* __restrict a00 = r00.data();
    const double* __restrict a01 = r01.data();
    const double* __restrict a02 = r02.data();
    const double* __restrict a10 = r10.data();
    const double* __restrict a11 = r11.data();
    const double* __restrict a12 = r12.data();
    const double* __restrict a20 = r20.data();
    const double* __restrict a21 = r21.data();
    const double* __restrict a22 = r22.data();
    const double* __restrict b0 = d0.data();
    const double* __restrict b1 = d1.data();
    const double* __restrict b2 = d2.data();
    double* __restrict xu = u.data();
    double* __restrict xv = v.data();
    double* __restrict xz = z.data();
    for (std::size_t i = 0; i < n; ++i) {
      const double ui = xu[i];
      const double vi = xv[i];
      const double zi = xz[i];
      xu[i] = a00[i] * ui + a01[i] * vi + a02[i] * zi + b0[i];
      xv[i] = a10[i] * ui + a11[i] * vi + a12[i] * zi + b1[i];
      xz[i] = a20[i] * ui + a21[i] * vi + a22[i] * zi + b2[i];
    }
  }
};

double component_gamma1(const SpinEnsembleParams& spins, std::size_t index) {
  return 1.0 / spins.relaxation.at(index).t1;
}

double bin_gamma2(const SpinEnsembleParams& spins, std::size_t index, double gamma2_hom) {
  // Lifetime floor keeps trajectories inside the Bloch ball.
  return 0.5 * component_gamma1(spins, index) + gamma2_hom;
}

double max_detuning(const EnsembleState& state, double omega_p) {
  double worst = 0.0;
  for (const auto& bin : state.bins) worst = std::max(worst, std::abs(bin.omega_k - omega_p));
  return worst;
}

double max_rate(const SpinEnsembleParams& spins, double gamma2_hom) {
  double worst = 0.0;
  for (std::size_t c = 0; c < spins.relaxation.size(); ++c) {
    worst = std::max(worst, component_gamma1(spins, c));
    worst = std::max(worst, bin_gamma2(spins, c, gamma2_hom));
  }
  return worst;
}

}  // namespace

EnsembleState discretize_ensemble(const SpinEnsembleParams& spins, int n_bins, double span,
                                  double temperature_k) {
  spins.validate();
  if (n_bins < 1) throw std::domain_error("n_bins must be >= 1");

  double max_fwhm = spins.lineshape.fwhm;
  for (std::size_t c = 0; c < spins.relaxation.size(); ++c) {
    max_fwhm = std::max(max_fwhm, spins.component_shape(c).fwhm);
  }
  if (n_bins >= 3 && span < 3.0 * max_fwhm) {
    throw config_error("ensemble span must cover at least 3x the lineshape FWHM");
  }

  EnsembleState state;
  state.time = 0.0;
  state.sz_eq = thermal_sz(spins.lineshape.center, temperature_k);
  const double g_bin = spins.g_ens * std::sqrt(spins.polarization_scale);

  for (std::size_t c = 0; c < spins.relaxation.size(); ++c) {
    const auto& component = spins.relaxation[c];
    const auto& shape = spins.component_shape(c);
    if (n_bins < 3) {
      state.bins.push_back(SpinBin{shape.center, component.amplitude, g_bin, state.sz_eq,
                                   {0.0, 0.0}, c});
      continue;
    }
    const double bin_width = span / static_cast<double>(n_bins);
    const double left = shape.center - 0.5 * span;
    std::vector<double> weights(static_cast<std::size_t>(n_bins));
    double total = 0.0;
    for (int i = 0; i < n_bins; ++i) {
      const double omega = left + (static_cast<double>(i) + 0.5) * bin_width;
      weights[static_cast<std::size_t>(i)] = qgaussian_density(omega, shape) * bin_width;
      total += weights[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n_bins; ++i) {
      const double omega = left + (static_cast<double>(i) + 0.5) * bin_width;
      const double w = weights[static_cast<std::size_t>(i)] * component.amplitude / total;
      state.bins.push_back(SpinBin{omega, w, g_bin, state.sz_eq, {0.0, 0.0}, c});
    }
  }
  return state;
}

void evolve_inplace(EnsembleState& state, const SpinEnsembleParams& spins,
                    const PulseSegment& pulse, double dt, const EvolveOptions& options,
                    const std::function<void(const EnsembleState&)>& on_sample) {
  pulse.validate();
  if (!(dt > 0.0)) throw std::domain_error("integration dt must be > 0");
  if (pulse.duration == 0.0) return;

  const auto n_steps =
      std::max<long long>(1, static_cast<long long>(std::ceil(pulse.duration / dt - 1e-12)));
  const double h = pulse.duration / static_cast<double>(n_steps);

  const double fastest =
      std::max({max_detuning(state, pulse.omega_p), pulse.rabi_amplitude,
                max_rate(spins, options.gamma2_hom)});
  if (h * fastest >= k_max_phase_per_step) {
    throw numeric_error(
        "integration step too coarse: dt * max(|omega_k - omega_p|, Omega) = " +
        std::to_string(h * fastest) + " exceeds " + std::to_string(k_max_phase_per_step));
  }

  const double omega_re = pulse.rabi_amplitude * std::cos(pulse.phase);
  const double omega_im = pulse.rabi_amplitude * std::sin(pulse.phase);

  // Integrate the deviation w = sz - sz_eq: the undriven equilibrium is then
  // a bit-exact fixed point of the homogeneous update. The drive couples the
  // equilibrium polarization in as a constant source on s-.
  PackedEnsemble packed;
  packed.resize(state.bins.size());
  for (std::size_t i = 0; i < state.bins.size(); ++i) {
    const auto& bin = state.bins[i];
    const double gamma1 = component_gamma1(spins, bin.component_index);
    const double gamma2 = bin_gamma2(spins, bin.component_index, options.gamma2_hom);
    const Mat3 a = bloch_generator(bin.omega_k - pulse.omega_p, gamma2, gamma1, omega_re,
                                   omega_im);
    const double source[3] = {-0.5 * omega_im * state.sz_eq, 0.5 * omega_re * state.sz_eq,
                              0.0};
    Mat3 r;
    double d[3];
    rk4_step_operator(a, h, source, r, d);
    packed.r00[i] = r.m[0];
    packed.r01[i] = r.m[1];
    packed.r02[i] = r.m[2];
    packed.r10[i] = r.m[3];
    packed.r11[i] = r.m[4];
    packed.r12[i] = r.m[5];
    packed.r20[i] = r.m[6];
    packed.r21[i] = r.m[7];
    packed.r22[i] = r.m[8];
    packed.d0[i] = d[0];
    packed.d1[i] = d[1];
    packed.d2[i] = d[2];
    packed.u[i] = bin.s_minus.real();
    packed.v[i] = bin.s_minus.imag();
    packed.z[i] = bin.sz - state.sz_eq;
  }

  const double t_start = state.time;
  EnsembleState scratch = state;
  const auto emit = [&](long long step) {
    const double tau = h * static_cast<double>(step);
    // Stored s- is lab-frame at the snapshot's own time.
    const std::complex<double> frame = std::polar(1.0, -pulse.omega_p * tau);
    for (std::size_t i = 0; i < scratch.bins.size(); ++i) {
      scratch.bins[i].s_minus = std::complex<double>(packed.u[i], packed.v[i]) * frame;
      scratch.bins[i].sz = packed.z[i] + state.sz_eq;
    }
    scratch.time = t_start + tau;
    on_sample(scratch);
  };

  const long long stride = std::max(1, options.sample_stride);
  for (long long step = 1; step <= n_steps; ++step) {
    packed.step();
    if (on_sample && (step % stride == 0 || step == n_steps)) emit(step);
  }

  const std::complex<double> frame_end = std::polar(1.0, -pulse.omega_p * pulse.duration);
  for (std::size_t i = 0; i < state.bins.size(); ++i) {
    state.bins[i].s_minus = std::complex<double>(packed.u[i], packed.v[i]) * frame_end;
    state.bins[i].sz = packed.z[i] + state.sz_eq;
  }
  state.time = t_start + pulse.duration;
}

std::vector<EnsembleState> evolve(const EnsembleState& initial, const SpinEnsembleParams& spins,
                                  const PulseSegment& pulse, double dt,
                                  const EvolveOptions& options) {
  std::vector<EnsembleState> trajectory;
  trajectory.push_back(initial);
  EnsembleState state = initial;
  evolve_inplace(state, spins, pulse, dt, options,
                 [&](const EnsembleState& snapshot) { trajectory.push_back(snapshot); });
  return trajectory;
}

void free_relax(EnsembleState& state, const SpinEnsembleParams& spins, double duration,
                double gamma2_hom) {
  if (duration < 0.0) throw std::domain_error("free relaxation duration must be >= 0");
  if (duration == 0.0) return;
  for (auto& bin : state.bins) {
    const double gamma1 = component_gamma1(spins, bin.component_index);
    const double gamma2 = bin_gamma2(spins, bin.component_index, gamma2_hom);
    bin.sz = state.sz_eq + (bin.sz - state.sz_eq) * std::exp(-gamma1 * duration);
    bin.s_minus *= std::exp(-gamma2 * duration) * std::polar(1.0, -bin.omega_k * duration);
  }
  state.time += duration;
}

double cavity_shift(const EnsembleState& state, double omega0) {
  double shift = 0.0;
  for (const auto& bin : state.bins) {
    shift += bin.weight * bin.g_k * bin.g_k * bin.sz / (omega0 - bin.omega_k);
  }
  return shift;
}

bool dispersive_ok(const EnsembleState& state, double omega0, double gamma2_scale) {
  for (const auto& bin : state.bins) {
    if (std::abs(omega0 - bin.omega_k) < 10.0 * gamma2_scale) return false;
  }
  return true;
}

double equilibrium_shift(const SpinEnsembleParams& spins, const ResonatorParams& res,
                         const RecoveryOptions& options) {
  double max_fwhm = spins.lineshape.fwhm;
  for (std::size_t c = 0; c < spins.relaxation.size(); ++c) {
    max_fwhm = std::max(max_fwhm, spins.component_shape(c).fwhm);
  }
  const auto state = discretize_ensemble(spins, options.n_bins, options.span_fwhm * max_fwhm,
                                         options.temperature_k);
  return cavity_shift(state, res.omega0);
}

ShiftTrace saturation_recovery(const SpinEnsembleParams& spins, const ResonatorParams& res,
                               const PulseSequence& pulse, double t_max, double dt,
                               const RecoveryOptions& options) {
  res.validate();
  spins.validate();
  if (!(t_max > 0.0)) throw std::domain_error("t_max must be > 0");
  if (!(options.sample_dt > 0.0)) throw std::domain_error("sample_dt must be > 0");

  double max_fwhm = spins.lineshape.fwhm;
  for (std::size_t c = 0; c < spins.relaxation.size(); ++c) {
    max_fwhm = std::max(max_fwhm, spins.component_shape(c).fwhm);
  }

  EnsembleState state = discretize_ensemble(spins, options.n_bins,
                                            options.span_fwhm * max_fwhm,
                                            options.temperature_k);
  const double shift_eq = cavity_shift(state, res.omega0);

  ShiftTrace trace;
  // Per-bin homogeneous width sets the dispersive-validity scale.
  double gamma2_scale = 0.0;
  for (std::size_t c = 0; c < spins.relaxation.size(); ++c) {
    gamma2_scale = std::max(gamma2_scale, bin_gamma2(spins, c, options.gamma2_hom));
  }
  trace.dispersive_warning = !dispersive_ok(state, res.omega0, gamma2_scale);
  trace.times.push_back(0.0);
  trace.delta_omega_r.push_back(0.0);

  const auto record = [&](double t, double shift) {
    trace.times.push_back(t);
    trace.delta_omega_r.push_back(shift - shift_eq);
  };

  const auto relax_span = [&](double span) {
    double remaining = span;
    while (remaining > 1e-15) {
      const double chunk = std::min(options.sample_dt, remaining);
      free_relax(state, spins, chunk, options.gamma2_hom);
      remaining -= chunk;
      record(state.time, cavity_shift(state, res.omega0));
    }
  };

  if (options.pre_trigger > 0.0) relax_span(options.pre_trigger);

  EvolveOptions evolve_options;
  evolve_options.gamma2_hom = options.gamma2_hom;

  for (const auto& segment : pulse) {
    if (segment.duration <= 0.0) continue;
    if (segment.rabi_amplitude == 0.0) {
      relax_span(segment.duration);
      continue;
    }
    const double fastest = std::max({max_detuning(state, segment.omega_p),
                                     segment.rabi_amplitude,
                                     max_rate(spins, options.gamma2_hom)});
    const double dt_auto = 0.95 * k_max_phase_per_step / std::max(fastest, 1.0);
    const double dt_seg = dt > 0.0 ? dt : dt_auto;
    evolve_options.sample_stride =
        std::max(1, static_cast<int>(std::llround(options.sample_dt / dt_seg)));
    evolve_inplace(state, spins, segment, dt_seg, evolve_options,
                   [&](const EnsembleState& snapshot) {
                     record(snapshot.time, cavity_shift(snapshot, res.omega0));
                   });
  }

  if (state.time < t_max) relax_span(t_max - state.time);
  return trace;
}

double gt_coupling(double g_ens, double polarization,
                   const std::vector<RelaxationComponent>& components, double t) {
  if (t < 0.0) throw std::domain_error("coupling_vs_time requires t >= 0");
  double recovery = 1.0;
  for (const auto& component : components) {
    recovery -= component.amplitude * std::exp(-t / component.t1);
  }
  return g_ens * polarization * recovery;
}

double coupling_vs_time(const SpinEnsembleParams& spins, double t) {
  return gt_coupling(spins.g_ens, spins.polarization_scale, spins.relaxation, t);
}

ConvergenceReport rk4_convergence(const EnsembleState& initial, const SpinEnsembleParams& spins,
                                  const PulseSegment& pulse, double dt,
                                  const EvolveOptions& options) {
  const auto run = [&](double step) {
    EnsembleState state = initial;
    evolve_inplace(state, spins, pulse, step, options);
    return state;
  };
  const auto distance = [](const EnsembleState& a, const EnsembleState& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
      const double dz = a.bins[i].sz - b.bins[i].sz;
      acc += dz * dz + std::norm(a.bins[i].s_minus - b.bins[i].s_minus);
    }
    return std::sqrt(acc / static_cast<double>(a.bins.size()));
  };

  const EnsembleState full = run(dt);
  const EnsembleState half = run(0.5 * dt);
  const EnsembleState quarter = run(0.25 * dt);

  ConvergenceReport report;
  report.err_coarse = distance(full, half);
  report.err_fine = distance(half, quarter);
  report.observed_order =
      report.err_fine > 0.0 ? std::log2(report.err_coarse / report.err_fine) : 0.0;
  return report;
}

}  // namespace esrsim
