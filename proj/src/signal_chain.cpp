#include "esrsim/signal_chain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "esrsim/cw_spectra.hpp"
#include "esrsim/rng.hpp"

namespace esrsim {

namespace {

double wrap_to_pi(double angle) {
  angle = std::remainder(angle, constants::two_pi);
  // remainder returns (-pi, pi]; normalize the -pi corner.
  if (angle <= -constants::pi) angle += constants::two_pi;
  return angle;
}

double sample_spacing(const IqTrace& trace) {
  if (trace.times.size() < 2) throw numeric_error("trace needs at least 2 samples");
  return trace.times[1] - trace.times[0];
}

}  // namespace

std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x632BE59BD9B4E019ULL + 0x9E3779B97F4A7C15ULL * index);
  const std::uint64_t a = detail::splitmix64_next(s);
  const std::uint64_t b = detail::splitmix64_next(s);
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;          // [0, 1)
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return {radius * std::cos(constants::two_pi * u2),
          radius * std::sin(constants::two_pi * u2)};
}

double uniform_unit(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL * index);
  return (static_cast<double>(detail::splitmix64_next(s) >> 11) + 1.0) * 0x1.0p-53;
}

void ReadoutConfig::validate() const {
  if (!(if_freq > 0.0)) throw std::domain_error("IF frequency must be > 0");
  if (!(noise_sigma >= 0.0)) throw std::domain_error("noise sigma must be >= 0");
}

IqTrace transmission_trace(const ShiftTrace& shift, const ResonatorParams& res,
                           const ReadoutConfig& cfg) {
  res.validate();
  cfg.validate();

  IqTrace trace;
  trace.times = shift.times;
  trace.i_vals.resize(shift.times.size());
  trace.q_vals.resize(shift.times.size());

  const double kappa_sq = res.kappa() * res.kappa();
  double max_slew = 0.0;

  ResonatorParams shifted = res;
  for (std::size_t n = 0; n < shift.times.size(); ++n) {
    shifted.omega0 = res.omega0 + shift.delta_omega_r[n];
    std::complex<double> s21 = s21_bare(cfg.omega_r, shifted);
    if (cfg.noise_sigma > 0.0) {
      const auto [gi, gq] = gaussian_pair(cfg.rng_seed, n);
      s21 += std::complex<double>(cfg.noise_sigma * gi, cfg.noise_sigma * gq);
    }
    trace.i_vals[n] = s21.real();
    trace.q_vals[n] = s21.imag();
    if (n > 0) {
      const double dt = shift.times[n] - shift.times[n - 1];
      if (dt > 0.0) {
        max_slew = std::max(
            max_slew, std::abs(shift.delta_omega_r[n] - shift.delta_omega_r[n - 1]) / dt);
      }
    }
  }
  trace.quasistatic_warning = max_slew > 0.1 * kappa_sq;
  return trace;
}

IqTrace heterodyne_roundtrip(const IqTrace& trace, const ReadoutConfig& cfg,
                             double demod_phase) {
  cfg.validate();
  const double rate = 1.0 / sample_spacing(trace);
  if (rate <= 2.0 * angular_to_hz(cfg.if_freq)) {
    throw numeric_error("sample rate must exceed twice the IF frequency");
  }

  IqTrace out;
  out.times = trace.times;
  out.i_vals.resize(trace.times.size());
  out.q_vals.resize(trace.times.size());
  out.quasistatic_warning = trace.quasistatic_warning;
  for (std::size_t n = 0; n < trace.times.size(); ++n) {
    const std::complex<double> s{trace.i_vals[n], trace.q_vals[n]};
    const double t = trace.times[n];
    const std::complex<double> up = s * std::polar(1.0, cfg.if_freq * t);
    const std::complex<double> down = up * std::polar(1.0, -cfg.if_freq * t + demod_phase);
    out.i_vals[n] = down.real();
    out.q_vals[n] = down.imag();
  }
  return out;
}

PhaseCalibration calibrate_phase(const ResonatorParams& res, const ReadoutConfig& cfg,
                                 double probe_span) {
  res.validate();
  cfg.validate();
  if (!(probe_span > 0.0)) throw std::domain_error("probe span must be > 0");

  const double kappa = res.kappa();
  const double center = cfg.omega_r > 0.0 ? cfg.omega_r : res.omega0;
  // Coarse dip search across the span.
  const int n_coarse = 20001;
  double dip_omega = center;
  double dip_mag = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_coarse; ++i) {
    const double omega =
        center - 0.5 * probe_span + probe_span * static_cast<double>(i) / (n_coarse - 1);
    const double mag = std::abs(s21_bare(omega, res));
    if (mag < dip_mag) {
      dip_mag = mag;
      dip_omega = omega;
    }
  }
  if (dip_mag > 0.995) throw numeric_error("no resonance found in probe span");

  // Fine scan of the phase slope around the dip.
  const double fine_span = std::min(probe_span, 8.0 * kappa);
  const int n_fine = 8001;
  const double h = fine_span / (n_fine - 1);
  std::vector<double> phases(n_fine);
  for (int i = 0; i < n_fine; ++i) {
    const double omega = dip_omega - 0.5 * fine_span + h * static_cast<double>(i);
    phases[static_cast<std::size_t>(i)] = std::arg(s21_bare(omega, res));
  }
  int best = 1;
  double best_slope = 0.0;
  for (int i = 1; i + 1 < n_fine; ++i) {
    const double dphi = wrap_to_pi(phases[static_cast<std::size_t>(i + 1)] -
                                   phases[static_cast<std::size_t>(i - 1)]);
    const double slope = dphi / (2.0 * h);
    if (std::abs(slope) > std::abs(best_slope)) {
      best_slope = slope;
      best = i;
    }
  }

  PhaseCalibration cal;
  cal.omega_r = dip_omega - 0.5 * fine_span + h * static_cast<double>(best);
  // A resonator shift +x moves the whole lineshape up, which is the same as
  // probing the static lineshape at omega_r - x.
  cal.slope = -best_slope;
  cal.phi_ref = std::arg(s21_bare(cal.omega_r, res));

  const double probe_step = kappa / 2000.0;
  const auto residual_ok = [&](double x) {
    for (const double sign : {1.0, -1.0}) {
      const double shift = sign * x;
      const double phi = cal.phi_ref +
                         wrap_to_pi(std::arg(s21_bare(cal.omega_r - shift, res)) - cal.phi_ref);
      const double predicted = cal.phi_ref + cal.slope * shift;
      if (std::abs(phi - predicted) > 0.05 * std::abs(cal.slope) * x) return false;
    }
    return true;
  };
  double range = 0.0;
  for (double x = probe_step; x <= 4.0 * kappa; x += probe_step) {
    if (!residual_ok(x)) break;
    range = x;
  }
  cal.linear_range = range;
  return cal;
}

ShiftTrace phase_to_shift(const IqTrace& trace, const PhaseCalibration& cal) {
  if (cal.slope == 0.0) throw numeric_error("phase calibration has zero slope");

  ShiftTrace shift;
  shift.times = trace.times;
  shift.delta_omega_r.resize(trace.times.size());

  std::size_t n_out = 0;
  double previous = cal.phi_ref;
  std::vector<std::uint8_t> flags(trace.times.size(), 0);
  for (std::size_t n = 0; n < trace.times.size(); ++n) {
    const double raw = std::atan2(trace.q_vals[n], trace.i_vals[n]);
    // Unwrap against the running phase so branch cuts cannot fold the trace.
    const double phi = previous + wrap_to_pi(raw - previous);
    previous = phi;
    const double delta = (phi - cal.phi_ref) / cal.slope;
    shift.delta_omega_r[n] = delta;
    if (std::abs(delta) > cal.linear_range) {
      flags[n] = 1;
      ++n_out;
    }
  }
  if (n_out > 0) shift.out_of_range = std::move(flags);
  if (10 * n_out > trace.times.size()) {
    throw numeric_error(
        "more than 10% of samples fall outside the linear phase range; fit the "
        "magnitude with the non-linear-regime model instead");
  }
  return shift;
}

}  // namespace esrsim
