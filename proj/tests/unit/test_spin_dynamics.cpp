#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "esrsim/core_model.hpp"
#include "esrsim/spin_dynamics.hpp"

using namespace esrsim;

namespace {

SpinEnsembleParams two_component_spins() {
  SpinEnsembleParams spins;
  spins.g_factor = 2.0064;
  spins.g_ens = hz_to_angular(4.52e6);
  spins.lineshape = {hz_to_angular(5.434e9), hz_to_angular(6.2e6), 2.0};
  spins.relaxation = {
      {0.16, 0.23e-3, QGaussianShape{hz_to_angular(5.434e9), hz_to_angular(4.9e6), 1.7}},
      {0.84, 1.24e-3, std::nullopt},
  };
  return spins;
}

SpinEnsembleParams single_bin_spins(double t1 = 1.0) {
  SpinEnsembleParams spins;
  spins.g_ens = hz_to_angular(4.52e6);
  spins.lineshape = {hz_to_angular(5.434e9), hz_to_angular(1e3), 2.0};
  spins.relaxation = {{1.0, t1, {}}};
  return spins;
}

double bloch_norm(const SpinBin& bin) {
  return bin.sz * bin.sz + 4.0 * std::norm(bin.s_minus);
}

}  // namespace

TEST_CASE("discretize: degenerate single bin") {
  auto spins = single_bin_spins();
  spins.polarization_scale = 0.81;
  const auto state = discretize_ensemble(spins, 1, 0.0, 0.065);
  REQUIRE(state.bins.size() == 1);
  CHECK(state.bins[0].weight == doctest::Approx(1.0));
  CHECK(state.bins[0].g_k == doctest::Approx(spins.g_ens * 0.9).epsilon(1e-12));
  CHECK(state.bins[0].omega_k == spins.lineshape.center);
  CHECK(state.bins[0].sz == doctest::Approx(state.sz_eq));
}

TEST_CASE("discretize: component normalization and symmetry") {
  auto spins = two_component_spins();
  spins.relaxation[0].amplitude = 0.5;
  spins.relaxation[1].amplitude = 0.5;
  const double span = 8.0 * spins.lineshape.fwhm;
  const auto state = discretize_ensemble(spins, 2001, span, 0.065);
  REQUIRE(state.bins.size() == 2 * 2001);

  double sums[2] = {0.0, 0.0};
  double g_sq = 0.0;
  for (const auto& bin : state.bins) {
    sums[bin.component_index] += bin.weight;
    g_sq += bin.weight * bin.g_k * bin.g_k;
  }
  CHECK(sums[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sums[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(g_sq == doctest::Approx(spins.g_ens * spins.g_ens * spins.polarization_scale)
                    .epsilon(1e-9));

  // Weighted mean lands on the center for the symmetric density.
  double mean = 0.0;
  for (const auto& bin : state.bins) mean += bin.weight * bin.omega_k;
  CHECK(std::abs(mean - spins.lineshape.center) < hz_to_angular(1e3));
}

TEST_CASE("discretize: narrow span rejected") {
  const auto spins = two_component_spins();
  CHECK_THROWS_AS(discretize_ensemble(spins, 501, 2.0 * spins.lineshape.fwhm, 0.065),
                  config_error);
}

TEST_CASE("evolve: equilibrium is a fixed point") {
  const auto spins = two_component_spins();
  auto state = discretize_ensemble(spins, 101, 6.5 * spins.lineshape.fwhm, 0.065);
  const auto reference = state;

  PulseSegment off{5e-5, spins.lineshape.center, 0.0, 0.0};
  evolve_inplace(state, spins, off, 5e-10, {});
  for (std::size_t i = 0; i < state.bins.size(); ++i) {
    CHECK(state.bins[i].sz == doctest::Approx(reference.bins[i].sz).epsilon(1e-12));
    CHECK(std::abs(state.bins[i].s_minus) < 1e-15);
  }
}

TEST_CASE("evolve: resonant pi pulse flips sz") {
  const auto spins = single_bin_spins(1e9);  // effectively lossless
  auto state = discretize_ensemble(spins, 1, 0.0, 0.065);
  state.bins[0].sz = -1.0;
  state.sz_eq = -1.0;

  const double rabi = hz_to_angular(100e3);
  PulseSegment pi_pulse{constants::pi / rabi, spins.lineshape.center, rabi, 0.0};
  evolve_inplace(state, spins, pi_pulse, 1e-7, {});
  CHECK(state.bins[0].sz == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("evolve: saturation steady state matches the Bloch formula") {
  const double t1 = 1e-4;
  const auto spins = single_bin_spins(t1);
  auto state = discretize_ensemble(spins, 1, 0.0, 0.065);

  const double rabi = hz_to_angular(3e3);
  const double detuning = hz_to_angular(5e3);
  PulseSegment drive{40.0 * t1, spins.lineshape.center + detuning, rabi, 0.3};
  evolve_inplace(state, spins, drive, 2.5e-7, {});

  const double t2 = 2.0 * t1;  // lifetime-limited dephasing
  const double saturation =
      rabi * rabi * t1 * t2 / (1.0 + detuning * detuning * t2 * t2);
  const double expected = state.sz_eq / (1.0 + saturation);
  CHECK(state.bins[0].sz == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("evolve: refuses a too-coarse step") {
  const auto spins = two_component_spins();
  auto state = discretize_ensemble(spins, 501, 6.5 * spins.lineshape.fwhm, 0.065);
  PulseSegment pulse{1e-4, spins.lineshape.center, hz_to_angular(100e3), 0.0};
  CHECK_THROWS_AS(evolve_inplace(state, spins, pulse, 1e-6, {}), numeric_error);
}

TEST_CASE("evolve: pure relaxation matches the analytic exponential") {
  const double t1 = 1e-3;
  const auto spins = single_bin_spins(t1);
  auto state = discretize_ensemble(spins, 1, 0.0, 0.065);
  const double sz0 = 0.0;
  state.bins[0].sz = sz0;

  const double duration = 2e-3;
  PulseSegment off{duration, spins.lineshape.center, 0.0, 0.0};
  evolve_inplace(state, spins, off, 1e-7, {});
  const double expected = state.sz_eq + (sz0 - state.sz_eq) * std::exp(-duration / t1);
  CHECK(state.bins[0].sz == doctest::Approx(expected).epsilon(1e-8));

  // The exact undriven propagator agrees with the integrator.
  auto exact = discretize_ensemble(spins, 1, 0.0, 0.065);
  exact.bins[0].sz = sz0;
  free_relax(exact, spins, duration);
  CHECK(exact.bins[0].sz == doctest::Approx(state.bins[0].sz).epsilon(1e-9));
}

TEST_CASE("integrator order on the pi-pulse case") {
  const auto spins = single_bin_spins(1e9);
  auto state = discretize_ensemble(spins, 1, 0.0, 0.065);
  state.bins[0].sz = -1.0;
  state.sz_eq = -1.0;

  const double rabi = hz_to_angular(100e3);
  PulseSegment pi_pulse{constants::pi / rabi, spins.lineshape.center, rabi, 0.0};
  const auto report = rk4_convergence(state, spins, pi_pulse, 1.2e-7);
  CHECK(report.observed_order >= 3.9);
}

TEST_CASE("bloch ball preserved under a hard drive") {
  auto spins = two_component_spins();
  spins.lineshape.fwhm = hz_to_angular(200e3);
  spins.relaxation[0].lineshape->fwhm = hz_to_angular(150e3);
  auto state = discretize_ensemble(spins, 16, 4.0 * spins.lineshape.fwhm, 0.065);

  PulseSegment drive{5e-3, spins.lineshape.center + hz_to_angular(50e3),
                     hz_to_angular(80e3), 1.1};
  double worst = 0.0;
  EvolveOptions options;
  options.sample_stride = 1;
  evolve_inplace(state, spins, drive, 5e-9, options, [&](const EnsembleState& snapshot) {
    for (const auto& bin : snapshot.bins) worst = std::max(worst, bloch_norm(bin));
  });
  CHECK(worst <= 1.0 + 1e-6);
}

TEST_CASE("cavity shift: paper single-bin value and linearity") {
  const double delta = hz_to_angular(76e6);
  const double g = hz_to_angular(4.52e6);

  EnsembleState state;
  state.sz_eq = -1.0;
  const double omega0 = hz_to_angular(5.51e9);
  state.bins.push_back(SpinBin{omega0 - delta, 1.0, g, -1.0, {0.0, 0.0}, 0});

  const double shift = cavity_shift(state, omega0);
  CHECK(shift == doctest::Approx(-dispersive_shift(g, delta)).epsilon(1e-12));
  CHECK(std::abs(angular_to_hz(shift) + 269e3) < 1e3);

  // Saturated bin contributes nothing.
  state.bins[0].sz = 0.0;
  CHECK(cavity_shift(state, omega0) == 0.0);

  // Linearity: scaling the deviation from equilibrium scales the shift.
  auto spins = two_component_spins();
  auto ensemble = discretize_ensemble(spins, 301, 6.5 * spins.lineshape.fwhm, 0.065);
  const double shift_eq = cavity_shift(ensemble, omega0);
  auto bumped = ensemble;
  for (auto& bin : bumped.bins) bin.sz = ensemble.sz_eq + 0.123 * (0.0 - ensemble.sz_eq);
  const double excursion = cavity_shift(bumped, omega0) - shift_eq;
  for (auto& bin : bumped.bins) bin.sz = ensemble.sz_eq + 0.246 * (0.0 - ensemble.sz_eq);
  const double doubled = cavity_shift(bumped, omega0) - shift_eq;
  CHECK(doubled == doctest::Approx(2.0 * excursion).epsilon(1e-12));
}

TEST_CASE("cavity shift: narrow ensemble approaches the single-bin value") {
  auto spins = single_bin_spins(1e-3);
  spins.lineshape.fwhm = hz_to_angular(50e3);
  const double omega0 = spins.lineshape.center + hz_to_angular(76e6);

  const auto state = discretize_ensemble(spins, 2001, 8.0 * spins.lineshape.fwhm, 0.065);
  const double binned = cavity_shift(state, omega0);
  const double single = -dispersive_shift(spins.g_ens, hz_to_angular(76e6)) * (-state.sz_eq);
  CHECK(std::abs(binned - single) < 0.01 * std::abs(single));
}

TEST_CASE("saturation recovery: zero pulse gives a flat trace") {
  const auto spins = two_component_spins();
  const ResonatorParams res{spins.lineshape.center + hz_to_angular(76e6),
                            hz_to_angular(85e3), hz_to_angular(85e3)};
  RecoveryOptions options;
  options.n_bins = 201;
  options.span_fwhm = 6.5;
  options.sample_dt = 5e-5;

  PulseSequence pulse{{2e-3, spins.lineshape.center, 0.0, 0.0}};
  const auto trace = saturation_recovery(spins, res, pulse, 4e-3, 0.0, options);
  REQUIRE(trace.times.size() > 10);
  CHECK(!trace.dispersive_warning);
  for (const double v : trace.delta_omega_r) CHECK(std::abs(v) < 1e-9 * res.kappa());
  CHECK(std::is_sorted(trace.times.begin(), trace.times.end()));
}

TEST_CASE("coupling vs time") {
  auto spins = two_component_spins();
  spins.polarization_scale = 0.9;

  // Fully saturated start, full recovery.
  CHECK(coupling_vs_time(spins, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(coupling_vs_time(spins, 1e3) ==
        doctest::Approx(spins.g_ens * 0.9).epsilon(1e-12));
  CHECK_THROWS_AS(coupling_vs_time(spins, -1.0), std::domain_error);

  // Free amplitudes: constant when nothing was saturated.
  std::vector<RelaxationComponent> idle = {{0.0, 1e-3, {}}, {0.0, 2e-3, {}}};
  CHECK(gt_coupling(spins.g_ens, 1.0, idle, 0.0) == doctest::Approx(spins.g_ens));
  CHECK(gt_coupling(spins.g_ens, 1.0, idle, 5e-3) == doctest::Approx(spins.g_ens));

  // Half recovery of a single slow component at t = T1 ln 2.
  std::vector<RelaxationComponent> slow = {{1.0, 1.24e-3, {}}};
  CHECK(gt_coupling(spins.g_ens, 1.0, slow, 1.24e-3 * std::log(2.0)) ==
        doctest::Approx(0.5 * spins.g_ens).epsilon(1e-12));
}
