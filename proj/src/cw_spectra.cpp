#include "esrsim/cw_spectra.hpp"

#include <cmath>
#include <thread>

#include "esrsim/core_model.hpp"

namespace esrsim {

namespace {
constexpr std::complex<double> k_i{0.0, 1.0};
}

void FrequencyGrid::validate() const {
  if (points < 2) throw std::domain_error("frequency grid needs at least 2 points");
  if (!(stop > start)) throw std::domain_error("frequency grid must be strictly increasing");
}

std::vector<double> FrequencyGrid::values() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(points));
  const double step = (stop - start) / static_cast<double>(points - 1);
  for (int n = 0; n < points; ++n) out[static_cast<std::size_t>(n)] = start + step * n;
  return out;
}

std::complex<double> s21_bare(double omega, const ResonatorParams& res) {
  return 1.0 + res.kappa_c / (k_i * (omega - res.omega0) - res.kappa());
}

std::complex<double> s21_coupled(double omega, const ResonatorParams& res,
                                 const SpinEnsembleParams& spins, double omega_s) {
  const double g_sq = spins.g_ens * spins.g_ens * spins.polarization_scale;
  const std::complex<double> spin_term =
      g_sq / (k_i * (omega - omega_s) - 0.5 * spins.lineshape.fwhm);
  return 1.0 + res.kappa_c / (k_i * (omega - res.omega0) - res.kappa() + spin_term);
}

std::complex<double> s21_coupled_binned(double omega, const ResonatorParams& res,
                                        const EnsembleState& state, double gamma2) {
  std::complex<double> spin_term{0.0, 0.0};
  for (const auto& bin : state.bins) {
    // Population factor -sz: a ground-state bin absorbs fully, a saturated
    // bin (sz = 0) drops out of the susceptibility.
    const double strength = bin.weight * bin.g_k * bin.g_k * (-bin.sz);
    spin_term += strength / (k_i * (omega - bin.omega_k) - 0.5 * gamma2);
  }
  return 1.0 + res.kappa_c / (k_i * (omega - res.omega0) - res.kappa() + spin_term);
}

SpectrumMap avoided_crossing_map(std::span<const double> field_axis,
                                 const FrequencyGrid& freq_grid, const ResonatorParams& res,
                                 const SpinEnsembleParams& spins, int threads) {
  if (field_axis.empty()) throw std::domain_error("field axis must be non-empty");
  res.validate();
  spins.validate();

  SpectrumMap map;
  map.field_axis.assign(field_axis.begin(), field_axis.end());
  map.freq_axis = freq_grid.values();
  map.s21.resize(map.field_axis.size() * map.freq_axis.size());

  const auto fill_column = [&](std::size_t field_idx) {
    const double omega_s = zeeman_frequency(spins.g_factor, map.field_axis[field_idx]);
    std::complex<double>* row = map.s21.data() + field_idx * map.freq_axis.size();
    for (std::size_t j = 0; j < map.freq_axis.size(); ++j) {
      row[j] = s21_coupled(map.freq_axis[j], res, spins, omega_s);
    }
  };

  const std::size_t n_fields = map.field_axis.size();
  const unsigned n_workers =
      std::min<std::size_t>(n_fields, threads > 0 ? static_cast<unsigned>(threads) : 1u);
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < n_fields; ++i) fill_column(i);
  } else {
    // Columns are pure functions of the index; any schedule gives identical bytes.
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_fields; i += n_workers) fill_column(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return map;
}

std::pair<double, double> normal_mode_branches(double omega0, double omega_s, double g_eff) {
  const double mean = 0.5 * (omega0 + omega_s);
  const double delta = omega0 - omega_s;
  const double split = std::sqrt(0.25 * delta * delta + g_eff * g_eff);
  return {mean - split, mean + split};
}

}  // namespace esrsim
