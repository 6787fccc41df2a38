#pragma once

#include <complex>
#include <span>

#include "esrsim/fitting.hpp"
#include "esrsim/types.hpp"

namespace esrsim {

// The fit models the paper applies. Every model evaluator below delegates to
// the corresponding forward-module function, so fit and simulation cannot
// drift apart.

// --- bare notch -------------------------------------------------------------
// Parameter layout: [omega0, kappa_i, kappa_c]
std::complex<double> notch_model(double omega, const Eigen::VectorXd& p);

struct NotchFit {
  ResonatorParams params;
  double q_factor = 0.0;
  FitResult fit;
};
NotchFit fit_notch(std::span<const double> omega, std::span<const std::complex<double>> s21);

// --- coupled spectrum (|S21|^2) ---------------------------------------------
// Parameter layout: [omega0, kappa_i, kappa_c, g_ens, gamma2_star, omega_s]
double coupled_model_mag2(double omega, const Eigen::VectorXd& p);

struct CoupledFit {
  double g_ens = 0.0;
  double gamma2_star = 0.0;
  double omega_s = 0.0;
  FitResult fit;
};
// kappa (and omega0) fixed from the bare-notch fit by default; free_kappa
// releases kappa_i/kappa_c for covariance studies.
CoupledFit fit_coupled(std::span<const double> omega, std::span<const double> mag2,
                       const ResonatorParams& res, bool free_kappa = false);

// --- q-Gaussian lineshape ----------------------------------------------------
// Parameter layout: [scale, center, fwhm, q]
double qgaussian_model(double omega, const Eigen::VectorXd& p);

struct QGaussianFit {
  QGaussianShape shape;
  double scale = 0.0;
  FitResult fit;
};
QGaussianFit fit_qgaussian(std::span<const double> omega, std::span<const double> amplitude);

// --- bi-exponential recovery -------------------------------------------------
// Parameter layout: [a1, t1_fast, a2, t1_slow, offset]
double biexp_model(double t, const Eigen::VectorXd& p);

struct BiexpFit {
  double a1 = 0.0;
  double t1_fast = 0.0;
  double a2 = 0.0;
  double t1_slow = 0.0;
  double offset = 0.0;
  FitResult fit;
};
BiexpFit fit_biexponential(std::span<const double> times, std::span<const double> values);

// --- non-linear-regime |S21(t)| with G(t) -----------------------------------
struct GtModelInputs {
  ResonatorParams res;
  double g_ens = 0.0;        // rad/s, fixed from the CW fit
  double gamma2_star = 0.0;  // rad/s
  double omega_s = 0.0;      // rad/s
  double omega_r = 0.0;      // readout frequency, rad/s
};
// Parameter layout: [polarization, a1, a2, t1_fast, t1_slow]
double gt_model_mag(double t, const Eigen::VectorXd& p, const GtModelInputs& inputs);

struct GtFit {
  double polarization = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double t1_fast = 0.0;
  double t1_slow = 0.0;
  FitResult fit;
};
// Times are measured from the end of the saturating pulse. delta is the
// resonator-spin detuning omega0 - omega_s.
GtFit fit_nonlinear_gt(std::span<const double> times, std::span<const double> magnitude,
                       const ResonatorParams& res, double g_ens, double gamma2_star,
                       double delta, double omega_r);

}  // namespace esrsim
