#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "esrsim/errors.hpp"

namespace esrsim {

// Residual evaluator: fill r (pre-sized) at parameter vector p. Complex data
// enter as stacked (Re, Im) residual pairs built by the model layer.
using ResidualFn = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r)>;

struct FitProblem {
  ResidualFn residuals;
  int n_residuals = 0;
  Eigen::VectorXd p0;
  Eigen::VectorXd lower;          // empty -> unbounded
  Eigen::VectorXd upper;          // empty -> unbounded
  std::vector<bool> fixed;        // empty -> all free
  Eigen::VectorXd weights;        // empty -> unweighted
  Eigen::VectorXd param_scales;   // finite-difference scale floor; empty -> |p0| or 1

  void validate() const;
};

struct FitResult {
  Eigen::VectorXd parameters;
  Eigen::VectorXd stderrors;     // zero for fixed parameters
  Eigen::MatrixXd covariance;    // zero rows/cols for fixed parameters
  double residual_norm = 0.0;    // Euclidean norm of the weighted residual
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct LeastSquaresOptions {
  double relative_tolerance = 1e-10;  // on the residual-norm change
  int max_iterations = 500;
  double fd_relative_step = 1e-6;     // central-difference Jacobian step
  double lambda0 = 0.0;               // initial Marquardt damping; 0 -> near Gauss-Newton
};

// Levenberg-Marquardt damped Gauss-Newton descent with box projection,
// central-difference Jacobians and covariance from the normal equations at
// the optimum. Throws fit_error on rank deficiency or non-finite residuals.
FitResult least_squares(const FitProblem& problem, const LeastSquaresOptions& options = {});

// The central-difference Jacobian the engine uses (columns = free
// parameters, rows weighted like the residuals). Exposed for verification.
Eigen::MatrixXd fd_jacobian(const FitProblem& problem, const Eigen::VectorXd& p,
                            double relative_step = 1e-6);

}  // namespace esrsim
