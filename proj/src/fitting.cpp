#include "esrsim/fitting.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace esrsim {

namespace {

constexpr double k_lambda_min = 1e-14;
constexpr double k_lambda_max = 1e15;
constexpr double k_lambda_shrink = 1.0 / 3.0;
constexpr double k_lambda_grow = 4.0;
// First trial is essentially the undamped Gauss-Newton step, so quadratic
// objectives land in one move and need one more pass to confirm.
constexpr double k_lambda_start = 1e-12;
constexpr double k_lambda_after_first_reject = 1e-3;

std::string snapshot(const Eigen::VectorXd& p) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << "]";
  return os.str();
}

std::vector<Eigen::Index> free_indices(const FitProblem& problem) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < problem.p0.size(); ++i) {
    if (problem.fixed.empty() || !problem.fixed[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  return idx;
}

void clamp_to_bounds(const FitProblem& problem, Eigen::VectorXd& p) {
  if (problem.lower.size()) p = p.cwiseMax(problem.lower);
  if (problem.upper.size()) p = p.cwiseMin(problem.upper);
}

void eval_weighted(const FitProblem& problem, const Eigen::VectorXd& p, Eigen::VectorXd& r) {
  r.resize(problem.n_residuals);
  problem.residuals(p, r);
  if (problem.weights.size()) r.array() *= problem.weights.array();
}

double fd_scale(const FitProblem& problem, const Eigen::VectorXd& p, Eigen::Index j) {
  double scale = problem.param_scales.size() ? problem.param_scales[j]
                                             : std::abs(problem.p0[j]);
  if (!(scale > 0.0)) scale = 1.0;
  return std::max(std::abs(p[j]), scale);
}

}  // namespace

void FitProblem::validate() const {
  if (!residuals) throw std::invalid_argument("fit problem has no residual function");
  if (n_residuals <= 0) throw std::invalid_argument("fit problem has no residuals");
  const auto n = p0.size();
  if (n == 0) throw std::invalid_argument("fit problem has no parameters");
  if (lower.size() != 0 && lower.size() != n) throw std::invalid_argument("lower bound size mismatch");
  if (upper.size() != 0 && upper.size() != n) throw std::invalid_argument("upper bound size mismatch");
  if (!fixed.empty() && static_cast<Eigen::Index>(fixed.size()) != n) {
    throw std::invalid_argument("fixed mask size mismatch");
  }
  if (weights.size() != 0 && weights.size() != n_residuals) {
    throw std::invalid_argument("weights size mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lower.size() && p0[i] < lower[i]) throw std::invalid_argument("p0 below lower bound");
    if (upper.size() && p0[i] > upper[i]) throw std::invalid_argument("p0 above upper bound");
  }
}

Eigen::MatrixXd fd_jacobian(const FitProblem& problem, const Eigen::VectorXd& p,
                            double relative_step) {
  const auto idx = free_indices(problem);
  Eigen::MatrixXd jac(problem.n_residuals, static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd r_plus(problem.n_residuals), r_minus(problem.n_residuals);
  for (std::size_t col = 0; col < idx.size(); ++col) {
    const Eigen::Index j = idx[col];
    const double h = relative_step * fd_scale(problem, p, j);
    Eigen::VectorXd p_plus = p;
    Eigen::VectorXd p_minus = p;
    p_plus[j] += h;
    p_minus[j] -= h;
    clamp_to_bounds(problem, p_plus);
    clamp_to_bounds(problem, p_minus);
    const double spread = p_plus[j] - p_minus[j];
    if (!(spread > 0.0)) {
      throw fit_error("parameter " + std::to_string(j) +
                      " is pinned by its bounds; fix it instead");
    }
    eval_weighted(problem, p_plus, r_plus);
    eval_weighted(problem, p_minus, r_minus);
    if (!r_plus.allFinite() || !r_minus.allFinite()) {
      throw fit_error("non-finite residual during Jacobian evaluation at p = " + snapshot(p));
    }
    jac.col(static_cast<Eigen::Index>(col)) = (r_plus - r_minus) / spread;
  }
  return jac;
}

FitResult least_squares(const FitProblem& problem, const LeastSquaresOptions& options) {
  problem.validate();

  const Eigen::Index n_params = problem.p0.size();
  const Eigen::Index m = problem.n_residuals;
  const auto free_idx = free_indices(problem);
  const Eigen::Index n_free = static_cast<Eigen::Index>(free_idx.size());
  if (n_free == 0) throw std::invalid_argument("all parameters are fixed");

  Eigen::VectorXd p = problem.p0;
  Eigen::VectorXd r(m), scratch(m);
  eval_weighted(problem, p, r);
  if (!r.allFinite()) {
    throw fit_error("residual is not finite at the initial parameters " + snapshot(p));
  }
  double rss = r.squaredNorm();
  const double rss0 = rss;

  FitResult result;
  double lambda = options.lambda0 > 0.0 ? options.lambda0 : k_lambda_start;
  Eigen::MatrixXd jac;
  int rejected_in_a_row = 0;

  while (result.iterations < options.max_iterations) {
    ++result.iterations;
    jac = fd_jacobian(problem, p, options.fd_relative_step);

    const Eigen::MatrixXd hessian = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * r;
    const Eigen::VectorXd diag = hessian.diagonal();
    if (!(diag.minCoeff() > 0.0) || !diag.allFinite()) {
      throw fit_error("singular normal equations: a parameter has no leverage (rank-deficient)");
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = hessian;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);

      Eigen::VectorXd p_trial = p;
      for (Eigen::Index col = 0; col < n_free; ++col) {
        p_trial[free_idx[static_cast<std::size_t>(col)]] += step[col];
      }
      clamp_to_bounds(problem, p_trial);

      eval_weighted(problem, p_trial, scratch);
      const double rss_trial = scratch.allFinite()
                                   ? scratch.squaredNorm()
                                   : std::numeric_limits<double>::infinity();
      if (rss_trial <= rss) {
        const double reduction = rss - rss_trial;
        p = p_trial;
        r = scratch;
        rss = rss_trial;
        lambda = std::max(lambda * k_lambda_shrink, k_lambda_min);
        accepted = true;
        rejected_in_a_row = 0;
        if (reduction <= options.relative_tolerance * std::max(rss, 1e-300) ||
            rss <= 1e-24 * std::max(1.0, rss0)) {
          result.converged = true;
        }
      } else {
        lambda = lambda < 1e-6 ? k_lambda_after_first_reject : lambda * k_lambda_grow;
        if (!std::isfinite(rss_trial) && ++rejected_in_a_row > 60) {
          throw fit_error("residual repeatedly non-finite near p = " + snapshot(p));
        }
        if (lambda > k_lambda_max) {
          // Stalled at the numerical floor of the objective.
          result.converged = true;
          accepted = true;
        }
      }
    }
    if (result.converged) break;
  }

  // Covariance from the normal equations at the optimum.
  jac = fd_jacobian(problem, p, options.fd_relative_step);
  const Eigen::MatrixXd hessian = jac.transpose() * jac;
  const Eigen::Index dof = m - n_free;
  const double sigma_sq = dof > 0 ? rss / static_cast<double>(dof) : 0.0;
  if (dof <= 0) result.warnings.push_back("no residual degrees of freedom; stderr set to 0");

  Eigen::MatrixXd cov_free;
  const auto ldlt = hessian.ldlt();
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    cov_free = sigma_sq * ldlt.solve(Eigen::MatrixXd::Identity(n_free, n_free));
  } else {
    cov_free = Eigen::MatrixXd::Zero(n_free, n_free);
    result.warnings.push_back("normal equations singular at optimum; covariance unavailable");
  }
  cov_free = 0.5 * (cov_free + cov_free.transpose()).eval();

  result.parameters = p;
  result.covariance = Eigen::MatrixXd::Zero(n_params, n_params);
  result.stderrors = Eigen::VectorXd::Zero(n_params);
  for (Eigen::Index a = 0; a < n_free; ++a) {
    const Eigen::Index ia = free_idx[static_cast<std::size_t>(a)];
    result.stderrors[ia] = std::sqrt(std::max(0.0, cov_free(a, a)));
    for (Eigen::Index b = 0; b < n_free; ++b) {
      result.covariance(ia, free_idx[static_cast<std::size_t>(b)]) = cov_free(a, b);
    }
  }
  result.residual_norm = std::sqrt(rss);
  return result;
}

}  // namespace esrsim
