#pragma once

#include <stdexcept>
#include <vector>

#include "gkpft/montecarlo.hpp"

namespace gkpft {

// Thrown by fit_threshold when the failure-rate curves of different
// distances never cross inside the sampled noise range.
struct NoCrossingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ThresholdFit {
  double epsilon_th = 0.0;
  double nu = 1.0;
  double stderr_epsilon = 0.0;  // profile-curvature standard error
  // quadratic coefficients of P = a + b x + c x^2, x = (eps - eps_th) d^(1/nu)
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double chi2 = 0.0;
  int n_points = 0;
  double window_center = 0.0;  // visual crossing the fit window is cut around
};

// Universal-scaling crossing fit. Expects rows of a single preparation
// setting spanning at least three odd distances and five noise values around
// a crossing; data outside +-30% of the visually estimated crossing are
// dropped before the least-squares stage.
ThresholdFit fit_threshold(const std::vector<SweepRow>& rows);

struct ScalingParams {
  double t = 0.0;   // qubit-level error rate at threshold
  double a = 1.0;
  double nu = 1.0;
  double mu = 1.0;
};

// erfc(sqrt(pi) / (2 sqrt(2 epsilon))): the equivalent qubit-level error
// rate of noise variance epsilon.
double scaling_t_of_epsilon(double epsilon);

// P_fail = 0.143 exp[-a ((t - erfc(...)) d^(1/nu))^mu]; valid at or below
// the modeled threshold (throws std::domain_error above it or at eps <= 0).
double eval_scaling(double epsilon, int distance, const ScalingParams& params);

struct ScalingFit {
  ScalingParams params;
  double rss = 0.0;  // residual sum of squares over log rates
  int n_points = 0;
};

// Nonlinear least squares of the scale-invariant ansatz on log failure
// rates. Rows with fewer than 10 observed failures are excluded; at least
// four usable points over two distances are required.
ScalingFit fit_scaling(const std::vector<SweepRow>& rows);

}  // namespace gkpft
