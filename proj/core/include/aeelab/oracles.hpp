#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "aeelab/integrators.hpp"
#include "aeelab/sode.hpp"

namespace aeelab {

/// Per-mode joint Gaussian moments of (X_i(t), U_i(t)) for the Linear(c) preset,
/// obtained by integrating the mean ODE and the Lyapunov ODE
///   dSigma/dt = G Sigma + Sigma G^T + B B^T,   Sigma(0) = 0,
/// with the mode-i drift and diffusion
///   G = [[-lambda+c, 0], [(T/2) c (lambda-c), -lambda+c]],
///   B = [[sqrt(q), 0], [-(T/2) c sqrt(q), -(sqrt(3)T/6) c sqrt(q)]].
struct LinearLimitMoments {
  std::vector<double> mean_x, mean_u;
  std::vector<double> var_x, var_u, cov_xu;
  std::size_t modes() const { return mean_x.size(); }
};

/// Classical RK4 at fixed step t/rk_steps; throws unless nl is Linear.
LinearLimitMoments linear_limit_covariance(const ModelSpec& model, double t,
                                           std::size_t rk_steps = 2000);

/// Exact per-mode moments of the F = 0 (Ornstein-Uhlenbeck) solution:
/// mean e^{-lambda t} X0_i, variance q_i (1 - e^{-2 lambda t}) / (2 lambda).
struct OuMoments {
  std::vector<double> mean, var;
};
OuMoments ou_exact_moments(const ModelSpec& model, double t);

/// Joint Gaussian moments of the stacked (Y(t), M(t)) system for linear drift
/// b(y) = B y: a 2d x 2d Lyapunov ODE with
///   dY = (C+B) Y dt + dW,
///   dM = (C+B) M dt - (T/2) B (C+B) Y dt - (T/2) B dW - (sqrt(3)T/6) B dW~.
struct SodeLimitMoments {
  std::vector<double> mean;  // (Y, M), length 2d
  Matrix cov;                // 2d x 2d
};
SodeLimitMoments sode_linear_limit_covariance(const SodeModel& model, double t,
                                              std::size_t rk_steps = 2000);

}  // namespace aeelab
