#pragma once

#include <cstddef>
#include <vector>

#include "aeelab/nemytskii.hpp"
#include "aeelab/noise.hpp"
#include "aeelab/spectral.hpp"

namespace aeelab {

/// Everything needed to pose the semilinear equation: diagonal operator,
/// pointwise nonlinearity, diagonal noise, assumption parameters, horizon
/// and (nonrandom) initial data. All components share the mode count.
struct ModelSpec {
  SpectralOperator op;
  Nonlinearity nl;
  NoiseSpec noise;
  AssumptionParams params;
  double T = 1.0;
  SpectralField X0;

  std::size_t modes() const { return op.modes(); }
  void validate() const;
};

/// Time-indexed spectral fields, times strictly increasing from 0.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;

  const SpectralField& terminal() const { return states.back(); }
  std::size_t nodes() const { return states.size(); }
};

/// Accelerated exponential Euler on the coarse grid with coarse_m steps
/// (coarse_m must divide grid.fine_steps() so coarse nodes are fine nodes):
///
///   X_{k+1} = E(tau) X_k + A^{-1}(E(tau)-I) F(X_k) + int_{t_k}^{t_{k+1}} E(t_{k+1}-s) dW^Q
///
/// with the stochastic convolution taken exactly from the fine table via
/// semigroup-weighted aggregation, scaled per mode by sqrt(q_i).
///
/// galerkin_dim > 0 runs the spectrally truncated scheme: state, drift and
/// noise are projected onto the first galerkin_dim modes (field length is
/// unchanged, trailing coefficients stay zero).
Trajectory aee_solve(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table,
                     std::size_t coarse_m, std::size_t galerkin_dim = 0);

/// AEE at every fine node (coarse_m = grid.fine_steps()); stands in for the
/// exact mild solution with bias O(1/(m*refine)) on the shared noise path.
Trajectory reference_solve(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table);

/// Exponential left-point scheme for the limit equation of the normalized error:
///
///   U_{j+1} = E(h) [ U_j + h D_j + S_j ],  U_0 = u0 (zero by default),
///   D_j = DF(X_j)[U_j - (T/2) A X_j - (T/2) F(X_j)] - (T/4) trace term,
///   S_j = DF(X_j)[ -(T/2) sqrt(q) dW_j - (sqrt(3)T/6) sqrt(q) dW~_j ],
///
/// driven by the Brownian increments of the primary table and an independent
/// copy. `steps` (0 = table.steps) selects the solver grid; it must divide
/// table.steps, and x_ref must be sampled on a refinement of that grid.
Trajectory limit_u_solve(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table_w,
                         const NoiseTable& table_wtilde, const Trajectory& x_ref,
                         std::size_t steps = 0, const SpectralField* u0 = nullptr);

}  // namespace aeelab
