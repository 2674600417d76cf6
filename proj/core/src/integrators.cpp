#include "aeelab/integrators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aeelab {

void ModelSpec::validate() const {
  const std::size_t n = op.modes();
  if (noise.modes() != n) throw std::invalid_argument("ModelSpec: noise mode count mismatch");
  if (X0.size() != n) throw std::invalid_argument("ModelSpec: X0 mode count mismatch");
  if (!(T > 0.0)) throw std::invalid_argument("ModelSpec: T must be positive");
  params.validate();
  if (op.basis() == BasisKind::DirichletSine && params.alpha != 2.0) {
    throw std::invalid_argument("ModelSpec: alpha must equal 2 for the Dirichlet sine basis");
  }
  for (double x : X0.coeff) {
    if (!std::isfinite(x)) throw std::invalid_argument("ModelSpec: X0 must be finite");
  }
}

namespace {

void check_table(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table, const char* where) {
  if (table.n_modes != model.modes()) {
    throw std::invalid_argument(std::string(where) + ": table/model mode count mismatch");
  }
  if (table.steps != grid.fine_steps() || table.T != grid.T) {
    throw std::invalid_argument(std::string(where) + ": table was built for a different grid");
  }
  if (model.T != grid.T) {
    throw std::invalid_argument(std::string(where) + ": model/grid horizon mismatch");
  }
}

void check_state_finite(const std::vector<double>& state, const char* where) {
  for (double x : state) {
    if (!std::isfinite(x)) throw std::overflow_error(std::string(where) + ": state became non-finite");
  }
}

}  // namespace

Trajectory aee_solve(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table,
                     std::size_t coarse_m, std::size_t galerkin_dim) {
  model.validate();
  grid.validate();
  check_table(model, grid, table, "aee_solve");
  if (coarse_m < 1 || grid.fine_steps() % coarse_m != 0) {
    throw std::invalid_argument("aee_solve: coarse_m must divide the fine step count");
  }
  const std::size_t n = model.modes();
  const std::size_t g = (galerkin_dim == 0) ? n : galerkin_dim;
  if (g > n) throw std::invalid_argument("aee_solve: galerkin_dim exceeds mode count");

  const double tau = model.T / static_cast<double>(coarse_m);
  std::vector<double> prop(g), phi(g), sqrt_q(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double lambda = model.op.eigenvalue(i);
    prop[i] = std::exp(-lambda * tau);
    phi[i] = tau * phi1_scalar(lambda * tau);
    sqrt_q[i] = std::sqrt(model.noise.q[i]);
  }

  const bool has_drift = !model.nl.is_zero();
  const SineTransform* tf = has_drift ? &SineTransform::shared(n) : nullptr;
  std::vector<double> phys(n), drift(n);

  std::vector<double> state(n, 0.0);
  for (std::size_t i = 0; i < g; ++i) state[i] = model.X0.coeff[i];

  Trajectory out;
  out.times.resize(coarse_m + 1);
  out.states.reserve(coarse_m + 1);
  out.states.emplace_back(std::vector<double>(state));
  out.times[0] = 0.0;

  for (std::size_t k = 0; k < coarse_m; ++k) {
    if (has_drift) {
      tf->to_physical(state, phys);
      for (std::size_t j = 0; j < n; ++j) phys[j] = model.nl.f(phys[j]);
      tf->to_spectral(phys, drift);
    }
    for (std::size_t i = 0; i < g; ++i) {
      const double conv = aggregate_convolution(table, i, k, model.op.eigenvalue(i), coarse_m);
      const double d = has_drift ? phi[i] * drift[i] : 0.0;
      state[i] = prop[i] * state[i] + d + sqrt_q[i] * conv;
    }
    check_state_finite(state, "aee_solve");
    out.times[k + 1] = static_cast<double>(k + 1) * tau;
    out.states.emplace_back(std::vector<double>(state));
  }
  return out;
}

Trajectory reference_solve(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table) {
  return aee_solve(model, grid, table, grid.fine_steps());
}

Trajectory limit_u_solve(const ModelSpec& model, const GridSpec& grid, const NoiseTable& table_w,
                         const NoiseTable& table_wtilde, const Trajectory& x_ref,
                         std::size_t steps, const SpectralField* u0) {
  model.validate();
  grid.validate();
  check_table(model, grid, table_w, "limit_u_solve");
  check_table(model, grid, table_wtilde, "limit_u_solve");
  if (table_w.domain == table_wtilde.domain && table_w.stream_id == table_wtilde.stream_id &&
      table_w.master_seed == table_wtilde.master_seed) {
    throw std::invalid_argument("limit_u_solve: W and W~ tables must come from distinct streams");
  }

  const std::size_t fine = grid.fine_steps();
  if (steps == 0) steps = fine;
  if (steps < 1 || fine % steps != 0) {
    throw std::invalid_argument("limit_u_solve: steps must divide the fine step count");
  }
  const std::size_t noise_block = fine / steps;
  if (x_ref.nodes() < 2 || (x_ref.nodes() - 1) % steps != 0) {
    throw std::invalid_argument("limit_u_solve: x_ref is not sampled on a refinement of the solver grid");
  }
  const std::size_t ref_stride = (x_ref.nodes() - 1) / steps;

  const std::size_t n = model.modes();
  const double T = model.T;
  const double h = T / static_cast<double>(steps);
  const double w_coef = -0.5 * T;
  const double wt_coef = -std::sqrt(3.0) * T / 6.0;

  std::vector<double> prop(n), sqrt_q(n), lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    lambda[i] = model.op.eigenvalue(i);
    prop[i] = std::exp(-lambda[i] * h);
    sqrt_q[i] = std::sqrt(model.noise.q[i]);
  }

  std::vector<double> state(n, 0.0);
  if (u0) {
    if (u0->size() != n) throw std::invalid_argument("limit_u_solve: u0 mode count mismatch");
    state = u0->coeff;
  }

  Trajectory out;
  out.times.resize(steps + 1);
  out.states.reserve(steps + 1);
  out.states.emplace_back(std::vector<double>(state));
  out.times[0] = 0.0;

  if (model.nl.is_zero()) {
    // DF = 0 and D^2F = 0: every forcing term vanishes; U stays at u0's decay.
    for (std::size_t j = 0; j < steps; ++j) {
      for (std::size_t i = 0; i < n; ++i) state[i] *= prop[i];
      out.times[j + 1] = static_cast<double>(j + 1) * h;
      out.states.emplace_back(std::vector<double>(state));
    }
    return out;
  }

  const auto& tf = SineTransform::shared(n);
  const bool has_trace = model.nl.kind() == NonlinearityKind::Sine;
  const std::vector<double> trace_kernel = has_trace ? q_trace_kernel(model.noise, n) : std::vector<double>();

  std::vector<double> phys_x(n), fx_phys(n), fprime(n), f_spec(n);
  std::vector<double> dir(n), dir_phys(n), jac(n), trace_spec(n);

  for (std::size_t j = 0; j < steps; ++j) {
    const std::vector<double>& x = x_ref.states[j * ref_stride].coeff;

    tf.to_physical(x, phys_x);
    for (std::size_t p = 0; p < n; ++p) {
      fx_phys[p] = model.nl.f(phys_x[p]);
      fprime[p] = model.nl.df(phys_x[p]);
    }
    tf.to_spectral(fx_phys, f_spec);

    // Combined jacobian direction: h [U - (T/2) A X - (T/2) F(X)] + noise part.
    for (std::size_t i = 0; i < n; ++i) {
      double dw = 0.0, dwt = 0.0;
      if (noise_block == 1) {
        dw = table_w.brownian(i, j);
        dwt = table_wtilde.brownian(i, j);
      } else {
        dw = aggregate_brownian(table_w, i, j, steps);
        dwt = aggregate_brownian(table_wtilde, i, j, steps);
      }
      const double ax = -lambda[i] * x[i];
      dir[i] = h * (state[i] - 0.5 * T * ax - 0.5 * T * f_spec[i]) +
               sqrt_q[i] * (w_coef * dw + wt_coef * dwt);
    }
    tf.to_physical(dir, dir_phys);
    for (std::size_t p = 0; p < n; ++p) dir_phys[p] *= fprime[p];
    tf.to_spectral(dir_phys, jac);

    if (has_trace) {
      for (std::size_t p = 0; p < n; ++p) fx_phys[p] = model.nl.d2f(phys_x[p]) * trace_kernel[p];
      tf.to_spectral(fx_phys, trace_spec);
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double tr = has_trace ? -0.25 * T * h * trace_spec[i] : 0.0;
      state[i] = prop[i] * (state[i] + jac[i] + tr);
    }
    check_state_finite(state, "limit_u_solve");
    out.times[j + 1] = static_cast<double>(j + 1) * h;
    out.states.emplace_back(std::vector<double>(state));
  }
  return out;
}

}  // namespace aeelab
