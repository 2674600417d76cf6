#include "aeelab/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace aeelab {

namespace {

// RK4 on the affine ODE z' = G z + g0 (mean) stacked with S' = G S + S G^T + W.
// State packed as [mu (k), S (k*k row-major)].
struct LyapunovOde {
  Matrix G;
  Matrix W;  // B B^T

  std::vector<double> rhs(const std::vector<double>& z) const {
    const std::size_t k = G.rows;
    std::vector<double> out(z.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += G(i, j) * z[j];
      out[i] = acc;
    }
    const double* S = z.data() + k;
    double* dS = out.data() + k;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double acc = W(i, j);
        for (std::size_t l = 0; l < k; ++l) {
          acc += G(i, l) * S[l * k + j] + S[i * k + l] * G(j, l);
        }
        dS[i * k + j] = acc;
      }
    }
    return out;
  }
};

std::vector<double> rk4_integrate(const LyapunovOde& ode, std::vector<double> z, double t,
                                  std::size_t steps) {
  if (t == 0.0 || steps == 0) return z;
  const double dt = t / static_cast<double>(steps);
  std::vector<double> k1, k2, k3, k4, tmp(z.size());
  for (std::size_t s = 0; s < steps; ++s) {
    k1 = ode.rhs(z);
    for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
    k2 = ode.rhs(tmp);
    for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
    k3 = ode.rhs(tmp);
    for (std::size_t i = 0; i < z.size(); ++i) tmp[i] = z[i] + dt * k3[i];
    k4 = ode.rhs(tmp);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return z;
}

}  // namespace

LinearLimitMoments linear_limit_covariance(const ModelSpec& model, double t, std::size_t rk_steps) {
  if (model.nl.kind() != NonlinearityKind::Linear) {
    throw std::invalid_argument("linear_limit_covariance: nonlinearity must be Linear");
  }
  if (t < 0.0 || t > model.T) {
    throw std::invalid_argument("linear_limit_covariance: t must lie in [0, T]");
  }
  const double c = model.nl.param();
  const double T = model.T;
  const std::size_t n = model.modes();

  LinearLimitMoments out;
  out.mean_x.resize(n);
  out.mean_u.resize(n);
  out.var_x.resize(n);
  out.var_u.resize(n);
  out.cov_xu.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = model.op.eigenvalue(i);
    const double q = model.noise.q[i];
    const double sq = std::sqrt(q);
    const double a = -lambda + c;

    LyapunovOde ode;
    ode.G = Matrix(2, 2);
    ode.G(0, 0) = a;
    ode.G(1, 0) = 0.5 * T * c * (lambda - c);
    ode.G(1, 1) = a;
    Matrix B(2, 2);
    B(0, 0) = sq;
    B(1, 0) = -0.5 * T * c * sq;
    B(1, 1) = -std::sqrt(3.0) * T / 6.0 * c * sq;
    ode.W = matmul(B, transpose(B));

    std::vector<double> z(2 + 4, 0.0);
    z[0] = model.X0.coeff[i];
    z = rk4_integrate(ode, std::move(z), t, rk_steps);

    out.mean_x[i] = z[0];
    out.mean_u[i] = z[1];
    out.var_x[i] = z[2 + 0];
    out.cov_xu[i] = 0.5 * (z[2 + 1] + z[2 + 2]);
    out.var_u[i] = z[2 + 3];
  }
  return out;
}

OuMoments ou_exact_moments(const ModelSpec& model, double t) {
  if (!model.nl.is_zero()) {
    throw std::invalid_argument("ou_exact_moments: nonlinearity must be Zero");
  }
  if (t < 0.0) throw std::invalid_argument("ou_exact_moments: t must be >= 0");
  const std::size_t n = model.modes();
  OuMoments out;
  out.mean.resize(n);
  out.var.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lambda = model.op.eigenvalue(i);
    out.mean[i] = std::exp(-lambda * t) * model.X0.coeff[i];
    out.var[i] = -model.noise.q[i] * std::expm1(-2.0 * lambda * t) / (2.0 * lambda);
  }
  return out;
}

SodeLimitMoments sode_linear_limit_covariance(const SodeModel& model, double t, std::size_t rk_steps) {
  if (model.b.kind() != SodeDriftKind::Linear) {
    throw std::invalid_argument("sode_linear_limit_covariance: drift must be linear");
  }
  if (t < 0.0 || t > model.T) {
    throw std::invalid_argument("sode_linear_limit_covariance: t must lie in [0, T]");
  }
  model.validate();
  const std::size_t d = model.dim();
  const double T = model.T;
  const Matrix& B = model.b.linear_matrix();
  const Matrix CB = [&] {
    Matrix sum = model.C;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) sum(i, j) += B(i, j);
    }
    return sum;
  }();

  LyapunovOde ode;
  ode.G = Matrix(2 * d, 2 * d);
  const Matrix BCB = matmul(B, CB);  // B (C + B)
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ode.G(i, j) = CB(i, j);
      ode.G(d + i, d + j) = CB(i, j);
      ode.G(d + i, j) = -0.5 * T * BCB(i, j);
    }
  }
  Matrix Baug(2 * d, 2 * d);  // noise loading against (dW, dW~)
  for (std::size_t i = 0; i < d; ++i) {
    Baug(i, i) = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      Baug(d + i, j) = -0.5 * T * B(i, j);
      Baug(d + i, d + j) = -std::sqrt(3.0) * T / 6.0 * B(i, j);
    }
  }
  ode.W = matmul(Baug, transpose(Baug));

  const std::size_t k = 2 * d;
  std::vector<double> z(k + k * k, 0.0);
  for (std::size_t i = 0; i < d; ++i) z[i] = model.Y0[i];
  z = rk4_integrate(ode, std::move(z), t, rk_steps);

  SodeLimitMoments out;
  out.mean.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k));
  out.cov = Matrix(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      out.cov(i, j) = 0.5 * (z[k + i * k + j] + z[k + j * k + i]);
    }
  }
  return out;
}

}  // namespace aeelab
