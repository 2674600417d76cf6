#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aeelab/spectral.hpp"

namespace aeelab {

enum class NonlinearityKind { Zero, Linear, Sine };

/// Pointwise nonlinearity f inducing the composition operator F(u)(x) = f(u(x)).
/// Zero:      f = 0                     (exact-integrator degenerate case)
/// Linear(c): f(x) = c x                (Gaussian closed-form oracle)
/// Sine(a):   f(x) = a sin x            (bounded f', f'')
class Nonlinearity {
 public:
  static Nonlinearity zero() { return Nonlinearity(NonlinearityKind::Zero, 0.0); }
  static Nonlinearity linear(double c) { return Nonlinearity(NonlinearityKind::Linear, c); }
  static Nonlinearity sine(double a) { return Nonlinearity(NonlinearityKind::Sine, a); }

  NonlinearityKind kind() const { return kind_; }
  double param() const { return param_; }
  bool is_zero() const { return kind_ == NonlinearityKind::Zero; }

  double f(double x) const;
  double df(double x) const;
  double d2f(double x) const;

 private:
  Nonlinearity(NonlinearityKind k, double p) : kind_(k), param_(p) {}
  NonlinearityKind kind_;
  double param_;
};

/// Diagonal noise covariance: eigenvalues q_i of Q against the basis h_i = e_i.
struct NoiseSpec {
  std::vector<double> q;
  double trace = 0.0;

  static NoiseSpec from_decay(const SpectralOperator& op, double rho_decay);
  static NoiseSpec constant(std::size_t n, double q0);
  static NoiseSpec from_values(std::vector<double> q);

  std::size_t modes() const { return q.size(); }
};

SpectralField nemytskii_apply(const Nonlinearity& nl, const SpectralField& v);

/// DF(base) dir = f'(base(.)) dir(.), realized pseudo-spectrally.
SpectralField nemytskii_jacobian_apply(const Nonlinearity& nl, const SpectralField& base,
                                       const SpectralField& dir);

/// D^2F(base)(u, w) = f''(base(.)) u(.) w(.), realized pseudo-spectrally.
SpectralField nemytskii_hessian_apply(const Nonlinearity& nl, const SpectralField& base,
                                      const SpectralField& u, const SpectralField& w);

/// Collocation values of kappa_Q(x_j) = sum_{k<=n} q_k * 2 sin^2(k pi x_j).
std::vector<double> q_trace_kernel(const NoiseSpec& noise, std::size_t n);

/// sum_k D^2F(base)(Q^{1/2}e_k, Q^{1/2}e_k) via the precomputable kernel kappa_Q.
SpectralField q_trace_term(const Nonlinearity& nl, const SpectralField& base, const NoiseSpec& noise);

/// Report-only regime validation against the trace-class noise assumption.
struct RegimeReport {
  bool beta_in_range = false;        // beta in (1,2]
  bool decay_ok = false;             // beta < rho_decay + 1 - 1/alpha (= rho + 1/2 at alpha = 2)
  double decay_threshold = 0.0;      // rho_decay + 1 - 1/alpha
  double hs_sum_truncated = 0.0;     // sum_{i<=n} lambda_i^{beta-1} q_i
  double tail_estimate = 0.0;        // integral tail bound; +inf when divergent
  bool pass = false;
  std::string summary;
};

RegimeReport validate_regime(const AssumptionParams& params, const NoiseSpec& noise,
                             const SpectralOperator& op);

}  // namespace aeelab
