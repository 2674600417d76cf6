#include "aeelab/nemytskii.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace aeelab {

double Nonlinearity::f(double x) const {
  switch (kind_) {
    case NonlinearityKind::Zero: return 0.0;
    case NonlinearityKind::Linear: return param_ * x;
    case NonlinearityKind::Sine: return param_ * std::sin(x);
  }
  return 0.0;
}

double Nonlinearity::df(double x) const {
  switch (kind_) {
    case NonlinearityKind::Zero: return 0.0;
    case NonlinearityKind::Linear: return param_;
    case NonlinearityKind::Sine: return param_ * std::cos(x);
  }
  return 0.0;
}

double Nonlinearity::d2f(double x) const {
  switch (kind_) {
    case NonlinearityKind::Zero: return 0.0;
    case NonlinearityKind::Linear: return 0.0;
    case NonlinearityKind::Sine: return -param_ * std::sin(x);
  }
  return 0.0;
}

NoiseSpec NoiseSpec::from_decay(const SpectralOperator& op, double rho_decay) {
  if (!(rho_decay > 0.0)) throw std::invalid_argument("NoiseSpec: rho_decay must be positive");
  NoiseSpec s;
  s.q.resize(op.modes());
  for (std::size_t i = 0; i < op.modes(); ++i) {
    s.q[i] = std::pow(op.eigenvalue(i), -rho_decay);
    s.trace += s.q[i];
  }
  return s;
}

NoiseSpec NoiseSpec::constant(std::size_t n, double q0) {
  if (q0 < 0.0) throw std::invalid_argument("NoiseSpec: q must be nonnegative");
  NoiseSpec s;
  s.q.assign(n, q0);
  s.trace = q0 * static_cast<double>(n);
  return s;
}

NoiseSpec NoiseSpec::from_values(std::vector<double> q) {
  NoiseSpec s;
  s.q = std::move(q);
  for (double qi : s.q) {
    if (qi < 0.0) throw std::invalid_argument("NoiseSpec: q must be nonnegative");
    s.trace += qi;
  }
  return s;
}

namespace {

void check_finite(const SpectralField& v, const char* where) {
  for (double x : v.coeff) {
    if (!std::isfinite(x)) throw std::overflow_error(std::string(where) + ": non-finite value");
  }
}

}  // namespace

SpectralField nemytskii_apply(const Nonlinearity& nl, const SpectralField& v) {
  // f == 0 maps every field to the zero field exactly; skip the transforms.
  if (nl.is_zero()) return SpectralField(v.size());
  const auto& tf = SineTransform::shared(v.size());
  std::vector<double> phys(v.size());
  tf.to_physical(v.coeff, phys);
  for (double& x : phys) x = nl.f(x);
  SpectralField out(v.size());
  tf.to_spectral(phys, out.coeff);
  check_finite(out, "nemytskii_apply");
  return out;
}

SpectralField nemytskii_jacobian_apply(const Nonlinearity& nl, const SpectralField& base,
                                       const SpectralField& dir) {
  if (base.size() != dir.size()) {
    throw std::invalid_argument("nemytskii_jacobian_apply: field size mismatch");
  }
  if (nl.is_zero()) return SpectralField(base.size());
  const auto& tf = SineTransform::shared(base.size());
  std::vector<double> phys_base(base.size()), phys_dir(base.size());
  tf.to_physical(base.coeff, phys_base);
  tf.to_physical(dir.coeff, phys_dir);
  for (std::size_t j = 0; j < phys_dir.size(); ++j) phys_dir[j] *= nl.df(phys_base[j]);
  SpectralField out(base.size());
  tf.to_spectral(phys_dir, out.coeff);
  check_finite(out, "nemytskii_jacobian_apply");
  return out;
}

SpectralField nemytskii_hessian_apply(const Nonlinearity& nl, const SpectralField& base,
                                      const SpectralField& u, const SpectralField& w) {
  if (base.size() != u.size() || base.size() != w.size()) {
    throw std::invalid_argument("nemytskii_hessian_apply: field size mismatch");
  }
  if (nl.kind() != NonlinearityKind::Sine) return SpectralField(base.size());  // f'' == 0
  const auto& tf = SineTransform::shared(base.size());
  std::vector<double> phys_base(base.size()), phys_u(base.size()), phys_w(base.size());
  tf.to_physical(base.coeff, phys_base);
  tf.to_physical(u.coeff, phys_u);
  tf.to_physical(w.coeff, phys_w);
  for (std::size_t j = 0; j < phys_u.size(); ++j) {
    // u*w first so swapping the directions is bit-exact.
    phys_u[j] = (phys_u[j] * phys_w[j]) * nl.d2f(phys_base[j]);
  }
  SpectralField out(base.size());
  tf.to_spectral(phys_u, out.coeff);
  check_finite(out, "nemytskii_hessian_apply");
  return out;
}

std::vector<double> q_trace_kernel(const NoiseSpec& noise, std::size_t n) {
  if (noise.modes() < n) throw std::invalid_argument("q_trace_kernel: noise too short");
  const auto& tf = SineTransform::shared(n);
  // kernel_j = sum_k q_k * e_k(x_j)^2 with e_k(x) = sqrt(2) sin(k pi x).
  std::vector<double> kernel(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = tf.grid_point(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = std::sin(static_cast<double>(k + 1) * std::numbers::pi * x);
      acc += noise.q[k] * 2.0 * s * s;
    }
    kernel[j] = acc;
  }
  return kernel;
}

SpectralField q_trace_term(const Nonlinearity& nl, const SpectralField& base, const NoiseSpec& noise) {
  if (noise.modes() != base.size()) {
    throw std::invalid_argument("q_trace_term: noise/field mode count mismatch");
  }
  if (nl.kind() != NonlinearityKind::Sine) return SpectralField(base.size());
  const auto& tf = SineTransform::shared(base.size());
  const std::vector<double> kernel = q_trace_kernel(noise, base.size());
  std::vector<double> phys(base.size());
  tf.to_physical(base.coeff, phys);
  for (std::size_t j = 0; j < phys.size(); ++j) phys[j] = nl.d2f(phys[j]) * kernel[j];
  SpectralField out(base.size());
  tf.to_spectral(phys, out.coeff);
  check_finite(out, "q_trace_term");
  return out;
}

RegimeReport validate_regime(const AssumptionParams& params, const NoiseSpec& noise,
                             const SpectralOperator& op) {
  RegimeReport rep;
  rep.beta_in_range = params.beta > 1.0 && params.beta <= 2.0;
  rep.decay_threshold = params.rho_decay + 1.0 - 1.0 / params.alpha;
  rep.decay_ok = params.beta < rep.decay_threshold;

  const std::size_t n = std::min(noise.modes(), op.modes());
  for (std::size_t i = 0; i < n; ++i) {
    rep.hs_sum_truncated += std::pow(op.eigenvalue(i), params.beta - 1.0) * noise.q[i];
  }

  // Tail of sum_{i>n} lambda_i^{beta-1-rho} under lambda_i ~ c i^alpha, integral bound.
  const double e = params.beta - 1.0 - params.rho_decay;
  const double ae = params.alpha * e;
  if (ae < -1.0) {
    const double c = op.eigenvalue(n - 1) / std::pow(static_cast<double>(n), params.alpha);
    rep.tail_estimate = std::pow(c, e) * std::pow(static_cast<double>(n), ae + 1.0) / (-(ae + 1.0));
  } else {
    rep.tail_estimate = std::numeric_limits<double>::infinity();
  }

  rep.pass = rep.beta_in_range && rep.decay_ok;
  std::ostringstream os;
  os << (rep.pass ? "pass" : "fail") << ": beta=" << params.beta
     << (rep.beta_in_range ? " in (1,2]" : " outside (1,2]") << ", decay criterion beta < "
     << rep.decay_threshold << (rep.decay_ok ? " holds" : " violated")
     << ", truncated HS sum=" << rep.hs_sum_truncated << ", tail<=" << rep.tail_estimate;
  rep.summary = os.str();
  return rep;
}

}  // namespace aeelab
