#include "aeelab/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace aeelab {

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues, BasisKind basis)
    : eigenvalues_(std::move(eigenvalues)), basis_(basis) {
  if (eigenvalues_.empty()) {
    throw std::invalid_argument("SpectralOperator: need at least one mode");
  }
  double prev = 0.0;
  for (double lambda : eigenvalues_) {
    if (!(lambda > 0.0) || lambda < prev) {
      throw std::invalid_argument("SpectralOperator: eigenvalues must be positive and non-decreasing");
    }
    prev = lambda;
  }
}

SpectralField SpectralField::basis_vector(std::size_t n, std::size_t i, double scale) {
  if (i >= n) throw std::invalid_argument("basis_vector: index out of range");
  SpectralField v(n);
  v.coeff[i] = scale;
  return v;
}

void AssumptionParams::validate() const {
  if (!(beta > 1.0 && beta <= 2.0)) throw std::invalid_argument("AssumptionParams: beta must lie in (1,2]");
  if (!(rho_decay > 0.0)) throw std::invalid_argument("AssumptionParams: rho_decay must be positive");
  if (!(L > 0.0)) throw std::invalid_argument("AssumptionParams: L must be positive");
  if (!(eta >= 1.0 && eta < 2.0)) throw std::invalid_argument("AssumptionParams: eta must lie in [1,2)");
  if (!(delta >= 1.0 && delta < 2.0)) throw std::invalid_argument("AssumptionParams: delta must lie in [1,2)");
  if (!(sigma >= 0.0 && sigma < beta)) throw std::invalid_argument("AssumptionParams: sigma must lie in [0,beta)");
  if (!(alpha > 0.0)) throw std::invalid_argument("AssumptionParams: alpha must be positive");
}

SpectralOperator make_dirichlet_laplacian(std::size_t n) {
  if (n == 0) throw std::invalid_argument("make_dirichlet_laplacian: mode count must be >= 1");
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i + 1);
    lambda[i] = pi2 * k * k;
  }
  return SpectralOperator(std::move(lambda), BasisKind::DirichletSine);
}

namespace {

void require_paired(const SpectralOperator& op, const SpectralField& v, const char* where) {
  if (op.modes() != v.size()) {
    throw std::invalid_argument(std::string(where) + ": field/operator mode count mismatch");
  }
}

}  // namespace

SpectralField semigroup_apply(const SpectralOperator& op, double t, const SpectralField& v) {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be >= 0");
  require_paired(op, v, "semigroup_apply");
  SpectralField out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.coeff[i] = std::exp(-op.eigenvalue(i) * t) * v.coeff[i];
  }
  return out;
}

double phi1_scalar(double x) {
  if (x == 0.0) return 1.0;
  return -std::expm1(-x) / x;
}

SpectralField phi1_apply(const SpectralOperator& op, double tau, const SpectralField& v) {
  if (!(tau > 0.0)) throw std::invalid_argument("phi1_apply: tau must be > 0");
  require_paired(op, v, "phi1_apply");
  SpectralField out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.coeff[i] = tau * phi1_scalar(op.eigenvalue(i) * tau) * v.coeff[i];
  }
  return out;
}

double fractional_norm(const SpectralOperator& op, const SpectralField& v, double r) {
  require_paired(op, v, "fractional_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = (r == 0.0) ? 1.0 : std::pow(op.eigenvalue(i), r);
    acc += w * v.coeff[i] * v.coeff[i];
  }
  return std::sqrt(acc);
}

SpectralField project(const SpectralField& v, std::size_t k) {
  if (k < 1 || k > v.size()) throw std::invalid_argument("project: k must lie in [1, n]");
  SpectralField out = v;
  for (std::size_t i = k; i < out.size(); ++i) out.coeff[i] = 0.0;
  return out;
}

SineTransform::SineTransform(std::size_t n) : n_(n), table_(n * n) {
  if (n == 0) throw std::invalid_argument("SineTransform: n must be >= 1");
  const double sqrt2 = std::numbers::sqrt2;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j + 1) / static_cast<double>(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      table_[j * n + i] = sqrt2 * std::sin(static_cast<double>(i + 1) * std::numbers::pi * x);
    }
  }
}

double SineTransform::grid_point(std::size_t j) const {
  return static_cast<double>(j + 1) / static_cast<double>(n_ + 1);
}

void SineTransform::to_physical(std::span<const double> coeff, std::span<double> values) const {
  if (coeff.size() != n_ || values.size() != n_) {
    throw std::invalid_argument("SineTransform::to_physical: size mismatch");
  }
  for (std::size_t j = 0; j < n_; ++j) {
    const double* row = table_.data() + j * n_;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += row[i] * coeff[i];
    values[j] = acc;
  }
}

void SineTransform::to_spectral(std::span<const double> values, std::span<double> coeff) const {
  if (coeff.size() != n_ || values.size() != n_) {
    throw std::invalid_argument("SineTransform::to_spectral: size mismatch");
  }
  const double w = 1.0 / static_cast<double>(n_ + 1);
  for (std::size_t i = 0; i < n_; ++i) coeff[i] = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    const double* row = table_.data() + j * n_;
    const double vj = values[j] * w;
    for (std::size_t i = 0; i < n_; ++i) coeff[i] += row[i] * vj;
  }
}

const SineTransform& SineTransform::shared(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<SineTransform>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<SineTransform>(n);
  return *slot;
}

std::vector<double> sine_transform_to_physical(const SpectralField& v) {
  if (v.size() == 0) return {};
  std::vector<double> values(v.size());
  SineTransform::shared(v.size()).to_physical(v.coeff, values);
  return values;
}

SpectralField sine_transform_to_spectral(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sine_transform_to_spectral: empty input");
  SpectralField v(values.size());
  SineTransform::shared(values.size()).to_spectral(values, v.coeff);
  return v;
}

}  // namespace aeelab
