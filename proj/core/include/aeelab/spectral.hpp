#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aeelab {

enum class BasisKind { DirichletSine };

/// Diagonal spectral representation of the negative generator: -A e_i = lambda_i e_i
/// with 0 < lambda_1 <= lambda_2 <= ... The Dirichlet sine basis on (0,1) has
/// e_i(x) = sqrt(2) sin(i pi x) and lambda_i = pi^2 i^2.
class SpectralOperator {
 public:
  SpectralOperator(std::vector<double> eigenvalues, BasisKind basis);

  std::size_t modes() const { return eigenvalues_.size(); }
  double eigenvalue(std::size_t i) const { return eigenvalues_[i]; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  BasisKind basis() const { return basis_; }

 private:
  std::vector<double> eigenvalues_;
  BasisKind basis_;
};

/// Coefficient vector of an H-valued field in the eigenbasis of -A.
struct SpectralField {
  std::vector<double> coeff;

  SpectralField() = default;
  explicit SpectralField(std::size_t n) : coeff(n, 0.0) {}
  explicit SpectralField(std::vector<double> c) : coeff(std::move(c)) {}

  std::size_t size() const { return coeff.size(); }
  double& operator[](std::size_t i) { return coeff[i]; }
  double operator[](std::size_t i) const { return coeff[i]; }

  static SpectralField basis_vector(std::size_t n, std::size_t i, double scale = 1.0);
};

/// Regularity/assumption parameters carried by a model. rho_decay fixes the noise
/// spectrum q_i = lambda_i^{-rho_decay}; alpha is the eigenvalue growth exponent
/// (lambda_n ~ n^alpha, equal to 2 for the Dirichlet sine basis). eta, delta and
/// sigma have no runtime effect outside regime validation.
struct AssumptionParams {
  double beta = 2.0;
  double rho_decay = 2.0;
  double L = 1.0;
  double eta = 1.0;
  double delta = 1.0;
  double sigma = 1.0;
  double alpha = 2.0;

  void validate() const;  // throws std::invalid_argument on range violations
};

SpectralOperator make_dirichlet_laplacian(std::size_t n);

/// Per-mode semigroup action: (E(t)v)_i = exp(-lambda_i t) v_i, t >= 0.
SpectralField semigroup_apply(const SpectralOperator& op, double t, const SpectralField& v);

/// Per-mode phi1 action: ((1 - exp(-lambda_i tau)) / lambda_i) v_i, tau > 0.
/// Cancellation-free for small lambda*tau (expm1-based).
SpectralField phi1_apply(const SpectralOperator& op, double tau, const SpectralField& v);

/// Stable evaluation of (1 - exp(-x))/x; equals 1 at x = 0.
double phi1_scalar(double x);

/// Fractional-power norm sqrt(sum_i lambda_i^r v_i^2); r may be negative.
double fractional_norm(const SpectralOperator& op, const SpectralField& v, double r);

/// Galerkin projection P_k: first k coefficients kept, the rest zeroed. Length unchanged.
SpectralField project(const SpectralField& v, std::size_t k);

/// Dense discrete sine transform pair on the collocation grid x_j = j/(n+1), j = 1..n.
///
/// to_physical:  values_j = sum_i coeff_i * sqrt(2) sin(i pi x_j)
/// to_spectral:  coeff_i  = (1/(n+1)) * sum_j values_j * sqrt(2) sin(i pi x_j)
///
/// The pair is an exact inverse on the grid, and an isometry up to normalization:
/// sum_j values_j^2 / (n+1) = sum_i coeff_i^2.
class SineTransform {
 public:
  explicit SineTransform(std::size_t n);

  std::size_t size() const { return n_; }
  double grid_point(std::size_t j) const;  // x_{j+1} = (j+1)/(n+1)

  void to_physical(std::span<const double> coeff, std::span<double> values) const;
  void to_spectral(std::span<const double> values, std::span<double> coeff) const;

  /// Process-wide immutable cache, one table per n. Thread-safe.
  static const SineTransform& shared(std::size_t n);

 private:
  std::size_t n_;
  std::vector<double> table_;  // table_[j*n_+i] = sqrt(2) sin((i+1) pi x_{j+1})
};

std::vector<double> sine_transform_to_physical(const SpectralField& v);
SpectralField sine_transform_to_spectral(const std::vector<double>& values);

}  // namespace aeelab
