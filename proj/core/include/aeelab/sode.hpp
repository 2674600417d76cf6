#pragma once

#include <cstddef>
#include <vector>

#include "aeelab/noise.hpp"
#include "aeelab/spectral.hpp"

namespace aeelab {

/// Minimal dense row-major matrix; sized for the SODE experiments (d <= a few dozen).
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  static Matrix identity(std::size_t d);
  static Matrix diagonal(const std::vector<double>& d);
};

Matrix matmul(const Matrix& A, const Matrix& B);
Matrix transpose(const Matrix& A);
std::vector<double> matvec(const Matrix& A, const std::vector<double>& x);
double frobenius_norm(const Matrix& A);

/// Orthogonal eigendecomposition A = V diag(w) V^T of a symmetric matrix via
/// cyclic Jacobi rotations; eigenvalues ascending, V columns are eigenvectors.
struct EigenSym {
  std::vector<double> values;
  Matrix vectors;
};
EigenSym eigen_symmetric(const Matrix& A);

/// e^{tC} for symmetric C via eigendecomposition; output is symmetrized.
/// Throws std::invalid_argument when ||C - C^T|| > 1e-12 ||C||.
Matrix expm_symmetric(const Matrix& C, double t);

enum class SodeDriftKind { Zero, Linear, Sine };

/// Drift descriptor with analytic jacobian and componentwise Laplacian:
/// Zero:      b = 0
/// Linear(B): b(y) = B y,        b' = B,            sum_i d^2 b/dx_i^2 = 0
/// Sine(a):   b_k(y) = a sin y_k, b' = diag(a cos y), (sum_i d^2 b/dx_i^2)_k = -a sin y_k
class SodeDrift {
 public:
  static SodeDrift zero(std::size_t d);
  static SodeDrift linear(Matrix B);
  static SodeDrift sine(std::size_t d, double a);

  SodeDriftKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Matrix& linear_matrix() const { return B_; }
  bool is_zero() const { return kind_ == SodeDriftKind::Zero; }

  std::vector<double> eval(const std::vector<double>& y) const;
  std::vector<double> jacobian_apply(const std::vector<double>& y, const std::vector<double>& v) const;
  std::vector<double> laplacian(const std::vector<double>& y) const;

 private:
  SodeDrift(SodeDriftKind k, std::size_t d, Matrix B, double a)
      : kind_(k), dim_(d), B_(std::move(B)), a_(a) {}
  SodeDriftKind kind_;
  std::size_t dim_;
  Matrix B_;
  double a_;
};

/// dY = C Y dt + b(Y) dt + dW with C symmetric negative definite and W a
/// standard d-dimensional Brownian motion.
struct SodeModel {
  Matrix C;
  SodeDrift b;
  double T = 1.0;
  std::vector<double> Y0;

  std::size_t dim() const { return Y0.size(); }
  void validate() const;  // symmetry + negative definiteness checked here
};

/// Eigen-structure shared between the noise table and the solvers: lambda_i = -mu_i
/// (ascending, positive) and the orthogonal change of basis.
struct SodeEigen {
  std::vector<double> lambda;
  Matrix V;  // columns: eigenvectors, ordered with lambda
};
SodeEigen sode_eigen(const Matrix& C);

/// Operator view of -C used to build the driving noise table (unit q per direction;
/// increments live in the eigenbasis of C and are rotated by V at use sites).
SpectralOperator sode_noise_operator(const SodeEigen& eig);

struct SodePath {
  std::vector<double> times;
  std::vector<std::vector<double>> states;

  const std::vector<double>& terminal() const { return states.back(); }
  std::size_t nodes() const { return states.size(); }
};

/// AEE for the SODE: Y_{k+1} = e^{tau C} Y_k + C^{-1}(e^{tau C}-I) b(Y_k) + conv_k,
/// with the stochastic convolution sampled exactly per eigen-direction of C.
SodePath sode_aee_solve(const SodeModel& model, const GridSpec& grid, const NoiseTable& table,
                        std::size_t coarse_m);

SodePath sode_reference_solve(const SodeModel& model, const GridSpec& grid, const NoiseTable& table);

/// Exponential left-point scheme for the limit process M of m(Y^m - Y); structurally
/// the SODE version of limit_u_solve with DF -> b', AX -> CY and the Q-trace term
/// replaced by the componentwise Laplacian of b (W is standard, Q = I).
SodePath sode_limit_solve(const SodeModel& model, const GridSpec& grid, const NoiseTable& table_w,
                          const NoiseTable& table_wtilde, const SodePath& y_ref,
                          std::size_t steps = 0);

}  // namespace aeelab
