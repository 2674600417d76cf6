#include "aeelab/sode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aeelab {

Matrix Matrix::identity(std::size_t d) {
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const std::vector<double>& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul: dimension mismatch");
  Matrix C(A.rows, B.cols);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  }
  return C;
}

Matrix transpose(const Matrix& A) {
  Matrix T(A.cols, A.rows);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  }
  return T;
}

std::vector<double> matvec(const Matrix& A, const std::vector<double>& x) {
  if (A.cols != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(A.rows, 0.0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) acc += A(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

double frobenius_norm(const Matrix& A) {
  double acc = 0.0;
  for (double v : A.a) acc += v * v;
  return std::sqrt(acc);
}

namespace {

bool is_symmetric(const Matrix& A, double rel_tol) {
  if (A.rows != A.cols) return false;
  double scale = frobenius_norm(A);
  if (scale == 0.0) scale = 1.0;
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = i + 1; j < A.cols; ++j) {
      if (std::abs(A(i, j) - A(j, i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

}  // namespace

EigenSym eigen_symmetric(const Matrix& A) {
  if (A.rows != A.cols) throw std::invalid_argument("eigen_symmetric: matrix must be square");
  const std::size_t d = A.rows;
  Matrix S = A;
  Matrix V = Matrix::identity(d);

  // Cyclic Jacobi sweeps; d is tiny here so convergence is fast and deterministic.
  const double scale = std::max(frobenius_norm(S), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) off += S(i, j) * S(i, j);
    }
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = S(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  EigenSym out;
  out.values.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.values[i] = S(i, i);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.values[a] < out.values[b]; });
  EigenSym sorted;
  sorted.values.resize(d);
  sorted.vectors = Matrix(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    sorted.values[c] = out.values[order[c]];
    for (std::size_t r = 0; r < d; ++r) sorted.vectors(r, c) = V(r, order[c]);
  }
  return sorted;
}

Matrix expm_symmetric(const Matrix& C, double t) {
  if (!is_symmetric(C, 1e-12)) {
    throw std::invalid_argument("expm_symmetric: matrix is not symmetric");
  }
  const EigenSym eig = eigen_symmetric(C);
  const std::size_t d = C.rows;
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        acc += eig.vectors(i, k) * std::exp(t * eig.values[k]) * eig.vectors(j, k);
      }
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  return out;
}

SodeDrift SodeDrift::zero(std::size_t d) { return SodeDrift(SodeDriftKind::Zero, d, Matrix(), 0.0); }

SodeDrift SodeDrift::linear(Matrix B) {
  if (B.rows != B.cols || B.rows == 0) throw std::invalid_argument("SodeDrift: B must be square");
  const std::size_t d = B.rows;
  return SodeDrift(SodeDriftKind::Linear, d, std::move(B), 0.0);
}

SodeDrift SodeDrift::sine(std::size_t d, double a) {
  return SodeDrift(SodeDriftKind::Sine, d, Matrix(), a);
}

std::vector<double> SodeDrift::eval(const std::vector<double>& y) const {
  switch (kind_) {
    case SodeDriftKind::Zero: return std::vector<double>(dim_, 0.0);
    case SodeDriftKind::Linear: return matvec(B_, y);
    case SodeDriftKind::Sine: {
      std::vector<double> out(dim_);
      for (std::size_t i = 0; i < dim_; ++i) out[i] = a_ * std::sin(y[i]);
      return out;
    }
  }
  return {};
}

std::vector<double> SodeDrift::jacobian_apply(const std::vector<double>& y,
                                              const std::vector<double>& v) const {
  switch (kind_) {
    case SodeDriftKind::Zero: return std::vector<double>(dim_, 0.0);
    case SodeDriftKind::Linear: return matvec(B_, v);
    case SodeDriftKind::Sine: {
      std::vector<double> out(dim_);
      for (std::size_t i = 0; i < dim_; ++i) out[i] = a_ * std::cos(y[i]) * v[i];
      return out;
    }
  }
  return {};
}

std::vector<double> SodeDrift::laplacian(const std::vector<double>& y) const {
  switch (kind_) {
    case SodeDriftKind::Zero:
    case SodeDriftKind::Linear:
      return std::vector<double>(dim_, 0.0);
    case SodeDriftKind::Sine: {
      std::vector<double> out(dim_);
      for (std::size_t i = 0; i < dim_; ++i) out[i] = -a_ * std::sin(y[i]);
      return out;
    }
  }
  return {};
}

void SodeModel::validate() const {
  if (C.rows != C.cols || C.rows == 0) throw std::invalid_argument("SodeModel: C must be square");
  if (Y0.size() != C.rows) throw std::invalid_argument("SodeModel: Y0 dimension mismatch");
  if (b.dim() != C.rows) throw std::invalid_argument("SodeModel: drift dimension mismatch");
  if (!(T > 0.0)) throw std::invalid_argument("SodeModel: T must be positive");
  if (!is_symmetric(C, 1e-12)) throw std::invalid_argument("SodeModel: C must be symmetric");
  const EigenSym eig = eigen_symmetric(C);
  for (double mu : eig.values) {
    if (!(mu < 0.0)) throw std::invalid_argument("SodeModel: C must be negative definite");
  }
}

SodeEigen sode_eigen(const Matrix& C) {
  if (!is_symmetric(C, 1e-12)) throw std::invalid_argument("sode_eigen: C must be symmetric");
  const EigenSym eig = eigen_symmetric(C);
  const std::size_t d = C.rows;
  SodeEigen out;
  out.lambda.resize(d);
  out.V = Matrix(d, d);
  // mu ascending (most negative first) gives lambda = -mu descending; reverse so
  // lambda is ascending as SpectralOperator requires.
  for (std::size_t c = 0; c < d; ++c) {
    const std::size_t src = d - 1 - c;
    const double mu = eig.values[src];
    if (!(mu < 0.0)) throw std::invalid_argument("sode_eigen: C must be negative definite");
    out.lambda[c] = -mu;
    for (std::size_t r = 0; r < d; ++r) out.V(r, c) = eig.vectors(r, src);
  }
  return out;
}

SpectralOperator sode_noise_operator(const SodeEigen& eig) {
  return SpectralOperator(eig.lambda, BasisKind::DirichletSine);
}

namespace {

void check_sode_table(const SodeModel& model, const GridSpec& grid, const NoiseTable& table,
                      const char* where) {
  if (table.n_modes != model.dim()) {
    throw std::invalid_argument(std::string(where) + ": table/model dimension mismatch");
  }
  if (table.steps != grid.fine_steps() || table.T != grid.T || model.T != grid.T) {
    throw std::invalid_argument(std::string(where) + ": table/grid/horizon mismatch");
  }
}

}  // namespace

SodePath sode_aee_solve(const SodeModel& model, const GridSpec& grid, const NoiseTable& table,
                        std::size_t coarse_m) {
  model.validate();
  grid.validate();
  check_sode_table(model, grid, table, "sode_aee_solve");
  if (coarse_m < 1 || grid.fine_steps() % coarse_m != 0) {
    throw std::invalid_argument("sode_aee_solve: coarse_m must divide the fine step count");
  }
  const std::size_t d = model.dim();
  const SodeEigen eig = sode_eigen(model.C);
  const double tau = model.T / static_cast<double>(coarse_m);

  std::vector<double> prop(d), phi(d);
  for (std::size_t i = 0; i < d; ++i) {
    prop[i] = std::exp(-eig.lambda[i] * tau);
    phi[i] = tau * phi1_scalar(eig.lambda[i] * tau);
  }
  const Matrix Vt = transpose(eig.V);

  // March in the eigenbasis of C; rotate back for drift evaluation and output.
  std::vector<double> state = matvec(Vt, model.Y0);

  SodePath out;
  out.times.resize(coarse_m + 1);
  out.states.reserve(coarse_m + 1);
  out.states.push_back(matvec(eig.V, state));
  out.times[0] = 0.0;

  for (std::size_t k = 0; k < coarse_m; ++k) {
    std::vector<double> drift_eig(d, 0.0);
    if (!model.b.is_zero()) {
      const std::vector<double> y = matvec(eig.V, state);
      drift_eig = matvec(Vt, model.b.eval(y));
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double conv = aggregate_convolution(table, i, k, eig.lambda[i], coarse_m);
      state[i] = prop[i] * state[i] + phi[i] * drift_eig[i] + conv;
    }
    out.times[k + 1] = static_cast<double>(k + 1) * tau;
    out.states.push_back(matvec(eig.V, state));
  }
  return out;
}

SodePath sode_reference_solve(const SodeModel& model, const GridSpec& grid, const NoiseTable& table) {
  return sode_aee_solve(model, grid, table, grid.fine_steps());
}

SodePath sode_limit_solve(const SodeModel& model, const GridSpec& grid, const NoiseTable& table_w,
                          const NoiseTable& table_wtilde, const SodePath& y_ref, std::size_t steps) {
  model.validate();
  grid.validate();
  check_sode_table(model, grid, table_w, "sode_limit_solve");
  check_sode_table(model, grid, table_wtilde, "sode_limit_solve");

  const std::size_t fine = grid.fine_steps();
  if (steps == 0) steps = fine;
  if (steps < 1 || fine % steps != 0) {
    throw std::invalid_argument("sode_limit_solve: steps must divide the fine step count");
  }
  if (y_ref.nodes() < 2 || (y_ref.nodes() - 1) % steps != 0) {
    throw std::invalid_argument("sode_limit_solve: y_ref is not sampled on a refinement of the solver grid");
  }
  const std::size_t ref_stride = (y_ref.nodes() - 1) / steps;

  const std::size_t d = model.dim();
  const SodeEigen eig = sode_eigen(model.C);
  const Matrix Vt = transpose(eig.V);
  const double T = model.T;
  const double h = T / static_cast<double>(steps);
  const double w_coef = -0.5 * T;
  const double wt_coef = -std::sqrt(3.0) * T / 6.0;

  std::vector<double> prop(d);
  for (std::size_t i = 0; i < d; ++i) prop[i] = std::exp(-eig.lambda[i] * h);

  std::vector<double> state_eig(d, 0.0);  // M in the eigenbasis, M(0) = 0

  SodePath out;
  out.times.resize(steps + 1);
  out.states.reserve(steps + 1);
  out.states.push_back(std::vector<double>(d, 0.0));
  out.times[0] = 0.0;

  std::vector<double> dw_eig(d), dwt_eig(d);
  for (std::size_t j = 0; j < steps; ++j) {
    const std::vector<double>& y = y_ref.states[j * ref_stride];

    for (std::size_t i = 0; i < d; ++i) {
      dw_eig[i] = (fine == steps) ? table_w.brownian(i, j) : aggregate_brownian(table_w, i, j, steps);
      dwt_eig[i] =
          (fine == steps) ? table_wtilde.brownian(i, j) : aggregate_brownian(table_wtilde, i, j, steps);
    }
    // Increments are standard normal vectors in the eigenbasis; rotate to
    // original coordinates where b' acts.
    const std::vector<double> dw = matvec(eig.V, dw_eig);
    const std::vector<double> dwt = matvec(eig.V, dwt_eig);

    const std::vector<double> m_orig = matvec(eig.V, state_eig);
    const std::vector<double> cy = matvec(model.C, y);
    const std::vector<double> by = model.b.eval(y);
    std::vector<double> dir(d);
    for (std::size_t i = 0; i < d; ++i) {
      dir[i] = h * (m_orig[i] - 0.5 * T * cy[i] - 0.5 * T * by[i]) + w_coef * dw[i] + wt_coef * dwt[i];
    }
    std::vector<double> incr = model.b.jacobian_apply(y, dir);
    const std::vector<double> lap = model.b.laplacian(y);
    for (std::size_t i = 0; i < d; ++i) incr[i] -= 0.25 * T * h * lap[i];

    const std::vector<double> incr_eig = matvec(Vt, incr);
    for (std::size_t i = 0; i < d; ++i) {
      state_eig[i] = prop[i] * (state_eig[i] + incr_eig[i]);
    }
    out.times[j + 1] = static_cast<double>(j + 1) * h;
    out.states.push_back(matvec(eig.V, state_eig));
  }
  return out;
}

}  // namespace aeelab
