#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "aeelab/oracles.hpp"

using namespace aeelab;

namespace {

ModelSpec linear_model(std::size_t n, double c, double rho = 2.0) {
  SpectralOperator op = make_dirichlet_laplacian(n);
  NoiseSpec noise = NoiseSpec::from_decay(op, rho);
  AssumptionParams params;
  params.rho_decay = rho;
  return ModelSpec{std::move(op), Nonlinearity::linear(c), std::move(noise), params, 1.0,
                   SpectralField::basis_vector(n, 0)};
}

}  // namespace

TEST_CASE("ou exact moments") {
  SpectralOperator op(std::vector<double>{std::numbers::pi * std::numbers::pi},
                      BasisKind::DirichletSine);
  NoiseSpec noise = NoiseSpec::constant(1, 1.0);
  AssumptionParams params;
  const ModelSpec model{std::move(op), Nonlinearity::zero(), std::move(noise), params, 10.0,
                        SpectralField::basis_vector(1, 0, 0.7)};

  SUBCASE("t=0") {
    const OuMoments m = ou_exact_moments(model, 0.0);
    CHECK(m.mean[0] == 0.7);
    CHECK(m.var[0] == 0.0);
  }
  SUBCASE("pinned value at t=0.1") {
    const OuMoments m = ou_exact_moments(model, 0.1);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(m.var[0] == doctest::Approx((1.0 - std::exp(-0.2 * pi2)) / (2.0 * pi2)).epsilon(1e-14));
    CHECK(m.var[0] == doctest::Approx(0.043695).epsilon(1e-4));
  }
  SUBCASE("stationary limit") {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double t = 50.0 / pi2;  // lambda t = 50
    const OuMoments m = ou_exact_moments(model, t);
    CHECK(m.var[0] == doctest::Approx(1.0 / (2.0 * pi2)).epsilon(1e-20));
  }
  SUBCASE("requires zero nonlinearity") {
    const ModelSpec lm = linear_model(2, 0.5);
    CHECK_THROWS_AS(ou_exact_moments(lm, 1.0), std::invalid_argument);
  }
}

TEST_CASE("linear limit covariance basics") {
  const ModelSpec model = linear_model(5, 0.5);

  SUBCASE("t=0 gives zero covariance") {
    const LinearLimitMoments m = linear_limit_covariance(model, 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(m.var_x[i] == 0.0);
      CHECK(m.var_u[i] == 0.0);
      CHECK(m.cov_xu[i] == 0.0);
    }
    CHECK(m.mean_x[0] == 1.0);
    CHECK(m.mean_u[0] == 0.0);
  }
  SUBCASE("c=0 degenerates: U carries no variance, X is the OU law") {
    const ModelSpec m0 = linear_model(4, 0.0);
    const LinearLimitMoments m = linear_limit_covariance(m0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(m.var_u[i] == 0.0);
      CHECK(m.cov_xu[i] == 0.0);
      const double lambda = m0.op.eigenvalue(i);
      const double exact = -m0.noise.q[i] * std::expm1(-2.0 * lambda) / (2.0 * lambda);
      CHECK(m.var_x[i] == doctest::Approx(exact).epsilon(1e-8));
    }
  }
  SUBCASE("step halving self-consistency") {
    const LinearLimitMoments coarse = linear_limit_covariance(model, 1.0, 2000);
    const LinearLimitMoments fine = linear_limit_covariance(model, 1.0, 4000);
    for (std::size_t i = 0; i < 5; ++i) {
      const double scale = std::max({std::abs(fine.var_u[i]), std::abs(fine.var_x[i]), 1e-300});
      CHECK(std::abs(coarse.var_u[i] - fine.var_u[i]) <= 1e-8 * scale);
      CHECK(std::abs(coarse.var_x[i] - fine.var_x[i]) <= 1e-8 * scale);
      CHECK(std::abs(coarse.cov_xu[i] - fine.cov_xu[i]) <= 1e-8 * scale);
      CHECK(std::abs(coarse.mean_u[i] - fine.mean_u[i]) <= 1e-8 * std::max(1.0, std::abs(fine.mean_u[i])));
    }
  }
  SUBCASE("psd of the per-mode 2x2 blocks") {
    const LinearLimitMoments m = linear_limit_covariance(model, 1.0);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(m.var_x[i] >= -1e-12);
      CHECK(m.var_u[i] >= -1e-12);
      const double det = m.var_x[i] * m.var_u[i] - m.cov_xu[i] * m.cov_xu[i];
      CHECK(det >= -1e-12 * std::max(m.var_x[i] * m.var_u[i], 1e-300));
    }
  }
  SUBCASE("x-marginal matches the exact linear-drift OU law") {
    // X alone solves dX = (-lambda + c) X dt + sqrt(q) dbeta.
    const LinearLimitMoments m = linear_limit_covariance(model, 1.0);
    for (std::size_t i = 0; i < 5; ++i) {
      const double a = -model.op.eigenvalue(i) + 0.5;
      const double exact = model.noise.q[i] * -std::expm1(2.0 * a) / (-2.0 * a);
      CHECK(m.var_x[i] == doctest::Approx(exact).epsilon(1e-9));
      CHECK(m.mean_x[i] == doctest::Approx(std::exp(a) * model.X0.coeff[i]).epsilon(1e-9));
    }
  }
  SUBCASE("requires linear nonlinearity") {
    SpectralOperator op = make_dirichlet_laplacian(2);
    NoiseSpec noise = NoiseSpec::from_decay(op, 2.0);
    AssumptionParams params;
    const ModelSpec sine_model{std::move(op), Nonlinearity::sine(1.0), std::move(noise), params, 1.0,
                               SpectralField(2)};
    CHECK_THROWS_AS(linear_limit_covariance(sine_model, 1.0), std::invalid_argument);
  }
}

TEST_CASE("sode limit covariance") {
  Matrix C(2, 2);
  C(0, 0) = -1.0;
  C(1, 1) = -2.0;

  SUBCASE("zero B gives no M covariance") {
    Matrix B(2, 2);
    const SodeModel model{C, SodeDrift::linear(B), 1.0, {1.0, 0.0}};
    const SodeLimitMoments m = sode_linear_limit_covariance(model, 1.0);
    for (std::size_t i = 2; i < 4; ++i) {
      CHECK(m.mean[i] == 0.0);
      for (std::size_t j = 0; j < 4; ++j) CHECK(m.cov(i, j) == 0.0);
    }
    // Y block is the standard OU covariance (q = 1).
    CHECK(m.cov(0, 0) == doctest::Approx(-std::expm1(-2.0) / 2.0).epsilon(1e-9));
    CHECK(m.cov(1, 1) == doctest::Approx(-std::expm1(-4.0) / 4.0).epsilon(1e-9));
  }
  SUBCASE("t=0 is all zeros") {
    const SodeModel model{C, SodeDrift::linear(Matrix::identity(2)), 1.0, {0.3, 0.4}};
    const SodeLimitMoments m = sode_linear_limit_covariance(model, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(m.cov(i, j) == 0.0);
    }
    CHECK(m.mean[0] == 0.3);
    CHECK(m.mean[1] == 0.4);
  }
  SUBCASE("d=1 agrees with the per-mode spde oracle") {
    const double lambda = std::numbers::pi * std::numbers::pi;
    const double c = 0.5;
    Matrix C1(1, 1);
    C1(0, 0) = -lambda;
    Matrix B1(1, 1);
    B1(0, 0) = c;
    const SodeModel sode{C1, SodeDrift::linear(B1), 1.0, {1.0}};
    const SodeLimitMoments sm = sode_linear_limit_covariance(sode, 1.0);

    SpectralOperator op = make_dirichlet_laplacian(1);
    NoiseSpec noise = NoiseSpec::constant(1, 1.0);
    AssumptionParams params;
    const ModelSpec spde{std::move(op), Nonlinearity::linear(c), std::move(noise), params, 1.0,
                         SpectralField::basis_vector(1, 0)};
    const LinearLimitMoments pm = linear_limit_covariance(spde, 1.0);

    CHECK(sm.mean[0] == doctest::Approx(pm.mean_x[0]).epsilon(1e-10));
    CHECK(sm.mean[1] == doctest::Approx(pm.mean_u[0]).epsilon(1e-10));
    CHECK(sm.cov(0, 0) == doctest::Approx(pm.var_x[0]).epsilon(1e-10));
    CHECK(sm.cov(1, 1) == doctest::Approx(pm.var_u[0]).epsilon(1e-10));
    CHECK(sm.cov(0, 1) == doctest::Approx(pm.cov_xu[0]).epsilon(1e-10));
  }
  SUBCASE("rejects nonlinear drift") {
    const SodeModel model{C, SodeDrift::sine(2, 1.0), 1.0, {0.0, 0.0}};
    CHECK_THROWS_AS(sode_linear_limit_covariance(model, 1.0), std::invalid_argument);
  }
}
