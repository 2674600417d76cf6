#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "aeelab/integrators.hpp"

using namespace aeelab;

namespace {

ModelSpec make_model(std::size_t n, Nonlinearity nl, double rho = 2.0, double q0 = -1.0) {
  SpectralOperator op = make_dirichlet_laplacian(n);
  NoiseSpec noise = q0 >= 0.0 ? NoiseSpec::constant(n, q0) : NoiseSpec::from_decay(op, rho);
  AssumptionParams params;
  params.rho_decay = rho;
  return ModelSpec{std::move(op), nl, std::move(noise), params, 1.0,
                   SpectralField::basis_vector(n, 0)};
}

double l2(const SpectralField& v) {
  double acc = 0.0;
  for (double c : v.coeff) acc += c * c;
  return std::sqrt(acc);
}

double l2_diff(const SpectralField& a, const SpectralField& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += (a.coeff[i] - b.coeff[i]) * (a.coeff[i] - b.coeff[i]);
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("aee is the exact heat flow without drift and noise") {
  const std::size_t n = 6;
  const ModelSpec model = make_model(n, Nonlinearity::zero(), 2.0, 0.0);
  const GridSpec grid{1.0, 8, 4};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 1, 0);

  const Trajectory t = aee_solve(model, grid, table, 8);
  REQUIRE(t.nodes() == 9);
  for (std::size_t k = 0; k <= 8; ++k) {
    const SpectralField exact = semigroup_apply(model.op, t.times[k], model.X0);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(t.states[k].coeff[i] == doctest::Approx(exact.coeff[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("aee equals the directly accumulated OU mild solution for F=0") {
  const std::size_t n = 8;
  const ModelSpec model = make_model(n, Nonlinearity::zero());
  const GridSpec grid{1.0, 16, 8};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 99, 5);

  for (const std::size_t cm : {4ul, 16ul, 128ul}) {
    const Trajectory t = aee_solve(model, grid, table, cm);
    const double tau = 1.0 / static_cast<double>(cm);
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = model.op.eigenvalue(i);
      const double sq = std::sqrt(model.noise.q[i]);
      // Independent accumulation of the mild solution from the same table.
      double exact = std::exp(-lambda * 1.0) * model.X0.coeff[i];
      for (std::size_t k = 0; k < cm; ++k) {
        const double w = std::exp(-lambda * (1.0 - static_cast<double>(k + 1) * tau));
        exact += w * sq * aggregate_convolution(table, i, k, lambda, cm);
      }
      CHECK(t.terminal().coeff[i] == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("one linear step matches the hand formula") {
  const ModelSpec model = make_model(1, Nonlinearity::linear(0.7), 2.0, 0.3);
  const GridSpec grid{1.0, 1, 4};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 3, 1);

  const Trajectory t = aee_solve(model, grid, table, 1);
  const double lambda = model.op.eigenvalue(0);
  const double x0 = model.X0.coeff[0];
  const double conv = std::sqrt(0.3) * aggregate_convolution(table, 0, 0, lambda, 1);
  const double expected = std::exp(-lambda) * x0 + 0.7 * x0 * (1.0 - std::exp(-lambda)) / lambda + conv;
  CHECK(t.terminal().coeff[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reference at refine=1 equals the coarse solve") {
  const ModelSpec model = make_model(4, Nonlinearity::sine(1.0));
  const GridSpec grid{1.0, 16, 1};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 12, 2);
  const Trajectory a = aee_solve(model, grid, table, 16);
  const Trajectory b = reference_solve(model, grid, table);
  REQUIRE(a.nodes() == b.nodes());
  for (std::size_t k = 0; k < a.nodes(); ++k) {
    CHECK(a.states[k].coeff == b.states[k].coeff);
  }
}

TEST_CASE("richardson self-consistency in mean square") {
  // Doubling the resolution halves the error in mean square. Pathwise the
  // ratio of successive differences is genuinely random (the normalized error
  // converges in law only), so the check averages over replicas.
  const std::size_t n = 8;
  const ModelSpec model = make_model(n, Nonlinearity::sine(1.0));
  const GridSpec grid{1.0, 4, 64};

  double s1 = 0.0, s2 = 0.0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const NoiseTable table = build_noise_table(grid, model.noise, model.op, 555, r);
    const Trajectory x16 = aee_solve(model, grid, table, 4 * 16);
    const Trajectory x32 = aee_solve(model, grid, table, 4 * 32);
    const Trajectory x64 = aee_solve(model, grid, table, 4 * 64);
    const double d1 = l2_diff(x16.terminal(), x32.terminal());
    const double d2 = l2_diff(x32.terminal(), x64.terminal());
    s1 += d1 * d1;
    s2 += d2 * d2;
  }
  const double ratio = std::sqrt(s1 / s2);
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("path coupling: coarse and reference share the driving noise") {
  const ModelSpec model = make_model(4, Nonlinearity::zero());
  const GridSpec grid{1.0, 8, 8};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 4, 4);
  const Trajectory coarse = aee_solve(model, grid, table, 8);
  const Trajectory ref = reference_solve(model, grid, table);
  // With F = 0 both integrate the OU path exactly; the difference is pure
  // floating-point noise far below any statistical scale.
  CHECK(l2_diff(coarse.terminal(), ref.terminal()) < 1e-13);
}

TEST_CASE("galerkin truncation zeroes the tail and matches projected noise") {
  const std::size_t n = 8;
  const ModelSpec model = make_model(n, Nonlinearity::sine(0.5));
  const GridSpec grid{1.0, 8, 2};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 21, 0);

  const Trajectory full = aee_solve(model, grid, table, 8);
  const Trajectory truncated = aee_solve(model, grid, table, 8, 3);
  for (std::size_t k = 0; k < truncated.nodes(); ++k) {
    for (std::size_t i = 3; i < n; ++i) CHECK(truncated.states[k].coeff[i] == 0.0);
  }
  const Trajectory same = aee_solve(model, grid, table, 8, n);
  CHECK(same.terminal().coeff == full.terminal().coeff);
  CHECK_THROWS_AS(aee_solve(model, grid, table, 8, n + 1), std::invalid_argument);
}

TEST_CASE("solver argument validation") {
  const ModelSpec model = make_model(4, Nonlinearity::zero());
  const GridSpec grid{1.0, 8, 2};
  const NoiseTable table = build_noise_table(grid, model.noise, model.op, 1, 1);
  CHECK_THROWS_AS(aee_solve(model, grid, table, 5), std::invalid_argument);   // 5 does not divide 16
  CHECK_THROWS_AS(aee_solve(model, grid, table, 0), std::invalid_argument);
  const GridSpec other{1.0, 8, 4};
  CHECK_THROWS_AS(aee_solve(model, other, table, 8), std::invalid_argument);  // table/grid mismatch
}

TEST_CASE("limit solver vanishes identically for zero nonlinearity") {
  const ModelSpec model = make_model(4, Nonlinearity::zero());
  const GridSpec grid{1.0, 8, 4};
  const NoiseTable w = build_noise_table(grid, model.noise, model.op, 2, 0);
  const NoiseTable wt = build_independent_copy(grid, model.noise, model.op, 2, 0);
  const Trajectory ref = reference_solve(model, grid, w);
  const Trajectory u = limit_u_solve(model, grid, w, wt, ref);
  for (const auto& state : u.states) {
    for (double c : state.coeff) CHECK(c == 0.0);
  }
}

TEST_CASE("limit solver is affine in the initial value") {
  const std::size_t n = 6;
  const ModelSpec model = make_model(n, Nonlinearity::sine(1.0));
  const GridSpec grid{1.0, 8, 16};
  const NoiseTable w = build_noise_table(grid, model.noise, model.op, 31, 0);
  const NoiseTable wt = build_independent_copy(grid, model.noise, model.op, 31, 0);
  const Trajectory ref = reference_solve(model, grid, w);

  SpectralField u0(n);
  for (std::size_t i = 0; i < n; ++i) u0.coeff[i] = 0.1 * static_cast<double>(i + 1);
  SpectralField u0_twice = u0;
  for (auto& c : u0_twice.coeff) c *= 2.0;

  const Trajectory base = limit_u_solve(model, grid, w, wt, ref);
  const Trajectory from_v = limit_u_solve(model, grid, w, wt, ref, 0, &u0);
  const Trajectory from_2v = limit_u_solve(model, grid, w, wt, ref, 0, &u0_twice);

  // Affine superposition: U(2v) - 2U(v) + U(0) = 0.
  for (std::size_t i = 0; i < n; ++i) {
    const double lhs =
        from_2v.terminal().coeff[i] - 2.0 * from_v.terminal().coeff[i] + base.terminal().coeff[i];
    CHECK(std::abs(lhs) <= 1e-10 * std::max(1.0, std::abs(from_v.terminal().coeff[i])));
  }
}

TEST_CASE("limit solver step-halving self-consistency on one path") {
  const std::size_t n = 8;
  const ModelSpec model = make_model(n, Nonlinearity::sine(1.0));
  const GridSpec grid{1.0, 8, 512};  // fine grid: 4096 steps
  const NoiseTable w = build_noise_table(grid, model.noise, model.op, 55, 0);
  const NoiseTable wt = build_independent_copy(grid, model.noise, model.op, 55, 0);
  const Trajectory ref = reference_solve(model, grid, w);

  const Trajectory u_full = limit_u_solve(model, grid, w, wt, ref);
  const Trajectory u_half = limit_u_solve(model, grid, w, wt, ref, grid.fine_steps() / 2);
  const double rel = l2_diff(u_full.terminal(), u_half.terminal()) / l2(u_full.terminal());
  CHECK(rel < 0.05);
}

TEST_CASE("limit solver rejects inconsistent inputs") {
  const ModelSpec model = make_model(4, Nonlinearity::sine(1.0));
  const GridSpec grid{1.0, 8, 4};
  const NoiseTable w = build_noise_table(grid, model.noise, model.op, 3, 0);
  const NoiseTable wt = build_independent_copy(grid, model.noise, model.op, 3, 0);
  const Trajectory ref = reference_solve(model, grid, w);
  CHECK_THROWS_AS(limit_u_solve(model, grid, w, wt, ref, 7), std::invalid_argument);
  CHECK_THROWS_AS(limit_u_solve(model, grid, w, w, ref), std::invalid_argument);
  Trajectory bad = ref;
  bad.states.pop_back();
  bad.times.pop_back();
  CHECK_THROWS_AS(limit_u_solve(model, grid, w, wt, bad), std::invalid_argument);
}
