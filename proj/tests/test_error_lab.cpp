#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aeelab/error_lab.hpp"

using namespace aeelab;

namespace {

Ensemble from_scalars(const std::vector<double>& values) {
  Ensemble e;
  for (double v : values) e.samples.push_back({v});
  return e;
}

ModelSpec make_model(std::size_t n, Nonlinearity nl) {
  SpectralOperator op = make_dirichlet_laplacian(n);
  NoiseSpec noise = NoiseSpec::from_decay(op, 2.0);
  AssumptionParams params;
  return ModelSpec{std::move(op), nl, std::move(noise), params, 1.0,
                   SpectralField::basis_vector(n, 0)};
}

}  // namespace

TEST_CASE("empirical moments") {
  SUBCASE("constant samples") {
    const Ensemble e = from_scalars({3.0, 3.0, 3.0, 3.0});
    const Moments m = empirical_moments(e);
    CHECK(m.mean[0] == 3.0);
    CHECK(m.cov(0, 0) == 0.0);
    CHECK(m.se[0] == 0.0);
  }
  SUBCASE("two-point hand computation") {
    const Ensemble e = from_scalars({0.0, 2.0});
    const Moments m = empirical_moments(e);
    CHECK(m.mean[0] == 1.0);
    CHECK(m.cov(0, 0) == 2.0);  // unbiased
  }
  SUBCASE("large standard-normal sample lands near (0, 1)") {
    const std::uint64_t key = rng::stream_key(10, 20, 30);
    Ensemble e;
    for (std::size_t r = 0; r < 100000; ++r) {
      e.samples.push_back({rng::normal_pair(key, 0, r)[0]});
    }
    const Moments m = empirical_moments(e);
    CHECK(std::abs(m.mean[0]) < 0.013);
    CHECK(m.cov(0, 0) == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("requires two replicas") {
    CHECK_THROWS_AS(empirical_moments(from_scalars({1.0})), std::invalid_argument);
  }
}

TEST_CASE("two sample ks properties") {
  SUBCASE("symmetry and range on random inputs") {
    const std::uint64_t key = rng::stream_key(4, 5, 6);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(37), b(53);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng::to_unit(rng::at(key, 1000 * trial + i));
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng::to_unit(rng::at(key, 1000 * trial + 500 + i));
      const KsResult ab = two_sample_ks(a, b);
      const KsResult ba = two_sample_ks(b, a);
      CHECK(ab.d == ba.d);
      CHECK(ab.p_value == ba.p_value);
      CHECK(ab.d >= 0.0);
      CHECK(ab.d <= 1.0);
    }
  }
  SUBCASE("p decreases in d at fixed sizes") {
    double prev = 1.1;
    for (double t = 0.05; t < 3.0; t += 0.05) {
      const double q = kolmogorov_tail(t);
      CHECK(q <= prev + 1e-15);
      prev = q;
    }
  }
  SUBCASE("classic critical values") {
    CHECK(kolmogorov_tail(1.36) == doctest::Approx(0.05).epsilon(0.02));
    CHECK(kolmogorov_tail(1.63) == doctest::Approx(0.01).epsilon(0.02));
  }
  SUBCASE("empty input throws") {
    const std::vector<double> empty, one{1.0};
    CHECK_THROWS_AS(two_sample_ks(empty, one), std::invalid_argument);
  }
  SUBCASE("ties are handled at pooled points") {
    const std::vector<double> a{1.0, 1.0, 2.0};
    const std::vector<double> b{1.0, 2.0, 2.0};
    const KsResult r = two_sample_ks(a, b);
    CHECK(r.d == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("order fit") {
  SUBCASE("planted power laws recovered exactly") {
    std::vector<std::pair<double, double>> one, two;
    for (std::size_t m : {8, 16, 32, 64, 128}) {
      one.emplace_back(m, 0.37 / static_cast<double>(m));
      two.emplace_back(m, 5.0 / static_cast<double>(m * m));
    }
    CHECK(convergence_order_fit(one).order() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(convergence_order_fit(one).max_residual < 1e-12);
    CHECK(convergence_order_fit(two).order() == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("input validation") {
    std::vector<std::pair<double, double>> short_list{{8.0, 0.1}, {16.0, 0.05}};
    CHECK_THROWS_AS(convergence_order_fit(short_list), std::invalid_argument);
    std::vector<std::pair<double, double>> nonpositive{{8.0, 0.1}, {16.0, 0.0}, {32.0, 0.01}};
    CHECK_THROWS_AS(convergence_order_fit(nonpositive), std::invalid_argument);
  }
}

TEST_CASE("distribution report") {
  SUBCASE("identical ensembles pass with D=0") {
    Ensemble a;
    const std::uint64_t key = rng::stream_key(1, 1, 1);
    for (std::size_t r = 0; r < 50; ++r) {
      a.samples.push_back({rng::normal_pair(key, 0, r)[0], rng::normal_pair(key, 1, r)[0]});
    }
    const StatReport rep = distribution_report(a, a, ReportTolerances{});
    CHECK(rep.pass);
    CHECK_FALSE(rep.degenerate);
    for (const auto& c : rep.coords) {
      CHECK(c.ks.d == 0.0);
      CHECK(c.ks.p_value == 1.0);
    }
  }
  SUBCASE("degenerate all-zero ensembles flagged and passing") {
    Ensemble z;
    z.samples.assign(10, std::vector<double>(3, 0.0));
    const StatReport rep = distribution_report(z, z, ReportTolerances{});
    CHECK(rep.degenerate);
    CHECK(rep.pass);
  }
  SUBCASE("dimension mismatch throws") {
    Ensemble a, b;
    a.samples.assign(5, std::vector<double>(2, 0.0));
    b.samples.assign(5, std::vector<double>(3, 0.0));
    CHECK_THROWS_AS(distribution_report(a, b, ReportTolerances{}), std::invalid_argument);
  }
  SUBCASE("clearly different distributions fail") {
    Ensemble a, b;
    const std::uint64_t key = rng::stream_key(8, 8, 8);
    for (std::size_t r = 0; r < 400; ++r) {
      a.samples.push_back({rng::normal_pair(key, 0, r)[0]});
      b.samples.push_back({rng::normal_pair(key, 1, r)[0] + 3.0});
    }
    CHECK_FALSE(distribution_report(a, b, ReportTolerances{}).pass);
  }
}

TEST_CASE("normalized error") {
  SpectralField xm(2), xref(2);
  xm.coeff = {0.51, 0.2};
  xref.coeff = {0.5, 0.2};
  const SpectralField u = normalized_error(10, xm, xref);
  CHECK(u.coeff[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(u.coeff[1] == 0.0);
  SpectralField bad(3);
  CHECK_THROWS_AS(normalized_error(10, xm, bad), std::invalid_argument);
}

TEST_CASE("error ensembles") {
  const ModelSpec model = make_model(4, Nonlinearity::zero());
  const GridSpec grid{1.0, 8, 4};

  SUBCASE("zero nonlinearity gives exact zeros") {
    const Ensemble e = run_error_ensemble(model, grid, 8, 8, 3, 77, {1});
    for (const auto& s : e.samples) {
      for (double v : s) CHECK(std::abs(v) <= 1e-12);
    }
  }
  SUBCASE("determinism across repeated runs and thread counts") {
    const ModelSpec sm = make_model(4, Nonlinearity::sine(1.0));
    const Ensemble e1 = run_error_ensemble(sm, grid, 8, 6, 3, 2024, {1});
    const Ensemble e2 = run_error_ensemble(sm, grid, 8, 6, 3, 2024, {1});
    const Ensemble e4 = run_error_ensemble(sm, grid, 8, 6, 3, 2024, {4});
    CHECK(e1.samples == e2.samples);
    CHECK(e1.samples == e4.samples);
    CHECK(e1.fingerprint == e2.fingerprint);
  }
  SUBCASE("sweep shares the reference across m") {
    const ModelSpec sm = make_model(4, Nonlinearity::sine(1.0));
    const ErrorSweep sweep = run_error_sweep(sm, grid, {4, 8}, {}, 6, 3, 11, {1});
    const Ensemble single = run_error_ensemble(sm, grid, 8, 6, 3, 11, {1});
    CHECK(sweep.ensembles[1].samples == single.samples);
    CHECK(sweep.rms_error.size() == 2);
    CHECK(sweep.rms_error[0] > sweep.rms_error[1]);  // halving m roughly doubles the error
  }
  SUBCASE("limit ensemble determinism and zero case") {
    const Ensemble z = run_limit_ensemble(model, grid, 4, 2, 5, {1});
    for (const auto& s : z.samples) {
      for (double v : s) CHECK(v == 0.0);
    }
    const ModelSpec sm = make_model(4, Nonlinearity::sine(1.0));
    const Ensemble l1 = run_limit_ensemble(sm, grid, 4, 2, 5, {1});
    const Ensemble l2 = run_limit_ensemble(sm, grid, 4, 2, 5, {2});
    CHECK(l1.samples == l2.samples);
  }
  SUBCASE("sample covariance is symmetric and positive semidefinite") {
    const ModelSpec sm = make_model(4, Nonlinearity::sine(1.0));
    const Ensemble e = run_error_ensemble(sm, grid, 8, 64, 4, 505, {});
    const Moments m = empirical_moments(e);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(m.cov(i, j) == m.cov(j, i));
    }
    const EigenSym eig = eigen_symmetric(m.cov);
    for (double w : eig.values) CHECK(w >= -1e-10 * std::abs(eig.values.back()));
  }
  SUBCASE("n-doubling shrinks standard errors by about sqrt(2)") {
    const ModelSpec lm = make_model(4, Nonlinearity::linear(0.5));
    const GridSpec g{1.0, 8, 8};
    const Ensemble small = run_error_ensemble(lm, g, 8, 400, 3, 999, {});
    const Ensemble big = run_error_ensemble(lm, g, 8, 800, 3, 999, {});
    const Moments ms = empirical_moments(small);
    const Moments mb = empirical_moments(big);
    for (std::size_t c = 0; c < 3; ++c) {
      const double ratio = ms.se[c] / mb.se[c];
      CHECK(ratio > std::sqrt(2.0) * 0.7);
      CHECK(ratio < std::sqrt(2.0) * 1.3);
    }
  }
}

TEST_CASE("csv artifacts") {
  Ensemble e;
  e.label = "demo";
  e.fingerprint = 0xabcdef;
  e.samples = {{1.0, 2.0}, {3.0, 4.5}};
  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 = (dir / "aeelab_ens1.csv").string();
  const std::string p2 = (dir / "aeelab_ens2.csv").string();
  write_ensemble_csv(p1, e);
  write_ensemble_csv(p2, e);

  const auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string c1 = slurp(p1);
  CHECK(c1 == slurp(p2));  // byte-identical reruns
  CHECK(c1.find("# config=") == 0);
  CHECK(c1.find("replica,coord_1,coord_2") != std::string::npos);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);

  const std::string ps = (dir / "aeelab_sum.csv").string();
  write_summary_csv(ps, 42, {{"order", "-", 1.01, 1.15, true}});
  const std::string cs = slurp(ps);
  CHECK(cs.find("metric,coordinate,value,tolerance,pass") != std::string::npos);
  CHECK(cs.find("order,-,") != std::string::npos);
  std::filesystem::remove(ps);
}
