#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aeelab/integrators.hpp"
#include "aeelab/sode.hpp"

namespace aeelab {

/// Terminal-time eigenmode projections across Monte Carlo replicas, in replica
/// order. h_norms carries the full ||.||_0 norm of each replica's field so one
/// run serves both distribution tests and RMS-error order fitting.
struct Ensemble {
  std::vector<std::vector<double>> samples;  // N x proj_dim
  std::vector<double> h_norms;               // per replica, may be empty
  std::string label;
  std::uint64_t fingerprint = 0;

  std::size_t replica_count() const { return samples.size(); }
  std::size_t dim() const { return samples.empty() ? 0 : samples.front().size(); }
  std::vector<double> coordinate(std::size_t c) const;
};

struct Moments {
  std::vector<double> mean;
  std::vector<double> se;  // sample std / sqrt(N)
  Matrix cov;              // unbiased
};

/// Fixed replica order, compensated accumulation. Requires N >= 2.
Moments empirical_moments(const Ensemble& e);

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};

/// Two-sided two-sample Kolmogorov-Smirnov test; both ECDFs are evaluated at
/// every pooled point (ties included). p-value from the asymptotic Kolmogorov
/// distribution at effective size n_a n_b / (n_a + n_b).
KsResult two_sample_ks(std::span<const double> a, std::span<const double> b);

/// Q(t) = P(K > t) for the Kolmogorov distribution.
double kolmogorov_tail(double t);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double order() const { return -slope; }
};

/// Least squares of log(error) against log(m). Needs >= 3 positive pairs.
OrderFit convergence_order_fit(const std::vector<std::pair<double, double>>& pairs);

struct ReportTolerances {
  double ks_alpha = 0.01;  // Bonferroni-corrected across coordinates
  double mean_z = 3.0;
  double cov_z = 3.0;
  double degenerate_scale = 1e-12;
};

struct CoordinateComparison {
  KsResult ks;
  bool ks_ok = false;
  double mean_a = 0.0, mean_b = 0.0, mean_tol = 0.0;
  bool mean_ok = false;
};

struct StatReport {
  std::vector<CoordinateComparison> coords;
  Matrix cov_a, cov_b;
  std::vector<std::uint8_t> cov_ok;  // row-major dim x dim
  double bonferroni_alpha = 0.0;
  bool degenerate = false;
  bool pass = false;
};

/// Compare two independent ensembles coordinatewise (KS + mean/covariance bands).
StatReport distribution_report(const Ensemble& a, const Ensemble& b, const ReportTolerances& tol);

// --- Monte Carlo orchestration ---------------------------------------------

/// Thread count resolution: explicit request, then AEELAB_THREADS, then hardware.
std::size_t resolve_threads(std::size_t requested);

/// Runs body(replica) for replica in [0, count) on a small worker pool. Results
/// must be written to per-replica slots; a throwing replica aborts the run with
/// its index reported.
void parallel_replicas(std::size_t count, std::size_t threads,
                       const std::function<void(std::size_t)>& body);

/// U^m(T) sample: coefficients m (Xm - Xref).
SpectralField normalized_error(std::size_t m, const SpectralField& xm_terminal,
                               const SpectralField& xref_terminal);

struct RunOptions {
  std::size_t threads = 0;  // 0: resolve via environment/hardware
};

/// Replica r of an error ensemble uses noise stream r; limit ensembles use
/// stream r + kLimitStreamOffset so the two kinds never share a path.
inline constexpr std::uint64_t kLimitStreamOffset = 1ULL << 32;

Ensemble run_error_ensemble(const ModelSpec& model, const GridSpec& grid, std::size_t m,
                            std::size_t n_replicas, std::size_t proj_dim, std::uint64_t master_seed,
                            const RunOptions& opts = {});

/// Coupled sweep: one table and one reference per replica serve every m (the
/// error law is a pathwise difference, so coarse and reference share the path).
/// galerkin_dims (empty = full) selects the spectral truncation per m.
struct ErrorSweep {
  std::vector<std::size_t> m_values;
  std::vector<Ensemble> ensembles;  // U^m(T) per m
  std::vector<double> rms_error;    // sqrt(mean ||X^m(T) - X(T)||^2) per m
};
ErrorSweep run_error_sweep(const ModelSpec& model, const GridSpec& grid,
                           const std::vector<std::size_t>& m_values,
                           const std::vector<std::size_t>& galerkin_dims, std::size_t n_replicas,
                           std::size_t proj_dim, std::uint64_t master_seed,
                           const RunOptions& opts = {});

Ensemble run_limit_ensemble(const ModelSpec& model, const GridSpec& grid, std::size_t n_replicas,
                            std::size_t proj_dim, std::uint64_t master_seed,
                            const RunOptions& opts = {});

// --- CSV artifacts ----------------------------------------------------------

std::uint64_t fnv1a64(std::string_view s);

/// Header row plus one row per replica; a leading comment line carries the
/// config fingerprint. Deterministic byte-for-byte for a fixed ensemble.
void write_ensemble_csv(const std::string& path, const Ensemble& e);

struct SummaryRow {
  std::string metric;
  std::string coordinate;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
void write_summary_csv(const std::string& path, std::uint64_t fingerprint,
                       const std::vector<SummaryRow>& rows);

std::vector<SummaryRow> report_summary_rows(const StatReport& report);

}  // namespace aeelab
