#pragma once

#include <string>
#include <vector>

#include "aeelab/config.hpp"
#include "aeelab/error_lab.hpp"
#include "aeelab/oracles.hpp"

namespace aeelab {

/// Stable exit-code contract shared by the CLI commands.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Asymptotic standard deviation of the Kolmogorov statistic; the sampling
/// noise of a two-sample D at effective size ne is roughly 0.26/sqrt(ne).
inline constexpr double kKsStatSd = 0.26;

/// Mean/covariance comparison of projected U samples against the per-mode
/// Lyapunov oracle. Off-diagonal oracle covariance is zero (modes decouple).
/// rel_var_modes > 0 additionally enforces a relative variance band on the
/// leading modes.
struct OracleComparison {
  bool pass = true;
  std::vector<SummaryRow> rows;
};
OracleComparison compare_with_linear_oracle(const Ensemble& e, const LinearLimitMoments& oracle,
                                            double z, double rel_var_band = 0.0,
                                            std::size_t rel_var_modes = 0);

/// Coupled SODE Monte Carlo: per replica one table drives the reference and
/// every Y^m; an offset stream pair drives the (Y, M) limit ensemble.
struct SodeEnsembles {
  std::vector<Ensemble> error_per_m;  // d coordinates of m (Y^m - Y)(T)
  std::vector<double> rms_error;
  Ensemble joint;  // stacked (Y(T), M(T)), 2d coordinates
};
SodeEnsembles run_sode_ensembles(const SodeModel& model, const GridSpec& grid,
                                 const std::vector<std::size_t>& m_values, std::size_t n_replicas,
                                 std::uint64_t master_seed, std::size_t threads);

/// RMS errors across the m list, order fit, CSV artifacts. Exit 0 iff the
/// fitted order lands in the configured band (a zero-error exact scheme is
/// reported as a degenerate pass).
int cmd_order(const ExperimentConfig& cfg);

/// U^m ensembles (n = floor(m^iota), capped) against the limit ensemble:
/// per-coordinate KS at Bonferroni level, KS trend across m, and the Lyapunov
/// oracle when the nonlinearity is linear.
int cmd_distribution(const ExperimentConfig& cfg);

/// SODE pair: order fit for m(Y^m - Y) plus distribution/oracle checks for the
/// limit process M.
int cmd_sode(const ExperimentConfig& cfg);

/// Deterministic invariant suite (transforms, semigroup laws, covariance
/// formulas, golden noise values). golden_path, when nonempty, must point at a
/// noise-table dump that regenerates bit-identically from its own header.
int cmd_selftest(const std::string& golden_path = "");

}  // namespace aeelab
