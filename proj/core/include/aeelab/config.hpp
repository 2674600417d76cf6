#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aeelab/integrators.hpp"
#include "aeelab/sode.hpp"

namespace aeelab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value experiment configuration (sections by key prefix). A `preset`
/// key selects the starting defaults; every other key overrides one field.
/// Unknown keys are rejected.
struct ExperimentConfig {
  std::string preset = "sine";

  // model.*
  std::size_t n = 64;
  double rho_decay = 2.0;
  double beta = 2.0;
  double T = 1.0;
  std::string x0 = "e1";  // "e1" | "zero" | "list:v1,v2,..."
  Nonlinearity nl = Nonlinearity::sine(1.0);

  // grid.* / run.*
  std::size_t refine = 64;
  std::optional<std::vector<std::size_t>> m_list;  // defaults depend on the command
  std::optional<std::size_t> n_replicas;           // defaults depend on the command
  std::size_t proj_dim = 5;
  std::uint64_t master_seed = 20260809;
  double iota = 0.75;
  std::size_t threads = 0;
  std::string out_dir = "out";

  // order.* tolerances
  double order_band_lo = 0.85;
  double order_band_hi = 1.15;
  double order_max_residual = 0.15;

  // dist.* tolerances
  double dist_alpha = 0.01;
  double mean_z = 3.0;
  double cov_z = 3.0;

  // sode.*
  Matrix sode_C;                 // default diag(-1, -2)
  std::string sode_b = "linear"; // "zero" | "linear" (matrix below) | "sine:a"
  Matrix sode_B;                 // default ||B|| = 0.5 coupling matrix
  double sode_sine_a = 0.5;
  std::vector<double> sode_y0 = {1.0, 0.0};
  std::optional<std::vector<std::size_t>> sode_m_list;
  std::optional<std::size_t> sode_n_replicas;

  ExperimentConfig();

  ModelSpec build_model() const;
  GridSpec build_grid(std::size_t m_max) const;
  SodeModel build_sode_model() const;

  std::vector<std::size_t> order_m_list() const;
  std::vector<std::size_t> dist_m_list() const;

  /// Bound for the fully discrete mode coupling n = floor(m^iota): iota must
  /// exceed 2/(alpha*beta) for the spatial truncation error to vanish at rate m.
  double iota_bound() const { return 2.0 / (2.0 * beta); }
};

/// Starting defaults by preset name: "sine", "linear", "zero".
ExperimentConfig config_from_preset(const std::string& name);

/// Parse key=value text; `source` names the origin for error messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source);

/// Load a config file; throws ConfigError on parse or validation problems.
ExperimentConfig load_config_file(const std::string& path);

}  // namespace aeelab
