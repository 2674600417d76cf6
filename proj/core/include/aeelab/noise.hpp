#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aeelab/nemytskii.hpp"
#include "aeelab/spectral.hpp"

namespace aeelab {

/// Nested time grid: coarse step tau = T/m, fine step h = T/(m*refine).
/// Coarse nodes are exactly fine nodes.
struct GridSpec {
  double T = 1.0;
  std::size_t m = 1;       // coarse step count
  std::size_t refine = 1;  // fine steps per coarse step

  std::size_t fine_steps() const { return m * refine; }
  double fine_step() const { return T / static_cast<double>(fine_steps()); }
  double coarse_step() const { return T / static_cast<double>(m); }
  void validate() const;
};

/// Covariance of the per-step pair (db, conv) for one mode:
///   db   = beta(h) - beta(0)                 ~ N(0, h)
///   conv = int_0^h e^{-lambda (h-u)} dbeta(u) ~ N(0, (1-e^{-2 lambda h})/(2 lambda))
///   Cov(db, conv) = (1 - e^{-lambda h})/lambda
/// All entries evaluated cancellation-free for small lambda*h.
std::array<std::array<double, 2>, 2> conv_pair_covariance(double lambda, double h);

/// Lower-triangular Cholesky factor of conv_pair_covariance; the Schur complement
/// is evaluated by series for small lambda*h to avoid cancellation.
struct PairCholesky {
  double l11;  // sqrt(h)
  double l21;  // cov / sqrt(h)
  double l22;  // sqrt(var_conv - cov^2/h)
};
PairCholesky conv_pair_cholesky(double lambda, double h);

/// Immutable per-replica sample of the driving noise on the fine grid: for every
/// (mode i, fine step j) the correlated pair (db, conv) at unit q. Noise weights
/// q_i are applied at use sites, so one table serves sweeps over noise specs.
///
/// Every entry is a pure function of (master_seed, stream_id, domain, mode, step):
/// the generator is a counter-indexed splitmix64 stream, so construction order is
/// irrelevant and tables are bit-reproducible.
struct NoiseTable {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t domain = 0;  // 0 = W, 1 = independent copy (W tilde)
  std::size_t n_modes = 0;
  std::size_t steps = 0;
  double T = 0.0;

  std::vector<double> db;    // [mode * steps + step]
  std::vector<double> conv;  // [mode * steps + step]

  double brownian(std::size_t mode, std::size_t step) const { return db[mode * steps + step]; }
  double convolution(std::size_t mode, std::size_t step) const { return conv[mode * steps + step]; }
  double fine_step() const { return T / static_cast<double>(steps); }
};

NoiseTable build_noise_table(const GridSpec& grid, const NoiseSpec& noise, const SpectralOperator& op,
                             std::uint64_t master_seed, std::uint64_t stream_id);

/// Same contract as build_noise_table, drawn from a disjoint counter domain so the
/// samples never collide with the primary table for any (seed, stream).
NoiseTable build_independent_copy(const GridSpec& grid, const NoiseSpec& noise, const SpectralOperator& op,
                                  std::uint64_t master_seed, std::uint64_t stream_id);

/// Exact semigroup-weighted aggregation of fine convolution increments over coarse
/// step k of a coarse grid with coarse_m steps (coarse_m must divide table.steps):
///   sum_j e^{-lambda (t_{k+1} - s_{j+1})} conv[mode][j],  j in block k.
/// With coarse_m == table.steps this is a passthrough of the single entry.
double aggregate_convolution(const NoiseTable& table, std::size_t mode, std::size_t coarse_step,
                             double lambda, std::size_t coarse_m);

/// Sum of Brownian increments over coarse step k (the coarse Brownian increment).
double aggregate_brownian(const NoiseTable& table, std::size_t mode, std::size_t coarse_step,
                          std::size_t coarse_m);

/// Binary dump/load for regression tests. Layout: 8-byte magic "AEENTBL1",
/// u64 master_seed, u64 stream_id, u64 domain, u64 n_modes, u64 steps, f64 T,
/// then db and conv arrays as little-endian 64-bit floats.
void noise_table_write(const std::string& path, const NoiseTable& table);
NoiseTable noise_table_read(const std::string& path);

namespace rng {

/// splitmix64 finalizer (stateless bijective mix).
std::uint64_t mix64(std::uint64_t z);

/// Value at position `index` of the splitmix64 stream with the given key.
std::uint64_t at(std::uint64_t key, std::uint64_t index);

/// Uniform double in (0,1), strictly excluding the endpoints.
double to_unit(std::uint64_t x);

/// Stream key derived from (master_seed, stream_id, domain).
std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t domain);

/// Independent N(0,1) pair for (mode, step) via Box-Muller on two counter draws.
std::array<double, 2> normal_pair(std::uint64_t key, std::uint64_t mode, std::uint64_t step);

}  // namespace rng

}  // namespace aeelab
