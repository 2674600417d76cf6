#include "aeelab/noise.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace aeelab {

void GridSpec::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("GridSpec: T must be positive");
  if (m < 1) throw std::invalid_argument("GridSpec: m must be >= 1");
  if (refine < 1) throw std::invalid_argument("GridSpec: refine must be >= 1");
}

namespace rng {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t at(std::uint64_t key, std::uint64_t index) {
  return mix64(key + index * 0x9e3779b97f4a7c15ULL);
}

double to_unit(std::uint64_t x) {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are unreachable.
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t domain) {
  std::uint64_t k = mix64(master_seed);
  k = mix64(k ^ (stream_id + 0x9e3779b97f4a7c15ULL));
  k = mix64(k ^ (domain + 0xd1b54a32d192ed03ULL));
  return k;
}

std::array<double, 2> normal_pair(std::uint64_t key, std::uint64_t mode, std::uint64_t step) {
  // Counter layout: mode < 2^22, step < 2^41, one bit for the slot.
  const std::uint64_t base = (mode << 42) | (step << 1);
  const double u1 = to_unit(at(key, base));
  const double u2 = to_unit(at(key, base | 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace rng

namespace {

// g(x) = (1 + e^{-x})/2 - (1 - e^{-x})/x; the Schur complement of the pair
// covariance is (1 - e^{-x}) g(x) / lambda^2 with x = lambda h.
double schur_factor(double x) {
  if (x < 0.05) {
    // Series with absolute accuracy ~x^7 around 0.
    return x * x * (1.0 / 12.0 + x * (-1.0 / 24.0 + x * (1.0 / 80.0 + x * (-1.0 / 360.0 + x / 2016.0))));
  }
  return 0.5 * (1.0 + std::exp(-x)) - phi1_scalar(x);
}

}  // namespace

std::array<std::array<double, 2>, 2> conv_pair_covariance(double lambda, double h) {
  if (!(lambda > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("conv_pair_covariance: lambda and h must be positive");
  }
  const double x = lambda * h;
  const double cov = -std::expm1(-x) / lambda;
  const double var_conv = -std::expm1(-2.0 * x) / (2.0 * lambda);
  return {{{h, cov}, {cov, var_conv}}};
}

PairCholesky conv_pair_cholesky(double lambda, double h) {
  const auto c = conv_pair_covariance(lambda, h);
  const double x = lambda * h;
  PairCholesky L;
  L.l11 = std::sqrt(h);
  L.l21 = c[0][1] / L.l11;
  // var_conv - cov^2/h = (1 - e^{-x}) g(x) / lambda with g as above.
  const double schur = -std::expm1(-x) * schur_factor(x) / lambda;
  L.l22 = std::sqrt(std::max(schur, 0.0));
  return L;
}

namespace {

NoiseTable build_table_in_domain(const GridSpec& grid, const NoiseSpec& noise, const SpectralOperator& op,
                                 std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t domain) {
  grid.validate();
  if (noise.modes() != op.modes()) {
    throw std::invalid_argument("build_noise_table: noise/operator mode count mismatch");
  }
  const std::size_t n = op.modes();
  const std::size_t steps = grid.fine_steps();
  if (n >= (1ULL << 22) || steps >= (1ULL << 41)) {
    throw std::invalid_argument("build_noise_table: grid too large for the counter layout");
  }
  const double h = grid.fine_step();

  NoiseTable t;
  t.master_seed = master_seed;
  t.stream_id = stream_id;
  t.domain = domain;
  t.n_modes = n;
  t.steps = steps;
  t.T = grid.T;
  t.db.resize(n * steps);
  t.conv.resize(n * steps);

  const std::uint64_t key = rng::stream_key(master_seed, stream_id, domain);
  for (std::size_t i = 0; i < n; ++i) {
    const PairCholesky L = conv_pair_cholesky(op.eigenvalue(i), h);
    double* db_row = t.db.data() + i * steps;
    double* conv_row = t.conv.data() + i * steps;
    for (std::size_t j = 0; j < steps; ++j) {
      const auto z = rng::normal_pair(key, i, j);
      db_row[j] = L.l11 * z[0];
      conv_row[j] = L.l21 * z[0] + L.l22 * z[1];
    }
  }
  return t;
}

}  // namespace

NoiseTable build_noise_table(const GridSpec& grid, const NoiseSpec& noise, const SpectralOperator& op,
                             std::uint64_t master_seed, std::uint64_t stream_id) {
  return build_table_in_domain(grid, noise, op, master_seed, stream_id, 0);
}

NoiseTable build_independent_copy(const GridSpec& grid, const NoiseSpec& noise, const SpectralOperator& op,
                                  std::uint64_t master_seed, std::uint64_t stream_id) {
  return build_table_in_domain(grid, noise, op, master_seed, stream_id, 1);
}

namespace {

std::size_t block_size(const NoiseTable& table, std::size_t coarse_m, const char* where) {
  if (coarse_m < 1 || table.steps % coarse_m != 0) {
    throw std::invalid_argument(std::string(where) + ": coarse grid must divide the fine grid");
  }
  return table.steps / coarse_m;
}

}  // namespace

double aggregate_convolution(const NoiseTable& table, std::size_t mode, std::size_t coarse_step,
                             double lambda, std::size_t coarse_m) {
  const std::size_t J = block_size(table, coarse_m, "aggregate_convolution");
  if (mode >= table.n_modes || coarse_step >= coarse_m) {
    throw std::invalid_argument("aggregate_convolution: index out of range");
  }
  const double h = table.fine_step();
  const double* row = table.conv.data() + mode * table.steps + coarse_step * J;
  if (J == 1) return row[0];
  // Kahan-compensated; weights e^{-lambda h (J-1-r)} from absolute offsets.
  double sum = 0.0, comp = 0.0;
  for (std::size_t r = 0; r < J; ++r) {
    const double w = std::exp(-lambda * h * static_cast<double>(J - 1 - r));
    const double term = w * row[r] - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

double aggregate_brownian(const NoiseTable& table, std::size_t mode, std::size_t coarse_step,
                          std::size_t coarse_m) {
  const std::size_t J = block_size(table, coarse_m, "aggregate_brownian");
  if (mode >= table.n_modes || coarse_step >= coarse_m) {
    throw std::invalid_argument("aggregate_brownian: index out of range");
  }
  const double* row = table.db.data() + mode * table.steps + coarse_step * J;
  if (J == 1) return row[0];
  double sum = 0.0, comp = 0.0;
  for (std::size_t r = 0; r < J; ++r) {
    const double term = row[r] - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

namespace {

constexpr char kMagic[8] = {'A', 'E', 'E', 'N', 'T', 'B', 'L', '1'};

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

void write_u64(std::FILE* f, std::uint64_t v) {
  if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw std::runtime_error("noise_table_write: short write");
}

std::uint64_t read_u64(std::FILE* f) {
  std::uint64_t v = 0;
  if (std::fread(&v, sizeof(v), 1, f) != 1) throw std::runtime_error("noise_table_read: short read");
  return v;
}

}  // namespace

void noise_table_write(const std::string& path, const NoiseTable& table) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("noise_table_write: cannot open " + path);
  FileCloser closer{f};
  if (std::fwrite(kMagic, 1, 8, f) != 8) throw std::runtime_error("noise_table_write: short write");
  write_u64(f, table.master_seed);
  write_u64(f, table.stream_id);
  write_u64(f, table.domain);
  write_u64(f, table.n_modes);
  write_u64(f, table.steps);
  std::uint64_t t_bits;
  std::memcpy(&t_bits, &table.T, sizeof(double));
  write_u64(f, t_bits);
  const std::size_t count = table.n_modes * table.steps;
  if (std::fwrite(table.db.data(), sizeof(double), count, f) != count ||
      std::fwrite(table.conv.data(), sizeof(double), count, f) != count) {
    throw std::runtime_error("noise_table_write: short write");
  }
}

NoiseTable noise_table_read(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("noise_table_read: cannot open " + path);
  FileCloser closer{f};
  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("noise_table_read: bad magic in " + path);
  }
  NoiseTable t;
  t.master_seed = read_u64(f);
  t.stream_id = read_u64(f);
  t.domain = read_u64(f);
  t.n_modes = read_u64(f);
  t.steps = read_u64(f);
  const std::uint64_t t_bits = read_u64(f);
  std::memcpy(&t.T, &t_bits, sizeof(double));
  if (t.n_modes == 0 || t.steps == 0 || t.n_modes >= (1ULL << 22) || t.steps >= (1ULL << 41)) {
    throw std::runtime_error("noise_table_read: implausible dimensions in " + path);
  }
  const std::size_t count = t.n_modes * t.steps;
  t.db.resize(count);
  t.conv.resize(count);
  if (std::fread(t.db.data(), sizeof(double), count, f) != count ||
      std::fread(t.conv.data(), sizeof(double), count, f) != count) {
    throw std::runtime_error("noise_table_read: short read in " + path);
  }
  return t;
}

}  // namespace aeelab
