#include "aeelab/error_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace aeelab {

namespace {

/// Kahan-compensated accumulator.
class Kahan {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

std::vector<double> Ensemble::coordinate(std::size_t c) const {
  std::vector<double> out(samples.size());
  for (std::size_t r = 0; r < samples.size(); ++r) out[r] = samples[r][c];
  return out;
}

Moments empirical_moments(const Ensemble& e) {
  const std::size_t n = e.replica_count();
  if (n < 2) throw std::invalid_argument("empirical_moments: need at least 2 replicas");
  const std::size_t d = e.dim();

  Moments m;
  m.mean.resize(d);
  m.se.resize(d);
  m.cov = Matrix(d, d);

  for (std::size_t c = 0; c < d; ++c) {
    Kahan acc;
    for (std::size_t r = 0; r < n; ++r) acc.add(e.samples[r][c]);
    m.mean[c] = acc.value() / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      Kahan acc;
      for (std::size_t r = 0; r < n; ++r) {
        acc.add((e.samples[r][i] - m.mean[i]) * (e.samples[r][j] - m.mean[j]));
      }
      const double cij = acc.value() / static_cast<double>(n - 1);
      m.cov(i, j) = cij;
      m.cov(j, i) = cij;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    m.se[i] = std::sqrt(std::max(m.cov(i, i), 0.0) / static_cast<double>(n));
  }
  return m;
}

double kolmogorov_tail(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.755) {
    // Dual theta series, accurate for small t where the alternating form is slow.
    const double w = std::sqrt(2.0 * std::numbers::pi) / t;
    const double z = std::numbers::pi * std::numbers::pi / (8.0 * t * t);
    double cdf = 0.0;
    for (int j = 1; j <= 9; j += 2) cdf += std::exp(-static_cast<double>(j * j) * z);
    cdf *= w;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * t * t);
    q += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsResult two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= v) ++i;
    while (j < sb.size() && sb[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Whichever sample is exhausted first leaves a gap to 1 at the other's tail.
  if (i < sa.size() || j < sb.size()) {
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }

  const double ne = na * nb / (na + nb);
  KsResult out;
  out.d = d;
  out.p_value = kolmogorov_tail(std::sqrt(ne) * d);
  return out;
}

OrderFit convergence_order_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("convergence_order_fit: need at least 3 pairs");
  std::vector<double> x(pairs.size()), y(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!(pairs[k].first > 0.0) || !(pairs[k].second > 0.0)) {
      throw std::invalid_argument("convergence_order_fit: nonpositive value (exact scheme?)");
    }
    x[k] = std::log(pairs[k].first);
    y[k] = std::log(pairs[k].second);
  }
  const double n = static_cast<double>(pairs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  OrderFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    fit.max_residual = std::max(fit.max_residual, std::abs(y[k] - fit.intercept - fit.slope * x[k]));
  }
  return fit;
}

StatReport distribution_report(const Ensemble& a, const Ensemble& b, const ReportTolerances& tol) {
  if (a.dim() != b.dim() || a.dim() == 0) {
    throw std::invalid_argument("distribution_report: dimension mismatch");
  }
  const std::size_t d = a.dim();
  const std::size_t na = a.replica_count();
  const std::size_t nb = b.replica_count();

  StatReport rep;
  rep.bonferroni_alpha = tol.ks_alpha / static_cast<double>(d);

  double scale = 0.0;
  for (const auto& s : a.samples)
    for (double v : s) scale = std::max(scale, std::abs(v));
  for (const auto& s : b.samples)
    for (double v : s) scale = std::max(scale, std::abs(v));
  rep.degenerate = scale < tol.degenerate_scale;

  const Moments ma = empirical_moments(a);
  const Moments mb = empirical_moments(b);
  rep.cov_a = ma.cov;
  rep.cov_b = mb.cov;

  bool pass = true;
  rep.coords.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    auto& cc = rep.coords[c];
    cc.ks = two_sample_ks(a.coordinate(c), b.coordinate(c));
    cc.ks_ok = rep.degenerate || cc.ks.p_value >= rep.bonferroni_alpha;
    cc.mean_a = ma.mean[c];
    cc.mean_b = mb.mean[c];
    cc.mean_tol = tol.mean_z * std::sqrt(ma.se[c] * ma.se[c] + mb.se[c] * mb.se[c]);
    cc.mean_ok = rep.degenerate || std::abs(cc.mean_a - cc.mean_b) <= cc.mean_tol;
    pass = pass && cc.ks_ok && cc.mean_ok;
  }

  rep.cov_ok.assign(d * d, 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double se_a =
          std::sqrt(std::max(ma.cov(i, i) * ma.cov(j, j) + ma.cov(i, j) * ma.cov(i, j), 0.0) /
                    static_cast<double>(na));
      const double se_b =
          std::sqrt(std::max(mb.cov(i, i) * mb.cov(j, j) + mb.cov(i, j) * mb.cov(i, j), 0.0) /
                    static_cast<double>(nb));
      const double band = tol.cov_z * std::sqrt(se_a * se_a + se_b * se_b);
      const bool ok = rep.degenerate || std::abs(ma.cov(i, j) - mb.cov(i, j)) <= band;
      rep.cov_ok[i * d + j] = ok ? 1 : 0;
      pass = pass && ok;
    }
  }
  rep.pass = pass;
  return rep;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("AEELAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_replicas(std::size_t count, std::size_t threads,
                       const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads <= 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::size_t err_replica = count;
  std::string err_what;

  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count) return;
      try {
        body(r);
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (r < err_replica) {
          err_replica = r;
          err_what = ex.what();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err_replica < count) {
    throw std::runtime_error("replica " + std::to_string(err_replica) + " failed: " + err_what);
  }
}

SpectralField normalized_error(std::size_t m, const SpectralField& xm_terminal,
                               const SpectralField& xref_terminal) {
  if (xm_terminal.size() != xref_terminal.size()) {
    throw std::invalid_argument("normalized_error: mode count mismatch");
  }
  SpectralField u(xm_terminal.size());
  const double scale = static_cast<double>(m);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u.coeff[i] = scale * (xm_terminal.coeff[i] - xref_terminal.coeff[i]);
  }
  return u;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string nl_tag(const Nonlinearity& nl) {
  switch (nl.kind()) {
    case NonlinearityKind::Zero: return "zero";
    case NonlinearityKind::Linear: return "linear:" + std::to_string(nl.param());
    case NonlinearityKind::Sine: return "sine:" + std::to_string(nl.param());
  }
  return "?";
}

std::uint64_t config_fingerprint(const ModelSpec& model, const GridSpec& grid, std::string_view kind,
                                 std::size_t m, std::size_t galerkin, std::size_t n_replicas,
                                 std::size_t proj_dim, std::uint64_t master_seed) {
  std::ostringstream os;
  os << kind << "|nl=" << nl_tag(model.nl) << "|n=" << model.modes() << "|rho=" << model.params.rho_decay
     << "|beta=" << model.params.beta << "|T=" << model.T << "|gridm=" << grid.m << "|R=" << grid.refine
     << "|m=" << m << "|g=" << galerkin << "|N=" << n_replicas << "|proj=" << proj_dim
     << "|seed=" << master_seed;
  return fnv1a64(os.str());
}

}  // namespace

ErrorSweep run_error_sweep(const ModelSpec& model, const GridSpec& grid,
                           const std::vector<std::size_t>& m_values,
                           const std::vector<std::size_t>& galerkin_dims, std::size_t n_replicas,
                           std::size_t proj_dim, std::uint64_t master_seed, const RunOptions& opts) {
  model.validate();
  grid.validate();
  if (m_values.empty()) throw std::invalid_argument("run_error_sweep: empty m list");
  if (!galerkin_dims.empty() && galerkin_dims.size() != m_values.size()) {
    throw std::invalid_argument("run_error_sweep: galerkin list length mismatch");
  }
  if (n_replicas < 2) throw std::invalid_argument("run_error_sweep: need at least 2 replicas");
  if (proj_dim == 0 || proj_dim > model.modes()) {
    throw std::invalid_argument("run_error_sweep: proj_dim out of range");
  }
  for (std::size_t m : m_values) {
    if (m < 1 || grid.fine_steps() % m != 0) {
      throw std::invalid_argument("run_error_sweep: every m must divide the fine grid");
    }
  }

  const std::size_t n_m = m_values.size();
  ErrorSweep sweep;
  sweep.m_values = m_values;
  sweep.ensembles.resize(n_m);
  sweep.rms_error.assign(n_m, 0.0);
  for (std::size_t k = 0; k < n_m; ++k) {
    auto& e = sweep.ensembles[k];
    e.samples.assign(n_replicas, std::vector<double>(proj_dim, 0.0));
    e.h_norms.assign(n_replicas, 0.0);
    const std::size_t g = galerkin_dims.empty() ? 0 : galerkin_dims[k];
    e.label = "U^" + std::to_string(m_values[k]);
    e.fingerprint = config_fingerprint(model, grid, "error", m_values[k], g, n_replicas, proj_dim,
                                       master_seed);
  }

  parallel_replicas(n_replicas, resolve_threads(opts.threads), [&](std::size_t r) {
    const NoiseTable table = build_noise_table(grid, model.noise, model.op, master_seed, r);
    const Trajectory ref = reference_solve(model, grid, table);
    for (std::size_t k = 0; k < n_m; ++k) {
      const std::size_t g = galerkin_dims.empty() ? 0 : galerkin_dims[k];
      const Trajectory xm = aee_solve(model, grid, table, m_values[k], g);
      const SpectralField u = normalized_error(m_values[k], xm.terminal(), ref.terminal());
      auto& e = sweep.ensembles[k];
      for (std::size_t c = 0; c < proj_dim; ++c) e.samples[r][c] = u.coeff[c];
      e.h_norms[r] = fractional_norm(model.op, u, 0.0);
    }
  });

  for (std::size_t k = 0; k < n_m; ++k) {
    Kahan acc;
    for (std::size_t r = 0; r < n_replicas; ++r) {
      const double h = sweep.ensembles[k].h_norms[r];
      acc.add(h * h);
    }
    const double mean_sq = acc.value() / static_cast<double>(n_replicas);
    sweep.rms_error[k] = std::sqrt(mean_sq) / static_cast<double>(m_values[k]);
  }
  return sweep;
}

Ensemble run_error_ensemble(const ModelSpec& model, const GridSpec& grid, std::size_t m,
                            std::size_t n_replicas, std::size_t proj_dim, std::uint64_t master_seed,
                            const RunOptions& opts) {
  ErrorSweep sweep = run_error_sweep(model, grid, {m}, {}, n_replicas, proj_dim, master_seed, opts);
  return std::move(sweep.ensembles.front());
}

Ensemble run_limit_ensemble(const ModelSpec& model, const GridSpec& grid, std::size_t n_replicas,
                            std::size_t proj_dim, std::uint64_t master_seed, const RunOptions& opts) {
  model.validate();
  grid.validate();
  if (n_replicas < 2) throw std::invalid_argument("run_limit_ensemble: need at least 2 replicas");
  if (proj_dim == 0 || proj_dim > model.modes()) {
    throw std::invalid_argument("run_limit_ensemble: proj_dim out of range");
  }

  Ensemble e;
  e.samples.assign(n_replicas, std::vector<double>(proj_dim, 0.0));
  e.h_norms.assign(n_replicas, 0.0);
  e.label = "U";
  e.fingerprint =
      config_fingerprint(model, grid, "limit", 0, 0, n_replicas, proj_dim, master_seed);

  parallel_replicas(n_replicas, resolve_threads(opts.threads), [&](std::size_t r) {
    const std::uint64_t stream = kLimitStreamOffset + r;
    const NoiseTable table_w = build_noise_table(grid, model.noise, model.op, master_seed, stream);
    const NoiseTable table_wt = build_independent_copy(grid, model.noise, model.op, master_seed, stream);
    const Trajectory x_ref = reference_solve(model, grid, table_w);
    const Trajectory u = limit_u_solve(model, grid, table_w, table_wt, x_ref);
    for (std::size_t c = 0; c < proj_dim; ++c) e.samples[r][c] = u.terminal().coeff[c];
    e.h_norms[r] = fractional_norm(model.op, u.terminal(), 0.0);
  });
  return e;
}

namespace {

void write_line(std::FILE* f, const std::string& line) {
  if (std::fwrite(line.data(), 1, line.size(), f) != line.size()) {
    throw std::runtime_error("csv write failed");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace

void write_ensemble_csv(const std::string& path, const Ensemble& e) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_ensemble_csv: cannot open " + path);
  FileCloser closer{f};
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(e.fingerprint));
  write_line(f, "# config=" + std::string(fp) + " label=" + e.label + "\n");
  std::string header = "replica";
  for (std::size_t c = 0; c < e.dim(); ++c) header += ",coord_" + std::to_string(c + 1);
  write_line(f, header + "\n");
  for (std::size_t r = 0; r < e.replica_count(); ++r) {
    std::string row = std::to_string(r);
    for (double v : e.samples[r]) row += "," + format_double(v);
    write_line(f, row + "\n");
  }
}

void write_summary_csv(const std::string& path, std::uint64_t fingerprint,
                       const std::vector<SummaryRow>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_summary_csv: cannot open " + path);
  FileCloser closer{f};
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(fingerprint));
  write_line(f, "# config=" + std::string(fp) + "\n");
  write_line(f, "metric,coordinate,value,tolerance,pass\n");
  for (const auto& row : rows) {
    write_line(f, row.metric + "," + row.coordinate + "," + format_double(row.value) + "," +
                      format_double(row.tolerance) + "," + (row.pass ? "1" : "0") + "\n");
  }
}

std::vector<SummaryRow> report_summary_rows(const StatReport& report) {
  std::vector<SummaryRow> rows;
  const std::size_t d = report.coords.size();
  for (std::size_t c = 0; c < d; ++c) {
    const auto& cc = report.coords[c];
    const std::string coord = std::to_string(c + 1);
    rows.push_back({"ks_d", coord, cc.ks.d, 0.0, cc.ks_ok});
    rows.push_back({"ks_p", coord, cc.ks.p_value, report.bonferroni_alpha, cc.ks_ok});
    rows.push_back({"mean_diff", coord, cc.mean_a - cc.mean_b, cc.mean_tol, cc.mean_ok});
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const std::string coord = std::to_string(i + 1) + ":" + std::to_string(j + 1);
      rows.push_back({"cov_diff", coord, report.cov_a(i, j) - report.cov_b(i, j), 0.0,
                      report.cov_ok[i * d + j] != 0});
    }
  }
  rows.push_back({"degenerate", "-", report.degenerate ? 1.0 : 0.0, 0.0, true});
  rows.push_back({"pass", "-", report.pass ? 1.0 : 0.0, 0.0, report.pass});
  return rows;
}

}  // namespace aeelab
