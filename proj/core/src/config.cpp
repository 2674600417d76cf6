#include "aeelab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aeelab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

std::vector<std::size_t> parse_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split(value, ',')) out.push_back(parse_size(key, item));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) out.push_back(parse_double(key, item));
  return out;
}

Matrix parse_matrix(const std::string& key, const std::string& value) {
  const auto rows = split(value, ';');
  Matrix m(rows.size(), split(rows.front(), ',').size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto cells = split(rows[i], ',');
    if (cells.size() != m.cols) throw ConfigError("config: ragged matrix for " + key);
    for (std::size_t j = 0; j < cells.size(); ++j) m(i, j) = parse_double(key, cells[j]);
  }
  return m;
}

Nonlinearity parse_nonlinearity(const std::string& key, const std::string& value) {
  if (value == "zero") return Nonlinearity::zero();
  if (value.rfind("linear:", 0) == 0) return Nonlinearity::linear(parse_double(key, value.substr(7)));
  if (value.rfind("sine:", 0) == 0) return Nonlinearity::sine(parse_double(key, value.substr(5)));
  throw ConfigError("config: bad nonlinearity '" + value + "' (zero | linear:c | sine:a)");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  sode_C = Matrix(2, 2);
  sode_C(0, 0) = -1.0;
  sode_C(1, 1) = -2.0;
  sode_B = Matrix(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) sode_B(i, j) = 0.25;  // operator norm 0.5
}

ModelSpec ExperimentConfig::build_model() const {
  if (n < 1) throw ConfigError("config: model.n must be >= 1");
  SpectralOperator op = make_dirichlet_laplacian(n);
  NoiseSpec noise = NoiseSpec::from_decay(op, rho_decay);
  AssumptionParams params;
  params.beta = beta;
  params.rho_decay = rho_decay;
  params.alpha = 2.0;

  SpectralField x0_field(n);
  if (x0 == "e1") {
    x0_field = SpectralField::basis_vector(n, 0);
  } else if (x0 == "zero") {
    // stays zero
  } else if (x0.rfind("list:", 0) == 0) {
    const auto values = parse_double_list("model.x0", x0.substr(5));
    if (values.size() > n) throw ConfigError("config: model.x0 longer than mode count");
    for (std::size_t i = 0; i < values.size(); ++i) x0_field.coeff[i] = values[i];
  } else {
    throw ConfigError("config: bad model.x0 '" + x0 + "' (e1 | zero | list:...)");
  }

  return ModelSpec{std::move(op), nl, std::move(noise), params, T, std::move(x0_field)};
}

GridSpec ExperimentConfig::build_grid(std::size_t m_max) const {
  GridSpec g;
  g.T = T;
  g.m = m_max;
  g.refine = refine;
  g.validate();
  return g;
}

SodeModel ExperimentConfig::build_sode_model() const {
  SodeDrift drift = SodeDrift::zero(sode_y0.size());
  if (sode_b == "zero") {
    drift = SodeDrift::zero(sode_y0.size());
  } else if (sode_b == "linear") {
    drift = SodeDrift::linear(sode_B);
  } else if (sode_b.rfind("sine:", 0) == 0) {
    drift = SodeDrift::sine(sode_y0.size(), parse_double("sode.b", sode_b.substr(5)));
  } else {
    throw ConfigError("config: bad sode.b '" + sode_b + "' (zero | linear | sine:a)");
  }
  return SodeModel{sode_C, std::move(drift), T, sode_y0};
}

std::vector<std::size_t> ExperimentConfig::order_m_list() const {
  return m_list.value_or(std::vector<std::size_t>{8, 16, 32, 64, 128});
}

std::vector<std::size_t> ExperimentConfig::dist_m_list() const {
  return m_list.value_or(std::vector<std::size_t>{16, 64, 256});
}

ExperimentConfig config_from_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  if (name == "sine") {
    cfg.nl = Nonlinearity::sine(1.0);
  } else if (name == "linear") {
    cfg.nl = Nonlinearity::linear(0.5);
  } else if (name == "zero") {
    cfg.nl = Nonlinearity::zero();
  } else {
    throw ConfigError("config: unknown preset '" + name + "' (sine | linear | zero)");
  }
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  std::string preset = "sine";
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (key == "preset") {
      preset = value;
    } else {
      pairs.emplace_back(key, value);
    }
  }

  ExperimentConfig cfg = config_from_preset(preset);
  for (const auto& [key, value] : pairs) {
    if (key == "model.n") cfg.n = parse_size(key, value);
    else if (key == "model.rho_decay") cfg.rho_decay = parse_double(key, value);
    else if (key == "model.beta") cfg.beta = parse_double(key, value);
    else if (key == "model.T") cfg.T = parse_double(key, value);
    else if (key == "model.x0") cfg.x0 = value;
    else if (key == "model.nonlinearity") cfg.nl = parse_nonlinearity(key, value);
    else if (key == "grid.refine") cfg.refine = parse_size(key, value);
    else if (key == "run.m_list") cfg.m_list = parse_size_list(key, value);
    else if (key == "run.n_replicas") cfg.n_replicas = parse_size(key, value);
    else if (key == "run.proj_dim") cfg.proj_dim = parse_size(key, value);
    else if (key == "run.seed") cfg.master_seed = parse_u64(key, value);
    else if (key == "run.iota") cfg.iota = parse_double(key, value);
    else if (key == "run.threads") cfg.threads = parse_size(key, value);
    else if (key == "out.dir") cfg.out_dir = value;
    else if (key == "order.band_lo") cfg.order_band_lo = parse_double(key, value);
    else if (key == "order.band_hi") cfg.order_band_hi = parse_double(key, value);
    else if (key == "order.max_residual") cfg.order_max_residual = parse_double(key, value);
    else if (key == "dist.alpha") cfg.dist_alpha = parse_double(key, value);
    else if (key == "dist.mean_z") cfg.mean_z = parse_double(key, value);
    else if (key == "dist.cov_z") cfg.cov_z = parse_double(key, value);
    else if (key == "sode.C") cfg.sode_C = parse_matrix(key, value);
    else if (key == "sode.b") cfg.sode_b = value;
    else if (key == "sode.B") cfg.sode_B = parse_matrix(key, value);
    else if (key == "sode.y0") cfg.sode_y0 = parse_double_list(key, value);
    else if (key == "sode.m_list") cfg.sode_m_list = parse_size_list(key, value);
    else if (key == "sode.n_replicas") cfg.sode_n_replicas = parse_size(key, value);
    else throw ConfigError(source + ": unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace aeelab
