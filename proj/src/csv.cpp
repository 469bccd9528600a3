#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace co3 {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

}  // namespace

Dataset parse_dataset_csv(std::istream& in, const CsvOptions& opts) {
  std::vector<std::vector<int>> rows;
  std::vector<std::vector<std::uint8_t>> deltas;
  std::string line;
  int lineno = 0;
  bool skipped_header = !opts.has_header;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw parse_error("row " + std::to_string(rows.size() + 1) + ": expected " +
                        std::to_string(width) + " fields, got " +
                        std::to_string(fields.size()));
    std::vector<int> y(width, 0);
    std::vector<std::uint8_t> d(width, 1);
    for (std::size_t j = 0; j < width; ++j) {
      const std::string& f = fields[j];
      if (is_missing_token(f)) {
        d[j] = 0;
        continue;
      }
      std::size_t used = 0;
      int code = 0;
      try {
        code = std::stoi(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f.size())
        throw parse_error("row " + std::to_string(rows.size() + 1) + ", column " +
                          std::to_string(j + 1) + ": non-integer code '" + f + "'");
      if (opts.zero_based_codes) ++code;
      if (code < 1)
        throw parse_error("row " + std::to_string(rows.size() + 1) + ", column " +
                          std::to_string(j + 1) + ": code " + std::to_string(code) +
                          " below 1");
      y[j] = code;
    }
    rows.push_back(std::move(y));
    deltas.push_back(std::move(d));
  }
  if (rows.empty()) throw parse_error("no data rows");

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(width);
  int c = opts.categories;
  if (c == 0) {
    for (const auto& r : rows)
      for (int v : r) c = std::max(c, v);
    c = std::max(c, 2);
  }

  std::vector<int> y;
  std::vector<std::uint8_t> delta;
  y.reserve(static_cast<std::size_t>(n) * p);
  delta.reserve(y.capacity());
  for (int i = 0; i < n; ++i) {
    y.insert(y.end(), rows[i].begin(), rows[i].end());
    delta.insert(delta.end(), deltas[i].begin(), deltas[i].end());
  }
  try {
    return Dataset::create(n, p, c, std::move(y), std::move(delta));
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
}

Dataset load_dataset_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  try {
    return parse_dataset_csv(in, opts);
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.p; ++j) {
      if (j) out << ',';
      if (data.observed(i, j)) out << data.code(i, j);
    }
    out << '\n';
  }
  return out.str();
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << dataset_to_csv(data);
  if (!out) throw io_error("write failed for " + path);
}

const std::vector<std::pair<std::string, std::string>>& Options::schema() {
  static const std::vector<std::pair<std::string, std::string>> s = {
      // model
      {"d", "3"},
      {"alpha1", "1"},
      {"alpha2", "1"},
      {"sigma_mode", "fixed"},
      {"sigma1_sq", "0.1"},
      {"sigma2_sq", "1.5"},
      {"sigma1_shape", "2"},
      {"sigma1_rate", "1"},
      {"sigma2_shape", "2"},
      {"sigma2_rate", "1"},
      {"u1_11", "0"},
      {"u1_22", "0"},
      {"u2_11", "0"},
      {"u2_22", "0"},
      {"m1_1", "0"},
      {"m1_2", "0"},
      {"m2_1", "0"},
      {"m2_2", "0"},
      {"v1_scale", "1"},
      {"v2_scale", "1"},
      {"cutoffs", ""},
      {"categories", "0"},
      // chain
      {"iterations", "5000"},
      {"burn_in", "-1"},
      {"thin", "1"},
      {"seed", "1"},
      {"low_memory", "false"},
      {"parallel_latent", "false"},
      {"threads", "1"},
      // ingestion
      {"has_header", "false"},
      {"zero_based_codes", "false"},
      // simulate
      {"sim_n", "50"},
      {"sim_p", "50"},
      {"sim_c", "3"},
      {"sim_d", "3"},
      {"sim_row_components", "3"},
      {"sim_col_components", "3"},
      {"sim_separation", "2.5"},
      {"sim_censor_rate", "0.05"},
      {"sim_censor_mode", "informative"},
      {"sim_target_category", "1"},
      {"sim_replicates", "1"},
  };
  return s;
}

Options::Options() {
  for (const auto& [k, v] : schema()) kv_[k] = v;
}

void Options::set(const std::string& key, const std::string& value) {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw parse_error("unknown key '" + key + "'");
  it->second = trim(value);
}

bool Options::has(const std::string& key) const { return kv_.count(key) != 0; }

const std::string& Options::raw(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw parse_error("unknown key '" + key + "'");
  return it->second;
}

void Options::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw parse_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      set(trim(t.substr(0, eq)), t.substr(eq + 1));
    } catch (const parse_error& e) {
      throw parse_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

int Options::get_int(const std::string& key) const {
  const std::string& v = raw(key);
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw parse_error("key '" + key + "': expected integer, got '" + v + "'");
  return out;
}

double Options::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw parse_error("key '" + key + "': expected number, got '" + v + "'");
  return out;
}

bool Options::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw parse_error("key '" + key + "': expected boolean, got '" + v + "'");
}

std::uint64_t Options::get_seed(const std::string& key) const {
  const std::string& v = raw(key);
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw parse_error("key '" + key + "': expected seed, got '" + v + "'");
  return out;
}

std::string Options::dump() const {
  std::ostringstream out;
  for (const auto& [k, unused] : schema()) out << k << '=' << kv_.at(k) << '\n';
  return out.str();
}

Cutoffs Options::cutoffs_for(int c) const {
  const std::string& text = raw("cutoffs");
  if (trim(text).empty()) return make_default_cutoffs(c);
  std::vector<double> interior;
  for (const auto& tok : split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw parse_error("key 'cutoffs': expected number, got '" + tok + "'");
    interior.push_back(v);
  }
  if (static_cast<int>(interior.size()) != c - 1)
    throw parse_error("key 'cutoffs': expected " + std::to_string(c - 1) +
                      " interior cutoffs for " + std::to_string(c) + " categories");
  return make_cutoffs(interior);
}

ModelConfig Options::model_config() const {
  const int d = get_int("d");
  if (d < 1) throw parse_error("key 'd': must be >= 1");
  ModelConfig cfg = ModelConfig::defaults(d);
  cfg.alpha1 = get_double("alpha1");
  cfg.alpha2 = get_double("alpha2");

  const std::string& mode = raw("sigma_mode");
  if (mode == "fixed") {
    cfg.sigma_fixed = true;
  } else if (mode == "hyperprior") {
    cfg.sigma_fixed = false;
  } else {
    throw parse_error("key 'sigma_mode': expected fixed|hyperprior, got '" + mode + "'");
  }
  cfg.sigma1_sq = get_double("sigma1_sq");
  cfg.sigma2_sq = get_double("sigma2_sq");
  cfg.sigma_prior = {get_double("sigma1_shape"), get_double("sigma1_rate"),
                     get_double("sigma2_shape"), get_double("sigma2_rate")};

  auto u_or_default = [&](const char* key) {
    const double u = get_double(key);
    return u > 0.0 ? u : 1.0 / std::sqrt(static_cast<double>(d));
  };
  cfg.u1_11 = u_or_default("u1_11");
  cfg.u1_22 = u_or_default("u1_22");
  cfg.u2_11 = u_or_default("u2_11");
  cfg.u2_22 = u_or_default("u2_22");

  cfg.M1.col(0).setConstant(get_double("m1_1"));
  cfg.M1.col(1).setConstant(get_double("m1_2"));
  cfg.M2.col(0).setConstant(get_double("m2_1"));
  cfg.M2.col(1).setConstant(get_double("m2_2"));
  cfg.V1 *= get_double("v1_scale");
  cfg.V2 *= get_double("v2_scale");

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  return cfg;
}

GibbsControls Options::gibbs_controls() const {
  GibbsControls ctl;
  ctl.iterations = get_int("iterations");
  ctl.burn_in = get_int("burn_in");
  ctl.thin = get_int("thin");
  ctl.seed = get_seed("seed");
  ctl.low_memory = get_bool("low_memory");
  ctl.parallel_latent = get_bool("parallel_latent");
  ctl.threads = get_int("threads");
  try {
    ctl.validate();
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  return ctl;
}

ScenarioConfig Options::scenario_config() const {
  ScenarioConfig sc;
  sc.n = get_int("sim_n");
  sc.p = get_int("sim_p");
  sc.c = get_int("sim_c");
  sc.d = get_int("sim_d");
  sc.row_components = get_int("sim_row_components");
  sc.col_components = get_int("sim_col_components");
  sc.separation = get_double("sim_separation");
  sc.censor_rate = get_double("sim_censor_rate");
  const std::string& mode = raw("sim_censor_mode");
  if (mode == "informative") {
    sc.censor_mode = CensorMode::informative;
  } else if (mode == "random") {
    sc.censor_mode = CensorMode::random;
  } else {
    throw parse_error("key 'sim_censor_mode': expected informative|random, got '" +
                      mode + "'");
  }
  sc.target_category = get_int("sim_target_category");
  sc.seed = get_seed("seed");
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  return sc;
}

CsvOptions Options::csv_options() const {
  CsvOptions o;
  o.has_header = get_bool("has_header");
  o.zero_based_codes = get_bool("zero_based_codes");
  o.categories = get_int("categories");
  return o;
}

}  // namespace co3
