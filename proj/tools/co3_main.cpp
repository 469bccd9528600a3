// co3 command-line front end. Links the C API only; argument parsing via
// CLI11, artifact emission as CSV/JSON. Every subcommand writes a
// manifest.json making reruns auditable.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "co3/co3.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitIngestion = 2;
constexpr int kExitNumerical = 3;

struct cli_error {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw cli_error{code, message};
}

int exit_code_for(co3_status s) {
  return s == CO3_ERR_NUMERICAL ? kExitNumerical : kExitIngestion;
}

void check(co3_status s, const std::string& context) {
  if (s != CO3_OK) fail(exit_code_for(s), context + ": " + co3_last_error());
}

struct OptionsHandle {
  co3_options* ptr;
  OptionsHandle() : ptr(co3_options_new()) {}
  ~OptionsHandle() { co3_options_free(ptr); }
  OptionsHandle(const OptionsHandle&) = delete;
  OptionsHandle& operator=(const OptionsHandle&) = delete;
};

std::string options_dump(const co3_options* opt) {
  char* s = co3_options_dump(opt);
  std::string out = s ? s : "";
  co3_string_free(s);
  return out;
}

std::string option_value(const co3_options* opt, const std::string& key) {
  std::istringstream in(options_dump(opt));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

json config_echo(const co3_options* opt) {
  json cfg = json::object();
  std::istringstream in(options_dump(opt));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return cfg;
}

void load_config(co3_options* opt, const std::string& config_path,
                 const std::vector<std::string>& overrides) {
  if (!config_path.empty())
    check(co3_options_load_file(opt, config_path.c_str()), config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(kExitIngestion, "--set expects key=value, got '" + kv + "'");
    check(co3_options_set(opt, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
          "--set " + kv);
  }
}

std::string fnv1a64_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kExitIngestion, "cannot open " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(kExitIngestion, "cannot write " + path.string());
  out << content;
  if (!out) fail(kExitIngestion, "write failed for " + path.string());
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string partition_csv(const int* labels, int n) {
  std::ostringstream out;
  out << "index,label\n";
  for (int i = 0; i < n; ++i) out << i << ',' << labels[i] << '\n';
  return out.str();
}

std::vector<int> read_partition_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(kExitIngestion, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(kExitIngestion, path.string() + ": malformed line '" + line + "'");
    labels.push_back(std::stoi(line.substr(comma + 1)));
  }
  if (labels.empty()) fail(kExitIngestion, path.string() + ": no labels");
  return labels;
}

std::string similarity_csv(const double* s, int n) {
  std::ostringstream out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      out << fmt_double(s[static_cast<std::size_t>(i) * n + j]);
    }
    out << '\n';
  }
  return out.str();
}

int count_clusters(const std::vector<int>& labels) {
  std::set<int> distinct(labels.begin(), labels.end());
  return static_cast<int>(distinct.size());
}

struct Manifest {
  std::string subcommand;
  json extra = json::object();
  std::vector<std::string> outputs;
  std::string input, input_checksum;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const fs::path& out_dir, const co3_options* opt) {
    json m;
    m["subcommand"] = subcommand;
    m["version"] = co3_version();
    m["config"] = config_echo(opt);
    m["seed"] = option_value(opt, "seed");
    m["input"] = input;
    m["input_checksum"] = input_checksum;
    std::sort(outputs.begin(), outputs.end());
    outputs.push_back("manifest.json");
    m["outputs"] = outputs;
    m["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_file(out_dir / "manifest.json", m.dump(2) + "\n");
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(kExitIngestion, "cannot create " + dir.string());
}

std::uint64_t parse_seed(const std::string& s) {
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    fail(kExitIngestion, "bad seed '" + s + "'");
  }
}

// ---- subcommands ---------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& sets,
                 const std::string& out_dir) {
  OptionsHandle opt;
  load_config(opt.ptr, config_path, sets);
  ensure_dir(out_dir);

  Manifest manifest;
  manifest.subcommand = "simulate";
  if (!config_path.empty()) {
    manifest.input = config_path;
    manifest.input_checksum = fnv1a64_hex(config_path);
  }

  int replicates = 1;
  try {
    replicates = std::stoi(option_value(opt.ptr, "sim_replicates"));
  } catch (const std::exception&) {
    fail(kExitIngestion, "bad sim_replicates value");
  }
  if (replicates < 1) fail(kExitIngestion, "sim_replicates must be >= 1");
  const std::uint64_t base_seed = parse_seed(option_value(opt.ptr, "seed"));

  json reps = json::array();
  std::vector<json> rep_info(replicates);
  std::vector<std::string> rep_files(2 * static_cast<std::size_t>(replicates));
  std::vector<cli_error> errors;
  std::mutex err_mu;

  int workers = 1;
  if (const char* cap = std::getenv("CO3_THREADS")) workers = std::max(1, std::atoi(cap));
  workers = std::min<int>(workers, replicates);

  auto run_rep = [&](int r) {
    OptionsHandle local;
    load_config(local.ptr, config_path, sets);
    // distinct derived seed per replicate
    const std::uint64_t seed = base_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r);
    check(co3_options_set(local.ptr, "seed", std::to_string(seed).c_str()), "seed");

    co3_simulation* sim = nullptr;
    check(co3_simulate(local.ptr, &sim), "simulate");
    const co3_dataset* data = co3_simulation_dataset(sim);

    char suffix[16] = "";
    if (replicates > 1) std::snprintf(suffix, sizeof suffix, "_%03d", r);
    const std::string data_name = std::string("dataset") + suffix + ".csv";
    const std::string truth_name = std::string("truth") + suffix + ".json";
    check(co3_dataset_save_csv(data, (fs::path(out_dir) / data_name).string().c_str()),
          data_name);

    const int n = co3_dataset_n(data), p = co3_dataset_p(data);
    json truth;
    truth["row_labels"] = std::vector<int>(co3_simulation_row_truth(sim),
                                           co3_simulation_row_truth(sim) + n);
    truth["col_labels"] = std::vector<int>(co3_simulation_col_truth(sim),
                                           co3_simulation_col_truth(sim) + p);
    truth["censored"] = co3_simulation_censored(sim);
    truth["requested_censored"] = co3_simulation_requested_censored(sim);
    truth["seed"] = std::to_string(seed);
    truth["config"] = config_echo(local.ptr);
    write_file(fs::path(out_dir) / truth_name, truth.dump(2) + "\n");

    json info;
    info["replicate"] = r;
    info["seed"] = std::to_string(seed);
    info["censored"] = co3_simulation_censored(sim);
    info["requested_censored"] = co3_simulation_requested_censored(sim);
    if (co3_simulation_censored(sim) < co3_simulation_requested_censored(sim))
      info["warning"] = "eligible entries exhausted before the requested censoring count";
    rep_info[r] = info;
    rep_files[2 * r] = data_name;
    rep_files[2 * r + 1] = truth_name;
    co3_simulation_free(sim);
  };

  if (workers <= 1) {
    for (int r = 0; r < replicates; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= replicates) return;
          try {
            run_rep(r);
          } catch (const cli_error& e) {
            std::scoped_lock lock(err_mu);
            errors.push_back(e);
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (!errors.empty()) throw errors.front();
  }

  for (auto& info : rep_info) reps.push_back(info);
  manifest.extra["replicates"] = reps;
  manifest.outputs = rep_files;
  manifest.write(out_dir, opt.ptr);
  return 0;
}

struct TruthFile {
  std::vector<int> rows, cols;
};

TruthFile read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(kExitIngestion, "cannot open truth file " + path);
  json j;
  try {
    in >> j;
    TruthFile t;
    t.rows = j.at("row_labels").get<std::vector<int>>();
    t.cols = j.at("col_labels").get<std::vector<int>>();
    return t;
  } catch (const json::exception& e) {
    fail(kExitIngestion, path + ": " + e.what());
  }
}

int cmd_fit(const std::string& data_path, const std::string& config_path,
            const std::vector<std::string>& sets, const std::string& truth_path,
            const std::string& out_dir) {
  OptionsHandle opt;
  load_config(opt.ptr, config_path, sets);
  ensure_dir(out_dir);

  Manifest manifest;
  manifest.subcommand = "fit";
  manifest.input = data_path;
  manifest.input_checksum = fnv1a64_hex(data_path);

  co3_dataset* data = nullptr;
  check(co3_dataset_load_csv(data_path.c_str(), opt.ptr, &data), data_path);

  co3_fit* fit = nullptr;
  const co3_status st = co3_fit_run(data, opt.ptr, &fit);
  if (st != CO3_OK) {
    co3_dataset_free(data);
    fail(exit_code_for(st), std::string("fit: ") + co3_last_error());
  }

  const int n = co3_fit_n(fit), p = co3_fit_p(fit);
  const fs::path dir(out_dir);
  write_file(dir / "row_partition.csv", partition_csv(co3_fit_row_partition(fit), n));
  write_file(dir / "col_partition.csv", partition_csv(co3_fit_col_partition(fit), p));
  write_file(dir / "row_similarity.csv", similarity_csv(co3_fit_row_similarity(fit), n));
  write_file(dir / "col_similarity.csv", similarity_csv(co3_fit_col_similarity(fit), p));

  const int T = co3_fit_num_draws(fit);
  std::ostringstream sig, ktr;
  sig << "draw,sigma1_sq,sigma2_sq\n";
  ktr << "draw,k_n,k_p\n";
  for (int t = 0; t < T; ++t) {
    sig << t << ',' << fmt_double(co3_fit_sigma1_trace(fit)[t]) << ','
        << fmt_double(co3_fit_sigma2_trace(fit)[t]) << '\n';
    ktr << t << ',' << co3_fit_kn_trace(fit)[t] << ',' << co3_fit_kp_trace(fit)[t]
        << '\n';
  }
  write_file(dir / "sigma_trace.csv", sig.str());
  write_file(dir / "k_trace.csv", ktr.str());
  write_file(dir / "lpml.txt", fmt_double(co3_fit_lpml(fit)) + "\n");

  manifest.outputs = {"row_partition.csv", "col_partition.csv", "row_similarity.csv",
                      "col_similarity.csv", "sigma_trace.csv", "k_trace.csv",
                      "lpml.txt"};
  manifest.extra["lpml"] = co3_fit_lpml(fit);
  manifest.extra["stored_draws"] = T;

  if (!truth_path.empty()) {
    const TruthFile truth = read_truth(truth_path);
    if (static_cast<int>(truth.rows.size()) != n ||
        static_cast<int>(truth.cols.size()) != p)
      fail(kExitIngestion, "truth dimensions do not match the data");
    double ari_rows = 0.0, ari_cols = 0.0, b = 0.0;
    check(co3_ari(co3_fit_row_partition(fit), truth.rows.data(), n, &ari_rows), "ari");
    check(co3_ari(co3_fit_col_partition(fit), truth.cols.data(), p, &ari_cols), "ari");
    check(co3_bari(co3_fit_row_partition(fit), co3_fit_col_partition(fit),
                   truth.rows.data(), truth.cols.data(), n, p, &b),
          "bari");
    manifest.extra["ari_rows"] = ari_rows;
    manifest.extra["ari_cols"] = ari_cols;
    manifest.extra["bari"] = b;
  }

  manifest.write(out_dir, opt.ptr);
  co3_fit_free(fit);
  co3_dataset_free(data);
  return 0;
}

int cmd_select_d(const std::string& data_path, const std::string& config_path,
                 const std::vector<std::string>& sets, int d_min, int d_max,
                 const std::string& out_dir) {
  OptionsHandle opt;
  load_config(opt.ptr, config_path, sets);
  ensure_dir(out_dir);

  Manifest manifest;
  manifest.subcommand = "select-d";
  manifest.input = data_path;
  manifest.input_checksum = fnv1a64_hex(data_path);

  co3_dataset* data = nullptr;
  check(co3_dataset_load_csv(data_path.c_str(), opt.ptr, &data), data_path);

  co3_lpml_grid* grid = nullptr;
  const co3_status st = co3_select_d(data, opt.ptr, d_min, d_max, &grid);
  if (st != CO3_OK) {
    co3_dataset_free(data);
    fail(exit_code_for(st), std::string("select-d: ") + co3_last_error());
  }

  std::ostringstream csv;
  csv << "d,lpml\n";
  json failed = json::array();
  for (int i = 0; i < co3_lpml_grid_size(grid); ++i) {
    if (co3_lpml_grid_ok(grid, i))
      csv << co3_lpml_grid_d(grid, i) << ',' << fmt_double(co3_lpml_grid_value(grid, i))
          << '\n';
    else
      failed.push_back(co3_lpml_grid_d(grid, i));
  }
  write_file(fs::path(out_dir) / "lpml_grid.csv", csv.str());

  manifest.outputs = {"lpml_grid.csv"};
  manifest.extra["best_d"] = co3_lpml_grid_best_d(grid);
  manifest.extra["failed_d"] = failed;
  manifest.write(out_dir, opt.ptr);
  co3_lpml_grid_free(grid);
  co3_dataset_free(data);
  return 0;
}

int cmd_evaluate(const std::string& est_dir, const std::string& truth_path,
                 const std::string& out_dir) {
  const TruthFile truth = read_truth(truth_path);
  const auto est_rows = read_partition_csv(fs::path(est_dir) / "row_partition.csv");
  const auto est_cols = read_partition_csv(fs::path(est_dir) / "col_partition.csv");
  if (est_rows.size() != truth.rows.size() || est_cols.size() != truth.cols.size())
    fail(kExitIngestion, "estimate and truth dimensions differ");

  OptionsHandle opt;  // defaults only; echoed for audit
  Manifest manifest;
  manifest.subcommand = "evaluate";
  manifest.input = truth_path;
  manifest.input_checksum = fnv1a64_hex(truth_path);

  double ari_rows = 0.0, ari_cols = 0.0, b = 0.0;
  check(co3_ari(est_rows.data(), truth.rows.data(), static_cast<int>(est_rows.size()),
                &ari_rows),
        "ari rows");
  check(co3_ari(est_cols.data(), truth.cols.data(), static_cast<int>(est_cols.size()),
                &ari_cols),
        "ari cols");
  check(co3_bari(est_rows.data(), est_cols.data(), truth.rows.data(), truth.cols.data(),
                 static_cast<int>(est_rows.size()), static_cast<int>(est_cols.size()),
                 &b),
        "bari");

  json metrics;
  metrics["ari_rows"] = ari_rows;
  metrics["ari_cols"] = ari_cols;
  metrics["bari"] = b;
  metrics["k_hat_rows"] = count_clusters(est_rows);
  metrics["k_hat_cols"] = count_clusters(est_cols);

  const std::string text = metrics.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_file(fs::path(out_dir) / "metrics.json", text);
    manifest.outputs = {"metrics.json"};
    manifest.extra["metrics"] = metrics;
    manifest.write(out_dir, opt.ptr);
  }
  return 0;
}

int cmd_prior_k(int n, int p, double alpha1, double alpha2, const std::string& out_dir) {
  co3_prior_pmf* pmf = nullptr;
  check(co3_prior_k_pmf(n, p, alpha1, alpha2, &pmf), "prior-k");

  std::ostringstream csv;
  csv << "k,probability\n";
  for (int i = 0; i < co3_prior_pmf_size(pmf); ++i)
    csv << co3_prior_pmf_k(pmf, i) << ',' << fmt_double(co3_prior_pmf_prob(pmf, i))
        << '\n';
  co3_prior_pmf_free(pmf);

  if (out_dir.empty()) {
    std::fputs(csv.str().c_str(), stdout);
    return 0;
  }
  ensure_dir(out_dir);
  write_file(fs::path(out_dir) / "prior_k.csv", csv.str());

  OptionsHandle opt;
  Manifest manifest;
  manifest.subcommand = "prior-k";
  manifest.outputs = {"prior_k.csv"};
  double ek = 0.0;
  check(co3_expected_k(n, p, alpha1, alpha2, &ek), "expected-k");
  manifest.extra["expected_k"] = ek;
  manifest.extra["n"] = n;
  manifest.extra["p"] = p;
  manifest.extra["alpha1"] = alpha1;
  manifest.extra["alpha2"] = alpha2;
  manifest.write(out_dir, opt.ptr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co3: Bayesian nonparametric co-clustering of ordinal data with "
               "informative censoring"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir, truth_path, est_dir;
  std::vector<std::string> sets;
  int d_min = 2, d_max = 10;
  int pn = 5, pp = 5;
  double a1 = 1.0, a2 = 1.0;

  auto* sim = app.add_subcommand("simulate", "generate synthetic datasets");
  sim->add_option("--config", config_path, "key=value config file");
  sim->add_option("--set", sets, "override config entries (key=value)");
  sim->add_option("--out", out_dir, "output directory")->required();

  auto* fit = app.add_subcommand("fit", "run the Gibbs sampler on a dataset");
  fit->add_option("--data", data_path, "input CSV")->required();
  fit->add_option("--config", config_path, "key=value config file");
  fit->add_option("--set", sets, "override config entries (key=value)");
  fit->add_option("--truth", truth_path, "truth JSON for ARI reporting");
  fit->add_option("--out", out_dir, "output directory")->required();

  auto* sel = app.add_subcommand("select-d", "LPML sweep over latent dimensions");
  sel->add_option("--data", data_path, "input CSV")->required();
  sel->add_option("--config", config_path, "key=value config file");
  sel->add_option("--set", sets, "override config entries (key=value)");
  sel->add_option("--d-min", d_min, "smallest d")->required();
  sel->add_option("--d-max", d_max, "largest d")->required();
  sel->add_option("--out", out_dir, "output directory")->required();

  auto* eval = app.add_subcommand("evaluate", "compare an estimate with the truth");
  eval->add_option("--estimate", est_dir, "directory with fit outputs")->required();
  eval->add_option("--truth", truth_path, "truth JSON")->required();
  eval->add_option("--out", out_dir, "optional output directory");

  auto* prior = app.add_subcommand("prior-k", "prior pmf of the bivariate cluster count");
  prior->add_option("--n", pn, "rows")->required();
  prior->add_option("--p", pp, "columns")->required();
  prior->add_option("--alpha1", a1, "row concentration");
  prior->add_option("--alpha2", a2, "column concentration");
  prior->add_option("--out", out_dir, "output directory (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, sets, out_dir);
    if (fit->parsed()) return cmd_fit(data_path, config_path, sets, truth_path, out_dir);
    if (sel->parsed())
      return cmd_select_d(data_path, config_path, sets, d_min, d_max, out_dir);
    if (eval->parsed()) return cmd_evaluate(est_dir, truth_path, out_dir);
    if (prior->parsed()) return cmd_prior_k(pn, pp, a1, a2, out_dir);
  } catch (const cli_error& e) {
    std::fprintf(stderr, "co3: %s\n", e.message.c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "co3: %s\n", e.what());
    return kExitIngestion;
  }
  return 0;
}
