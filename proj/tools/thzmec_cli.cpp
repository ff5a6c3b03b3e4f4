// Command-line driver for the THz multi-UAV MEC delay-minimization library.
// Talks to the solver exclusively through the C API in thzmec.h; everything
// else here is argument parsing, JSON plumbing and CSV writing.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thzmec.h"

namespace {

using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

[[noreturn]] void die(const std::string& message, int code = kExitFailure) {
  std::cerr << "error: " << message << "\n";
  std::exit(code);
}

void check(thzmec_status status, const std::string& what) {
  if (status == THZMEC_OK) return;
  const std::string detail = thzmec_last_error();
  const int code = status == THZMEC_ERR_INVALID_ARGUMENT || status == THZMEC_ERR_UNSUPPORTED
                       ? kExitUsage
                       : kExitFailure;
  die(what + ": " + (detail.empty() ? thzmec_status_name(status) : detail), code);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) die("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
  }
  std::ofstream out(path);
  if (!out) die("cannot open '" + path + "' for writing");
  out << text;
  if (!out) die("failed writing '" + path + "'");
}

struct ScenarioHandle {
  thzmec_scenario* ptr = nullptr;
  ~ScenarioHandle() { thzmec_scenario_free(ptr); }
};

struct ReportHandle {
  thzmec_report* ptr = nullptr;
  ~ReportHandle() { thzmec_report_free(ptr); }
};

/// Accepts either a concrete scenario document or a generator config; config
/// documents are drawn with the given seed.
void load_scenario_or_config(const std::string& path, uint64_t seed, ScenarioHandle& out) {
  const std::string text = read_file(path);
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) die("'" + path + "' is not valid JSON");
  if (doc.contains("iots")) {
    check(thzmec_scenario_from_json(text.c_str(), &out.ptr), "loading scenario");
  } else {
    check(thzmec_scenario_generate(text.c_str(), seed, &out.ptr), "generating scenario");
  }
}

json run_to_json(const thzmec_scenario* scenario, const std::string& algo,
                 const std::string& options, uint64_t seed) {
  ReportHandle report;
  check(thzmec_run(scenario, algo.c_str(), options.empty() ? nullptr : options.c_str(), seed,
                   &report.ptr),
        "running " + algo);
  char* text = nullptr;
  check(thzmec_report_to_json(report.ptr, &text), "serializing report");
  json doc = json::parse(text);
  thzmec_string_free(text);
  return doc;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const uint64_t lo = std::stoull(item.substr(0, dash));
      const uint64_t hi = std::stoull(item.substr(dash + 1));
      if (hi < lo) die("bad seed range '" + item + "'", kExitUsage);
      for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(std::stoull(item));
    }
  }
  return seeds;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Runs cells on a small worker pool; results land at their cell index, so
/// output order never depends on scheduling.
template <typename Cell, typename Fn>
auto run_cells(const std::vector<Cell>& cells, int jobs, Fn&& fn) {
  using Result = decltype(fn(cells.front()));
  std::vector<Result> results(cells.size());
  if (jobs <= 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) results[k] = fn(cells[k]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      results[k] = fn(cells[k]);
    }
  };
  std::vector<std::future<void>> pool;
  for (int w = 0; w < jobs; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  return results;
}

// --- gen-scenario ---------------------------------------------------------

int cmd_gen_scenario(const std::string& config_path, uint64_t seed, const std::string& out) {
  ScenarioHandle scenario;
  if (config_path.empty()) {
    check(thzmec_scenario_generate(nullptr, seed, &scenario.ptr), "generating scenario");
  } else {
    const std::string text = read_file(config_path);
    check(thzmec_scenario_generate(text.c_str(), seed, &scenario.ptr), "generating scenario");
  }
  check(thzmec_scenario_save(scenario.ptr, out.c_str()), "saving scenario");
  std::cout << "wrote " << out << "\n";
  return 0;
}

// --- run --------------------------------------------------------------------

int cmd_run(const std::string& scenario_path, const std::string& algo,
            const std::string& options, uint64_t seed, const std::string& out) {
  ScenarioHandle scenario;
  load_scenario_or_config(scenario_path, seed, scenario);
  const json report = run_to_json(scenario.ptr, algo, options, seed);
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
    std::cout << "algo=" << algo << " seed=" << seed
              << " mean_delay_s=" << format_double(report["rounded"]["mean_service_delay_s"])
              << " -> " << out << "\n";
  }
  return 0;
}

// --- sweep ------------------------------------------------------------------

struct SweepCell {
  std::string param;
  double value = 0.0;
  uint64_t seed = 0;
  std::string algo;
};

json apply_sweep_value(json config, const std::string& param, double value) {
  if (param == "traffic_intensity") {
    config["lambda_avg_tasks_per_s"] = value;
  } else if (param == "carrier_frequency") {
    config["base_frequency_hz"] = value;
  } else if (param == "iot_power") {
    config["iot_tx_power_w"] = value;
  } else {
    die("unknown sweep parameter '" + param + "'", kExitUsage);
  }
  return config;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, int jobs) {
  const json spec = json::parse(read_file(spec_path), nullptr, false);
  if (spec.is_discarded()) die("sweep spec is not valid JSON");
  for (const char* key : {"param", "values", "seeds", "algorithms"}) {
    if (!spec.contains(key)) die(std::string("sweep spec: missing '") + key + "'", kExitUsage);
  }
  const std::string param = spec["param"].get<std::string>();
  const auto values = spec["values"].get<std::vector<double>>();
  std::vector<uint64_t> seeds;
  for (const auto& s : spec["seeds"]) seeds.push_back(s.get<uint64_t>());
  const auto algos = spec["algorithms"].get<std::vector<std::string>>();
  if (values.empty() || seeds.empty() || algos.empty()) {
    die("sweep spec: 'values', 'seeds' and 'algorithms' must be non-empty", kExitUsage);
  }
  json config;
  if (spec.contains("config")) {
    config = spec["config"];
  } else if (spec.contains("config_path")) {
    config = json::parse(read_file(spec["config_path"].get<std::string>()));
  } else {
    config = json::parse(read_file("data/table1.json"));
  }
  if (!config.contains("heterogeneous_rates")) config["heterogeneous_rates"] = true;
  const std::string options = spec.contains("options") ? spec["options"].dump() : "";

  std::vector<SweepCell> cells;
  for (double v : values) {
    for (uint64_t s : seeds) {
      for (const auto& a : algos) cells.push_back({param, v, s, a});
    }
  }

  struct CellResult {
    bool ok = false;
    std::string error;
    double mean = NAN, comm = NAN, comp = NAN;
    bool converged = false;
  };
  auto results = run_cells(cells, jobs, [&](const SweepCell& cell) {
    CellResult r;
    const json cell_config = apply_sweep_value(config, cell.param, cell.value);
    thzmec_scenario* scenario = nullptr;
    const std::string cfg_text = cell_config.dump();
    if (thzmec_scenario_generate(cfg_text.c_str(), cell.seed, &scenario) != THZMEC_OK) {
      r.error = thzmec_last_error();
      return r;
    }
    thzmec_report* report = nullptr;
    const thzmec_status st = thzmec_run(scenario, cell.algo.c_str(),
                                        options.empty() ? nullptr : options.c_str(),
                                        cell.seed, &report);
    if (st == THZMEC_OK) {
      r.ok = true;
      thzmec_report_metric(report, "mean_delay", &r.mean);
      thzmec_report_metric(report, "comm_delay", &r.comm);
      thzmec_report_metric(report, "comp_delay", &r.comp);
      r.converged = thzmec_report_converged(report) != 0;
      thzmec_report_free(report);
    } else {
      r.error = thzmec_last_error();
    }
    thzmec_scenario_free(scenario);
    return r;
  });

  std::ostringstream csv;
  csv << "param,value,seed,algo,mean_delay_s,comm_s,comp_s,converged\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& cell = cells[k];
    const auto& r = results[k];
    csv << cell.param << ',' << format_double(cell.value) << ',' << cell.seed << ','
        << cell.algo << ',' << format_double(r.mean) << ',' << format_double(r.comm) << ','
        << format_double(r.comp) << ',' << (r.ok && r.converged ? 1 : 0) << "\n";
    if (!r.ok) {
      std::cerr << "cell (" << cell.param << "=" << format_double(cell.value)
                << ", seed=" << cell.seed << ", algo=" << cell.algo
                << ") failed: " << r.error << "\n";
    }
  }
  const std::string out_path = (std::filesystem::path(out_dir) / "sweep.csv").string();
  write_file(out_path, csv.str());
  std::cout << "wrote " << out_path << " (" << cells.size() << " cells)\n";
  return 0;
}

// --- bound-ratio -------------------------------------------------------------

int cmd_bound_ratio(const std::string& out_path, const std::string& s_list,
                    const std::string& rho_list, const std::string& config_path,
                    uint64_t seed) {
  std::vector<int> s_values;
  for (const auto& tok : split_csv(s_list)) s_values.push_back(std::stoi(tok));
  std::vector<double> rho_values;
  for (const auto& tok : split_csv(rho_list)) rho_values.push_back(std::stod(tok));
  if (s_values.empty() || rho_values.empty()) {
    die("bound-ratio: need non-empty s and rho lists", kExitUsage);
  }

  std::ostringstream csv;
  csv << "kind,s,rho,exact_s,upper_s,ratio\n";
  const double total_rate = 100.0;  // fixed s*mu
  for (int s : s_values) {
    const double mu = total_rate / s;
    for (double rho : rho_values) {
      const double lambda = rho * total_rate;
      double exact = 0.0, upper = 0.0;
      check(thzmec_operation_delay(static_cast<uint32_t>(s), mu, lambda, &exact),
            "operation delay");
      check(thzmec_operation_delay_upper(static_cast<uint32_t>(s), mu, lambda, &upper),
            "operation delay upper");
      csv << "grid," << s << ',' << format_double(rho) << ',' << format_double(exact) << ','
          << format_double(upper) << ',' << format_double(exact / upper) << "\n";
    }
  }

  // Full-service-delay ratio at one converged reference run.
  ScenarioHandle scenario;
  if (config_path.empty()) {
    check(thzmec_scenario_generate(nullptr, seed, &scenario.ptr), "generating scenario");
  } else {
    load_scenario_or_config(config_path, seed, scenario);
  }
  ReportHandle report;
  check(thzmec_run(scenario.ptr, "pdd", nullptr, seed, &report.ptr), "running pdd");
  double mean = 0.0, mean_upper = 0.0;
  check(thzmec_report_metric(report.ptr, "mean_delay", &mean), "metric");
  check(thzmec_report_metric(report.ptr, "mean_delay_upper", &mean_upper), "metric");
  csv << "run,0," << format_double(0.0) << ',' << format_double(mean) << ','
      << format_double(mean_upper) << ',' << format_double(mean / mean_upper) << "\n";

  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out_path, csv.str());
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

// --- compare -----------------------------------------------------------------

int cmd_compare(const std::string& scenario_path, const std::string& seeds_text,
                const std::string& algos_text, const std::string& out_path, int jobs,
                bool with_exhaustive, const std::string& options) {
  const auto seeds = parse_seed_list(seeds_text);
  const auto algos = split_csv(algos_text);
  if (seeds.empty() || algos.empty()) die("compare: need seeds and algos", kExitUsage);

  struct Cell {
    uint64_t seed;
    std::string algo;
  };
  std::vector<Cell> cells;
  for (uint64_t s : seeds) {
    for (const auto& a : algos) cells.push_back({s, a});
  }

  const std::string scenario_text = read_file(scenario_path);
  const json scenario_doc = json::parse(scenario_text, nullptr, false);
  if (scenario_doc.is_discarded()) die("'" + scenario_path + "' is not valid JSON");
  const bool is_config = !scenario_doc.contains("iots");

  auto results = run_cells(cells, jobs, [&](const Cell& cell) -> double {
    thzmec_scenario* scenario = nullptr;
    thzmec_status st;
    if (is_config) {
      st = thzmec_scenario_generate(scenario_text.c_str(), cell.seed, &scenario);
    } else {
      st = thzmec_scenario_from_json(scenario_text.c_str(), &scenario);
    }
    if (st != THZMEC_OK) return NAN;
    thzmec_report* report = nullptr;
    double mean = NAN;
    if (thzmec_run(scenario, cell.algo.c_str(), options.empty() ? nullptr : options.c_str(),
                   cell.seed, &report) == THZMEC_OK) {
      thzmec_report_metric(report, "mean_delay", &mean);
      thzmec_report_free(report);
    }
    thzmec_scenario_free(scenario);
    return mean;
  });

  std::map<std::string, std::vector<double>> by_algo;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    by_algo[cells[k].algo].push_back(results[k]);
  }

  // Optional exhaustive optimum (seed-independent given a fixed scenario).
  std::map<uint64_t, double> exhaustive_by_seed;
  if (with_exhaustive) {
    for (uint64_t s : is_config ? seeds : std::vector<uint64_t>{seeds.front()}) {
      thzmec_scenario* scenario = nullptr;
      thzmec_status st = is_config
                             ? thzmec_scenario_generate(scenario_text.c_str(), s, &scenario)
                             : thzmec_scenario_from_json(scenario_text.c_str(), &scenario);
      if (st != THZMEC_OK) die(std::string("compare: ") + thzmec_last_error());
      thzmec_report* report = nullptr;
      st = thzmec_run(scenario, "exhaustive", options.empty() ? nullptr : options.c_str(), s,
                      &report);
      if (st != THZMEC_OK) {
        die(std::string("compare: exhaustive refused: ") + thzmec_last_error());
      }
      double v = NAN;
      thzmec_report_metric(report, "mean_delay", &v);
      exhaustive_by_seed[s] = v;
      thzmec_report_free(report);
      thzmec_scenario_free(scenario);
    }
    if (!is_config) {
      for (uint64_t s : seeds) exhaustive_by_seed[s] = exhaustive_by_seed[seeds.front()];
    }
  }

  std::ostringstream csv;
  csv << "kind,algo,algo_b,n,mean_delay_s,stderr_s,win_rate,gap_vs_exhaustive\n";
  for (const auto& a : algos) {
    const auto& xs = by_algo[a];
    double mean = 0.0;
    int n = 0;
    for (double x : xs) {
      if (!std::isnan(x)) {
        mean += x;
        ++n;
      }
    }
    mean = n > 0 ? mean / n : NAN;
    double var = 0.0;
    for (double x : xs) {
      if (!std::isnan(x)) var += (x - mean) * (x - mean);
    }
    const double stderr_s = n > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(double(n)) : 0.0;
    std::string gap = "";
    if (with_exhaustive) {
      double gap_sum = 0.0;
      int gap_n = 0;
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const double ex = exhaustive_by_seed[seeds[k]];
        const double x = xs[k];
        if (!std::isnan(x) && ex > 0.0) {
          gap_sum += (x - ex) / ex;
          ++gap_n;
        }
      }
      gap = gap_n > 0 ? format_double(gap_sum / gap_n) : "nan";
    }
    csv << "stat," << a << ",," << n << ',' << format_double(mean) << ','
        << format_double(stderr_s) << ",," << gap << "\n";
  }
  for (const auto& a : algos) {
    for (const auto& b : algos) {
      if (a == b) continue;
      double wins = 0.0;
      int n = 0;
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const double xa = by_algo[a][k];
        const double xb = by_algo[b][k];
        if (std::isnan(xa) || std::isnan(xb)) continue;
        ++n;
        if (xa < xb) {
          wins += 1.0;
        } else if (xa == xb) {
          wins += 0.5;
        }
      }
      csv << "pair," << a << ',' << b << ',' << n << ",,," << format_double(n ? wins / n : NAN)
          << ",\n";
    }
  }

  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out_path, csv.str());
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"THz multi-UAV MEC delay-minimization toolkit"};
  app.require_subcommand(1);

  // gen-scenario
  auto* gen = app.add_subcommand("gen-scenario", "Draw a random scenario from a config");
  std::string gen_config, gen_out;
  uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config, "generator config JSON (default: built-in Table I)");
  gen->add_option("--seed", gen_seed, "random seed")->required();
  gen->add_option("--out", gen_out, "output scenario path")->required();

  // run
  auto* run = app.add_subcommand("run", "Run one algorithm on one scenario");
  std::string run_scenario, run_algo, run_out, run_opts;
  uint64_t run_seed = 0;
  run->add_option("--scenario", run_scenario, "scenario or config JSON path")->required();
  run->add_option("--algo", run_algo,
                  "pdd | uo | uao | nr-sca | uo-guao | bcd-sca | exhaustive")
      ->required();
  run->add_option("--seed", run_seed, "random seed");
  run->add_option("--out", run_out, "report output path (default: stdout)");
  run->add_option("--opts", run_opts, "algorithm options as inline JSON");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep driven by a spec file");
  std::string sweep_spec, sweep_out;
  int sweep_jobs = 1;
  sweep->add_option("--spec", sweep_spec, "sweep spec JSON")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--jobs", sweep_jobs, "worker threads");

  // bound-ratio
  auto* bound = app.add_subcommand("bound-ratio",
                                   "Exact vs upper-bound operation delay at s*mu = 100");
  std::string bound_out, bound_s = "2,4,9,16", bound_rho = "0.05,0.2,0.4,0.6,0.8,0.95";
  std::string bound_config;
  uint64_t bound_seed = 7;
  bound->add_option("--out", bound_out, "output CSV (default: stdout)");
  bound->add_option("--s-values", bound_s, "comma list of computing-unit counts");
  bound->add_option("--rho-values", bound_rho, "comma list of traffic intensities");
  bound->add_option("--scenario", bound_config,
                    "scenario/config for the converged reference run");
  bound->add_option("--seed", bound_seed, "seed of the reference run");

  // compare
  auto* compare = app.add_subcommand("compare", "Paired-seed benchmark comparison");
  std::string cmp_scenario, cmp_seeds = "1-10", cmp_algos = "pdd,uo,uao,nr-sca,uo-guao,bcd-sca";
  std::string cmp_out, cmp_opts;
  int cmp_jobs = 1;
  bool cmp_exhaustive = false;
  compare->add_option("--scenario", cmp_scenario, "scenario or config JSON path")->required();
  compare->add_option("--seeds", cmp_seeds, "seed list, e.g. 1,2,3 or 1-20");
  compare->add_option("--algos", cmp_algos, "comma list of algorithms");
  compare->add_option("--out", cmp_out, "output CSV (default: stdout)");
  compare->add_option("--jobs", cmp_jobs, "worker threads");
  compare->add_option("--opts", cmp_opts, "algorithm options as inline JSON");
  compare->add_flag("--exhaustive", cmp_exhaustive,
                    "include the exhaustive optimum and the gap column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_scenario(gen_config, gen_seed, gen_out);
    if (run->parsed()) return cmd_run(run_scenario, run_algo, run_opts, run_seed, run_out);
    if (sweep->parsed()) return cmd_sweep(sweep_spec, sweep_out, sweep_jobs);
    if (bound->parsed()) {
      return cmd_bound_ratio(bound_out, bound_s, bound_rho, bound_config, bound_seed);
    }
    if (compare->parsed()) {
      return cmd_compare(cmp_scenario, cmp_seeds, cmp_algos, cmp_out, cmp_jobs, cmp_exhaustive,
                         cmp_opts);
    }
  } catch (const std::exception& e) {
    die(e.what());
  }
  return kExitUsage;
}
