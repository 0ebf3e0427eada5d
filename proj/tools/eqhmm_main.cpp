// eqhmm command line: simulate, regions, fit, forecast, evaluate.
// Built entirely on the C API in eqhmm/eqhmm.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eqhmm/eqhmm.h"
#include "json.hpp"

namespace {

using nlohmann::json;

int exit_code(eqh_status status) {
  switch (status) {
    case EQH_OK: return 0;
    case EQH_ERR_IO:
    case EQH_ERR_PARSE: return 2;
    case EQH_ERR_INVALID:
    case EQH_ERR_DOMAIN: return 3;
    case EQH_ERR_NUMERIC: return 4;
    default: return 1;
  }
}

struct CliError {
  int code;
  std::string message;
};

void check(eqh_status status, const std::string& context) {
  if (status == EQH_OK) return;
  throw CliError{exit_code(status), context + ": " + eqh_last_error()};
}

// RAII wrappers for the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  operator T*() const { return ptr; }
};
using CatalogHandle = Handle<eqh_catalog, eqh_catalog_free>;
using ObsHandle = Handle<eqh_observations, eqh_observations_free>;
using ParamsHandle = Handle<eqh_params, eqh_params_free>;
using PartitionHandle = Handle<eqh_partition, eqh_partition_free>;
using FitHandle = Handle<eqh_fit_result, eqh_fit_result_free>;
using EvalHandle = Handle<eqh_eval_result, eqh_eval_result_free>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { eqh_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{2, "cannot open '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CliError{2, "cannot write '" + tmp + "'"};
    out << content;
    if (!out.good()) throw CliError{2, "write failed for '" + tmp + "'"};
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CliError{2, "cannot rename '" + tmp + "'"};
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

json input_digest(const std::string& path) {
  return json{{"path", path}, {"fnv1a64", fnv1a64_hex(read_file(path))}};
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& inputs, const json& config,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["version"] = eqh_version();
  manifest["inputs"] = inputs;
  manifest["config"] = config;
  manifest["outputs"] = outputs;
  write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

CatalogHandle load_catalog_checked(const std::string& path, double min_mag) {
  CatalogHandle catalog;
  check(eqh_catalog_load(path.c_str(), min_mag, catalog.out()),
        "loading catalog '" + path + "'");
  return catalog;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliError{2, "cannot create output directory '" + dir + "'"};
}

// "labels" means the catalog's own region column is authoritative.
void maybe_assign_partition(CatalogHandle& catalog,
                            const std::string& partition_path,
                            const std::string& preset) {
  PartitionHandle partition;
  if (!partition_path.empty())
    check(eqh_partition_load(partition_path.c_str(), partition.out()),
          "loading partition");
  else if (!preset.empty() && preset != "none" && preset != "labels")
    check(eqh_partition_compute(catalog, preset.c_str(), partition.out()),
          "computing partition");
  else
    return;
  check(eqh_partition_assign(catalog, partition), "assigning regions");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden Markov model forecasting for earthquake catalogs"};
  app.set_version_flag("--version", std::string(eqh_version()));
  app.require_subcommand(1);

  bool quiet = false;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  app.add_flag("--quiet", quiet, "suppress informational output");
  app.add_option("--out-dir", out_dir, "output directory (default .)");
  app.add_option("--seed", seed, "random seed for simulate");

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a synthetic catalog");
  std::string sim_params, sim_out = "catalog.csv";
  int sim_events = 100;
  double sim_start = 0.0;
  sim->add_option("--params", sim_params, "HMM parameters JSON")->required();
  sim->add_option("--n-events", sim_events, "number of events")->required();
  sim->add_option("--start-time", sim_start, "time of the first event, days");
  sim->add_option("--out", sim_out, "output catalog CSV");

  // regions
  auto* reg = app.add_subcommand("regions", "principal-axis region partition");
  std::string reg_catalog, reg_preset = "east-west", reg_out = "partition.json",
              reg_labeled;
  double reg_min_mag = 0.0;
  reg->add_option("--catalog", reg_catalog, "catalog CSV")->required();
  reg->add_option("--min-magnitude", reg_min_mag, "magnitude cutoff");
  reg->add_option("--preset", reg_preset,
                  "east-west | north-south | quadrants | single");
  reg->add_option("--out", reg_out, "partition JSON output");
  reg->add_option("--labeled-out", reg_labeled,
                  "also write the region-labeled catalog CSV");

  // fit
  auto* fit = app.add_subcommand("fit", "Baum-Welch parameter estimation");
  std::string fit_catalog, fit_config, fit_partition, fit_region_mode = "none";
  int fit_states = 2;
  double fit_min_mag = 0.0;
  fit->add_option("--catalog", fit_catalog, "catalog CSV")->required();
  fit->add_option("--min-magnitude", fit_min_mag, "magnitude cutoff");
  fit->add_option("--states", fit_states, "number of hidden states");
  fit->add_option("--region-mode", fit_region_mode,
                  "none | labels | east-west | north-south | quadrants | "
                  "single ('labels' trusts the catalog's region column)");
  fit->add_option("--partition", fit_partition,
                  "partition JSON (overrides --region-mode)");
  fit->add_option("--config", fit_config, "fit configuration JSON");

  // forecast
  auto* fc = app.add_subcommand("forecast", "scheduled forecast at a date");
  std::string fc_params, fc_catalog, fc_date, fc_time, fc_partition,
      fc_region_mode = "none";
  std::vector<double> fc_horizons = {1.0, 5.0, 10.0};
  int fc_region = 0;
  double fc_min_mag = 0.0;
  fc->add_option("--params", fc_params, "HMM parameters JSON")->required();
  fc->add_option("--catalog", fc_catalog, "catalog CSV")->required();
  fc->add_option("--min-magnitude", fc_min_mag, "magnitude cutoff");
  fc->add_option("--date", fc_date, "forecast date YYYY-MM-DD")->required();
  fc->add_option("--time", fc_time, "forecast time HH:MM:SS (default 00:00:00)");
  fc->add_option("--horizons", fc_horizons, "horizons in days")
      ->delimiter(',');
  fc->add_option("--region", fc_region, "region label (joint model)");
  fc->add_option("--partition", fc_partition, "partition JSON for labeling");
  fc->add_option("--region-mode", fc_region_mode,
                 "compute partition preset for labeling");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "rolling daily forecast evaluation");
  std::string ev_params, ev_catalog, ev_config, ev_partition,
      ev_region_mode = "none";
  double ev_min_mag = 0.0;
  ev->add_option("--params", ev_params, "HMM parameters JSON")->required();
  ev->add_option("--catalog", ev_catalog, "catalog CSV")->required();
  ev->add_option("--min-magnitude", ev_min_mag, "magnitude cutoff");
  ev->add_option("--eval-config", ev_config, "evaluation config JSON")
      ->required();
  ev->add_option("--partition", ev_partition, "partition JSON for labeling");
  ev->add_option("--region-mode", ev_region_mode,
                 "compute partition preset for labeling");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      ParamsHandle params;
      check(eqh_params_load(sim_params.c_str(), params.out()), "loading params");
      CatalogHandle catalog;
      check(eqh_simulate(params, sim_events, seed, sim_start, catalog.out()),
            "simulating");
      check(eqh_catalog_save(catalog, sim_out.c_str()), "writing catalog");
      if (!quiet)
        std::printf("wrote %zu events to %s (seed %" PRIu64 ")\n",
                    eqh_catalog_size(catalog), sim_out.c_str(), seed);
    }

    if (reg->parsed()) {
      CatalogHandle catalog = load_catalog_checked(reg_catalog, reg_min_mag);
      PartitionHandle partition;
      check(eqh_partition_compute(catalog, reg_preset.c_str(), partition.out()),
            "computing partition");
      check(eqh_partition_save(partition, reg_out.c_str()), "writing partition");
      if (!reg_labeled.empty()) {
        check(eqh_partition_assign(catalog, partition), "assigning regions");
        check(eqh_catalog_save(catalog, reg_labeled.c_str()),
              "writing labeled catalog");
      }
      if (!quiet)
        std::printf("partition (%s) written to %s\n", reg_preset.c_str(),
                    reg_out.c_str());
    }

    if (fit->parsed()) {
      ensure_out_dir(out_dir);
      CatalogHandle catalog = load_catalog_checked(fit_catalog, fit_min_mag);
      const bool joint = fit_region_mode != "none" || !fit_partition.empty();
      if (joint && eqh_catalog_size(catalog) > 0) {
        // label only when the catalog does not already carry labels
        int first_region = 0;
        eqh_catalog_event(catalog, 0, nullptr, nullptr, nullptr, nullptr,
                          &first_region);
        if (first_region == 0)
          maybe_assign_partition(catalog, fit_partition, fit_region_mode);
      }
      ObsHandle obs;
      check(eqh_observations_from_catalog(catalog, joint ? 1 : 0, obs.out()),
            "extracting observations");
      std::string config_text;
      if (!fit_config.empty()) config_text = read_file(fit_config);
      FitHandle result;
      check(eqh_fit(obs, fit_states,
                    fit_config.empty() ? nullptr : config_text.c_str(),
                    result.out()),
            "fitting");

      ParamsHandle params;
      check(eqh_fit_result_params(result, params.out()), "reading fit params");
      check(eqh_params_sort(params), "sorting states");
      check(eqh_params_save(params, (out_dir + "/params.json").c_str()),
            "writing params");
      OwnedString fit_json, trace_csv, config_json;
      check(eqh_fit_result_to_json(result, &fit_json.ptr), "fit report");
      check(eqh_fit_result_trace_csv(result, &trace_csv.ptr), "fit trace");
      check(eqh_fit_result_config_json(result, &config_json.ptr), "fit config");
      write_file(out_dir + "/fit_result.json", fit_json.str());
      write_file(out_dir + "/trace.csv", trace_csv.str());

      json inputs;
      inputs["catalog"] = input_digest(fit_catalog);
      if (!fit_config.empty()) inputs["config"] = input_digest(fit_config);
      json config = json::object();
      config["states"] = fit_states;
      config["region_mode"] = fit_region_mode;
      config["min_magnitude"] = fit_min_mag;
      if (!config_json.str().empty())
        config["fit"] = json::parse(config_json.str());
      write_manifest(out_dir, "fit", inputs, config,
                     {"fit_result.json", "params.json", "trace.csv"});
      if (!quiet)
        std::printf("fit: log-likelihood %.6f after %d iterations (%s)\n",
                    eqh_fit_result_log_likelihood(result),
                    eqh_fit_result_iterations(result),
                    eqh_fit_result_converged(result) ? "converged"
                                                     : "iteration cap");
    }

    if (fc->parsed()) {
      CatalogHandle catalog = load_catalog_checked(fc_catalog, fc_min_mag);
      ParamsHandle params;
      check(eqh_params_load(fc_params.c_str(), params.out()), "loading params");
      if (eqh_params_n_regions(params) > 0) {
        int first_region = 0;
        eqh_catalog_event(catalog, 0, nullptr, nullptr, nullptr, nullptr,
                          &first_region);
        if (first_region == 0)
          maybe_assign_partition(catalog, fc_partition, fc_region_mode);
      }
      const std::string when =
          fc_time.empty() ? fc_date : fc_date + " " + fc_time;
      double instant = 0.0;
      check(eqh_catalog_instant(catalog, when.c_str(), &instant),
            "parsing forecast date");

      std::vector<double> probs(fc_horizons.size());
      std::vector<double> weights(eqh_params_n_states(params));
      double w = 0.0;
      long long t = 0;
      check(eqh_forecast_at(params, catalog, instant, fc_horizons.data(),
                            fc_horizons.size(), fc_region, probs.data(), &w,
                            &t, weights.data()),
            "forecasting");

      std::printf("t=%lld w=%.6f\n", t, w);
      std::string wline = "weights:";
      char buf[48];
      for (std::size_t s = 0; s < weights.size(); ++s) {
        std::snprintf(buf, sizeof buf, " d_%zu=%.6f", s + 1, weights[s]);
        wline += buf;
      }
      std::printf("%s\n", wline.c_str());
      for (std::size_t i = 0; i < fc_horizons.size(); ++i) {
        if (fc_region != 0)
          std::printf("N=%g region=%d P=%.6f\n", fc_horizons[i], fc_region,
                      probs[i]);
        else
          std::printf("N=%g P=%.6f\n", fc_horizons[i], probs[i]);
      }
    }

    if (ev->parsed()) {
      ensure_out_dir(out_dir);
      CatalogHandle catalog = load_catalog_checked(ev_catalog, ev_min_mag);
      ParamsHandle params;
      check(eqh_params_load(ev_params.c_str(), params.out()), "loading params");
      if (eqh_params_n_regions(params) > 0) {
        int first_region = 0;
        eqh_catalog_event(catalog, 0, nullptr, nullptr, nullptr, nullptr,
                          &first_region);
        if (first_region == 0)
          maybe_assign_partition(catalog, ev_partition, ev_region_mode);
      }
      const std::string config_text = read_file(ev_config);
      EvalHandle result;
      check(eqh_evaluate(catalog, params, config_text.c_str(), result.out()),
            "evaluating");
      OwnedString files, resolved;
      check(eqh_eval_write_outputs(result, out_dir.c_str(), &files.ptr),
            "writing evaluation outputs");
      check(eqh_eval_result_config_json(result, &resolved.ptr),
            "resolving config");

      std::vector<std::string> outputs;
      std::istringstream lines(files.str());
      for (std::string line; std::getline(lines, line);)
        if (!line.empty()) outputs.push_back(line);

      json inputs;
      inputs["catalog"] = input_digest(ev_catalog);
      inputs["params"] = input_digest(ev_params);
      inputs["eval_config"] = input_digest(ev_config);
      if (!ev_partition.empty())
        inputs["partition"] = input_digest(ev_partition);
      write_manifest(out_dir, "evaluate", inputs, json::parse(resolved.str()),
                     outputs);
      if (!quiet)
        std::printf("evaluated %zu forecast days into %s\n",
                    eqh_eval_result_days(result), out_dir.c_str());
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  }
  return 0;
}
