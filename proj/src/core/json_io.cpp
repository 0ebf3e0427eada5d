#include "core/json_io.hpp"

#include <cstdio>
#include <sstream>

#include "core/fsio.hpp"
#include "json.hpp"

namespace eqhmm {

namespace {

using nlohmann::json;

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    fail(ErrorCode::parse, std::string("malformed JSON in ") + what);
  return j;
}

/// Runs an extractor, rephrasing nlohmann's exceptions (missing keys, type
/// mismatches) as parse errors.
template <typename Fn>
auto extract(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, std::string(what) + ": " + e.what());
  }
}

std::vector<double> number_list(const json& j, const char* what) {
  if (!j.is_array())
    fail(ErrorCode::parse, std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number())
      fail(ErrorCode::parse, std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::string params_to_json(const HmmParams& params) {
  json j;
  j["n_states"] = params.n_states;
  j["pi"] = params.pi;
  j["trans"] = params.trans;
  j["lambda"] = params.lambda;
  if (params.has_regions()) j["region_dist"] = params.region_dist;
  return j.dump(2) + "\n";
}

HmmParams params_from_json(const std::string& text) {
  const json j = parse(text, "HMM parameters");
  return extract("HMM parameters", [&] {
    HmmParams p;
    if (!j.contains("n_states") || !j["n_states"].is_number_integer())
      fail(ErrorCode::parse, "parameters need an integer n_states");
    p.n_states = j["n_states"].get<int>();
    p.pi = number_list(j.at("pi"), "pi");
    p.trans = number_list(j.at("trans"), "trans");
    p.lambda = number_list(j.at("lambda"), "lambda");
    if (j.contains("region_dist")) {
      p.region_dist = number_list(j["region_dist"], "region_dist");
      if (p.n_states <= 0 || p.region_dist.size() % p.n_states != 0)
        fail(ErrorCode::parse, "region_dist size must be a multiple of n_states");
      p.n_regions = static_cast<int>(p.region_dist.size()) / p.n_states;
    }
    p.validate();
    return p;
  });
}

void save_params(const HmmParams& params, const std::string& path) {
  write_file_atomic(path, params_to_json(params));
}

HmmParams load_params(const std::string& path) {
  return params_from_json(read_file(path));
}

namespace {

const char* mode_name(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::single_region: return "single-region";
    case PartitionMode::half_plane: return "half-plane";
    case PartitionMode::quadrant_merge: return "quadrant-merge";
  }
  return "single-region";
}

PartitionMode mode_from_name(const std::string& name) {
  if (name == "single-region") return PartitionMode::single_region;
  if (name == "half-plane") return PartitionMode::half_plane;
  if (name == "quadrant-merge") return PartitionMode::quadrant_merge;
  fail(ErrorCode::parse, "unknown partition mode '" + name + "'");
}

}  // namespace

std::string partition_to_json(const RegionPartition& partition) {
  json j;
  j["mode"] = mode_name(partition.mode);
  j["center"] = {partition.center_lon, partition.center_lat};
  j["axis"] = {partition.axis_lon, partition.axis_lat};
  json mm = json::object();
  for (int q = 1; q <= 4; ++q)
    mm[std::to_string(q)] = partition.merge_map[q - 1];
  j["merge_map"] = mm;
  return j.dump(2) + "\n";
}

RegionPartition partition_from_json(const std::string& text) {
  const json j = parse(text, "region partition");
  return extract("region partition", [&] {
    RegionPartition p;
    p.mode = mode_from_name(j.at("mode").get<std::string>());
    const auto center = number_list(j.at("center"), "center");
    const auto axis = number_list(j.at("axis"), "axis");
    if (center.size() != 2 || axis.size() != 2)
      fail(ErrorCode::parse, "center and axis must be [longitude, latitude]");
    p.center_lon = center[0];
    p.center_lat = center[1];
    p.axis_lon = axis[0];
    p.axis_lat = axis[1];
    if (j.contains("merge_map")) {
      for (int q = 1; q <= 4; ++q) {
        const std::string key = std::to_string(q);
        if (!j["merge_map"].contains(key))
          fail(ErrorCode::parse, "merge_map must map quadrants 1..4");
        p.merge_map[q - 1] = j["merge_map"][key].get<int>();
      }
    }
    p.validate();
    return p;
  });
}

void save_partition(const RegionPartition& partition, const std::string& path) {
  write_file_atomic(path, partition_to_json(partition));
}

RegionPartition load_partition(const std::string& path) {
  return partition_from_json(read_file(path));
}

std::string fit_config_to_json(const FitConfig& config) {
  json j;
  j["init_grid"] = config.init_grid;
  if (!config.init_trans.empty()) j["init_trans"] = config.init_trans;
  if (!config.init_pi.empty()) j["init_pi"] = config.init_pi;
  if (!config.init_region_dist.empty())
    j["init_region_dist"] = config.init_region_dist;
  j["coarse_iters"] = config.coarse_iters;
  j["param_tol"] = config.param_tol;
  j["max_iters"] = config.max_iters;
  j["min_lambda"] = config.min_lambda;
  return j.dump(2) + "\n";
}

FitConfig fit_config_from_json(const std::string& text,
                               const FitConfig& defaults) {
  const json j = parse(text, "fit configuration");
  return extract("fit configuration", [&] {
    FitConfig c = defaults;
    if (j.contains("init_grid")) {
      c.init_grid.clear();
      for (const auto& row : j["init_grid"])
        c.init_grid.push_back(number_list(row, "init_grid row"));
    }
    if (j.contains("init_trans"))
      c.init_trans = number_list(j["init_trans"], "init_trans");
    if (j.contains("init_pi")) c.init_pi = number_list(j["init_pi"], "init_pi");
    if (j.contains("init_region_dist"))
      c.init_region_dist = number_list(j["init_region_dist"], "init_region_dist");
    if (j.contains("coarse_iters")) c.coarse_iters = j["coarse_iters"].get<int>();
    if (j.contains("param_tol")) c.param_tol = j["param_tol"].get<double>();
    if (j.contains("max_iters")) c.max_iters = j["max_iters"].get<int>();
    if (j.contains("min_lambda")) c.min_lambda = j["min_lambda"].get<double>();
    return c;
  });
}

std::string fit_result_to_json(const FitResult& result) {
  json j;
  j["params"] = json::parse(params_to_json(result.params));
  j["log_likelihood"] = result.log_likelihood;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["trace"] = result.trace;
  return j.dump(2) + "\n";
}

std::string fit_trace_csv(const FitResult& result) {
  std::ostringstream out;
  out << "iter,log_likelihood\n";
  char buf[64];
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.12f\n", i, result.trace[i]);
    out << buf;
  }
  return out.str();
}

std::string eval_config_to_json(const EvalConfig& config) {
  json j;
  j["warmup_events"] = config.warmup_events;
  j["forecast_start"] = format_date(config.forecast_start);
  j["forecast_end"] = format_date(config.forecast_end);
  j["forecast_time_of_day"] = config.forecast_time_of_day;
  j["horizons"] = config.horizons;
  j["split_low_count"] = config.split_low_count;
  if (!config.regions.empty()) j["regions"] = config.regions;
  return j.dump(2) + "\n";
}

EvalConfig eval_config_from_json(const std::string& text) {
  const json j = parse(text, "evaluation configuration");
  return extract("evaluation configuration", [&] {
    EvalConfig c;
    if (j.contains("warmup_events")) c.warmup_events = j["warmup_events"].get<int>();
    c.forecast_start = parse_date(j.at("forecast_start").get<std::string>());
    c.forecast_end = parse_date(j.at("forecast_end").get<std::string>());
    if (j.contains("forecast_time_of_day"))
      c.forecast_time_of_day = j["forecast_time_of_day"].get<double>();
    if (j.contains("horizons")) c.horizons = number_list(j["horizons"], "horizons");
    if (j.contains("split_low_count"))
      c.split_low_count = j["split_low_count"].get<double>();
    if (j.contains("regions")) {
      c.regions.clear();
      for (const auto& v : j["regions"]) c.regions.push_back(v.get<int>());
    }
    c.validate();
    return c;
  });
}

EvalConfig load_eval_config(const std::string& path) {
  return eval_config_from_json(read_file(path));
}

}  // namespace eqhmm
