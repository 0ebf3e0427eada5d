#include "eqhmm/eqhmm.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "core/catalog.hpp"
#include "core/estimation.hpp"
#include "core/evaluate.hpp"
#include "core/forecast.hpp"
#include "core/json_io.hpp"
#include "core/simulate.hpp"

#define EQHMM_VERSION_STRING "0.1.0"

namespace {

thread_local std::string g_last_error;

eqh_status status_from(eqhmm::ErrorCode code) {
  using eqhmm::ErrorCode;
  switch (code) {
    case ErrorCode::io: return EQH_ERR_IO;
    case ErrorCode::parse: return EQH_ERR_PARSE;
    case ErrorCode::invalid_argument: return EQH_ERR_INVALID;
    case ErrorCode::insufficient_data:
    case ErrorCode::degenerate_geometry: return EQH_ERR_DOMAIN;
    case ErrorCode::impossible_observation:
    case ErrorCode::degenerate_state:
    case ErrorCode::fit_failure:
    case ErrorCode::numeric: return EQH_ERR_NUMERIC;
  }
  return EQH_ERR_INTERNAL;
}

template <typename Fn>
eqh_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return EQH_OK;
  } catch (const eqhmm::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return EQH_ERR_NOMEM;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EQH_ERR_INTERNAL;
  }
}

eqh_status require(bool ok, const char* message) {
  if (ok) return EQH_OK;
  g_last_error = message;
  return EQH_ERR_INVALID;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct eqh_catalog {
  eqhmm::Catalog catalog;
  std::vector<int> true_states;  // filled by eqh_simulate
  eqhmm::LoadStats stats;
};

struct eqh_observations {
  eqhmm::ObservationSequence obs;
};

struct eqh_params {
  eqhmm::HmmParams params;
};

struct eqh_partition {
  eqhmm::RegionPartition partition;
};

struct eqh_fit_result {
  eqhmm::FitResult result;
  std::string config_json;
};

struct eqh_eval_result {
  eqhmm::EvalResult result;
};

extern "C" {

const char* eqh_version(void) { return EQHMM_VERSION_STRING; }

const char* eqh_last_error(void) { return g_last_error.c_str(); }

void eqh_string_free(char* s) { delete[] s; }

/* ---- catalogs ---------------------------------------------------------- */

eqh_status eqh_catalog_load(const char* path, double min_magnitude,
                            eqh_catalog** out) {
  if (eqh_status st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto handle = std::make_unique<eqh_catalog>();
    handle->catalog = eqhmm::load_catalog(path, min_magnitude, &handle->stats);
    *out = handle.release();
  });
}

eqh_status eqh_catalog_save(const eqh_catalog* catalog, const char* path) {
  if (eqh_status st = require(catalog && path, "null argument")) return st;
  return guarded([&] {
    eqhmm::save_catalog(catalog->catalog, path,
                        catalog->true_states.empty() ? nullptr
                                                     : &catalog->true_states);
  });
}

void eqh_catalog_free(eqh_catalog* catalog) { delete catalog; }

size_t eqh_catalog_size(const eqh_catalog* catalog) {
  return catalog ? catalog->catalog.size() : 0;
}

size_t eqh_catalog_unsorted_rows(const eqh_catalog* catalog) {
  return catalog ? catalog->stats.unsorted_rows : 0;
}

eqh_status eqh_catalog_event(const eqh_catalog* catalog, size_t index,
                             double* time, double* magnitude, double* latitude,
                             double* longitude, int* region) {
  if (eqh_status st = require(catalog, "null catalog")) return st;
  if (eqh_status st =
          require(index < catalog->catalog.size(), "event index out of range"))
    return st;
  const eqhmm::Event& ev = catalog->catalog.events[index];
  if (time) *time = ev.time;
  if (magnitude) *magnitude = ev.magnitude;
  if (latitude) *latitude = ev.latitude;
  if (longitude) *longitude = ev.longitude;
  if (region) *region = ev.region.value_or(0);
  return EQH_OK;
}

eqh_status eqh_catalog_instant(const eqh_catalog* catalog, const char* when,
                               double* out) {
  if (eqh_status st = require(catalog && when && out, "null argument"))
    return st;
  return guarded([&] {
    const std::string s(when);
    const auto space = s.find(' ');
    const eqhmm::Date date =
        eqhmm::parse_date(space == std::string::npos ? s : s.substr(0, space));
    const double tod = space == std::string::npos
                           ? 0.0
                           : eqhmm::parse_time_of_day(s.substr(space + 1));
    *out = catalog->catalog.instant(date, tod);
  });
}

/* ---- region partitions ------------------------------------------------- */

eqh_status eqh_partition_compute(const eqh_catalog* catalog,
                                 const char* preset, eqh_partition** out) {
  if (eqh_status st = require(catalog && preset && out, "null argument"))
    return st;
  return guarded([&] {
    const std::string name(preset);
    eqhmm::RegionPartition p;
    if (name == "single") {
      p.mode = eqhmm::PartitionMode::single_region;
    } else {
      p = eqhmm::compute_principal_axes(catalog->catalog);
      if (name == "east-west")
        p.merge_map = eqhmm::east_west_merge();
      else if (name == "north-south")
        p.merge_map = eqhmm::north_south_merge();
      else if (name == "quadrants")
        p.merge_map = {1, 2, 3, 4};
      else
        eqhmm::fail(eqhmm::ErrorCode::invalid_argument,
                    "unknown partition preset '" + name + "'");
    }
    *out = new eqh_partition{p};
  });
}

eqh_status eqh_partition_load(const char* path, eqh_partition** out) {
  if (eqh_status st = require(path && out, "null argument")) return st;
  return guarded([&] { *out = new eqh_partition{eqhmm::load_partition(path)}; });
}

eqh_status eqh_partition_save(const eqh_partition* partition,
                              const char* path) {
  if (eqh_status st = require(partition && path, "null argument")) return st;
  return guarded([&] { eqhmm::save_partition(partition->partition, path); });
}

void eqh_partition_free(eqh_partition* partition) { delete partition; }

eqh_status eqh_partition_assign(eqh_catalog* catalog,
                                const eqh_partition* partition) {
  if (eqh_status st = require(catalog && partition, "null argument")) return st;
  return guarded([&] {
    catalog->catalog =
        eqhmm::assign_regions(catalog->catalog, partition->partition);
  });
}

/* ---- observations ------------------------------------------------------ */

eqh_status eqh_observations_from_catalog(const eqh_catalog* catalog,
                                         int use_regions,
                                         eqh_observations** out) {
  if (eqh_status st = require(catalog && out, "null argument")) return st;
  return guarded([&] {
    eqhmm::ObservationSequence obs = eqhmm::to_observations(catalog->catalog);
    if (use_regions && obs.regions.empty())
      eqhmm::fail(eqhmm::ErrorCode::invalid_argument,
                  "catalog carries no region labels");
    if (!use_regions) obs.regions.clear();
    *out = new eqh_observations{std::move(obs)};
  });
}

eqh_status eqh_observations_create(const double* interevent_times,
                                   const int* regions, size_t length,
                                   eqh_observations** out) {
  if (eqh_status st =
          require(interevent_times && out && length > 0, "null argument"))
    return st;
  return guarded([&] {
    eqhmm::ObservationSequence obs;
    obs.interevent_times.assign(interevent_times, interevent_times + length);
    if (regions) obs.regions.assign(regions, regions + length);
    obs.validate();
    *out = new eqh_observations{std::move(obs)};
  });
}

void eqh_observations_free(eqh_observations* obs) { delete obs; }

size_t eqh_observations_length(const eqh_observations* obs) {
  return obs ? obs->obs.length() : 0;
}

/* ---- model parameters -------------------------------------------------- */

eqh_status eqh_params_create(int n_states, const double* pi,
                             const double* trans, const double* lambda,
                             int n_regions, const double* region_dist,
                             eqh_params** out) {
  if (eqh_status st =
          require(pi && trans && lambda && out && n_states > 0 &&
                      (n_regions == 0) == (region_dist == nullptr),
                  "bad parameter buffers"))
    return st;
  return guarded([&] {
    eqhmm::HmmParams p;
    const auto n = static_cast<std::size_t>(n_states);
    p.n_states = n_states;
    p.pi.assign(pi, pi + n);
    p.trans.assign(trans, trans + n * n);
    p.lambda.assign(lambda, lambda + n);
    p.n_regions = n_regions;
    if (n_regions > 0)
      p.region_dist.assign(region_dist,
                           region_dist + n * static_cast<std::size_t>(n_regions));
    p.validate();
    *out = new eqh_params{std::move(p)};
  });
}

eqh_status eqh_params_load(const char* path, eqh_params** out) {
  if (eqh_status st = require(path && out, "null argument")) return st;
  return guarded([&] { *out = new eqh_params{eqhmm::load_params(path)}; });
}

eqh_status eqh_params_save(const eqh_params* params, const char* path) {
  if (eqh_status st = require(params && path, "null argument")) return st;
  return guarded([&] { eqhmm::save_params(params->params, path); });
}

eqh_status eqh_params_to_json(const eqh_params* params, char** out) {
  if (eqh_status st = require(params && out, "null argument")) return st;
  return guarded([&] { *out = dup_string(eqhmm::params_to_json(params->params)); });
}

void eqh_params_free(eqh_params* params) { delete params; }

int eqh_params_n_states(const eqh_params* params) {
  return params ? params->params.n_states : 0;
}

int eqh_params_n_regions(const eqh_params* params) {
  return params ? params->params.n_regions : 0;
}

eqh_status eqh_params_get(const eqh_params* params, double* pi, double* trans,
                          double* lambda, double* region_dist) {
  if (eqh_status st = require(params, "null params")) return st;
  const eqhmm::HmmParams& p = params->params;
  if (pi) std::memcpy(pi, p.pi.data(), p.pi.size() * sizeof(double));
  if (trans) std::memcpy(trans, p.trans.data(), p.trans.size() * sizeof(double));
  if (lambda)
    std::memcpy(lambda, p.lambda.data(), p.lambda.size() * sizeof(double));
  if (region_dist && !p.region_dist.empty())
    std::memcpy(region_dist, p.region_dist.data(),
                p.region_dist.size() * sizeof(double));
  return EQH_OK;
}

eqh_status eqh_params_sort(eqh_params* params) {
  if (eqh_status st = require(params, "null params")) return st;
  return guarded([&] { params->params = eqhmm::sort_states(params->params); });
}

/* ---- likelihood and forecasting ---------------------------------------- */

eqh_status eqh_log_likelihood(const eqh_params* params,
                              const eqh_observations* obs, double* out) {
  if (eqh_status st = require(params && obs && out, "null argument")) return st;
  return guarded([&] {
    *out = eqhmm::forward_backward(params->params, obs->obs).log_likelihood;
  });
}

eqh_status eqh_post_event_weights(const eqh_params* params,
                                  const eqh_observations* obs, double* out) {
  if (eqh_status st = require(params && obs && out, "null argument")) return st;
  return guarded([&] {
    const eqhmm::StateWeights w =
        eqhmm::post_event_weights(params->params, obs->obs);
    std::memcpy(out, w.weights.data(), w.weights.size() * sizeof(double));
  });
}

eqh_status eqh_scheduled_weights(const eqh_params* params, const double* base,
                                 double elapsed, double* out) {
  if (eqh_status st = require(params && base && out, "null argument"))
    return st;
  return guarded([&] {
    eqhmm::StateWeights b;
    b.weights.assign(base, base + params->params.n_states);
    const eqhmm::StateWeights w =
        eqhmm::scheduled_weights(b, params->params, elapsed);
    std::memcpy(out, w.weights.data(), w.weights.size() * sizeof(double));
  });
}

eqh_status eqh_forecast_probability(const eqh_params* params,
                                    const double* weights, double horizon_days,
                                    int region, double* out) {
  if (eqh_status st = require(params && weights && out, "null argument"))
    return st;
  return guarded([&] {
    eqhmm::StateWeights w;
    w.weights.assign(weights, weights + params->params.n_states);
    eqhmm::ForecastQuery query;
    query.horizon_days = horizon_days;
    if (region != 0) query.region = region;
    *out = eqhmm::forecast_probability(w, params->params, query);
  });
}

eqh_status eqh_forecast_density(const eqh_params* params,
                                const double* weights, double wait_days,
                                int region, double* out) {
  if (eqh_status st = require(params && weights && out, "null argument"))
    return st;
  return guarded([&] {
    eqhmm::StateWeights w;
    w.weights.assign(weights, weights + params->params.n_states);
    *out = eqhmm::forecast_density(
        w, params->params, wait_days,
        region != 0 ? std::optional<int>(region) : std::nullopt);
  });
}

eqh_status eqh_waiting_time_moments(const eqh_params* params,
                                    const double* weights, double* mean,
                                    double* variance, double* half_second_moment) {
  if (eqh_status st = require(params && weights, "null argument")) return st;
  return guarded([&] {
    eqhmm::StateWeights w;
    w.weights.assign(weights, weights + params->params.n_states);
    const eqhmm::WaitingTimeMoments m =
        eqhmm::waiting_time_moments(w, params->params);
    if (mean) *mean = m.mean;
    if (variance) *variance = m.variance;
    if (half_second_moment) *half_second_moment = m.half_second_moment;
  });
}

eqh_status eqh_forecast_at(const eqh_params* params,
                           const eqh_catalog* catalog, double instant,
                           const double* horizons, size_t n_horizons,
                           int region, double* probs, double* elapsed,
                           long long* history_events, double* weights) {
  if (eqh_status st = require(params && catalog && horizons && probs &&
                                  n_horizons > 0,
                              "null argument"))
    return st;
  return guarded([&] {
    const std::vector<double> hs(horizons, horizons + n_horizons);
    std::vector<int> regions;
    if (region != 0) regions.push_back(region);
    const eqhmm::PointForecast pf =
        eqhmm::forecast_at(catalog->catalog, params->params, instant, hs,
                           regions);
    for (size_t i = 0; i < n_horizons; ++i)
      probs[i] = region != 0 ? pf.region_probs[i][0] : pf.probs[i];
    if (elapsed) *elapsed = pf.w;
    if (history_events) *history_events = pf.t;
    if (weights)
      std::memcpy(weights, pf.weights.data(),
                  pf.weights.size() * sizeof(double));
  });
}

/* ---- fitting ------------------------------------------------------------ */

eqh_status eqh_fit(const eqh_observations* obs, int n_states,
                   const char* config_json, eqh_fit_result** out) {
  if (eqh_status st = require(obs && out && n_states > 0, "null argument"))
    return st;
  return guarded([&] {
    auto handle = std::make_unique<eqh_fit_result>();
    if (config_json) {
      int n_regions = 0;
      for (int v : obs->obs.regions) n_regions = std::max(n_regions, v);
      const eqhmm::FitConfig config = eqhmm::fit_config_from_json(
          config_json, eqhmm::default_fit_config(n_states, n_regions));
      handle->result = eqhmm::fit(obs->obs, n_states, config);
      handle->config_json = eqhmm::fit_config_to_json(config);
    } else {
      handle->result = eqhmm::fit_default(obs->obs, n_states);
      handle->config_json = "";
    }
    *out = handle.release();
  });
}

void eqh_fit_result_free(eqh_fit_result* result) { delete result; }

eqh_status eqh_fit_result_params(const eqh_fit_result* result,
                                 eqh_params** out) {
  if (eqh_status st = require(result && out, "null argument")) return st;
  return guarded([&] { *out = new eqh_params{result->result.params}; });
}

double eqh_fit_result_log_likelihood(const eqh_fit_result* result) {
  return result ? result->result.log_likelihood : 0.0;
}

int eqh_fit_result_iterations(const eqh_fit_result* result) {
  return result ? result->result.iterations : 0;
}

int eqh_fit_result_converged(const eqh_fit_result* result) {
  return result && result->result.converged ? 1 : 0;
}

eqh_status eqh_fit_result_to_json(const eqh_fit_result* result, char** out) {
  if (eqh_status st = require(result && out, "null argument")) return st;
  return guarded([&] { *out = dup_string(eqhmm::fit_result_to_json(result->result)); });
}

eqh_status eqh_fit_result_trace_csv(const eqh_fit_result* result, char** out) {
  if (eqh_status st = require(result && out, "null argument")) return st;
  return guarded([&] { *out = dup_string(eqhmm::fit_trace_csv(result->result)); });
}

eqh_status eqh_fit_result_config_json(const eqh_fit_result* result,
                                      char** out) {
  if (eqh_status st = require(result && out, "null argument")) return st;
  return guarded([&] { *out = dup_string(result->config_json); });
}

/* ---- simulation --------------------------------------------------------- */

eqh_status eqh_simulate(const eqh_params* params, int n_events, uint64_t seed,
                        double start_time, eqh_catalog** out) {
  if (eqh_status st = require(params && out, "null argument")) return st;
  return guarded([&] {
    eqhmm::SimConfig config;
    config.params = params->params;
    config.n_events = n_events;
    config.seed = seed;
    config.start_time = start_time;
    eqhmm::SimResult sim = eqhmm::simulate(config);
    auto handle = std::make_unique<eqh_catalog>();
    handle->catalog = std::move(sim.catalog);
    handle->true_states = std::move(sim.state_path);
    for (int& s : handle->true_states) ++s;  // 1-based in files
    *out = handle.release();
  });
}

/* ---- rolling evaluation -------------------------------------------------- */

eqh_status eqh_evaluate(const eqh_catalog* catalog, const eqh_params* params,
                        const char* eval_config_json, eqh_eval_result** out) {
  if (eqh_status st =
          require(catalog && params && eval_config_json && out, "null argument"))
    return st;
  return guarded([&] {
    const eqhmm::EvalConfig config =
        eqhmm::eval_config_from_json(eval_config_json);
    *out = new eqh_eval_result{
        eqhmm::run_rolling_forecasts(catalog->catalog, params->params, config)};
  });
}

void eqh_eval_result_free(eqh_eval_result* result) { delete result; }

size_t eqh_eval_result_days(const eqh_eval_result* result) {
  return result ? result->result.days.size() : 0;
}

eqh_status eqh_eval_write_outputs(const eqh_eval_result* result,
                                  const char* dir, char** files_out) {
  if (eqh_status st = require(result && dir, "null argument")) return st;
  return guarded([&] {
    const std::vector<std::string> files =
        eqhmm::write_eval_outputs(result->result, dir);
    if (files_out) {
      std::string joined;
      for (const std::string& f : files) {
        joined += f;
        joined += '\n';
      }
      *files_out = dup_string(joined);
    }
  });
}

eqh_status eqh_eval_result_config_json(const eqh_eval_result* result,
                                       char** out) {
  if (eqh_status st = require(result && out, "null argument")) return st;
  return guarded([&] {
    *out = dup_string(eqhmm::eval_config_to_json(result->result.config));
  });
}

}  // extern "C"
