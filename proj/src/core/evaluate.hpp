#ifndef EQHMM_CORE_EVALUATE_HPP
#define EQHMM_CORE_EVALUATE_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/catalog.hpp"
#include "core/forecast.hpp"

namespace eqhmm {

struct EvalConfig {
  int warmup_events = 30;       // history seed for the first forecast
  Date forecast_start;
  Date forecast_end;            // inclusive
  double forecast_time_of_day = 0.0;  // fraction of a day
  std::vector<double> horizons = {1.0, 5.0, 10.0};
  /// <= 1: fraction of evaluable forecasts in the low group (rounded);
  /// > 1: absolute count. Default matches the 9000-of-9693 split.
  double split_low_count = 9000.0 / 9693.0;
  std::vector<int> regions;     // empty = all labels for a joint model

  void validate() const;
};

/// One scheduled forecast day. Probabilities and outcomes are parallel to
/// the configured horizon list; region entries are parallel to the resolved
/// region list. Outcomes: 1 event within the horizon, 0 none, -1 the window
/// runs past catalog coverage.
struct DailyForecast {
  Date date;
  long long t = 0;   // events in the history window at the forecast instant
  double w = 0.0;    // days since the most recent event
  std::vector<double> probs;
  std::vector<std::vector<double>> region_probs;  // [horizon][region]
  std::vector<int> outcomes;
  std::vector<std::vector<int>> region_outcomes;
  bool event_today = false;
};

struct EvalResult {
  EvalConfig config;         // as resolved (regions filled in)
  std::vector<int> regions;  // labels actually evaluated
  std::vector<DailyForecast> days;
};

struct GroupSummary {
  std::string group;  // "low" or "high"
  double range_lo = 0.0, range_hi = 0.0;
  std::size_t count = 0;
  double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0;
  std::size_t observed_count = 0;
  double observed_proportion = 0.0;
};

struct ReliabilityBin {
  std::size_t count = 0;
  double mean_forecast = 0.0;
  std::size_t observed_count = 0;
  double observed_proportion = 0.0;
  std::size_t binom_lo = 0, binom_hi = 0;  // central interval for the count
  bool within = false;
};

/// Daily scheduled forecasts over [forecast_start, forecast_end]. The first
/// forecast's history is the warmup_events most recent events; afterwards
/// the window grows as events arrive. The forward row is extended
/// incrementally, one event at a time.
EvalResult run_rolling_forecasts(const Catalog& catalog,
                                 const HmmParams& params,
                                 const EvalConfig& config);

/// One-off scheduled forecast at an instant (days since the catalog epoch),
/// using every event up to that instant as history.
struct PointForecast {
  long long t = 0;
  double w = 0.0;
  std::vector<double> weights;  // survival-reweighted state weights
  std::vector<double> probs;    // one per horizon
  std::vector<std::vector<double>> region_probs;  // [horizon][region]
};

PointForecast forecast_at(const Catalog& catalog, const HmmParams& params,
                          double instant, const std::vector<double>& horizons,
                          const std::vector<int>& regions = {});

/// Low/high split of the evaluable forecasts at one horizon (optionally for
/// one region), sorted ascending with date as tie-break. Quartiles use the
/// median-of-halves rule.
std::pair<GroupSummary, GroupSummary> summarize(
    const EvalResult& result, double horizon,
    std::optional<int> region = std::nullopt);

/// Equal-count forecast bins with an exact central binomial interval for the
/// observed count at each bin's mean forecast.
std::vector<ReliabilityBin> reliability(const EvalResult& result,
                                        double horizon, int n_bins = 10,
                                        double level = 0.99,
                                        std::optional<int> region = std::nullopt);

/// Central binomial interval: smallest l and u with
/// P(K < l) <= (1-level)/2 and P(K > u) <= (1-level)/2 for K ~ Bin(n, p).
std::pair<std::size_t, std::size_t> binomial_central_interval(std::size_t n,
                                                              double p,
                                                              double level);

/// Writes daily series, per-horizon summaries, sorted forecasts, reliability
/// tables and a plain-text table file into dir. Returns the file names
/// written (sorted), for manifest building.
std::vector<std::string> write_eval_outputs(const EvalResult& result,
                                            const std::string& dir);

}  // namespace eqhmm

#endif
