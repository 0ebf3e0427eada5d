#include "core/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "core/fsio.hpp"

namespace eqhmm {

namespace {

std::string format_horizon(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", h);
  return buf;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double median_of_sorted(const std::vector<double>& v, std::size_t lo,
                        std::size_t n) {
  // median of v[lo .. lo+n)
  const std::size_t mid = lo + n / 2;
  if (n % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

std::size_t resolve_split(double split_low_count, std::size_t total) {
  double split;
  if (split_low_count <= 1.0)
    split = std::round(split_low_count * static_cast<double>(total));
  else
    split = std::floor(split_low_count);
  if (!(split >= 1.0) || split >= static_cast<double>(total))
    fail(ErrorCode::invalid_argument,
         "degenerate low/high split: " + std::to_string(split) + " of " +
             std::to_string(total));
  return static_cast<std::size_t>(split);
}

struct Sample {
  double prob;
  bool hit;
};

/// Evaluable (prob, outcome) pairs for one horizon/region, in date order.
std::vector<Sample> collect(const EvalResult& result, double horizon,
                            const std::optional<int>& region) {
  std::size_t h = result.config.horizons.size();
  for (std::size_t i = 0; i < result.config.horizons.size(); ++i)
    if (result.config.horizons[i] == horizon) {
      h = i;
      break;
    }
  if (h == result.config.horizons.size())
    fail(ErrorCode::invalid_argument,
         "horizon " + format_horizon(horizon) + " was not evaluated");
  std::size_t r = 0;
  if (region) {
    const auto it =
        std::find(result.regions.begin(), result.regions.end(), *region);
    if (it == result.regions.end())
      fail(ErrorCode::invalid_argument,
           "region " + std::to_string(*region) + " was not evaluated");
    r = static_cast<std::size_t>(it - result.regions.begin());
  }

  std::vector<Sample> out;
  out.reserve(result.days.size());
  for (const DailyForecast& day : result.days) {
    const int outcome = region ? day.region_outcomes[h][r] : day.outcomes[h];
    if (outcome < 0) continue;
    const double p = region ? day.region_probs[h][r] : day.probs[h];
    out.push_back({p, outcome == 1});
  }
  if (out.empty())
    fail(ErrorCode::insufficient_data,
         "no evaluable forecasts at horizon " + format_horizon(horizon));
  return out;
}

void require_fully_labeled(const Catalog& catalog) {
  for (const Event& ev : catalog.events)
    if (!ev.region)
      fail(ErrorCode::invalid_argument,
           "joint model requires a region label on every event");
}

GroupSummary summarize_group(const char* name,
                             const std::vector<Sample>& sorted,
                             std::size_t lo, std::size_t n) {
  GroupSummary g;
  g.group = name;
  g.count = n;
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = sorted[lo + i].prob;
    g.observed_count += sorted[lo + i].hit;
    g.mean += sorted[lo + i].prob;
  }
  g.mean /= static_cast<double>(n);
  g.range_lo = probs.front();
  g.range_hi = probs.back();
  g.median = median_of_sorted(probs, 0, n);
  if (n >= 2) {
    g.q1 = median_of_sorted(probs, 0, n / 2);
    g.q3 = median_of_sorted(probs, n - n / 2, n / 2);
  } else {
    g.q1 = g.q3 = g.median;
  }
  g.observed_proportion =
      static_cast<double>(g.observed_count) / static_cast<double>(n);
  return g;
}

}  // namespace

void EvalConfig::validate() const {
  if (warmup_events < 1)
    fail(ErrorCode::invalid_argument, "warmup_events must be >= 1");
  if (!is_valid_date(forecast_start) || !is_valid_date(forecast_end))
    fail(ErrorCode::invalid_argument, "invalid forecast date");
  if (days_from_civil(forecast_start) >= days_from_civil(forecast_end))
    fail(ErrorCode::invalid_argument,
         "forecast_start must precede forecast_end");
  if (forecast_time_of_day < 0.0 || forecast_time_of_day >= 1.0)
    fail(ErrorCode::invalid_argument,
         "forecast_time_of_day must lie in [0,1)");
  if (horizons.empty())
    fail(ErrorCode::invalid_argument, "at least one horizon is required");
  for (double h : horizons)
    if (!(h > 0.0))
      fail(ErrorCode::invalid_argument, "horizons must be positive");
  if (!(split_low_count > 0.0))
    fail(ErrorCode::invalid_argument, "split_low_count must be positive");
}

EvalResult run_rolling_forecasts(const Catalog& catalog,
                                 const HmmParams& params,
                                 const EvalConfig& config) {
  config.validate();
  params.validate();

  EvalResult result;
  result.config = config;
  if (params.has_regions()) {
    require_fully_labeled(catalog);
    result.regions = config.regions;
    if (result.regions.empty())
      for (int v = 1; v <= params.n_regions; ++v) result.regions.push_back(v);
    for (int v : result.regions)
      if (v < 1 || v > params.n_regions)
        fail(ErrorCode::invalid_argument, "evaluated region out of range");
  } else if (!config.regions.empty()) {
    fail(ErrorCode::invalid_argument,
         "regions configured for a time-only model");
  }
  result.config.regions = result.regions;

  const auto& events = catalog.events;
  const std::size_t n_events = events.size();
  const std::int64_t start_day = days_from_civil(config.forecast_start);
  const std::int64_t end_day = days_from_civil(config.forecast_end);
  const std::int64_t epoch_day = days_from_civil(catalog.epoch);
  const double tod = config.forecast_time_of_day;
  const double tau_start = static_cast<double>(start_day - epoch_day) + tod;

  std::size_t t_start = 0;
  while (t_start < n_events && events[t_start].time <= tau_start) ++t_start;
  if (t_start < static_cast<std::size_t>(config.warmup_events))
    fail(ErrorCode::insufficient_data,
         "only " + std::to_string(t_start) +
             " events precede the forecast start (warmup needs " +
             std::to_string(config.warmup_events) + ")");

  const std::size_t first = t_start - config.warmup_events;
  const double coverage_end = events.back().time;

  ForwardState fwd(params);
  std::optional<StateWeights> post_weights;
  std::size_t next_event = first;
  double last_time = 0.0;

  auto consume_through = [&](double tau) {
    while (next_event < n_events && events[next_event].time <= tau) {
      const Event& ev = events[next_event];
      if (next_event > first) {
        const auto reg = params.has_regions() ? std::optional<int>(*ev.region)
                                              : std::nullopt;
        fwd.push(ev.time - last_time, reg);
        post_weights.reset();
      }
      last_time = ev.time;
      ++next_event;
    }
  };

  result.days.reserve(static_cast<std::size_t>(end_day - start_day + 1));
  for (std::int64_t day = start_day; day <= end_day; ++day) {
    const double tau = static_cast<double>(day - epoch_day) + tod;
    consume_through(tau);
    if (!post_weights) {
      if (fwd.steps() == 0) {
        // warmup of a single event: no interevent time yet, so the next
        // event's state is distributed as pi
        StateWeights sw;
        sw.weights = params.pi;
        sw.history_len = 0;
        post_weights = sw;
      } else {
        post_weights = post_event_weights_from_forward(params, fwd.row(),
                                                       fwd.steps());
      }
    }

    DailyForecast df;
    df.date = civil_from_days(day);
    df.t = static_cast<long long>(next_event - first);
    df.w = tau - last_time;
    const StateWeights sched = scheduled_weights(*post_weights, params, df.w);

    df.probs.resize(config.horizons.size());
    df.outcomes.assign(config.horizons.size(), -1);
    if (!result.regions.empty()) {
      df.region_probs.assign(config.horizons.size(),
                             std::vector<double>(result.regions.size(), 0.0));
      df.region_outcomes.assign(config.horizons.size(),
                                std::vector<int>(result.regions.size(), -1));
    }
    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
      const double N = config.horizons[h];
      df.probs[h] = forecast_probability(sched, params, {N, std::nullopt});
      for (std::size_t r = 0; r < result.regions.size(); ++r)
        df.region_probs[h][r] =
            forecast_probability(sched, params, {N, result.regions[r]});
    }

    // Outcomes: scan the unconsumed events inside (tau, tau + horizon].
    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
      const double N = config.horizons[h];
      if (tau + N > coverage_end) continue;  // window exceeds coverage
      bool any = false;
      std::vector<char> region_hit(result.regions.size(), 0);
      for (std::size_t j = next_event;
           j < n_events && events[j].time <= tau + N; ++j) {
        any = true;
        if (!result.regions.empty() && events[j].region) {
          for (std::size_t r = 0; r < result.regions.size(); ++r)
            if (*events[j].region == result.regions[r]) region_hit[r] = 1;
        }
      }
      df.outcomes[h] = any ? 1 : 0;
      for (std::size_t r = 0; r < result.regions.size(); ++r)
        df.region_outcomes[h][r] = region_hit[r] ? 1 : 0;
    }

    // Any event inside the calendar day, for plot annotations.
    const double day_start = static_cast<double>(day - epoch_day);
    for (std::size_t j = next_event; j-- > 0;) {
      if (events[j].time < day_start) break;
      if (events[j].time < day_start + 1.0) {
        df.event_today = true;
        break;
      }
    }
    if (!df.event_today)
      for (std::size_t j = next_event; j < n_events; ++j) {
        if (events[j].time >= day_start + 1.0) break;
        if (events[j].time >= day_start) {
          df.event_today = true;
          break;
        }
      }

    result.days.push_back(std::move(df));
  }
  return result;
}

PointForecast forecast_at(const Catalog& catalog, const HmmParams& params,
                          double instant, const std::vector<double>& horizons,
                          const std::vector<int>& regions) {
  params.validate();
  if (params.has_regions()) require_fully_labeled(catalog);
  for (int v : regions)
    if (v < 1 || v > params.n_regions)
      fail(ErrorCode::invalid_argument, "requested region out of range");

  const auto& events = catalog.events;
  std::size_t t = 0;
  while (t < events.size() && events[t].time <= instant) ++t;
  if (t < 2)
    fail(ErrorCode::insufficient_data,
         "forecast instant is not preceded by at least 2 events");

  ForwardState fwd(params);
  for (std::size_t i = 1; i < t; ++i) {
    const auto reg = params.has_regions()
                         ? std::optional<int>(*events[i].region)
                         : std::nullopt;
    fwd.push(events[i].time - events[i - 1].time, reg);
  }
  const StateWeights post =
      post_event_weights_from_forward(params, fwd.row(), fwd.steps());

  PointForecast out;
  out.t = static_cast<long long>(t);
  out.w = instant - events[t - 1].time;
  const StateWeights sched = scheduled_weights(post, params, out.w);
  out.weights = sched.weights;
  out.probs.reserve(horizons.size());
  for (double N : horizons) {
    out.probs.push_back(forecast_probability(sched, params, {N, std::nullopt}));
    std::vector<double> per_region;
    per_region.reserve(regions.size());
    for (int v : regions)
      per_region.push_back(forecast_probability(sched, params, {N, v}));
    out.region_probs.push_back(std::move(per_region));
  }
  return out;
}

std::pair<GroupSummary, GroupSummary> summarize(const EvalResult& result,
                                                double horizon,
                                                std::optional<int> region) {
  std::vector<Sample> samples = collect(result, horizon, region);
  // Stable sort keeps the date order among equal forecasts.
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) {
                     return a.prob < b.prob;
                   });
  const std::size_t split =
      resolve_split(result.config.split_low_count, samples.size());
  return {summarize_group("low", samples, 0, split),
          summarize_group("high", samples, split, samples.size() - split)};
}

std::pair<std::size_t, std::size_t> binomial_central_interval(std::size_t n,
                                                              double p,
                                                              double level) {
  p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  const double tail = (1.0 - level) / 2.0;
  const double log_p = std::log(p);
  const double log_1p = std::log1p(-p);
  double log_pmf = static_cast<double>(n) * log_1p;  // k = 0
  double cdf = 0.0;
  std::size_t lo = 0, hi = n;
  bool lo_set = false;
  for (std::size_t k = 0; k <= n; ++k) {
    cdf += std::exp(log_pmf);
    if (!lo_set && cdf > tail) {
      lo = k;
      lo_set = true;
    }
    if (cdf >= 1.0 - tail) {
      hi = k;
      break;
    }
    if (k < n)
      log_pmf += std::log(static_cast<double>(n - k) /
                          static_cast<double>(k + 1)) +
                 log_p - log_1p;
  }
  return {lo, hi};
}

std::vector<ReliabilityBin> reliability(const EvalResult& result,
                                        double horizon, int n_bins,
                                        double level,
                                        std::optional<int> region) {
  if (n_bins < 1) fail(ErrorCode::invalid_argument, "n_bins must be >= 1");
  std::vector<Sample> samples = collect(result, horizon, region);
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) {
                     return a.prob < b.prob;
                   });
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(n_bins))
    fail(ErrorCode::insufficient_data, "fewer forecasts than bins");

  std::vector<ReliabilityBin> bins;
  bins.reserve(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    const std::size_t lo = n * b / n_bins;
    const std::size_t hi = n * (b + 1) / n_bins;
    ReliabilityBin bin;
    bin.count = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) {
      bin.mean_forecast += samples[i].prob;
      bin.observed_count += samples[i].hit;
    }
    bin.mean_forecast /= static_cast<double>(bin.count);
    bin.observed_proportion = static_cast<double>(bin.observed_count) /
                              static_cast<double>(bin.count);
    const auto [l, u] =
        binomial_central_interval(bin.count, bin.mean_forecast, level);
    bin.binom_lo = l;
    bin.binom_hi = u;
    bin.within = bin.observed_count >= l && bin.observed_count <= u;
    bins.push_back(bin);
  }
  return bins;
}

namespace {

std::string daily_csv(const EvalResult& result) {
  std::ostringstream out;
  out << "date,t,w";
  for (std::size_t h = 0; h < result.config.horizons.size(); ++h) {
    const std::string hs = format_horizon(result.config.horizons[h]);
    out << ",prob_" << hs << ",outcome_" << hs;
    for (int v : result.regions)
      out << ",prob_" << hs << "_r" << v << ",outcome_" << hs << "_r" << v;
  }
  out << ",event_today\n";
  auto outcome_str = [](int o) { return o < 0 ? std::string("NA")
                                               : std::to_string(o); };
  for (const DailyForecast& day : result.days) {
    out << format_date(day.date) << ',' << day.t << ',' << fmt("%.6f", day.w);
    for (std::size_t h = 0; h < result.config.horizons.size(); ++h) {
      out << ',' << fmt("%.9f", day.probs[h]) << ','
          << outcome_str(day.outcomes[h]);
      for (std::size_t r = 0; r < result.regions.size(); ++r)
        out << ',' << fmt("%.9f", day.region_probs[h][r]) << ','
            << outcome_str(day.region_outcomes[h][r]);
    }
    out << ',' << (day.event_today ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string sorted_csv(const EvalResult& result, double horizon,
                       std::optional<int> region) {
  std::vector<Sample> samples = collect(result, horizon, region);
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) {
                     return a.prob < b.prob;
                   });
  std::ostringstream out;
  out << "rank,probability\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    out << (i + 1) << ',' << fmt("%.9f", samples[i].prob) << "\n";
  return out.str();
}

std::string summary_csv(const std::pair<GroupSummary, GroupSummary>& s) {
  std::ostringstream out;
  out << "group,range_lo,range_hi,count,mean,median,q1,q3,observed_count,"
         "observed_proportion\n";
  for (const GroupSummary* g : {&s.first, &s.second}) {
    out << g->group << ',' << fmt("%.9f", g->range_lo) << ','
        << fmt("%.9f", g->range_hi) << ',' << g->count << ','
        << fmt("%.9f", g->mean) << ',' << fmt("%.9f", g->median) << ','
        << fmt("%.9f", g->q1) << ',' << fmt("%.9f", g->q3) << ','
        << g->observed_count << ',' << fmt("%.9f", g->observed_proportion)
        << "\n";
  }
  return out.str();
}

std::string reliability_csv(const std::vector<ReliabilityBin>& bins) {
  std::ostringstream out;
  out << "bin,count,mean_forecast,observed_count,observed_proportion,"
         "binom_lo,binom_hi,within\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const ReliabilityBin& bin = bins[b];
    out << (b + 1) << ',' << bin.count << ',' << fmt("%.9f", bin.mean_forecast)
        << ',' << bin.observed_count << ','
        << fmt("%.9f", bin.observed_proportion) << ',' << bin.binom_lo << ','
        << bin.binom_hi << ',' << (bin.within ? 1 : 0) << "\n";
  }
  return out.str();
}

void text_table(std::ostringstream& out, const std::string& title,
                const std::pair<GroupSummary, GroupSummary>& s) {
  out << title << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-5s %-18s %7s %8s %8s %9s %11s\n",
                "group", "range", "number", "mean", "median", "observed",
                "proportion");
  out << line;
  for (const GroupSummary* g : {&s.first, &s.second}) {
    char range[40];
    std::snprintf(range, sizeof range, "(%.4f,%.4f)", g->range_lo,
                  g->range_hi);
    std::snprintf(line, sizeof line, "%-5s %-18s %7zu %8.4f %8.4f %9zu %11.4f\n",
                  g->group.c_str(), range, g->count, g->mean, g->median,
                  g->observed_count, g->observed_proportion);
    out << line;
  }
  out << "\n";
}

}  // namespace

std::vector<std::string> write_eval_outputs(const EvalResult& result,
                                            const std::string& dir) {
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file_atomic(dir + "/" + name, content);
    files.push_back(name);
  };

  emit("daily_forecasts.csv", daily_csv(result));

  std::ostringstream tables;
  for (double h : result.config.horizons) {
    const std::string hs = format_horizon(h);
    const auto total = summarize(result, h);
    emit("summary_h" + hs + ".csv", summary_csv(total));
    emit("sorted_h" + hs + ".csv", sorted_csv(result, h, std::nullopt));
    emit("reliability_h" + hs + ".csv",
         reliability_csv(reliability(result, h)));
    text_table(tables, hs + "-day forecasts, whole region", total);
    for (int v : result.regions) {
      const auto per_region = summarize(result, h, v);
      emit("summary_h" + hs + "_r" + std::to_string(v) + ".csv",
           summary_csv(per_region));
      emit("sorted_h" + hs + "_r" + std::to_string(v) + ".csv",
           sorted_csv(result, h, v));
      text_table(tables,
                 hs + "-day forecasts, region " + std::to_string(v),
                 per_region);
    }
  }
  emit("tables.txt", tables.str());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace eqhmm
