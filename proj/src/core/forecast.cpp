#include "core/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqhmm {

namespace {

constexpr double kWeightSumTol = 1e-10;

void check_and_normalize(std::vector<double>& w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  if (std::abs(sum - 1.0) > kWeightSumTol)
    fail(ErrorCode::numeric, "state weights failed to normalize");
  for (double& v : w) v /= sum;
}

void require_region_consistency(const HmmParams& params,
                                const std::optional<int>& region) {
  if (region && !params.has_regions())
    fail(ErrorCode::invalid_argument,
         "region requested from a time-only model");
  if (region && (*region < 1 || *region > params.n_regions))
    fail(ErrorCode::invalid_argument, "region label out of range");
}

}  // namespace

StateWeights post_event_weights_from_forward(
    const HmmParams& params, const std::vector<double>& forward_row,
    std::size_t history_len) {
  const int n = params.n_states;
  StateWeights out;
  out.weights.assign(n, 0.0);
  out.elapsed = 0.0;
  out.history_len = history_len;
  for (int s = 0; s < n; ++s)
    for (int r = 0; r < n; ++r)
      out.weights[s] += params.a(r, s) * forward_row[r];
  check_and_normalize(out.weights);
  return out;
}

StateWeights post_event_weights(const HmmParams& params,
                                const ObservationSequence& obs) {
  if (obs.length() < 1)
    fail(ErrorCode::insufficient_data,
         "post-event weights need at least one observation");
  const Trellis trellis = forward_backward(params, obs);
  std::vector<double> last(params.n_states);
  for (int s = 0; s < params.n_states; ++s)
    last[s] = trellis.forward(trellis.length - 1, s);
  return post_event_weights_from_forward(params, last, obs.length());
}

StateWeights scheduled_weights(const StateWeights& base,
                               const HmmParams& params, double elapsed) {
  if (!(elapsed >= 0.0))
    fail(ErrorCode::invalid_argument, "elapsed time must be non-negative");
  if (elapsed == 0.0) {
    StateWeights out = base;
    out.elapsed = 0.0;
    return out;
  }
  const int n = params.n_states;
  std::vector<double> logw(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n; ++s) {
    logw[s] = std::log(base.weights[s]) - elapsed / params.lambda[s];
    max_log = std::max(max_log, logw[s]);
  }
  if (!std::isfinite(max_log))
    fail(ErrorCode::numeric, "scheduled weights degenerate (no positive base weight)");
  StateWeights out;
  out.weights.assign(n, 0.0);
  out.elapsed = elapsed;
  out.history_len = base.history_len;
  double sum = 0.0;
  for (int s = 0; s < n; ++s) {
    out.weights[s] = std::exp(logw[s] - max_log);
    sum += out.weights[s];
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

double forecast_probability(const StateWeights& weights,
                            const HmmParams& params,
                            const ForecastQuery& query) {
  if (!(query.horizon_days > 0.0))
    fail(ErrorCode::invalid_argument, "forecast horizon must be positive");
  require_region_consistency(params, query.region);
  double prob = 0.0;
  for (int s = 0; s < params.n_states; ++s) {
    double term =
        weights.weights[s] * -std::expm1(-query.horizon_days / params.lambda[s]);
    if (query.region) term *= params.q(s, *query.region);
    prob += term;
  }
  return prob;
}

double forecast_density(const StateWeights& weights, const HmmParams& params,
                        double y, std::optional<int> region) {
  if (!(y >= 0.0))
    fail(ErrorCode::invalid_argument, "waiting time must be non-negative");
  require_region_consistency(params, region);
  double density = 0.0;
  for (int s = 0; s < params.n_states; ++s) {
    const double lam = params.lambda[s];
    double term = weights.weights[s] * std::exp(-y / lam) / lam;
    if (region) term *= params.q(s, *region);
    density += term;
  }
  return density;
}

WaitingTimeMoments waiting_time_moments(const StateWeights& weights,
                                        const HmmParams& params) {
  WaitingTimeMoments m;
  double second = 0.0;
  for (int s = 0; s < params.n_states; ++s) {
    const double w = weights.weights[s];
    const double lam = params.lambda[s];
    m.mean += w * lam;
    second += w * lam * lam;
  }
  m.half_second_moment = second;
  m.variance = 2.0 * second - m.mean * m.mean;
  return m;
}

std::vector<std::pair<double, double>> expected_wait_curve(
    const StateWeights& base, const HmmParams& params,
    const std::vector<double>& elapsed_grid) {
  std::vector<std::pair<double, double>> curve;
  curve.reserve(elapsed_grid.size());
  for (double w : elapsed_grid) {
    const StateWeights d = scheduled_weights(base, params, w);
    curve.emplace_back(w, waiting_time_moments(d, params).mean);
  }
  return curve;
}

}  // namespace eqhmm
