#ifndef EQHMM_CORE_FORECAST_HPP
#define EQHMM_CORE_FORECAST_HPP

#include <optional>
#include <vector>

#include "core/hmm.hpp"

namespace eqhmm {

/// Mixture weights over the state at the next event, given the history and
/// (for scheduled forecasts) the elapsed time since the last event.
struct StateWeights {
  std::vector<double> weights;
  double elapsed = 0.0;         // days since the most recent event
  std::size_t history_len = 0;  // observations behind the weights
};

struct ForecastQuery {
  double horizon_days = 1.0;
  std::optional<int> region;
};

/// Next-state weights immediately after an event: w[s] = sum_r a_rs fhat_r,
/// with fhat the normalized forward row over the history.
StateWeights post_event_weights(const HmmParams& params,
                                const ObservationSequence& obs);

/// Same, starting from an already computed normalized forward row.
StateWeights post_event_weights_from_forward(const HmmParams& params,
                                             const std::vector<double>& forward_row,
                                             std::size_t history_len);

/// Survival reweighting for a forecast issued elapsed days after the last
/// event: w[s] proportional to base[s] * exp(-elapsed/lambda_s). Computed in
/// log space with max subtraction, so any finite elapsed time is safe.
/// elapsed == 0 returns the base weights unchanged.
StateWeights scheduled_weights(const StateWeights& base,
                               const HmmParams& params, double elapsed);

/// Probability of an event within the horizon: sum_s w_s (1 - e^{-N/lambda_s}),
/// times q_s(region) for region-resolved queries against the joint model.
/// Omitting the region on a joint model gives the marginal over regions.
double forecast_probability(const StateWeights& weights,
                            const HmmParams& params,
                            const ForecastQuery& query);

/// Mixture density of the waiting time until the next event at y days.
double forecast_density(const StateWeights& weights, const HmmParams& params,
                        double y, std::optional<int> region = std::nullopt);

struct WaitingTimeMoments {
  double mean = 0.0;      // sum_s w_s lambda_s
  double variance = 0.0;  // 2 sum_s w_s lambda_s^2 - mean^2
  /// Half of the mixture's second moment, sum_s w_s lambda_s^2. Sometimes
  /// quoted as the waiting-time variance, which it equals only for
  /// degenerate weights; reported alongside, never used downstream.
  double half_second_moment = 0.0;
};

WaitingTimeMoments waiting_time_moments(const StateWeights& weights,
                                        const HmmParams& params);

/// Expected remaining wait as a function of elapsed time. Strictly
/// increasing whenever the lambdas are distinct and at least two weights are
/// positive; constant when all lambdas coincide.
std::vector<std::pair<double, double>> expected_wait_curve(
    const StateWeights& base, const HmmParams& params,
    const std::vector<double>& elapsed_grid);

}  // namespace eqhmm

#endif
