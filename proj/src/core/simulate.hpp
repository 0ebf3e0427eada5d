#ifndef EQHMM_CORE_SIMULATE_HPP
#define EQHMM_CORE_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "core/catalog.hpp"
#include "core/hmm.hpp"

namespace eqhmm {

struct SimConfig {
  HmmParams params;
  int n_events = 0;
  std::uint64_t seed = 0;
  double start_time = 0.0;        // time of the first event, days
  Date epoch{2000, 1, 1};         // calendar date of time 0.0
};

struct SimResult {
  Catalog catalog;
  std::vector<int> state_path;  // 0-based state index per event
};

/// Draws a synthetic catalog: X1 ~ pi, X_{t+1} ~ A row, interevent gaps
/// Exponential(lambda_{X}) by inverse CDF, regions ~ q_X when present.
/// Deterministic given the seed; states, gaps and regions each consume an
/// independent SplitMix64 substream.
SimResult simulate(const SimConfig& config);

/// log P(O) by explicit summation over all |S|^L state paths (Eq.-6 quantity
/// computed the slow way; the oracle for the scaled forward recursion).
/// Throws when |S|^L > 1e7. Returns -inf for an impossible sequence.
double enumerate_likelihood(const HmmParams& params,
                            const ObservationSequence& obs);

/// P(X_{t+1} = s | y_1..y_t, Y_{t+1} >= elapsed) by path enumeration,
/// conditioning through the per-state survival factor exp(-elapsed/lambda_s).
std::vector<double> enumerate_next_state_posterior(
    const HmmParams& params, const ObservationSequence& obs, double elapsed);

}  // namespace eqhmm

#endif
