#include "core/simulate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/rng.hpp"

namespace eqhmm {

namespace {

constexpr std::uint64_t kStateStream = 1;
constexpr std::uint64_t kTimeStream = 2;
constexpr std::uint64_t kRegionStream = 3;

int sample_index(const double* probs, int n, double u) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;  // guard against acc rounding below 1
}

double checked_path_count(int n_states, std::size_t exponent) {
  double paths = 1.0;
  for (std::size_t i = 0; i < exponent; ++i) paths *= n_states;
  if (paths > 1e7)
    fail(ErrorCode::invalid_argument,
         "path enumeration would need " + std::to_string(paths) + " paths");
  return paths;
}

}  // namespace

SimResult simulate(const SimConfig& config) {
  config.params.validate();
  if (config.n_events < 1)
    fail(ErrorCode::invalid_argument, "n_events must be >= 1");

  const HmmParams& p = config.params;
  const int n = p.n_states;
  SplitMix64 state_rng(substream_seed(config.seed, kStateStream));
  SplitMix64 time_rng(substream_seed(config.seed, kTimeStream));
  SplitMix64 region_rng(substream_seed(config.seed, kRegionStream));

  SimResult out;
  out.catalog.epoch = config.epoch;
  out.catalog.events.reserve(config.n_events);
  out.state_path.reserve(config.n_events);

  // Event 0 anchors the series at start_time; event t (t >= 1) is emitted by
  // chain state X_t: gap ~ Exp(lambda_{X_t}), region ~ q_{X_t}. The anchor is
  // tagged with the initial regime X_1.
  double time = config.start_time;
  int state = sample_index(p.pi.data(), n, state_rng.next_double());
  for (int i = 0; i < config.n_events; ++i) {
    if (i > 1)
      state = sample_index(&p.trans[state * n], n, state_rng.next_double());
    if (i > 0)
      time += -p.lambda[state] * std::log(time_rng.next_double_open());
    Event ev;
    ev.time = time;
    ev.magnitude = 4.0;
    if (p.has_regions())
      ev.region = 1 + sample_index(&p.region_dist[state * p.n_regions],
                                   p.n_regions, region_rng.next_double());
    out.catalog.events.push_back(ev);
    out.state_path.push_back(state);
  }
  return out;
}

double enumerate_likelihood(const HmmParams& params,
                            const ObservationSequence& obs) {
  params.validate();
  obs.validate();
  const std::size_t len = obs.length();
  if (len == 0) fail(ErrorCode::insufficient_data, "empty observation sequence");
  if (obs.has_regions() != params.has_regions())
    fail(ErrorCode::invalid_argument,
         "observation regions and model region_dist must match");
  const int n = params.n_states;
  checked_path_count(n, len);

  // Paths are counted in base-|S|; digit t is the state at time t+1.
  std::size_t n_paths = 1;
  for (std::size_t i = 0; i < len; ++i) n_paths *= n;

  auto density = [&](int s, std::size_t t) {
    const auto reg = obs.has_regions() ? std::optional<int>(obs.regions[t])
                                       : std::nullopt;
    return emission_density(params, s, obs.interevent_times[t], reg);
  };

  double total = 0.0;
  std::vector<int> path(len);
  for (std::size_t code = 0; code < n_paths; ++code) {
    std::size_t rest = code;
    for (std::size_t t = 0; t < len; ++t) {
      path[t] = static_cast<int>(rest % n);
      rest /= n;
    }
    double w = params.pi[path[0]] * density(path[0], 0);
    for (std::size_t t = 1; t < len && w > 0.0; ++t)
      w *= params.a(path[t - 1], path[t]) * density(path[t], t);
    total += w;
  }
  if (total <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(total);
}

std::vector<double> enumerate_next_state_posterior(
    const HmmParams& params, const ObservationSequence& obs, double elapsed) {
  params.validate();
  obs.validate();
  if (!(elapsed >= 0.0))
    fail(ErrorCode::invalid_argument, "elapsed time must be non-negative");
  const std::size_t len = obs.length();
  if (len == 0) fail(ErrorCode::insufficient_data, "empty observation sequence");
  const int n = params.n_states;
  checked_path_count(n, len + 1);

  std::size_t n_paths = 1;
  for (std::size_t i = 0; i < len; ++i) n_paths *= n;

  auto density = [&](int s, std::size_t t) {
    const auto reg = obs.has_regions() ? std::optional<int>(obs.regions[t])
                                       : std::nullopt;
    return emission_density(params, s, obs.interevent_times[t], reg);
  };

  // weight[s] = sum over paths of P(path, O) * a(last, s); the survival
  // factor for Y_{t+1} >= elapsed multiplies per target state afterwards.
  std::vector<double> weight(n, 0.0);
  std::vector<int> path(len);
  for (std::size_t code = 0; code < n_paths; ++code) {
    std::size_t rest = code;
    for (std::size_t t = 0; t < len; ++t) {
      path[t] = static_cast<int>(rest % n);
      rest /= n;
    }
    double w = params.pi[path[0]] * density(path[0], 0);
    for (std::size_t t = 1; t < len && w > 0.0; ++t)
      w *= params.a(path[t - 1], path[t]) * density(path[t], t);
    if (w <= 0.0) continue;
    for (int s = 0; s < n; ++s) weight[s] += w * params.a(path.back(), s);
  }

  double total = 0.0;
  for (int s = 0; s < n; ++s) {
    weight[s] *= std::exp(-elapsed / params.lambda[s]);
    total += weight[s];
  }
  if (!(total > 0.0))
    fail(ErrorCode::impossible_observation,
         "posterior enumeration found zero total probability");
  for (double& w : weight) w /= total;
  return weight;
}

}  // namespace eqhmm
