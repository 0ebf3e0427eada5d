#include "core/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace eqhmm {

namespace {

constexpr double kDeadStateMass = 1e-300;

void renormalize_row(std::vector<double>& v, std::size_t offset,
                     std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += v[offset + i];
  if (!(sum > 0.0))
    fail(ErrorCode::degenerate_state, "probability row collapsed to zero");
  for (std::size_t i = 0; i < n; ++i) v[offset + i] /= sum;
}

int infer_n_regions(const ObservationSequence& obs) {
  int r = 0;
  for (int v : obs.regions) r = std::max(r, v);
  return r;
}

std::vector<double> uniform_rows(int rows, int cols) {
  return std::vector<double>(static_cast<std::size_t>(rows) * cols,
                             1.0 / cols);
}

/// Region-affinity initialization: state blocks favor one region so EM can
/// break the label symmetry between otherwise identical starts.
std::vector<double> default_region_init(int n_states, int n_regions) {
  std::vector<double> q(static_cast<std::size_t>(n_states) * n_regions);
  const int block = std::max(1, n_states / n_regions);
  for (int s = 0; s < n_states; ++s) {
    const int favored = std::min(s / block, n_regions - 1);
    for (int v = 0; v < n_regions; ++v)
      q[s * n_regions + v] =
          v == favored
              ? 0.75
              : (n_regions > 1 ? 0.25 / (n_regions - 1) : 1.0);
  }
  if (n_regions == 1)
    std::fill(q.begin(), q.end(), 1.0);
  return q;
}

struct StartState {
  HmmParams params;
  std::vector<double> trace;
  int iterations = 0;
};

/// Runs one EM step and reports the likelihood of the incoming parameters
/// (computed by the same pass), plus the largest change over lambda and
/// transition entries.
HmmParams step_with_stats(const HmmParams& params,
                          const ObservationSequence& obs, double min_lambda,
                          double* log_likelihood_before, double* max_change) {
  const Trellis trellis = forward_backward(params, obs);
  const Posteriors post = posteriors(params, obs, trellis);
  if (log_likelihood_before) *log_likelihood_before = trellis.log_likelihood;

  const int n = params.n_states;
  const std::size_t len = obs.length();
  HmmParams next = params;

  // gamma mass over t = 1..L-1 (transition denominators) and over all t.
  std::vector<double> mass_head(n, 0.0), mass_all(n, 0.0), weighted(n, 0.0);
  for (std::size_t t = 0; t < len; ++t)
    for (int s = 0; s < n; ++s) {
      const double g = post.g(t, s);
      mass_all[s] += g;
      if (t + 1 < len) mass_head[s] += g;
      weighted[s] += g * obs.interevent_times[t];
    }
  for (int s = 0; s < n; ++s)
    if (mass_all[s] < kDeadStateMass ||
        (len > 1 && mass_head[s] < kDeadStateMass))
      fail(ErrorCode::degenerate_state,
           "state " + std::to_string(s + 1) + " lost all posterior mass");

  if (len > 1) {
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (std::size_t t = 0; t + 1 < len; ++t) acc += post.e(t, r, s);
        next.a(r, s) = acc / mass_head[r];
      }
    for (int r = 0; r < n; ++r)
      renormalize_row(next.trans, static_cast<std::size_t>(r) * n, n);
  }

  for (int s = 0; s < n; ++s) next.pi[s] = post.g(0, s);
  renormalize_row(next.pi, 0, n);

  for (int s = 0; s < n; ++s)
    next.lambda[s] = std::max(weighted[s] / mass_all[s], min_lambda);

  if (params.has_regions()) {
    const int R = params.n_regions;
    std::fill(next.region_dist.begin(), next.region_dist.end(), 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      const int v = obs.regions[t];
      for (int s = 0; s < n; ++s)
        next.region_dist[s * R + (v - 1)] += post.g(t, s);
    }
    for (int s = 0; s < n; ++s)
      renormalize_row(next.region_dist, static_cast<std::size_t>(s) * R, R);
  }

  if (max_change) {
    double change = 0.0;
    for (int s = 0; s < n; ++s)
      change = std::max(change, std::abs(next.lambda[s] - params.lambda[s]));
    for (std::size_t i = 0; i < next.trans.size(); ++i)
      change = std::max(change, std::abs(next.trans[i] - params.trans[i]));
    *max_change = change;
  }
  return next;
}

}  // namespace

void FitConfig::validate() const {
  if (init_grid.empty())
    fail(ErrorCode::invalid_argument, "init_grid must have at least one start");
  if (coarse_iters < 1)
    fail(ErrorCode::invalid_argument, "coarse_iters must be >= 1");
  if (!(param_tol > 0.0))
    fail(ErrorCode::invalid_argument, "param_tol must be positive");
  if (max_iters < coarse_iters)
    fail(ErrorCode::invalid_argument, "max_iters must be >= coarse_iters");
  if (!(min_lambda > 0.0))
    fail(ErrorCode::invalid_argument, "min_lambda must be positive");
}

HmmParams baum_welch_step(const HmmParams& params,
                          const ObservationSequence& obs, double min_lambda) {
  if (obs.length() < 2)
    fail(ErrorCode::insufficient_data,
         "Baum-Welch needs at least 2 observations");
  return step_with_stats(params, obs, min_lambda, nullptr, nullptr);
}

FitResult fit(const ObservationSequence& obs, int n_states,
              const FitConfig& config) {
  config.validate();
  obs.validate();
  if (obs.length() < static_cast<std::size_t>(n_states))
    fail(ErrorCode::insufficient_data,
         "fewer observations than states");
  const int n_regions = obs.has_regions() ? infer_n_regions(obs) : 0;

  auto make_start = [&](const std::vector<double>& lambdas) {
    if (static_cast<int>(lambdas.size()) != n_states)
      fail(ErrorCode::invalid_argument,
           "grid start length does not match n_states");
    HmmParams p;
    p.n_states = n_states;
    p.lambda = lambdas;
    p.pi = config.init_pi.empty() ? uniform_rows(1, n_states) : config.init_pi;
    p.trans = config.init_trans.empty() ? uniform_rows(n_states, n_states)
                                        : config.init_trans;
    p.n_regions = n_regions;
    if (n_regions > 0)
      p.region_dist = config.init_region_dist.empty()
                          ? default_region_init(n_states, n_regions)
                          : config.init_region_dist;
    p.validate();
    return p;
  };

  // Coarse phase: every start runs the same fixed number of updates.
  std::optional<StartState> best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const auto& lambdas : config.init_grid) {
    StartState st;
    st.params = make_start(lambdas);
    bool dead = false;
    for (int it = 0; it < config.coarse_iters; ++it) {
      double ll = 0.0;
      try {
        st.params = step_with_stats(st.params, obs, config.min_lambda, &ll,
                                    nullptr);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_state &&
            e.code() != ErrorCode::impossible_observation)
          throw;
        dead = true;
        break;
      }
      st.trace.push_back(ll);
      ++st.iterations;
    }
    if (dead) continue;
    const double ll = forward_backward(st.params, obs).log_likelihood;
    if (ll > best_ll) {
      best_ll = ll;
      best = std::move(st);
    }
  }
  if (!best)
    fail(ErrorCode::fit_failure,
         "every grid start produced a degenerate state");

  // Fine phase: iterate the winner until the parameter-change criterion.
  FitResult result;
  StartState st = std::move(*best);
  bool converged = false;
  while (st.iterations < config.max_iters) {
    double ll = 0.0, change = 0.0;
    st.params = step_with_stats(st.params, obs, config.min_lambda, &ll, &change);
    st.trace.push_back(ll);
    ++st.iterations;
    if (change < config.param_tol) {
      converged = true;
      break;
    }
  }

  result.params = std::move(st.params);
  result.log_likelihood = forward_backward(result.params, obs).log_likelihood;
  result.iterations = st.iterations;
  result.converged = converged;
  result.trace = std::move(st.trace);
  result.trace.push_back(result.log_likelihood);
  return result;
}

FitConfig default_fit_config(int n_states, int n_regions,
                             const std::optional<std::vector<double>>&
                                 two_state_best) {
  if (n_states < 1)
    fail(ErrorCode::invalid_argument, "n_states must be positive");
  FitConfig config;
  if (n_states == 2) {
    for (double i : {1.0, 4.0, 7.0, 10.0})
      for (double j : {10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0})
        config.init_grid.push_back({i, j});
  } else if (n_states == 4 && n_regions > 0) {
    for (double i : {1.0, 4.0, 7.0, 10.0})
      for (double j : {10.0, 30.0, 50.0, 70.0})
        config.init_grid.push_back({i, j, i, j});
    if (two_state_best && two_state_best->size() == 2)
      config.init_grid.push_back({(*two_state_best)[0], (*two_state_best)[1],
                                  (*two_state_best)[0], (*two_state_best)[1]});
  } else {
    // Generic fallback: one start, log-spaced means between 1 and 70 days.
    std::vector<double> lambdas(n_states);
    for (int s = 0; s < n_states; ++s)
      lambdas[s] = n_states == 1
                       ? 10.0
                       : std::exp(std::log(1.0) + (std::log(70.0) - std::log(1.0)) *
                                                      s / (n_states - 1.0));
    config.init_grid.push_back(lambdas);
  }
  return config;
}

HmmParams sort_states(const HmmParams& params) {
  params.validate();
  const int n = params.n_states;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto dominant_region = [&](int s) {
    if (!params.has_regions()) return 0;
    int best = 0;
    for (int v = 1; v < params.n_regions; ++v)
      if (params.region_dist[s * params.n_regions + v] >
          params.region_dist[s * params.n_regions + best])
        best = v;
    return best;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const int ra = dominant_region(a), rb = dominant_region(b);
    if (ra != rb) return ra < rb;
    return params.lambda[a] < params.lambda[b];
  });

  HmmParams out = params;
  for (int i = 0; i < n; ++i) {
    out.pi[i] = params.pi[order[i]];
    out.lambda[i] = params.lambda[order[i]];
    for (int j = 0; j < n; ++j)
      out.trans[i * n + j] = params.trans[order[i] * n + order[j]];
    for (int v = 0; v < params.n_regions; ++v)
      out.region_dist[i * params.n_regions + v] =
          params.region_dist[order[i] * params.n_regions + v];
  }
  return out;
}

FitResult fit_default(const ObservationSequence& obs, int n_states) {
  const int n_regions = obs.has_regions() ? infer_n_regions(obs) : 0;
  if (n_states == 4 && n_regions > 0) {
    ObservationSequence times_only;
    times_only.interevent_times = obs.interevent_times;
    const FitResult pre = fit(times_only, 2, default_fit_config(2));
    const HmmParams sorted = sort_states(pre.params);
    return fit(obs, 4, default_fit_config(4, n_regions, sorted.lambda));
  }
  return fit(obs, n_states, default_fit_config(n_states, n_regions));
}

}  // namespace eqhmm
