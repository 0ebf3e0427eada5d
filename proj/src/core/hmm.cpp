#include "core/hmm.hpp"

#include <cmath>
#include <string>

namespace eqhmm {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_prob_row(const std::vector<double>& v, std::size_t offset,
                    std::size_t n, const char* what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = v[offset + i];
    if (!(p >= 0.0) || !std::isfinite(p))
      fail(ErrorCode::invalid_argument,
           std::string(what) + " has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTol)
    fail(ErrorCode::invalid_argument,
         std::string(what) + " does not sum to 1");
}

}  // namespace

void HmmParams::validate() const {
  const std::size_t s = static_cast<std::size_t>(n_states);
  if (n_states <= 0) fail(ErrorCode::invalid_argument, "n_states must be positive");
  if (pi.size() != s || lambda.size() != s || trans.size() != s * s)
    fail(ErrorCode::invalid_argument, "parameter vector shapes do not match n_states");
  check_prob_row(pi, 0, s, "pi");
  for (int r = 0; r < n_states; ++r)
    check_prob_row(trans, static_cast<std::size_t>(r) * s, s, "transition row");
  for (double l : lambda)
    if (!(l > 0.0) || !std::isfinite(l))
      fail(ErrorCode::invalid_argument, "lambda must be positive and finite");
  if (n_regions < 0)
    fail(ErrorCode::invalid_argument, "n_regions must be non-negative");
  if (n_regions == 0) {
    if (!region_dist.empty())
      fail(ErrorCode::invalid_argument, "region_dist present but n_regions == 0");
  } else {
    if (region_dist.size() != s * static_cast<std::size_t>(n_regions))
      fail(ErrorCode::invalid_argument, "region_dist shape does not match");
    for (int r = 0; r < n_states; ++r)
      check_prob_row(region_dist, static_cast<std::size_t>(r) * n_regions,
                     n_regions, "region_dist row");
  }
}

double emission_density(const HmmParams& params, int state, double obs,
                        std::optional<int> region) {
  if (!(obs >= 0.0))
    fail(ErrorCode::invalid_argument, "interevent time must be non-negative");
  if (region.has_value() != params.has_regions())
    fail(ErrorCode::invalid_argument,
         params.has_regions() ? "region label required by the joint model"
                              : "region label given to a time-only model");
  const double lam = params.lambda[state];
  double density = std::exp(-obs / lam) / lam;
  if (region) {
    if (*region < 1 || *region > params.n_regions)
      fail(ErrorCode::invalid_argument, "region label out of range");
    density *= params.q(state, *region);
  }
  return density;
}

ForwardState::ForwardState(const HmmParams& params)
    : params_(&params),
      row_(static_cast<std::size_t>(params.n_states), 0.0),
      scratch_(row_.size(), 0.0) {}

void ForwardState::push(double obs, std::optional<int> region) {
  const int n = params_->n_states;
  double norm = 0.0;
  if (steps_ == 0) {
    for (int s = 0; s < n; ++s) {
      scratch_[s] = params_->pi[s] * emission_density(*params_, s, obs, region);
      norm += scratch_[s];
    }
  } else {
    for (int s = 0; s < n; ++s) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r) acc += row_[r] * params_->a(r, s);
      scratch_[s] = acc * emission_density(*params_, s, obs, region);
      norm += scratch_[s];
    }
  }
  if (!(norm > 0.0))
    fail(ErrorCode::impossible_observation,
         "zero emission density in every state at step " +
             std::to_string(steps_ + 1));
  for (int s = 0; s < n; ++s) row_[s] = scratch_[s] / norm;
  last_normalizer_ = norm;
  log_likelihood_ += std::log(norm);
  ++steps_;
}

Trellis forward_backward(const HmmParams& params,
                         const ObservationSequence& obs) {
  params.validate();
  obs.validate();
  const std::size_t len = obs.length();
  if (len == 0) fail(ErrorCode::insufficient_data, "empty observation sequence");
  if (obs.has_regions() != params.has_regions())
    fail(ErrorCode::invalid_argument,
         "observation regions and model region_dist must match");

  const int n = params.n_states;
  Trellis trellis;
  trellis.length = len;
  trellis.n_states = n;
  trellis.scaled_forward.resize(len * n);
  trellis.scaled_backward.assign(len * n, 1.0);
  trellis.normalizers.resize(len);

  auto region_at = [&](std::size_t t) -> std::optional<int> {
    if (!obs.has_regions()) return std::nullopt;
    return obs.regions[t];
  };

  ForwardState fwd(params);
  for (std::size_t t = 0; t < len; ++t) {
    fwd.push(obs.interevent_times[t], region_at(t));
    trellis.normalizers[t] = fwd.last_normalizer();
    for (int s = 0; s < n; ++s)
      trellis.scaled_forward[t * n + s] = fwd.row()[s];
  }
  trellis.log_likelihood = fwd.log_likelihood();

  // Backward recursion under the same normalizers: with b_s(L) = 1 and
  // scaled_backward[t] = b(t) / prod(normalizers[t+1..L-1]), each step
  // divides by the normalizer of the observation it consumes.
  std::vector<double> density(n);
  for (std::size_t t = len - 1; t-- > 0;) {
    const double y = obs.interevent_times[t + 1];
    const auto reg = region_at(t + 1);
    for (int s = 0; s < n; ++s)
      density[s] = emission_density(params, s, y, reg);
    const double c = trellis.normalizers[t + 1];
    for (int s = 0; s < n; ++s) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r)
        acc += params.a(s, r) * density[r] * trellis.scaled_backward[(t + 1) * n + r];
      trellis.scaled_backward[t * n + s] = acc / c;
    }
  }
  return trellis;
}

Posteriors posteriors(const HmmParams& params, const ObservationSequence& obs,
                      const Trellis& trellis) {
  const std::size_t len = trellis.length;
  const int n = trellis.n_states;
  Posteriors post;
  post.length = len;
  post.n_states = n;
  post.gamma.resize(len * n);
  if (len > 0) post.eta.resize((len - 1) * n * n);

  // gamma[t][s] = scaled_forward * scaled_backward: the scale factors of the
  // two recursions multiply to exactly P(O), so no renormalization is needed.
  for (std::size_t t = 0; t < len; ++t)
    for (int s = 0; s < n; ++s)
      post.gamma[t * n + s] = trellis.forward(t, s) * trellis.backward(t, s);

  std::vector<double> density(n);
  for (std::size_t t = 0; t + 1 < len; ++t) {
    const double y = obs.interevent_times[t + 1];
    const auto reg = obs.has_regions() ? std::optional<int>(obs.regions[t + 1])
                                       : std::nullopt;
    for (int s = 0; s < n; ++s)
      density[s] = emission_density(params, s, y, reg);
    const double c = trellis.normalizers[t + 1];
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        post.eta[(t * n + r) * n + s] = trellis.forward(t, r) * params.a(r, s) *
                                        density[s] *
                                        trellis.backward(t + 1, s) / c;
  }
  return post;
}

}  // namespace eqhmm
