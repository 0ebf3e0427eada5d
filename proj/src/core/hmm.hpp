#ifndef EQHMM_CORE_HMM_HPP
#define EQHMM_CORE_HMM_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "core/observations.hpp"

namespace eqhmm {

/// Hidden Markov model with state-specific exponential interevent-time
/// distributions and, optionally, per-state categorical region
/// distributions (the joint time-and-location emission model).
struct HmmParams {
  int n_states = 0;
  std::vector<double> pi;           // length S
  std::vector<double> trans;        // S x S, row-major
  std::vector<double> lambda;       // per-state exponential mean, days
  int n_regions = 0;                // R; 0 for the time-only model
  std::vector<double> region_dist;  // S x R, row-major; empty iff R == 0

  bool has_regions() const { return n_regions > 0; }

  double a(int r, int s) const { return trans[r * n_states + s]; }
  double& a(int r, int s) { return trans[r * n_states + s]; }

  /// Probability of region label v in {1..R} given state s.
  double q(int s, int v) const { return region_dist[s * n_regions + (v - 1)]; }
  double& q(int s, int v) { return region_dist[s * n_regions + (v - 1)]; }

  /// Checks shapes, non-negativity, row sums within 1e-12, lambda > 0.
  void validate() const;
};

/// Scaled forward/backward variables. Each scaled_forward row sums to 1;
/// the per-step normalizers recover the likelihood as
/// log_likelihood == sum(log(normalizers)).
struct Trellis {
  std::size_t length = 0;
  int n_states = 0;
  std::vector<double> scaled_forward;   // L x S, row-major
  std::vector<double> scaled_backward;  // L x S, row-major
  std::vector<double> normalizers;      // length L
  double log_likelihood = 0.0;

  double forward(std::size_t t, int s) const {
    return scaled_forward[t * n_states + s];
  }
  double backward(std::size_t t, int s) const {
    return scaled_backward[t * n_states + s];
  }
};

/// State posteriors given all observations: gamma[t][s] = P(X_t = s | O)
/// and eta[t][r][s] = P(X_t = r, X_{t+1} = s | O).
struct Posteriors {
  std::size_t length = 0;
  int n_states = 0;
  std::vector<double> gamma;  // L x S
  std::vector<double> eta;    // (L-1) x S x S

  double g(std::size_t t, int s) const { return gamma[t * n_states + s]; }
  double e(std::size_t t, int r, int s) const {
    return eta[(t * n_states + r) * n_states + s];
  }
};

/// Emission density: (1/lambda_s) exp(-obs/lambda_s), times q_s(region)
/// for the joint model. Densities may exceed 1; obs == 0 is legal.
double emission_density(const HmmParams& params, int state, double obs,
                        std::optional<int> region = std::nullopt);

/// Incremental scaled forward recursion. Feeding observations one at a time
/// gives the same rows as a batch pass over the prefix, which is what the
/// rolling forecast evaluation relies on.
class ForwardState {
public:
  explicit ForwardState(const HmmParams& params);

  /// Consumes one observation. Throws ErrorCode::impossible_observation if
  /// every state has zero emission density (the step index is reported
  /// 1-based).
  void push(double obs, std::optional<int> region = std::nullopt);

  std::size_t steps() const { return steps_; }
  double log_likelihood() const { return log_likelihood_; }
  /// Normalized forward row after the last push; sums to 1.
  const std::vector<double>& row() const { return row_; }
  double last_normalizer() const { return last_normalizer_; }

private:
  const HmmParams* params_;
  std::vector<double> row_;
  std::vector<double> scratch_;
  std::size_t steps_ = 0;
  double log_likelihood_ = 0.0;
  double last_normalizer_ = 0.0;
};

/// Scaled forward/backward pass over the full sequence.
Trellis forward_backward(const HmmParams& params,
                         const ObservationSequence& obs);

/// Gamma/eta from scaled trellis quantities; no unscaled probability is
/// ever materialized.
Posteriors posteriors(const HmmParams& params, const ObservationSequence& obs,
                      const Trellis& trellis);

}  // namespace eqhmm

#endif
