#ifndef EQHMM_CORE_ESTIMATION_HPP
#define EQHMM_CORE_ESTIMATION_HPP

#include <optional>
#include <vector>

#include "core/hmm.hpp"

namespace eqhmm {

/// Multi-start Baum-Welch protocol: every grid start runs coarse_iters
/// updates, the best start by likelihood then iterates until the largest
/// absolute change over all lambda and transition entries drops below
/// param_tol.
struct FitConfig {
  std::vector<std::vector<double>> init_grid;  // one lambda vector per start
  std::vector<double> init_trans;              // row-major; empty = uniform
  std::vector<double> init_pi;                 // empty = uniform
  std::vector<double> init_region_dist;        // row-major; empty = default
  int coarse_iters = 100;
  double param_tol = 1e-6;
  int max_iters = 10000;
  double min_lambda = 1e-4;  // floor for updated means, days

  void validate() const;
};

struct FitResult {
  HmmParams params;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  /// trace[k] is the log-likelihood entering iteration k; the final entry is
  /// the likelihood of the returned parameters.
  std::vector<double> trace;
};

/// One EM update: transitions from eta/gamma ratios, pi from gamma at t=1,
/// lambda from gamma-weighted means floored at min_lambda, region rows from
/// per-label gamma mass. Rows are renormalized after the update. Throws
/// ErrorCode::degenerate_state when a state's posterior mass vanishes.
HmmParams baum_welch_step(const HmmParams& params,
                          const ObservationSequence& obs,
                          double min_lambda = 1e-4);

/// Grid multi-start fit. Starts whose EM hits a degenerate state are
/// discarded; if all of them die the fit fails. Deterministic: fixed grid
/// order, first-best wins ties.
FitResult fit(const ObservationSequence& obs, int n_states,
              const FitConfig& config);

/// Default grid for a given state count: the 28-point {1,4,7,10} x
/// {10,20,...,70} grid for two states, the 16-point {1,4,7,10} x
/// {10,30,50,70} grid duplicated across regions for four, a single
/// log-spaced start otherwise. For four states pass the best two-state
/// lambda pair to append the 17th start.
FitConfig default_fit_config(int n_states, int n_regions = 0,
                             const std::optional<std::vector<double>>&
                                 two_state_best = std::nullopt);

/// Canonical state order: dominant region first (argmax of the q row), then
/// ascending lambda; ties keep the original index. pi, trans and region_dist
/// are permuted consistently.
HmmParams sort_states(const HmmParams& params);

/// Full default protocol: for four states with regions, a two-state fit on
/// the times alone seeds the 17th grid start.
FitResult fit_default(const ObservationSequence& obs, int n_states);

}  // namespace eqhmm

#endif
