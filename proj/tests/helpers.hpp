// Shared test utilities: random instance generators, path-enumeration
// posteriors, quadrature, and a power-iteration eigensolver. Everything here
// is deliberately independent of the library's recursions so it can serve as
// an oracle for them.

#ifndef EQHMM_TESTS_HELPERS_HPP
#define EQHMM_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "core/hmm.hpp"
#include "core/rng.hpp"

namespace testutil {

using eqhmm::HmmParams;
using eqhmm::ObservationSequence;
using eqhmm::SplitMix64;

inline std::vector<double> random_prob_row(SplitMix64& rng, int n,
                                           double floor = 0.05) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (double& x : v) {
    x = floor + rng.next_double();
    sum += x;
  }
  for (double& x : v) x /= sum;
  return v;
}

inline HmmParams random_params(SplitMix64& rng, int n_states, int n_regions = 0,
                               double lambda_lo = 0.5, double lambda_hi = 30.0) {
  HmmParams p;
  p.n_states = n_states;
  p.pi = random_prob_row(rng, n_states);
  for (int r = 0; r < n_states; ++r) {
    const auto row = random_prob_row(rng, n_states);
    p.trans.insert(p.trans.end(), row.begin(), row.end());
  }
  for (int s = 0; s < n_states; ++s)
    p.lambda.push_back(lambda_lo + (lambda_hi - lambda_lo) * rng.next_double());
  p.n_regions = n_regions;
  for (int s = 0; s < n_states * (n_regions > 0 ? 1 : 0); ++s) {
    const auto row = random_prob_row(rng, n_regions);
    p.region_dist.insert(p.region_dist.end(), row.begin(), row.end());
  }
  p.validate();
  return p;
}

inline ObservationSequence random_obs(SplitMix64& rng, std::size_t length,
                                      double scale, int n_regions = 0) {
  ObservationSequence obs;
  for (std::size_t t = 0; t < length; ++t)
    obs.interevent_times.push_back(-scale * std::log(rng.next_double_open()));
  if (n_regions > 0)
    for (std::size_t t = 0; t < length; ++t)
      obs.regions.push_back(
          1 + static_cast<int>(rng.next_double() * n_regions) % n_regions);
  return obs;
}

/// Posterior quantities by explicit path enumeration (independent of the
/// scaled forward/backward recursions).
struct EnumPosteriors {
  std::vector<double> gamma;  // L x S
  std::vector<double> eta;    // (L-1) x S x S
  double log_likelihood = 0.0;
};

inline EnumPosteriors enum_posteriors(const HmmParams& p,
                                      const ObservationSequence& obs) {
  const int n = p.n_states;
  const std::size_t len = obs.length();
  EnumPosteriors out;
  out.gamma.assign(len * n, 0.0);
  if (len > 1) out.eta.assign((len - 1) * n * n, 0.0);

  auto density = [&](int s, std::size_t t) {
    const auto reg = obs.has_regions() ? std::optional<int>(obs.regions[t])
                                       : std::nullopt;
    return eqhmm::emission_density(p, s, obs.interevent_times[t], reg);
  };

  std::size_t n_paths = 1;
  for (std::size_t i = 0; i < len; ++i) n_paths *= n;
  double total = 0.0;
  std::vector<int> path(len);
  for (std::size_t code = 0; code < n_paths; ++code) {
    std::size_t rest = code;
    for (std::size_t t = 0; t < len; ++t) {
      path[t] = static_cast<int>(rest % n);
      rest /= n;
    }
    double w = p.pi[path[0]] * density(path[0], 0);
    for (std::size_t t = 1; t < len && w > 0.0; ++t)
      w *= p.a(path[t - 1], path[t]) * density(path[t], t);
    if (w <= 0.0) continue;
    total += w;
    for (std::size_t t = 0; t < len; ++t) {
      out.gamma[t * n + path[t]] += w;
      if (t + 1 < len) out.eta[(t * n + path[t]) * n + path[t + 1]] += w;
    }
  }
  for (double& g : out.gamma) g /= total;
  for (double& e : out.eta) e /= total;
  out.log_likelihood = std::log(total);
  return out;
}

/// Adaptive Simpson quadrature.
inline double simpson_segment(double a, double b, double fa, double fm,
                              double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_impl(F&& f, double a, double b, double fa, double fm,
                             double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_segment(a, m, fa, flm, fm);
  const double right = simpson_segment(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, tol / 2.0,
                               depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, tol / 2.0,
                               depth - 1);
}

template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-10) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson_segment(a, b, fa, fm, fb);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, 40);
}

/// Leading unit eigenvector of [[sxx, sxy], [sxy, syy]] by power iteration;
/// the independent route for checking the closed-form principal axis.
inline std::pair<double, double> power_major_axis(double sxx, double sxy,
                                                  double syy, int iters = 200000) {
  // Shift by the trace to make the leading eigenvalue dominant in magnitude.
  const double shift = sxx + syy;
  double vx = 0.6, vy = 0.8;
  for (int i = 0; i < iters; ++i) {
    const double nx = (sxx + shift) * vx + sxy * vy;
    const double ny = sxy * vx + (syy + shift) * vy;
    const double norm = std::hypot(nx, ny);
    vx = nx / norm;
    vy = ny / norm;
  }
  return {vx, vy};
}

}  // namespace testutil

#endif
