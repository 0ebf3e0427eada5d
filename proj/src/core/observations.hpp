#ifndef EQHMM_CORE_OBSERVATIONS_HPP
#define EQHMM_CORE_OBSERVATIONS_HPP

#include <cstddef>
#include <vector>

#include "core/error.hpp"

namespace eqhmm {

/// Ordered interevent times in fractional days, with optional region labels
/// in {1..R}. When regions are present they have one entry per observation:
/// the region of the later event of each consecutive pair.
struct ObservationSequence {
  std::vector<double> interevent_times;
  std::vector<int> regions;  // empty when the catalog carries no labels

  std::size_t length() const { return interevent_times.size(); }
  bool has_regions() const { return !regions.empty(); }

  void validate() const {
    if (!regions.empty() && regions.size() != interevent_times.size())
      fail(ErrorCode::invalid_argument,
           "region labels must match observation count");
    for (double y : interevent_times)
      if (!(y >= 0.0))
        fail(ErrorCode::invalid_argument, "negative interevent time");
  }
};

}  // namespace eqhmm

#endif
