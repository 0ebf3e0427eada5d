#ifndef EQHMM_CORE_CATALOG_HPP
#define EQHMM_CORE_CATALOG_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "core/calendar.hpp"
#include "core/observations.hpp"

namespace eqhmm {

/// One mainshock. Time is in fractional days since the catalog epoch.
struct Event {
  double time = 0.0;
  double magnitude = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
  std::optional<int> region;  // label in {1..R} once assigned
};

struct Catalog {
  std::vector<Event> events;
  Date epoch;  // calendar date of time 0.0

  std::size_t size() const { return events.size(); }
  bool has_regions() const {
    return !events.empty() && events.front().region.has_value();
  }
  /// Fractional days since the epoch for a calendar instant.
  double instant(const Date& d, double time_of_day = 0.0) const {
    return static_cast<double>(days_from_civil(d) - days_from_civil(epoch)) +
           time_of_day;
  }
};

enum class PartitionMode { single_region, half_plane, quadrant_merge };

/// Geographic split of the study region by the principal axes of the event
/// locations. Quadrants are numbered 1..4 counterclockwise starting from
/// (+major, -minor); points exactly on an axis go to the lower-numbered
/// adjacent quadrant.
struct RegionPartition {
  PartitionMode mode = PartitionMode::single_region;
  double center_lon = 0.0;
  double center_lat = 0.0;
  double axis_lon = 1.0;  // unit major-axis direction
  double axis_lat = 0.0;
  std::array<int, 4> merge_map = {1, 1, 1, 1};  // quadrant -> region label

  int n_regions() const;
  int quadrant_of(double lon, double lat) const;
  int region_of(double lon, double lat) const;
  void validate() const;
};

struct LoadStats {
  std::size_t rows_read = 0;
  std::size_t rows_below_magnitude = 0;
  std::size_t unsorted_rows = 0;  // rows out of time order in the input
};

/// Reads the catalog CSV (header date,time,magnitude,latitude,longitude with
/// optional region and true_state columns), filters by magnitude, sorts by
/// time, and sets the epoch to the first kept event's calendar date.
Catalog load_catalog(const std::string& path, double min_magnitude,
                     LoadStats* stats = nullptr);

/// Writes the catalog CSV. A region column is emitted when labels are
/// present; true_states, when given, must match the event count.
void save_catalog(const Catalog& catalog, const std::string& path,
                  const std::vector<int>* true_states = nullptr);

/// Major principal axis of the (longitude, latitude) scatter. The returned
/// partition has quadrant-merge mode and an identity-ish merge map; set the
/// merge map afterwards (see east_west_merge / north_south_merge).
RegionPartition compute_principal_axes(const Catalog& catalog);

constexpr std::array<int, 4> east_west_merge() { return {1, 1, 2, 2}; }
constexpr std::array<int, 4> north_south_merge() { return {2, 1, 1, 2}; }

/// Labels every event through the partition.
Catalog assign_regions(const Catalog& catalog, const RegionPartition& partition);

/// Interevent times (and region labels of the later event of each pair).
ObservationSequence to_observations(const Catalog& catalog);

}  // namespace eqhmm

#endif
