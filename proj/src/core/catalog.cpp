#include "core/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace eqhmm {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no,
                    const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    fail(ErrorCode::parse, "row " + std::to_string(line_no) + ": bad " +
                               what + " value '" + s + "'");
  return v;
}

struct RawRow {
  std::int64_t day = 0;  // serial day number
  double tod = 0.0;
  double magnitude = 0.0;
  double latitude = 0.0;
  double longitude = 0.0;
  std::optional<int> region;
};

}  // namespace

int RegionPartition::n_regions() const {
  if (mode == PartitionMode::single_region) return 1;
  int r = 0;
  for (int label : merge_map) r = std::max(r, label);
  return r;
}

int RegionPartition::quadrant_of(double lon, double lat) const {
  const double dx = lon - center_lon;
  const double dy = lat - center_lat;
  const double along_major = dx * axis_lon + dy * axis_lat;
  const double along_minor = -dx * axis_lat + dy * axis_lon;
  if (along_major >= 0.0) return along_minor <= 0.0 ? 1 : 2;
  return along_minor >= 0.0 ? 3 : 4;
}

int RegionPartition::region_of(double lon, double lat) const {
  switch (mode) {
    case PartitionMode::single_region:
      return 1;
    case PartitionMode::half_plane: {
      const double dx = lon - center_lon;
      const double dy = lat - center_lat;
      const double along_major = dx * axis_lon + dy * axis_lat;
      return merge_map[along_major >= 0.0 ? 0 : 2];
    }
    case PartitionMode::quadrant_merge:
      return merge_map[quadrant_of(lon, lat) - 1];
  }
  fail(ErrorCode::invalid_argument, "unknown partition mode");
}

void RegionPartition::validate() const {
  const double norm = std::hypot(axis_lon, axis_lat);
  if (std::abs(norm - 1.0) > 1e-9)
    fail(ErrorCode::invalid_argument, "partition axis is not unit length");
  if (mode == PartitionMode::single_region) return;
  const int n = n_regions();
  std::set<int> seen(merge_map.begin(), merge_map.end());
  for (int label : merge_map)
    if (label < 1)
      fail(ErrorCode::invalid_argument, "merge map labels must be >= 1");
  for (int label = 1; label <= n; ++label)
    if (!seen.count(label))
      fail(ErrorCode::invalid_argument,
           "merge map is not surjective onto {1..R}");
}

Catalog load_catalog(const std::string& path, double min_magnitude,
                     LoadStats* stats) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open catalog file '" + path + "'");

  LoadStats local;
  Catalog catalog;
  catalog.epoch = Date{1970, 1, 1};

  std::string line;
  std::size_t line_no = 0;
  int col_date = -1, col_time = -1, col_mag = -1, col_lat = -1, col_lon = -1,
      col_region = -1, col_state = -1;
  std::size_t n_cols = 0;
  bool have_header = false;
  std::vector<RawRow> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xef\xbb\xbf", 0) == 0)
      line.erase(0, 3);  // UTF-8 BOM
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string& name = fields[i];
        if (name == "date") col_date = static_cast<int>(i);
        else if (name == "time") col_time = static_cast<int>(i);
        else if (name == "magnitude") col_mag = static_cast<int>(i);
        else if (name == "latitude") col_lat = static_cast<int>(i);
        else if (name == "longitude") col_lon = static_cast<int>(i);
        else if (name == "region") col_region = static_cast<int>(i);
        else if (name == "true_state") col_state = static_cast<int>(i);
        else
          fail(ErrorCode::parse,
               "unknown catalog column '" + name + "' in '" + path + "'");
      }
      if (col_date < 0 || col_mag < 0 || col_lat < 0 || col_lon < 0)
        fail(ErrorCode::parse,
             "catalog header must name date,magnitude,latitude,longitude");
      n_cols = fields.size();
      have_header = true;
      continue;
    }

    if (fields.size() != n_cols)
      fail(ErrorCode::parse, "row " + std::to_string(line_no) + ": expected " +
                                 std::to_string(n_cols) + " fields, got " +
                                 std::to_string(fields.size()));
    ++local.rows_read;

    RawRow row;
    try {
      row.day = days_from_civil(parse_date(fields[col_date]));
      row.tod = col_time >= 0 ? parse_time_of_day(fields[col_time]) : 0.0;
    } catch (const Error& e) {
      fail(ErrorCode::parse, "row " + std::to_string(line_no) + ": " + e.what());
    }
    row.magnitude = parse_number(fields[col_mag], line_no, "magnitude");
    row.latitude = parse_number(fields[col_lat], line_no, "latitude");
    row.longitude = parse_number(fields[col_lon], line_no, "longitude");
    if (row.magnitude < 0.0)
      fail(ErrorCode::parse,
           "row " + std::to_string(line_no) + ": negative magnitude");
    if (row.latitude < -90.0 || row.latitude > 90.0)
      fail(ErrorCode::parse,
           "row " + std::to_string(line_no) + ": latitude out of [-90,90]");
    if (row.longitude < -180.0 || row.longitude > 180.0)
      fail(ErrorCode::parse,
           "row " + std::to_string(line_no) + ": longitude out of [-180,180]");
    if (col_region >= 0 && !fields[col_region].empty()) {
      const double r = parse_number(fields[col_region], line_no, "region");
      if (r < 1.0 || r != std::floor(r))
        fail(ErrorCode::parse,
             "row " + std::to_string(line_no) + ": region must be a positive integer");
      row.region = static_cast<int>(r);
    }
    (void)col_state;  // true_state is diagnostic output only; ignored on load

    if (row.magnitude < min_magnitude) {
      ++local.rows_below_magnitude;
      continue;
    }
    rows.push_back(row);
  }

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = static_cast<double>(rows[i - 1].day) + rows[i - 1].tod;
    const double cur = static_cast<double>(rows[i].day) + rows[i].tod;
    if (cur < prev) ++local.unsorted_rows;
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const RawRow& a, const RawRow& b) {
                     return static_cast<double>(a.day) + a.tod <
                            static_cast<double>(b.day) + b.tod;
                   });

  if (!rows.empty()) {
    catalog.epoch = civil_from_days(rows.front().day);
    const std::int64_t epoch_day = rows.front().day;
    catalog.events.reserve(rows.size());
    for (const RawRow& row : rows) {
      Event ev;
      ev.time = static_cast<double>(row.day - epoch_day) + row.tod;
      ev.magnitude = row.magnitude;
      ev.latitude = row.latitude;
      ev.longitude = row.longitude;
      ev.region = row.region;
      catalog.events.push_back(ev);
    }
  }
  if (stats) *stats = local;
  return catalog;
}

void save_catalog(const Catalog& catalog, const std::string& path,
                  const std::vector<int>* true_states) {
  if (true_states && true_states->size() != catalog.size())
    fail(ErrorCode::invalid_argument, "true_states length mismatch");
  std::size_t labeled = 0;
  for (const Event& ev : catalog.events) labeled += ev.region.has_value();
  if (labeled != 0 && labeled != catalog.size())
    fail(ErrorCode::invalid_argument,
         "catalog is only partially region-labeled");
  const bool with_region = labeled == catalog.size() && labeled > 0;

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorCode::io, "cannot write '" + tmp + "'");
    out << "date,time,magnitude,latitude,longitude";
    if (with_region) out << ",region";
    if (true_states) out << ",true_state";
    out << "\n";
    const std::int64_t epoch_day = days_from_civil(catalog.epoch);
    char buf[64];
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      const Event& ev = catalog.events[i];
      const std::int64_t day = epoch_day + static_cast<std::int64_t>(std::floor(ev.time));
      const double tod = ev.time - std::floor(ev.time);
      out << format_date(civil_from_days(day)) << ','
          << format_time_of_day(tod) << ',';
      std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.6f", ev.magnitude,
                    ev.latitude, ev.longitude);
      out << buf;
      if (with_region) out << ',' << ev.region.value_or(0);
      if (true_states) out << ',' << (*true_states)[i];
      out << "\n";
    }
    if (!out.good()) fail(ErrorCode::io, "write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::io, "cannot rename '" + tmp + "' to '" + path + "'");
}

RegionPartition compute_principal_axes(const Catalog& catalog) {
  const auto& events = catalog.events;
  bool distinct = false;
  for (std::size_t i = 1; i < events.size() && !distinct; ++i)
    distinct = events[i].longitude != events[0].longitude ||
               events[i].latitude != events[0].latitude;
  if (events.size() < 2 || !distinct)
    fail(ErrorCode::degenerate_geometry,
         "principal axes need at least 2 distinct event locations");

  double mean_lon = 0.0, mean_lat = 0.0;
  for (const Event& ev : events) {
    mean_lon += ev.longitude;
    mean_lat += ev.latitude;
  }
  mean_lon /= static_cast<double>(events.size());
  mean_lat /= static_cast<double>(events.size());

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Event& ev : events) {
    const double dx = ev.longitude - mean_lon;
    const double dy = ev.latitude - mean_lat;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  sxx /= static_cast<double>(events.size());
  sxy /= static_cast<double>(events.size());
  syy /= static_cast<double>(events.size());

  // Closed-form leading eigenvector of [[sxx, sxy], [sxy, syy]].
  double ax, ay;
  if (sxy == 0.0) {
    ax = sxx >= syy ? 1.0 : 0.0;
    ay = sxx >= syy ? 0.0 : 1.0;
  } else {
    const double mu =
        (sxx + syy) / 2.0 + std::hypot((sxx - syy) / 2.0, sxy);
    ax = sxy;
    ay = mu - sxx;
    const double norm = std::hypot(ax, ay);
    ax /= norm;
    ay /= norm;
  }
  // Canonical sign: positive longitude component (positive latitude on ties).
  if (ax < 0.0 || (ax == 0.0 && ay < 0.0)) {
    ax = -ax;
    ay = -ay;
  }

  RegionPartition partition;
  partition.mode = PartitionMode::quadrant_merge;
  partition.center_lon = mean_lon;
  partition.center_lat = mean_lat;
  partition.axis_lon = ax;
  partition.axis_lat = ay;
  partition.merge_map = {1, 2, 3, 4};
  return partition;
}

Catalog assign_regions(const Catalog& catalog,
                       const RegionPartition& partition) {
  partition.validate();
  Catalog out = catalog;
  for (Event& ev : out.events)
    ev.region = partition.region_of(ev.longitude, ev.latitude);
  return out;
}

ObservationSequence to_observations(const Catalog& catalog) {
  if (catalog.size() < 2)
    fail(ErrorCode::insufficient_data,
         "need at least 2 events to form interevent times");
  ObservationSequence obs;
  const auto& events = catalog.events;
  obs.interevent_times.reserve(events.size() - 1);
  for (std::size_t i = 1; i < events.size(); ++i)
    obs.interevent_times.push_back(events[i].time - events[i - 1].time);

  std::size_t labeled = 0;
  for (const Event& ev : events) labeled += ev.region.has_value();
  if (labeled == events.size()) {
    obs.regions.reserve(events.size() - 1);
    for (std::size_t i = 1; i < events.size(); ++i)
      obs.regions.push_back(*events[i].region);
  } else if (labeled != 0) {
    fail(ErrorCode::invalid_argument,
         "catalog is only partially region-labeled");
  }
  obs.validate();
  return obs;
}

}  // namespace eqhmm
