#include "hfslam/worldsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hfslam/statecore/textio.hpp"

namespace hfslam::worldsim {

using statecore::EgocentricFeature;
using statecore::Posture;
using statecore::RandomSource;
using statecore::RangeScan;
using statecore::Record;
using statecore::RecordReader;
using statecore::RecordWriter;

const Room* WorldSpec::room_at(double x, double y) const {
  const int cx = grid.cell_x(x);
  const int cy = grid.cell_y(y);
  for (const auto& r : rooms) {
    if (r.contains_cell(cx, cy)) return &r;
  }
  return nullptr;
}

void WorldSpec::validate() const {
  if (grid.width <= 0 || grid.height <= 0 || grid.resolution <= 0.0) {
    throw std::invalid_argument("world: bad grid dimensions");
  }
  if (static_cast<int>(walls.size()) != grid.width * grid.height) {
    throw std::invalid_argument("world: wall bitmap size mismatch");
  }
  if (n_object_types < 1 || n_landscape_codes < 1) {
    throw std::invalid_argument("world: vocabulary sizes must be >= 1");
  }
  if (proximity_radius < 0.0 || feature_flip_prob < 0.0 || feature_flip_prob > 1.0 ||
      sensor.range_sigma < 0.0 || actuation.v_sigma < 0.0 || actuation.w_sigma < 0.0) {
    throw std::invalid_argument("world: noise parameters out of range");
  }
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const Room& a = rooms[i];
    if (a.landscape_code < 0 || a.landscape_code >= n_landscape_codes) {
      throw std::invalid_argument("world: room '" + a.label + "' landscape code out of range");
    }
    for (std::size_t j = i + 1; j < rooms.size(); ++j) {
      const Room& b = rooms[j];
      const bool overlap = a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
      if (overlap) {
        throw std::invalid_argument("world: rooms '" + a.label + "' and '" + b.label +
                                    "' overlap");
      }
    }
  }
  for (int cy = 0; cy < grid.height; ++cy) {
    for (int cx = 0; cx < grid.width; ++cx) {
      if (wall_at(cx, cy)) continue;
      const bool covered = std::any_of(rooms.begin(), rooms.end(),
                                       [&](const Room& r) { return r.contains_cell(cx, cy); });
      if (!covered) {
        throw std::invalid_argument("world: free cell (" + std::to_string(cx) + "," +
                                    std::to_string(cy) + ") not covered by any room");
      }
    }
  }
  for (const auto& o : objects) {
    if (o.type < 0 || o.type >= n_object_types) {
      throw std::invalid_argument("world: object type out of range");
    }
    if (!free_at(o.x, o.y)) throw std::invalid_argument("world: object inside a wall");
  }
}

std::vector<double> beam_angles(const SensorConfig& s) {
  std::vector<double> angles;
  angles.reserve(s.beams);
  if (s.beams == 1) {
    angles.push_back(0.0);
    return angles;
  }
  // full-circle sweeps would duplicate the wrap-around beam, so step spans
  // the fov without the closing endpoint in that case
  const bool full_circle = std::abs(s.fov - 2.0 * statecore::kPi) < 1e-12;
  const double step = full_circle ? s.fov / s.beams : s.fov / (s.beams - 1);
  for (int i = 0; i < s.beams; ++i) angles.push_back(-s.fov / 2.0 + i * step);
  return angles;
}

RangeScan raycast(const WorldSpec& w, const Posture& pose, RandomSource* noise) {
  if (!w.free_at(pose.x, pose.y)) throw std::invalid_argument("raycast: pose inside a wall");
  RangeScan scan;
  scan.max_range = w.sensor.max_range;
  scan.angles = beam_angles(w.sensor);
  scan.ranges.reserve(scan.angles.size());
  for (double a : scan.angles) {
    const auto hit = statecore::trace_ray(
        w.grid, pose.x, pose.y, pose.theta + a, w.sensor.max_range,
        [&](int cx, int cy) { return w.wall_at(cx, cy); });
    double r = hit.range;
    if (noise != nullptr && w.sensor.range_sigma > 0.0) {
      r += noise->normal(0.0, w.sensor.range_sigma);
      r = std::clamp(r, 0.0, w.sensor.max_range);
    }
    scan.ranges.push_back(r);
  }
  return scan;
}

namespace {

bool line_of_sight(const WorldSpec& w, const Posture& pose, const WorldObject& obj,
                   double dist) {
  if (dist < 1e-12) return true;
  const double dir = std::atan2(obj.y - pose.y, obj.x - pose.x);
  const auto hit = statecore::trace_ray(w.grid, pose.x, pose.y, dir, dist,
                                        [&](int cx, int cy) { return w.wall_at(cx, cy); });
  return !hit.hit;
}

}  // namespace

EgocentricFeature sense_egocentric(const WorldSpec& w, const Posture& pose, RandomSource& rs) {
  if (!w.free_at(pose.x, pose.y)) {
    throw std::invalid_argument("sense_egocentric: pose inside a wall");
  }
  EgocentricFeature f;
  f.object_histogram.assign(w.n_object_types, 0);
  for (const auto& obj : w.objects) {
    const double dist = std::hypot(obj.x - pose.x, obj.y - pose.y);
    if (dist > w.proximity_radius) continue;
    if (!line_of_sight(w, pose, obj, dist)) continue;
    int type = obj.type;
    if (w.feature_flip_prob > 0.0 && rs.uniform01() < w.feature_flip_prob) {
      type = static_cast<int>(rs.uniform_int(w.n_object_types));
    }
    ++f.object_histogram[type];
  }
  const Room* room = w.room_at(pose.x, pose.y);
  f.landscape_code = room != nullptr ? room->landscape_code : 0;
  return f;
}

WorldSpec WorldSpec::load(std::istream& in) {
  RecordReader reader(in, "world");
  WorldSpec w;
  std::vector<std::string> wall_rows;
  Record r;
  while (reader.next(r)) {
    if (r.name == "world") {
      w.name = r.get("name");
      w.grid.width = static_cast<int>(r.get_int("width"));
      w.grid.height = static_cast<int>(r.get_int("height"));
      w.grid.resolution = r.get_double("resolution");
      w.grid.origin_x = statecore::parse_double(r.get_or("origin_x", "0"), r.line);
      w.grid.origin_y = statecore::parse_double(r.get_or("origin_y", "0"), r.line);
      w.n_object_types = static_cast<int>(r.get_int("object_types"));
      w.n_landscape_codes = static_cast<int>(r.get_int("landscape_codes"));
    } else if (r.name == "row") {
      wall_rows.push_back(r.get("cells"));
    } else if (r.name == "room") {
      Room room;
      room.label = r.get("label");
      room.landscape_code = static_cast<int>(r.get_int("code"));
      room.x0 = static_cast<int>(r.get_int("x0"));
      room.y0 = static_cast<int>(r.get_int("y0"));
      room.x1 = static_cast<int>(r.get_int("x1"));
      room.y1 = static_cast<int>(r.get_int("y1"));
      w.rooms.push_back(room);
    } else if (r.name == "object") {
      WorldObject o;
      o.type = static_cast<int>(r.get_int("type"));
      o.x = r.get_double("x");
      o.y = r.get_double("y");
      w.objects.push_back(o);
    } else if (r.name == "sensor") {
      w.sensor.beams = static_cast<int>(r.get_int("beams"));
      w.sensor.fov = r.get_double("fov");
      w.sensor.max_range = r.get_double("max_range");
      w.sensor.range_sigma = r.get_double("range_sigma");
    } else if (r.name == "noise") {
      w.actuation.v_sigma = r.get_double("v_sigma");
      w.actuation.w_sigma = r.get_double("w_sigma");
    } else if (r.name == "features") {
      w.proximity_radius = r.get_double("proximity_radius");
      w.feature_flip_prob = r.get_double("flip_prob");
    } else {
      throw ParseError("unknown world record '" + r.name + "'", r.line);
    }
  }
  if (static_cast<int>(wall_rows.size()) != w.grid.height) {
    throw ParseError("world: expected " + std::to_string(w.grid.height) + " rows, got " +
                     std::to_string(wall_rows.size()), 0);
  }
  w.walls.assign(static_cast<std::size_t>(w.grid.width) * w.grid.height, 0);
  for (int y = 0; y < w.grid.height; ++y) {
    const std::string& row = wall_rows[y];
    if (static_cast<int>(row.size()) != w.grid.width) {
      throw ParseError("world: row " + std::to_string(y) + " has wrong width", 0);
    }
    for (int x = 0; x < w.grid.width; ++x) {
      if (row[x] == '#') {
        w.walls[w.grid.index(x, y)] = 1;
      } else if (row[x] != '.') {
        throw ParseError("world: bad cell character '" + std::string(1, row[x]) + "'", 0);
      }
    }
  }
  w.validate();
  return w;
}

void WorldSpec::save(std::ostream& out) const {
  RecordWriter writer(out, "world");
  Record r;
  r.name = "world";
  r.add("name", name)
      .add("width", grid.width)
      .add("height", grid.height)
      .add("resolution", grid.resolution)
      .add("origin_x", grid.origin_x)
      .add("origin_y", grid.origin_y)
      .add("object_types", n_object_types)
      .add("landscape_codes", n_landscape_codes);
  writer.write(r);
  for (int y = 0; y < grid.height; ++y) {
    std::string cells;
    for (int x = 0; x < grid.width; ++x) cells += walls[grid.index(x, y)] ? '#' : '.';
    r = {};
    r.name = "row";
    r.add("cells", cells);
    writer.write(r);
  }
  for (const auto& room : rooms) {
    r = {};
    r.name = "room";
    r.add("label", room.label)
        .add("code", room.landscape_code)
        .add("x0", room.x0)
        .add("y0", room.y0)
        .add("x1", room.x1)
        .add("y1", room.y1);
    writer.write(r);
  }
  for (const auto& o : objects) {
    r = {};
    r.name = "object";
    r.add("type", o.type).add("x", o.x).add("y", o.y);
    writer.write(r);
  }
  r = {};
  r.name = "sensor";
  r.add("beams", sensor.beams)
      .add("fov", sensor.fov)
      .add("max_range", sensor.max_range)
      .add("range_sigma", sensor.range_sigma);
  writer.write(r);
  r = {};
  r.name = "noise";
  r.add("v_sigma", actuation.v_sigma).add("w_sigma", actuation.w_sigma);
  writer.write(r);
  r = {};
  r.name = "features";
  r.add("proximity_radius", proximity_radius).add("flip_prob", feature_flip_prob);
  writer.write(r);
}

std::string WorldSpec::ascii_map() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.width + 1) * grid.height);
  for (int y = grid.height - 1; y >= 0; --y) {  // print north-up
    for (int x = 0; x < grid.width; ++x) {
      char c = walls[grid.index(x, y)] ? '#' : '.';
      for (const auto& o : objects) {
        if (grid.cell_x(o.x) == x && grid.cell_y(o.y) == y) {
          c = static_cast<char>('0' + o.type % 10);
          break;
        }
      }
      out += c;
    }
    out += '\n';
  }
  return out;
}

}  // namespace hfslam::worldsim
