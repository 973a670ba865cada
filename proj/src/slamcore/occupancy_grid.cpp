#include "hfslam/slamcore/occupancy_grid.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hfslam/statecore/textio.hpp"

namespace hfslam::slamcore {

using statecore::GridSpec;
using statecore::Posture;
using statecore::RangeScan;

double OccupancyGrid::prob(int cx, int cy) const {
  const double l = at(cx, cy);
  return 1.0 / (1.0 + std::exp(-l));
}

void OccupancyGrid::bump(int cx, int cy, double delta) {
  double& l = logodds[spec.index(cx, cy)];
  l += delta;
  if (l > l_max) l = l_max;
  if (l < -l_max) l = -l_max;
}

void SensorModelConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("SensorModelConfig: sigma must be > 0");
  if (hit_weight < 0.0 || hit_weight > 1.0 || random_weight < 0.0 || random_weight > 1.0) {
    throw std::invalid_argument("SensorModelConfig: weights must lie in [0, 1]");
  }
  if (std::abs(hit_weight + random_weight - 1.0) > 1e-9) {
    throw std::invalid_argument("SensorModelConfig: weights must sum to 1");
  }
  if (beam_stride < 1) throw std::invalid_argument("SensorModelConfig: beam_stride must be >= 1");
}

namespace {

// Squared distance larger than any reachable one; stands in for "no
// occupied cell" so the transform needs no infinity special cases.
constexpr double kFarSquared = 1e12;

// Felzenszwalb-Huttenlocher 1D squared distance transform.
void dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;
  z[1] = inf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * static_cast<double>(q)) -
                (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * static_cast<double>(q)) -
           (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dx = q - v[k];
    d[q] = dx * dx + f[v[k]];
  }
}

}  // namespace

DistanceField DistanceField::build(const OccupancyGrid& map) {
  const int w = map.spec.width;
  const int h = map.spec.height;
  DistanceField out;
  out.spec = map.spec;
  out.dist.assign(static_cast<std::size_t>(w) * h, kFarSquared);

  // squared distances in cell units, columns then rows
  std::vector<double> col(h), dcol(h), row(w), drow(w);
  std::vector<int> v(std::max(w, h));
  std::vector<double> z(std::max(w, h) + 1);

  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[y] = map.occupied(x, y) ? 0.0 : kFarSquared;
    dt_1d(col, dcol, v, z);
    for (int y = 0; y < h; ++y) out.dist[map.spec.index(x, y)] = dcol[y];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) row[x] = out.dist[map.spec.index(x, y)];
    dt_1d(row, drow, v, z);
    for (int x = 0; x < w; ++x) out.dist[map.spec.index(x, y)] = drow[x];
  }
  for (double& d : out.dist) {
    d = d >= kFarSquared * 0.5 ? std::numeric_limits<double>::infinity()
                               : std::sqrt(d) * map.spec.resolution;
  }
  return out;
}

double DistanceField::at_world(double x, double y) const {
  // bilinear over the four nearest cell centers; clamp to the border
  const double gx = (x - spec.origin_x) / spec.resolution - 0.5;
  const double gy = (y - spec.origin_y) / spec.resolution - 0.5;
  const int x0 = std::clamp(static_cast<int>(std::floor(gx)), 0, spec.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(gy)), 0, spec.height - 1);
  const int x1 = std::min(x0 + 1, spec.width - 1);
  const int y1 = std::min(y0 + 1, spec.height - 1);
  if (!spec.contains(spec.cell_x(x), spec.cell_y(y))) {
    return std::numeric_limits<double>::infinity();
  }
  const double fx = std::clamp(gx - x0, 0.0, 1.0);
  const double fy = std::clamp(gy - y0, 0.0, 1.0);
  const double d00 = dist[spec.index(x0, y0)];
  const double d10 = dist[spec.index(x1, y0)];
  const double d01 = dist[spec.index(x0, y1)];
  const double d11 = dist[spec.index(x1, y1)];
  return (d00 * (1.0 - fx) + d10 * fx) * (1.0 - fy) + (d01 * (1.0 - fx) + d11 * fx) * fy;
}

double scan_likelihood(const Posture& pose, const RangeScan& scan, const DistanceField& field,
                       double max_range, const SensorModelConfig& cfg) {
  cfg.validate();
  if (max_range <= 0.0) throw std::invalid_argument("scan_likelihood: max_range must be > 0");
  const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  const double floor = cfg.random_weight / max_range;
  // Ranges measure the obstacle face; the distance field measures to cell
  // centers. The half-cell push along the beam matches the two up, the same
  // convention integrate_scan uses for the occupied mark.
  const double surface_offset = 0.5 * field.spec.resolution;
  double likelihood = 1.0;
  for (std::size_t i = 0; i < scan.ranges.size(); i += cfg.beam_stride) {
    const double dir = pose.theta + scan.angles[i];
    const double reach = scan.ranges[i] + surface_offset;
    const double ex = pose.x + reach * std::cos(dir);
    const double ey = pose.y + reach * std::sin(dir);
    const double d = field.at_world(ex, ey);
    const double hit =
        std::isinf(d) ? 0.0 : cfg.hit_weight * std::exp(-d * d * inv_two_sigma_sq);
    likelihood *= hit + floor;
  }
  return likelihood;
}

double scan_likelihood(const Posture& pose, const RangeScan& scan, const OccupancyGrid& map,
                       const SensorModelConfig& cfg) {
  if (map.logodds.empty()) throw std::invalid_argument("scan_likelihood: empty map");
  const DistanceField field = DistanceField::build(map);
  return scan_likelihood(pose, scan, field, scan.max_range, cfg);
}

void integrate_scan(OccupancyGrid& map, const Posture& pose, const RangeScan& scan,
                    const InverseSensorModel& ism) {
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double dir = pose.theta + scan.angles[i];
    const double range = scan.ranges[i];
    const bool beam_hit = range < scan.max_range;
    // Ranges measure the obstacle face, which lies exactly on a cell
    // boundary for grid walls; the occupied mark goes half a cell deeper
    // along the beam so boundary-straddling noise cannot flip it into the
    // last free cell.
    const double mark = range + 0.5 * map.spec.resolution;
    statecore::walk_cells(map.spec, pose.x, pose.y, dir, scan.max_range + map.spec.resolution,
                          [&](int cx, int cy, double entry, double exit) {
                            if (exit <= range) {
                              map.bump(cx, cy, ism.l_free);
                              return true;
                            }
                            if (!beam_hit) return false;
                            if (entry <= mark && mark < exit) {
                              map.bump(cx, cy, ism.l_occ);
                              return false;
                            }
                            return entry <= mark;
                          });
  }
}

RangeScan predict_scan(const OccupancyGrid& map, const Posture& pose,
                       const std::vector<double>& beam_angles, double max_range) {
  RangeScan out;
  out.max_range = max_range;
  out.angles = beam_angles;
  out.ranges.reserve(beam_angles.size());
  for (double a : beam_angles) {
    const auto hit = statecore::trace_ray(
        map.spec, pose.x, pose.y, pose.theta + a, max_range,
        [&](int cx, int cy) { return map.occupied(cx, cy); });
    out.ranges.push_back(hit.range);
  }
  return out;
}

void OccupancyGrid::save(std::ostream& out,
                         const std::vector<std::pair<std::string, std::string>>& extra_meta) const {
  std::vector<std::pair<std::string, std::string>> meta = extra_meta;
  meta.emplace_back("width", std::to_string(spec.width));
  meta.emplace_back("height", std::to_string(spec.height));
  meta.emplace_back("resolution", statecore::format_double(spec.resolution));
  meta.emplace_back("origin_x", statecore::format_double(spec.origin_x));
  meta.emplace_back("origin_y", statecore::format_double(spec.origin_y));
  meta.emplace_back("l_max", statecore::format_double(l_max));
  statecore::RecordWriter w(out, "gridmap", 1, meta);
  w.comment("occupancy probability per cell, row-major, one row per line");
  for (int y = 0; y < spec.height; ++y) {
    std::ostringstream line;
    for (int x = 0; x < spec.width; ++x) {
      if (x) line << ' ';
      line << statecore::format_double(prob(x, y));
    }
    out << line.str() << '\n';
  }
}

OccupancyGrid OccupancyGrid::load(std::istream& in) {
  // header via RecordReader, body is raw rows
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, kind, ver;
  hs >> magic >> kind >> ver;
  if (magic != "#%" || kind != "hfslam-gridmap") throw ParseError("not a gridmap file", 1);
  GridSpec spec;
  double l_max = 10.0;
  int line_no = 1;
  std::string line;
  while (in.peek() == '#') {
    std::getline(in, line);
    ++line_no;
    if (line.rfind("#!", 0) == 0) {
      std::istringstream ms(line.substr(2));
      std::string kv;
      while (ms >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("bad meta entry", line_no);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "width") spec.width = static_cast<int>(statecore::parse_int(val, line_no));
        if (key == "height") spec.height = static_cast<int>(statecore::parse_int(val, line_no));
        if (key == "resolution") spec.resolution = statecore::parse_double(val, line_no);
        if (key == "origin_x") spec.origin_x = statecore::parse_double(val, line_no);
        if (key == "origin_y") spec.origin_y = statecore::parse_double(val, line_no);
        if (key == "l_max") l_max = statecore::parse_double(val, line_no);
      }
    }
  }
  if (spec.width <= 0 || spec.height <= 0) throw ParseError("gridmap missing dimensions", line_no);
  OccupancyGrid map(spec, l_max);
  for (int y = 0; y < spec.height; ++y) {
    if (!std::getline(in, line)) throw ParseError("gridmap truncated", line_no);
    ++line_no;
    std::istringstream ls(line);
    for (int x = 0; x < spec.width; ++x) {
      double p;
      if (!(ls >> p)) throw ParseError("gridmap row too short", line_no);
      if (p <= 0.0 || p >= 1.0) {
        map.logodds[spec.index(x, y)] = p <= 0.0 ? -l_max : l_max;
      } else {
        map.logodds[spec.index(x, y)] = std::log(p / (1.0 - p));
      }
    }
  }
  return map;
}

}  // namespace hfslam::slamcore
