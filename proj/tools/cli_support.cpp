#include "cli_support.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hfslam/version.hpp"

namespace hfslam::cli {

using statecore::ParseError;

std::string EffectiveConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : values_) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::vector<std::pair<std::string, std::string>> EffectiveConfig::meta(std::uint64_t seed) const {
  return {{"version", HFSLAM_VERSION_STRING},
          {"config", hash()},
          {"seed", std::to_string(seed)}};
}

std::map<std::string, std::string> read_config_file(const std::string& path,
                                                    const std::vector<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ParseError("config entry missing '=': " + token, line_no);
    const std::string key = token.substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError("unknown config key '" + key + "'", line_no);
    }
    out[key] = token.substr(eq + 1);
    std::string extra;
    if (ls >> extra) throw ParseError("trailing tokens after config entry", line_no);
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // '\n' line ends on every platform
  if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
  return out;
}

void write_metrics_file(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, double>>& metrics,
                        const std::vector<std::pair<std::string, std::string>>& meta) {
  auto out = open_output(path);
  statecore::RecordWriter w(out, "metrics", 1, meta);
  for (const auto& [name, value] : metrics) {
    statecore::Record r;
    r.name = "metric";
    r.add("name", name).add("value", value);
    w.write(r);
  }
}

std::vector<std::pair<std::string, double>> read_metrics_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open metrics file '" + path + "'", 0);
  statecore::RecordReader reader(in, "metrics");
  std::vector<std::pair<std::string, double>> out;
  statecore::Record r;
  while (reader.next(r)) {
    if (r.name != "metric") throw ParseError("unexpected record '" + r.name + "'", r.line);
    out.emplace_back(r.get("name"), r.get_double("value"));
  }
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ARI: length mismatch");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  std::map<int, std::map<int, long>> table;
  std::map<int, long> row_sum, col_sum;
  for (std::size_t i = 0; i < n; ++i) {
    ++table[a[i]][b[i]];
    ++row_sum[a[i]];
    ++col_sum[b[i]];
  }
  auto choose2 = [](long m) { return 0.5 * m * (m - 1); };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [ai, row] : table) {
    for (const auto& [bi, cnt] : row) sum_ij += choose2(cnt);
  }
  for (const auto& [ai, cnt] : row_sum) sum_a += choose2(cnt);
  for (const auto& [bi, cnt] : col_sum) sum_b += choose2(cnt);
  const double total = choose2(static_cast<long>(n));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // degenerate: single cluster on both sides
  return (sum_ij - expected) / (max_index - expected);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double interquartile_range(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("IQR of empty set");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  return quantile(0.75) - quantile(0.25);
}

std::vector<statecore::Posture> dead_reckon(const statecore::Posture& start,
                                            const std::vector<statecore::Observation>& obs) {
  std::vector<statecore::Posture> out;
  out.reserve(obs.size());
  statecore::Posture pose = start;
  for (const auto& o : obs) {
    pose = pose_compose(pose, o.control);
    out.push_back(pose);
  }
  return out;
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path,
                                   const std::vector<std::pair<std::string, std::string>>& meta) {
  out = open_output(path);
  out << "#";
  for (const auto& [k, v] : meta) out << " " << k << "=" << v;
  out << "\nt,x,y,theta\n";
}

void TrajectoryWriter::row(int t, const statecore::Posture& pose) {
  out << t << ',' << statecore::format_double(pose.x) << ',' << statecore::format_double(pose.y)
      << ',' << statecore::format_double(pose.theta) << '\n';
}

}  // namespace hfslam::cli
