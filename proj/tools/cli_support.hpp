#pragma once

/**
 * Shared plumbing for the command-line tool: effective-config assembly with
 * hashing, deterministic file output helpers, and the run drivers shared by
 * the slam and hfpgm subcommands.
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hfslam/hfpgm/agent.hpp"
#include "hfslam/slamcore/fastslam.hpp"
#include "hfslam/statecore/textio.hpp"
#include "hfslam/worldsim/episode.hpp"
#include "hfslam/worldsim/world.hpp"

namespace hfslam::cli {

/// Canonical key=value map of the effective run configuration. Flags win
/// over config-file entries; the hash of the sorted map goes into every
/// output header.
class EffectiveConfig {
 public:
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double v) { values_[key] = statecore::format_double(v); }
  void set(const std::string& key, std::int64_t v) { values_[key] = std::to_string(v); }
  void set_bool(const std::string& key, bool v) { values_[key] = v ? "true" : "false"; }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// FNV-1a 64 over the sorted "key=value\n" lines, hex.
  std::string hash() const;

  /// Header metadata every output file carries.
  std::vector<std::pair<std::string, std::string>> meta(std::uint64_t seed) const;

 private:
  std::map<std::string, std::string> values_;
};

/// key=value per line, '#' comments. Unknown keys (not in `allowed`)
/// raise ParseError.
std::map<std::string, std::string> read_config_file(const std::string& path,
                                                    const std::vector<std::string>& allowed);

std::ofstream open_output(const std::filesystem::path& path);

/// One row per metric in a "metrics" record file.
void write_metrics_file(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, double>>& metrics,
                        const std::vector<std::pair<std::string, std::string>>& meta);

std::vector<std::pair<std::string, double>> read_metrics_file(const std::string& path);

/// Adjusted Rand index between two label sequences of equal length.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

double median(std::vector<double> values);
double interquartile_range(std::vector<double> values);

/// Dead-reckoning trajectory: noiseless composition of the logged controls.
std::vector<statecore::Posture> dead_reckon(const statecore::Posture& start,
                                            const std::vector<statecore::Observation>& obs);

struct TrajectoryWriter {
  std::ofstream out;
  TrajectoryWriter(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& meta);
  void row(int t, const statecore::Posture& pose);
};

}  // namespace hfslam::cli
