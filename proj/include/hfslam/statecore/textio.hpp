#pragma once

/**
 * Line-delimited structured-text serialization, shared by every file format
 * in the project (logs, worlds, models, graphs, snapshots).
 *
 * Layout:
 *   #% hfslam <kind> v<version>        header, mandatory first line
 *   #! key=value [key=value ...]       file metadata (tool version, seed, ...)
 *   # free-form comment                ignored
 *   <record> key=value [key=value ...] one record per line
 *
 * Values contain no whitespace; lists are comma-separated. Doubles are
 * written shortest-round-trip, so encode/decode is the identity.
 */

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hfslam/statecore/errors.hpp"
#include "hfslam/statecore/types.hpp"

namespace hfslam::statecore {

std::string format_double(double v);
double parse_double(const std::string& s, int line = 0);
std::int64_t parse_int(const std::string& s, int line = 0);

struct Record {
  std::string name;
  std::vector<std::pair<std::string, std::string>> fields;
  int line = 0;  // 1-based source line when read from a stream

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws ParseError
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::int64_t> get_ints(const std::string& key) const;

  Record& add(const std::string& key, const std::string& value);
  Record& add(const std::string& key, double value);
  Record& add(const std::string& key, std::int64_t value);
  Record& add(const std::string& key, int value);
  Record& add_list(const std::string& key, const std::vector<double>& values);
  Record& add_list(const std::string& key, const std::vector<int>& values);
};

class RecordReader {
 public:
  /// Parses the header line. Throws ParseError if the stream is not an
  /// hfslam file or the kind does not match.
  RecordReader(std::istream& in, const std::string& expected_kind);

  const std::map<std::string, std::string>& meta() const { return meta_; }
  int version() const { return version_; }

  /// Reads the next record, skipping comments and blank lines.
  /// Returns false at end of input.
  bool next(Record& out);

 private:
  std::istream& in_;
  std::map<std::string, std::string> meta_;
  int version_ = 0;
  int line_ = 0;
  bool pending_valid_ = false;
  std::string pending_;
  int pending_line_ = 0;

  bool fetch_line(std::string& s);
};

class RecordWriter {
 public:
  RecordWriter(std::ostream& out, const std::string& kind, int version = 1,
               const std::vector<std::pair<std::string, std::string>>& meta = {});
  void comment(const std::string& text);
  void write(const Record& r);

 private:
  std::ostream& out_;
};

// Codecs for the shared log record types. Observation logs are sequences of
// "obs" records; ground-truth logs are "truth" records plus a "start" record.

Record encode_observation(const Observation& obs);
Observation decode_observation(const Record& r);

struct TruthEntry {
  int t = 0;
  Posture pose;
  std::string room;

  bool operator==(const TruthEntry&) const = default;
};

Record encode_truth(const TruthEntry& e);
TruthEntry decode_truth(const Record& r);

Record encode_posture(const std::string& name, const Posture& p);
Posture decode_posture(const Record& r);

}  // namespace hfslam::statecore
