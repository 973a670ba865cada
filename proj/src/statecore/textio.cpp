#include "hfslam/statecore/textio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace hfslam::statecore {

namespace {

bool is_value_char(char c) {
  return c > ' ' && c != '=';  // printable, no whitespace, no '='
}

void check_token(const std::string& s, const char* what, int line) {
  if (s.empty()) throw ParseError(std::string(what) + " is empty", line);
  for (char c : s) {
    if (!is_value_char(c)) {
      throw ParseError(std::string(what) + " contains whitespace or '=': '" + s + "'", line);
    }
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

std::int64_t parse_int(const std::string& s, int line) {
  std::int64_t v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("bad integer '" + s + "'", line);
  }
  return v;
}

bool Record::has(const std::string& key) const {
  return std::any_of(fields.begin(), fields.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

const std::string& Record::get(const std::string& key) const {
  for (const auto& kv : fields) {
    if (kv.first == key) return kv.second;
  }
  throw ParseError("record '" + name + "' missing field '" + key + "'", line);
}

std::string Record::get_or(const std::string& key, const std::string& fallback) const {
  for (const auto& kv : fields) {
    if (kv.first == key) return kv.second;
  }
  return fallback;
}

double Record::get_double(const std::string& key) const {
  return parse_double(get(key), line);
}

std::int64_t Record::get_int(const std::string& key) const {
  return parse_int(get(key), line);
}

std::vector<double> Record::get_doubles(const std::string& key) const {
  const std::string& raw = get(key);
  std::vector<double> out;
  if (raw.empty()) return out;
  for (const auto& part : split(raw, ',')) out.push_back(parse_double(part, line));
  return out;
}

std::vector<std::int64_t> Record::get_ints(const std::string& key) const {
  const std::string& raw = get(key);
  std::vector<std::int64_t> out;
  if (raw.empty()) return out;
  for (const auto& part : split(raw, ',')) out.push_back(parse_int(part, line));
  return out;
}

Record& Record::add(const std::string& key, const std::string& value) {
  check_token(key, "key", 0);
  for (char c : value) {
    if (!is_value_char(c)) throw ParseError("value contains whitespace: '" + value + "'", 0);
  }
  fields.emplace_back(key, value);
  return *this;
}

Record& Record::add(const std::string& key, double value) {
  check_token(key, "key", 0);
  fields.emplace_back(key, format_double(value));
  return *this;
}

Record& Record::add(const std::string& key, std::int64_t value) {
  check_token(key, "key", 0);
  fields.emplace_back(key, std::to_string(value));
  return *this;
}

Record& Record::add(const std::string& key, int value) {
  return add(key, static_cast<std::int64_t>(value));
}

Record& Record::add_list(const std::string& key, const std::vector<double>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ',';
    joined += format_double(values[i]);
  }
  check_token(key, "key", 0);
  fields.emplace_back(key, joined);
  return *this;
}

Record& Record::add_list(const std::string& key, const std::vector<int>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ',';
    joined += std::to_string(values[i]);
  }
  check_token(key, "key", 0);
  fields.emplace_back(key, joined);
  return *this;
}

RecordReader::RecordReader(std::istream& in, const std::string& expected_kind) : in_(in) {
  std::string header;
  if (!fetch_line(header)) throw ParseError("empty input, expected hfslam header", 1);
  std::istringstream hs(header);
  std::string magic, kind, ver;
  hs >> magic >> kind >> ver;
  if (magic != "#%" || kind.empty() || ver.size() < 2 || ver[0] != 'v') {
    throw ParseError("bad header, expected '#% hfslam-" + expected_kind + " v<N>'", line_);
  }
  if (kind != "hfslam-" + expected_kind) {
    throw ParseError("wrong file kind '" + kind + "', expected 'hfslam-" + expected_kind + "'",
                     line_);
  }
  version_ = static_cast<int>(parse_int(ver.substr(1), line_));

  // Meta lines directly follow the header.
  std::string s;
  while (fetch_line(s)) {
    if (s.rfind("#!", 0) == 0) {
      std::istringstream ms(s.substr(2));
      std::string kv;
      while (ms >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError("meta entry missing '=': " + kv, line_);
        meta_[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
    } else {
      pending_ = s;
      pending_line_ = line_;
      pending_valid_ = true;
      break;
    }
  }
}

bool RecordReader::fetch_line(std::string& s) {
  while (std::getline(in_, s)) {
    ++line_;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    // skip blanks and plain comments, but surface header/meta lines
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i == s.size()) continue;
    if (s[i] == '#' && !(s.compare(i, 2, "#%") == 0 || s.compare(i, 2, "#!") == 0)) continue;
    s = s.substr(i);
    return true;
  }
  return false;
}

bool RecordReader::next(Record& out) {
  std::string s;
  if (pending_valid_) {
    s = pending_;
    pending_valid_ = false;
    out.line = pending_line_;
  } else {
    if (!fetch_line(s)) return false;
    out.line = line_;
  }
  if (s.rfind("#%", 0) == 0 || s.rfind("#!", 0) == 0) {
    throw ParseError("header/meta line after records", out.line);
  }
  out.fields.clear();
  std::istringstream rs(s);
  if (!(rs >> out.name)) return false;
  std::string kv;
  while (rs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ParseError("field missing '=': '" + kv + "'", out.line);
    }
    out.fields.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return true;
}

RecordWriter::RecordWriter(std::ostream& out, const std::string& kind, int version,
                           const std::vector<std::pair<std::string, std::string>>& meta)
    : out_(out) {
  out_ << "#% hfslam-" << kind << " v" << version << "\n";
  for (const auto& [k, v] : meta) {
    out_ << "#! " << k << "=" << v << "\n";
  }
}

void RecordWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void RecordWriter::write(const Record& r) {
  out_ << r.name;
  for (const auto& [k, v] : r.fields) out_ << ' ' << k << '=' << v;
  out_ << '\n';
}

Record encode_observation(const Observation& obs) {
  Record r;
  r.name = "obs";
  r.add("t", obs.t);
  r.add("v", obs.control.v);
  r.add("w", obs.control.w);
  r.add("vsrc", obs.control.source_of_v == SpeedSource::commanded ? "commanded" : "estimated");
  r.add("max_range", obs.scan.max_range);
  r.add_list("angles", obs.scan.angles);
  r.add_list("ranges", obs.scan.ranges);
  r.add_list("hist", obs.ego.object_histogram);
  r.add("code", obs.ego.landscape_code);
  return r;
}

Observation decode_observation(const Record& r) {
  if (r.name != "obs") throw ParseError("expected 'obs' record, got '" + r.name + "'", r.line);
  Observation obs;
  obs.t = static_cast<int>(r.get_int("t"));
  obs.control.v = r.get_double("v");
  obs.control.w = r.get_double("w");
  const std::string vsrc = r.get("vsrc");
  if (vsrc == "commanded") {
    obs.control.source_of_v = SpeedSource::commanded;
  } else if (vsrc == "estimated") {
    obs.control.source_of_v = SpeedSource::estimated;
  } else {
    throw ParseError("bad vsrc '" + vsrc + "'", r.line);
  }
  obs.scan.max_range = r.get_double("max_range");
  obs.scan.angles = r.get_doubles("angles");
  obs.scan.ranges = r.get_doubles("ranges");
  validate(obs.scan);
  for (auto h : r.get_ints("hist")) {
    if (h < 0) throw ParseError("negative histogram count", r.line);
    obs.ego.object_histogram.push_back(static_cast<int>(h));
  }
  obs.ego.landscape_code = static_cast<int>(r.get_int("code"));
  return obs;
}

Record encode_truth(const TruthEntry& e) {
  Record r;
  r.name = "truth";
  r.add("t", e.t);
  r.add("x", e.pose.x);
  r.add("y", e.pose.y);
  r.add("theta", e.pose.theta);
  r.add("room", e.room);
  return r;
}

TruthEntry decode_truth(const Record& r) {
  if (r.name != "truth") throw ParseError("expected 'truth' record, got '" + r.name + "'", r.line);
  TruthEntry e;
  e.t = static_cast<int>(r.get_int("t"));
  e.pose = make_posture(r.get_double("x"), r.get_double("y"), r.get_double("theta"));
  e.room = r.get("room");
  return e;
}

Record encode_posture(const std::string& name, const Posture& p) {
  Record r;
  r.name = name;
  r.add("x", p.x);
  r.add("y", p.y);
  r.add("theta", p.theta);
  return r;
}

Posture decode_posture(const Record& r) {
  return make_posture(r.get_double("x"), r.get_double("y"), r.get_double("theta"));
}

}  // namespace hfslam::statecore
