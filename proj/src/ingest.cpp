#include "emrec/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "emrec/error.hpp"

namespace emrec {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

// Days since 1970-01-01 for a civil date (Gregorian, proleptic).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

// ISO-8601 combined timestamp: YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|-HH:MM]
bool parse_iso8601(const std::string& s, double& out) {
  if (s.size() < 19 || s[4] != '-' || s[7] != '-') return false;
  if (s[10] != 'T' && s[10] != ' ') return false;
  if (s[13] != ':' || s[16] != ':') return false;
  int year, mon, day, hh, mm, ss;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d", &year, &mon, &day) != 3) return false;
  if (std::sscanf(s.c_str() + 11, "%2d:%2d:%2d", &hh, &mm, &ss) != 3) return false;
  if (mon < 1 || mon > 12 || day < 1 || day > 31) return false;
  if (hh > 23 || mm > 59 || ss > 60) return false;

  std::size_t pos = 19;
  double frac = 0.0;
  if (pos < s.size() && s[pos] == '.') {
    std::size_t start = ++pos;
    double scale = 0.1;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      frac += (s[pos] - '0') * scale;
      scale *= 0.1;
      ++pos;
    }
    if (pos == start) return false;
  }
  int offset_s = 0;
  if (pos < s.size()) {
    const char c = s[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      int oh = 0, om = 0;
      if (s.size() == pos + 6 && s[pos + 3] == ':') {
        oh = std::atoi(s.substr(pos + 1, 2).c_str());
        om = std::atoi(s.substr(pos + 4, 2).c_str());
        pos += 6;
      } else if (s.size() == pos + 5) {
        oh = std::atoi(s.substr(pos + 1, 2).c_str());
        om = std::atoi(s.substr(pos + 3, 2).c_str());
        pos += 5;
      } else {
        return false;
      }
      offset_s = (oh * 60 + om) * 60 * (c == '+' ? 1 : -1);
    }
  }
  if (pos != s.size()) return false;

  const std::int64_t days = days_from_civil(year, mon, day);
  out = static_cast<double>(days * 86400 + hh * 3600 + mm * 60 + ss - offset_s) + frac;
  return true;
}

void format_exact(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

double parse_timestamp(const std::string& field) {
  double v = 0.0;
  if (parse_double(field, v)) return v;
  if (parse_iso8601(field, v)) return v;
  throw ParseError("unrecognized timestamp '" + field + "'");
}

SensorRecording parse_recording(std::istream& in, SensorPosition position,
                                double sampling_rate_hz) {
  if (sampling_rate_hz <= 0.0) throw ParameterError("sampling rate must be positive");
  SensorRecording rec;
  rec.position = position;
  rec.sampling_rate_hz = sampling_rate_hz;

  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError("empty sensor file");
  ++row;
  if (trim(line) != "timestamp,x,y,z")
    throw ParseError("expected header 'timestamp,x,y,z' (row 1)");

  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 4)
      throw ParseError("expected 4 fields (row " + std::to_string(row) + ")");
    SensorSample s;
    try {
      s.timestamp_s = parse_timestamp(fields[0]);
    } catch (const ParseError&) {
      throw ParseError("bad timestamp (row " + std::to_string(row) + ")");
    }
    if (!std::isfinite(s.timestamp_s) || s.timestamp_s < 0.0)
      throw ParseError("negative or non-finite timestamp (row " + std::to_string(row) + ")");
    if (!parse_double(fields[1], s.x) || !parse_double(fields[2], s.y) ||
        !parse_double(fields[3], s.z))
      throw ParseError("non-numeric sample value (row " + std::to_string(row) + ")");
    if (!rec.samples.empty() && s.timestamp_s <= rec.samples.back().timestamp_s)
      throw OrderingError("timestamps not strictly increasing (row " + std::to_string(row) + ")");
    rec.samples.push_back(s);
  }
  return rec;
}

void write_recording(std::ostream& out, const SensorRecording& rec) {
  out << "timestamp,x,y,z\n";
  for (const auto& s : rec.samples) {
    format_exact(out, s.timestamp_s);
    out << ',';
    format_exact(out, s.x);
    out << ',';
    format_exact(out, s.y);
    out << ',';
    format_exact(out, s.z);
    out << '\n';
  }
}

AnnotationSet parse_annotations(std::istream& in, std::string patient_id) {
  AnnotationSet ann;
  ann.patient_id = std::move(patient_id);

  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError("empty annotation file");
  ++row;
  if (trim(line) != "minute,label")
    throw ParseError("expected header 'minute,label' (row 1)");

  std::map<std::int64_t, bool> seen;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 2)
      throw ParseError("expected 2 fields (row " + std::to_string(row) + ")");
    double minute = 0.0, label = 0.0;
    if (!parse_double(fields[0], minute) || minute < 0.0 ||
        minute != std::floor(minute))
      throw ParseError("bad minute index (row " + std::to_string(row) + ")");
    if (!parse_double(fields[1], label) || (label != 0.0 && label != 1.0))
      throw ParseError("label must be 0 or 1 (row " + std::to_string(row) + ")");
    const auto idx = static_cast<std::int64_t>(minute);
    if (seen[idx])
      throw ParseError("duplicate minute " + std::to_string(idx) + " (row " +
                       std::to_string(row) + ")");
    seen[idx] = true;
    ann.labels.emplace_back(idx, label == 0.0 ? Label::kLyingNoEm : Label::kLyingEm);
  }
  std::sort(ann.labels.begin(), ann.labels.end());
  return ann;
}

void write_annotations(std::ostream& out, const AnnotationSet& ann) {
  out << "minute,label\n";
  for (const auto& [minute, label] : ann.labels)
    out << minute << ',' << label_index(label) << '\n';
}

namespace {

// Resamples one stream onto the grid origin + k/fs, k in [0, n).
// The nominal spacing decides the policy per grid point: inside normally
// spaced samples, snap to the nearest one; inside a gap of at most 1 s,
// interpolate linearly; larger gaps are rejected.
TriaxialSeries resample_to_grid(const SensorRecording& rec, double origin, std::size_t n) {
  const double fs = rec.sampling_rate_hz;
  const double nominal_gap = 1.0 / fs;
  const double snap_limit = 1.5 * nominal_gap;
  constexpr double kMaxGapS = 1.0;

  TriaxialSeries out;
  out.fs_hz = fs;
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);

  const auto& samples = rec.samples;
  std::size_t i = 0;  // last sample with timestamp <= t, advanced monotonically
  for (std::size_t k = 0; k < n; ++k) {
    const double t = origin + static_cast<double>(k) / fs;
    while (i + 1 < samples.size() && samples[i + 1].timestamp_s <= t) ++i;
    const SensorSample& a = samples[i];
    if (i + 1 == samples.size()) {
      out.x[k] = a.x;
      out.y[k] = a.y;
      out.z[k] = a.z;
      continue;
    }
    const SensorSample& b = samples[i + 1];
    const double gap = b.timestamp_s - a.timestamp_s;
    if (gap <= snap_limit) {
      const bool take_a = (t - a.timestamp_s) <= (b.timestamp_s - t);
      const SensorSample& s = take_a ? a : b;
      out.x[k] = s.x;
      out.y[k] = s.y;
      out.z[k] = s.z;
    } else if (gap <= kMaxGapS + 1e-9) {
      const double w = (t - a.timestamp_s) / gap;
      out.x[k] = a.x + w * (b.x - a.x);
      out.y[k] = a.y + w * (b.y - a.y);
      out.z[k] = a.z + w * (b.z - a.z);
    } else {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "recording gap of %.3f s in [%.3f, %.3f]",
                    gap, a.timestamp_s, b.timestamp_s);
      throw GapError(buf);
    }
  }
  return out;
}

}  // namespace

SyncedRecording synchronize(const SensorRecording& chest, const SensorRecording& thigh,
                            std::string patient_id) {
  if (chest.samples.empty() || thigh.samples.empty())
    throw SyncError("cannot synchronize an empty recording");
  if (std::abs(chest.sampling_rate_hz - thigh.sampling_rate_hz) > 1e-9)
    throw SyncError("sampling rates differ between sensors");

  const double fs = chest.sampling_rate_hz;
  const double start = std::max(chest.samples.front().timestamp_s,
                                thigh.samples.front().timestamp_s);
  const double end = std::min(chest.samples.back().timestamp_s,
                              thigh.samples.back().timestamp_s);
  if (start > end) throw SyncError("recordings do not overlap in time");

  const auto n = static_cast<std::size_t>(std::floor((end - start) * fs + 1e-9)) + 1;

  SyncedRecording out;
  out.patient_id = std::move(patient_id);
  out.sampling_rate_hz = fs;
  out.origin_s = start;
  out.chest = resample_to_grid(chest, start, n);
  out.thigh = resample_to_grid(thigh, start, n);
  return out;
}

LabeledRecording attach_labels(const SyncedRecording& rec, const AnnotationSet& ann) {
  if (rec.patient_id != ann.patient_id)
    throw IdentityError("annotations for '" + ann.patient_id +
                        "' applied to recording of '" + rec.patient_id + "'");

  LabeledRecording out;
  out.patient_id = rec.patient_id;
  out.sampling_rate_hz = rec.sampling_rate_hz;
  out.origin_s = rec.origin_s;
  out.chest = rec.chest;
  out.thigh = rec.thigh;

  const auto spm = static_cast<std::size_t>(std::llround(60.0 * rec.sampling_rate_hz));
  const std::size_t complete_minutes = rec.chest.size() / spm;
  for (const auto& [minute, label] : ann.labels) {
    if (minute >= 0 && static_cast<std::size_t>(minute) < complete_minutes)
      out.minutes.push_back({minute, label});
  }
  return out;
}

namespace {

SensorRecording parse_recording_file(const std::filesystem::path& path,
                                     SensorPosition position, double fs) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return parse_recording(in, position, fs);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<LabeledRecording> load_dataset(const std::filesystem::path& dir,
                                           double sampling_rate_hz) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("not a directory: " + dir.string());

  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = "_chest.csv";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());

  std::vector<LabeledRecording> out;
  for (const auto& id : ids) {
    const auto chest_path = dir / (id + "_chest.csv");
    const auto thigh_path = dir / (id + "_thigh.csv");
    const auto labels_path = dir / (id + "_labels.csv");
    if (!std::filesystem::exists(thigh_path))
      throw IoError("missing " + thigh_path.string());
    if (!std::filesystem::exists(labels_path))
      throw IoError("missing " + labels_path.string());

    const auto chest = parse_recording_file(chest_path, SensorPosition::kChest, sampling_rate_hz);
    const auto thigh = parse_recording_file(thigh_path, SensorPosition::kThigh, sampling_rate_hz);
    std::ifstream lin(labels_path);
    if (!lin) throw IoError("cannot open " + labels_path.string());
    AnnotationSet ann;
    try {
      ann = parse_annotations(lin, id);
    } catch (const Error& e) {
      throw ParseError(labels_path.string() + ": " + e.what());
    }
    out.push_back(attach_labels(synchronize(chest, thigh, id), ann));
  }
  return out;
}

}  // namespace emrec
