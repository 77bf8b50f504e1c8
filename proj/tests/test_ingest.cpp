#include <doctest.h>

#include <cmath>
#include <sstream>

#include "emrec/error.hpp"
#include "emrec/ingest.hpp"
#include "test_util.hpp"

using namespace emrec;

namespace {

SensorRecording recording_on_grid(double fs, double start_s, std::size_t n,
                                  double (*fx)(double) = nullptr) {
  SensorRecording rec;
  rec.sampling_rate_hz = fs;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = start_s + static_cast<double>(k) / fs;
    const double v = fx ? fx(t) : 0.0;
    rec.samples.push_back({t, v, 0.0, 1.0});
  }
  return rec;
}

std::string contains_row(const Error& e, const char* needle) {
  return std::string(e.what()).find(needle) != std::string::npos ? "" : e.what();
}

}  // namespace

TEST_CASE("parse_recording maps fields directly") {
  std::istringstream in("timestamp,x,y,z\n0.000,0.01,-0.98,0.05\n");
  const auto rec = parse_recording(in, SensorPosition::kChest);
  REQUIRE(rec.samples.size() == 1);
  CHECK(rec.samples[0].timestamp_s == 0.0);
  CHECK(rec.samples[0].x == 0.01);
  CHECK(rec.samples[0].y == -0.98);
  CHECK(rec.samples[0].z == 0.05);
  CHECK(rec.position == SensorPosition::kChest);
}

TEST_CASE("parse_recording reports the failing row") {
  std::istringstream in("timestamp,x,y,z\n0.0,a,b,c\n");
  try {
    parse_recording(in, SensorPosition::kChest);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(contains_row(e, "row 2") == "");
  }
}

TEST_CASE("parse_recording rejects non-increasing timestamps") {
  std::istringstream in("timestamp,x,y,z\n0.0,0,0,1\n0.0,0,0,1\n");
  CHECK_THROWS_AS(parse_recording(in, SensorPosition::kThigh), OrderingError);
}

TEST_CASE("parse_recording rejects bad header and negative time") {
  std::istringstream bad_header("time,x,y,z\n");
  CHECK_THROWS_AS(parse_recording(bad_header, SensorPosition::kChest), ParseError);
  std::istringstream negative("timestamp,x,y,z\n-1.0,0,0,0\n");
  CHECK_THROWS_AS(parse_recording(negative, SensorPosition::kChest), ParseError);
}

TEST_CASE("ISO-8601 timestamps") {
  CHECK(parse_timestamp("1970-01-01T00:00:01Z") == 1.0);
  CHECK(parse_timestamp("1970-01-01T00:00:00.5") == 0.5);
  CHECK(parse_timestamp("1970-01-01T01:00:00+01:00") == 0.0);
  CHECK(parse_timestamp("1970-01-02 00:00:00") == 86400.0);
  CHECK(parse_timestamp("2021-03-04T05:06:07Z") == 1614834367.0);
  CHECK(parse_timestamp("42.5") == 42.5);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), ParseError);
}

TEST_CASE("recording round-trips bit-identically") {
  Rng rng(11);
  SensorRecording rec;
  rec.sampling_rate_hz = 30.0;
  double t = 0.0;
  for (int i = 0; i < 200; ++i) {
    t += rng.next_range(0.01, 0.05);
    rec.samples.push_back({t, rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()});
  }
  std::ostringstream out;
  write_recording(out, rec);
  std::istringstream in(out.str());
  const auto back = parse_recording(in, rec.position);
  REQUIRE(back.samples.size() == rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    CHECK(back.samples[i].timestamp_s == rec.samples[i].timestamp_s);
    CHECK(back.samples[i].x == rec.samples[i].x);
    CHECK(back.samples[i].y == rec.samples[i].y);
    CHECK(back.samples[i].z == rec.samples[i].z);
  }
}

TEST_CASE("synchronize covers the span intersection") {
  const auto chest = recording_on_grid(30.0, 0.0, 3001);   // [0, 100]
  const auto thigh = recording_on_grid(30.0, 0.5, 3001);   // [0.5, 100.5]
  const auto synced = synchronize(chest, thigh, "p");
  CHECK(synced.origin_s == 0.5);
  const std::size_t n = synced.chest.size();
  CHECK(n == synced.thigh.size());
  CHECK(n == 2986);  // grid 0.5 + k/30 up to 100.0
  const double last = synced.origin_s + static_cast<double>(n - 1) / 30.0;
  CHECK(last == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("synchronize of identical recordings is the identity") {
  const auto rec = recording_on_grid(30.0, 0.0, 1800, [](double t) { return std::sin(t); });
  const auto synced = synchronize(rec, rec, "p");
  REQUIRE(synced.chest.size() == rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    CHECK(synced.chest.x[i] == rec.samples[i].x);
    CHECK(synced.thigh.x[i] == rec.samples[i].x);
    CHECK(synced.chest.z[i] == rec.samples[i].z);
  }
}

TEST_CASE("synchronize is idempotent") {
  const auto chest = recording_on_grid(30.0, 0.2, 900, [](double t) { return t * 0.1; });
  const auto thigh = recording_on_grid(30.0, 0.0, 920, [](double t) { return 1.0 - t; });
  const auto once = synchronize(chest, thigh, "p");

  SensorRecording c2, t2;
  c2.sampling_rate_hz = t2.sampling_rate_hz = once.sampling_rate_hz;
  for (std::size_t i = 0; i < once.chest.size(); ++i) {
    const double t = once.origin_s + static_cast<double>(i) / once.sampling_rate_hz;
    c2.samples.push_back({t, once.chest.x[i], once.chest.y[i], once.chest.z[i]});
    t2.samples.push_back({t, once.thigh.x[i], once.thigh.y[i], once.thigh.z[i]});
  }
  const auto twice = synchronize(c2, t2, "p");
  REQUIRE(twice.chest.size() == once.chest.size());
  for (std::size_t i = 0; i < once.chest.size(); ++i) {
    CHECK(twice.chest.x[i] == once.chest.x[i]);
    CHECK(twice.thigh.x[i] == once.thigh.x[i]);
  }
}

TEST_CASE("synchronize rejects disjoint spans") {
  const auto chest = recording_on_grid(30.0, 0.0, 301);   // [0, 10]
  const auto thigh = recording_on_grid(30.0, 20.0, 301);  // [20, 30]
  CHECK_THROWS_AS(synchronize(chest, thigh, "p"), SyncError);
}

TEST_CASE("gaps up to 1 s are linearly interpolated") {
  auto chest = recording_on_grid(30.0, 0.0, 301, [](double t) { return t; });
  SensorRecording thigh;
  thigh.sampling_rate_hz = 30.0;
  for (const auto& s : chest.samples) {
    if (s.timestamp_s > 5.0 && s.timestamp_s < 5.8) continue;  // 0.8 s hole
    thigh.samples.push_back(s);
  }
  const auto synced = synchronize(chest, thigh, "p");
  for (std::size_t i = 0; i < synced.thigh.size(); ++i) {
    const double t = synced.origin_s + static_cast<double>(i) / 30.0;
    CHECK(synced.thigh.x[i] == doctest::Approx(t).epsilon(1e-9));
  }
}

TEST_CASE("gaps over 1 s are rejected with the interval") {
  auto chest = recording_on_grid(30.0, 0.0, 301);
  SensorRecording thigh;
  thigh.sampling_rate_hz = 30.0;
  for (const auto& s : chest.samples) {
    if (s.timestamp_s > 5.0 && s.timestamp_s < 6.3) continue;  // 1.3 s hole
    thigh.samples.push_back(s);
  }
  try {
    synchronize(chest, thigh, "p");
    FAIL("expected GapError");
  } catch (const GapError& e) {
    CHECK(contains_row(e, "5.0") == "");
  }
}

namespace {

SyncedRecording synced_seconds(double seconds) {
  const auto n = static_cast<std::size_t>(seconds * 30.0) + 1;
  const auto rec = recording_on_grid(30.0, 0.0, n);
  return synchronize(rec, rec, "p7");
}

}  // namespace

TEST_CASE("attach_labels keeps annotated complete minutes") {
  AnnotationSet ann;
  ann.patient_id = "p7";
  ann.labels = {{0, Label::kLyingNoEm}, {1, Label::kLyingEm}, {2, Label::kLyingNoEm}};

  SUBCASE("full coverage") {
    const auto labeled = attach_labels(synced_seconds(180.0), ann);
    REQUIRE(labeled.minutes.size() == 3);
    CHECK(labeled.minutes[1].label == Label::kLyingEm);
  }
  SUBCASE("annotation for one minute only") {
    AnnotationSet only1;
    only1.patient_id = "p7";
    only1.labels = {{1, Label::kLyingEm}};
    const auto labeled = attach_labels(synced_seconds(180.0), only1);
    REQUIRE(labeled.minutes.size() == 1);
    CHECK(labeled.minutes[0].minute_index == 1);
  }
  SUBCASE("incomplete trailing minute dropped") {
    const auto labeled = attach_labels(synced_seconds(150.0), ann);
    CHECK(labeled.minutes.size() == 2);
  }
  SUBCASE("patient id mismatch") {
    AnnotationSet other = ann;
    other.patient_id = "p8";
    CHECK_THROWS_AS(attach_labels(synced_seconds(180.0), other), IdentityError);
  }
}

TEST_CASE("annotation parsing validates labels and duplicates") {
  std::istringstream ok("minute,label\n0,0\n1,1\n");
  const auto ann = parse_annotations(ok, "p");
  REQUIRE(ann.labels.size() == 2);
  CHECK(ann.labels[1].second == Label::kLyingEm);

  std::istringstream bad_label("minute,label\n0,2\n");
  CHECK_THROWS_AS(parse_annotations(bad_label, "p"), ParseError);
  std::istringstream dup("minute,label\n0,1\n0,0\n");
  CHECK_THROWS_AS(parse_annotations(dup, "p"), ParseError);
}
