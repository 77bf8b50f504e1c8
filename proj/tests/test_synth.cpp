#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "emrec/dsp.hpp"
#include "emrec/error.hpp"
#include "emrec/features.hpp"
#include "emrec/ingest.hpp"
#include "emrec/synth.hpp"
#include "emrec/windowing.hpp"
#include "test_util.hpp"

using namespace emrec;
using emrec::test::rel_close;

namespace {

SynthConfig tiny(int patients = 2, int minutes = 3, std::uint64_t seed = 7) {
  SynthConfig cfg;
  cfg.n_patients = patients;
  cfg.minutes_per_patient = minutes;
  cfg.seed = seed;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const char* name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("random rotations are orthonormal, proper, and uniform") {
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat3 r = random_rotation(rng);
    const Mat3 rtr = r.transposed() * r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(rtr.m[i][j] - (i == j ? 1.0 : 0.0)) < 1e-12);
    CHECK(std::abs(r.det() - 1.0) < 1e-12);
  }

  // Monte-Carlo uniformity: rotated unit-z vectors average out.
  Vec3 mean{0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = random_rotation(rng).apply({0.0, 0.0, 1.0});
    mean.x += v.x;
    mean.y += v.y;
    mean.z += v.z;
  }
  mean.x /= n;
  mean.y /= n;
  mean.z /= n;
  CHECK(std::sqrt(mean.x * mean.x + mean.y * mean.y + mean.z * mean.z) <= 0.05);
}

TEST_CASE("generation is deterministic and file output is byte-identical") {
  const auto a = generate_dataset(tiny());
  const auto b = generate_dataset(tiny());
  REQUIRE(a.size() == b.size());
  for (std::size_t p = 0; p < a.size(); ++p) {
    CHECK(a[p].recording.chest.x == b[p].recording.chest.x);
    CHECK(a[p].recording.thigh.z == b[p].recording.thigh.z);
    CHECK(a[p].schedule.size() == b[p].schedule.size());
  }

  TempDir da("emrec_synth_a"), db("emrec_synth_b");
  write_dataset(da.path, a);
  write_dataset(db.path, b);
  for (const char* suffix : {"_chest.csv", "_thigh.csv", "_labels.csv", "_truth.csv"}) {
    const auto fa = slurp(da.path / ("p01" + std::string(suffix)));
    REQUIRE(!fa.empty());
    CHECK(fa == slurp(db.path / ("p01" + std::string(suffix))));
  }
}

TEST_CASE("emitted files round-trip through ingest") {
  const auto patients = generate_dataset(tiny(2, 2, 9));
  TempDir dir("emrec_synth_rt");
  write_dataset(dir.path, patients);

  const auto loaded = load_dataset(dir.path);
  REQUIRE(loaded.size() == 2);
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& gen = patients[p].recording;
    const auto& back = loaded[p];
    CHECK(back.patient_id == gen.patient_id);
    REQUIRE(back.minutes.size() == gen.minutes.size());
    for (std::size_t m = 0; m < gen.minutes.size(); ++m)
      CHECK(back.minutes[m].label == gen.minutes[m].label);
    REQUIRE(back.chest.size() == gen.chest.size());
    for (std::size_t i = 0; i < gen.chest.size(); i += 97)
      CHECK(back.chest.x[i] == doctest::Approx(gen.chest.x[i]).epsilon(1e-5));
  }
}

TEST_CASE("label schedule round-trips and mix rate drives splicing") {
  SUBCASE("no mixing") {
    const auto patients = generate_dataset(tiny(2, 8, 10));
    for (const auto& p : patients) {
      REQUIRE(p.schedule.size() == 8);
      for (const auto& t : p.schedule) {
        CHECK(!t.spliced);
        CHECK(p.recording.minutes[static_cast<std::size_t>(t.minute)].label == t.label);
      }
    }
  }
  SUBCASE("full mixing") {
    auto cfg = tiny(2, 8, 11);
    cfg.label_mix_rate = 1.0;
    const auto patients = generate_dataset(cfg);
    for (const auto& p : patients)
      for (const auto& t : p.schedule) {
        CHECK(t.spliced);
        CHECK(t.splice_duration_s >= 10.0);
        CHECK(t.splice_duration_s <= 30.0);
        CHECK(t.splice_start_s >= 0.0);
        CHECK(t.splice_start_s + t.splice_duration_s <= 60.0);
      }
  }
}

TEST_CASE("resting gravity magnitude stays near 1 g in the low band") {
  auto cfg = tiny(1, 6, 12);
  cfg.noise_std_g = 0.0;
  cfg.class_balance = 0.0;  // all minutes are no-EM
  const auto patients = generate_dataset(cfg);
  const auto epochs = split_epochs(patients.front().recording);
  REQUIRE(!epochs.empty());
  for (const Epoch& epoch : epochs) {
    const auto bands = band_split(epoch.chest);
    const auto mag = magnitude_series(bands.low);
    std::size_t inside = 0;
    for (double v : mag)
      if (v >= 0.9 && v <= 1.1) ++inside;
    CHECK(static_cast<double>(inside) >= 0.95 * static_cast<double>(mag.size()));
  }
}

TEST_CASE("classes separate by at least 3 pooled standard deviations") {
  auto cfg = tiny(3, 10, 13);
  const auto patients = generate_dataset(cfg);

  std::vector<std::vector<double>> rows[2];
  for (const auto& p : patients)
    for (const Epoch& epoch : split_epochs(p.recording))
      for (const Segment& seg : segment_epoch(epoch, 10.0))
        rows[label_index(seg.label)].push_back(segment_features(seg));
  REQUIRE(!rows[0].empty());
  REQUIRE(!rows[1].empty());

  bool separable = false;
  for (std::size_t f = 0; f < 64 && !separable; ++f) {
    double mean[2] = {0, 0}, var[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
      for (const auto& r : rows[c]) mean[c] += r[f];
      mean[c] /= static_cast<double>(rows[c].size());
      for (const auto& r : rows[c]) var[c] += (r[f] - mean[c]) * (r[f] - mean[c]);
      var[c] /= static_cast<double>(rows[c].size());
    }
    const double pooled = std::sqrt((var[0] + var[1]) / 2.0);
    if (pooled > 0.0 && std::abs(mean[1] - mean[0]) >= 3.0 * pooled) separable = true;
  }
  CHECK(separable);
}

TEST_CASE("features match between rotated and unrotated generation") {
  auto with = tiny(2, 2, 14);
  auto without = with;
  without.apply_rotations = false;

  const auto rotated = generate_dataset(with);
  const auto plain = generate_dataset(without);
  for (std::size_t p = 0; p < rotated.size(); ++p) {
    const auto er = split_epochs(rotated[p].recording);
    const auto ep = split_epochs(plain[p].recording);
    REQUIRE(er.size() == ep.size());
    for (std::size_t m = 0; m < er.size(); ++m) {
      const auto sr = segment_epoch(er[m], 10.0);
      const auto sp = segment_epoch(ep[m], 10.0);
      const auto fr = segment_features(sr[3]);
      const auto fp = segment_features(sp[3]);
      for (std::size_t i = 0; i < 64; ++i) CHECK(rel_close(fr[i], fp[i], 1e-6));
    }
  }
}

TEST_CASE("profile constraints are enforced") {
  auto bad_residual = tiny();
  bad_residual.noem_amp_max_g = 0.08;
  CHECK_THROWS_AS(generate_dataset(bad_residual), ParameterError);

  auto weak_bursts = tiny();
  weak_bursts.em_amp_min_g = 0.1;
  CHECK_THROWS_AS(generate_dataset(weak_bursts), ParameterError);

  auto aliased = tiny();
  aliased.em_freq_max_hz = 16.0;
  CHECK_THROWS_AS(generate_dataset(aliased), ParameterError);

  auto bad_rate = tiny();
  bad_rate.label_mix_rate = 1.5;
  CHECK_THROWS_AS(generate_dataset(bad_rate), ParameterError);

  auto bad_duty = tiny();
  bad_duty.em_duty_max = 1.2;
  CHECK_THROWS_AS(generate_dataset(bad_duty), ParameterError);

  auto bad_cycle = tiny();
  bad_cycle.em_cycle_min_s = 0.5;
  CHECK_THROWS_AS(generate_dataset(bad_cycle), ParameterError);
}

TEST_CASE("EM minutes carry strong high-band motion, no-EM minutes do not") {
  auto cfg = tiny(1, 10, 15);
  cfg.noise_std_g = 0.0;
  const auto patients = generate_dataset(cfg);
  int seen[2] = {0, 0};
  for (const Epoch& epoch : split_epochs(patients.front().recording)) {
    const auto bands = band_split(epoch.thigh);
    const auto mag = magnitude_series(bands.high);
    double peak = 0.0;
    for (double v : mag) peak = std::max(peak, v);
    if (epoch.label == Label::kLyingEm) {
      CHECK(peak >= 0.25);
    } else {
      CHECK(peak <= 0.1);
    }
    ++seen[label_index(epoch.label)];
  }
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);
}
