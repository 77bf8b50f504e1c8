#include "emrec/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "emrec/error.hpp"
#include "emrec/windowing.hpp"

namespace emrec {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / n, v.y / n, v.z / n};
}

Vec3 random_unit_vector(Rng& rng) {
  // Rejection from the cube keeps the direction distribution isotropic.
  for (;;) {
    const Vec3 v{rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0),
                 rng.next_range(-1.0, 1.0)};
    const double n2 = v.x * v.x + v.y * v.y + v.z * v.z;
    if (n2 > 1e-4 && n2 <= 1.0) return normalized(v);
  }
}

void validate(const SynthConfig& cfg) {
  if (cfg.n_patients < 1) throw ParameterError("n_patients must be >= 1");
  if (cfg.minutes_per_patient < 1) throw ParameterError("minutes_per_patient must be >= 1");
  if (cfg.fs_hz <= 0.0) throw ParameterError("fs must be positive");
  if (cfg.class_balance < 0.0 || cfg.class_balance > 1.0)
    throw ParameterError("class_balance must lie in [0, 1]");
  if (cfg.label_mix_rate < 0.0 || cfg.label_mix_rate > 1.0)
    throw ParameterError("label_mix_rate must lie in [0, 1]");
  if (cfg.noise_std_g < 0.0) throw ParameterError("noise_std must be non-negative");
  if (cfg.em_freq_max_hz >= cfg.fs_hz / 2.0)
    throw ParameterError("EM burst frequencies must stay below Nyquist");
  if (cfg.noem_amp_max_g > 0.05)
    throw ParameterError("no-EM residual motion must stay at or below 0.05 g");
  if (cfg.em_amp_min_g < 0.3)
    throw ParameterError("EM bursts must reach at least 0.3 g");
  if (!(cfg.em_duty_min > 0.0) || !(cfg.em_duty_max < 1.0) ||
      cfg.em_duty_min > cfg.em_duty_max)
    throw ParameterError("EM duty range must satisfy 0 < min <= max < 1");
  if (cfg.em_cycle_min_s < 2.0 || cfg.em_cycle_min_s > cfg.em_cycle_max_s)
    throw ParameterError("EM cycle length must be at least 2 s");
}

// Per-patient movement style: a duty sub-band inside the global bounds.
// Centers are stratified across the patient roster (with a small seeded
// jitter), so every generated cohort spans the whole intensity spectrum and
// pooled minute statistics transfer poorly between patients. The
// burst-vs-quiet contrast every window relies on stays patient-independent.
struct PatientStyle {
  double duty_lo = 0.0, duty_hi = 1.0;
};

PatientStyle patient_style(const SynthConfig& cfg, Rng& rng, int patient_index) {
  PatientStyle style;
  const double dw = std::min(cfg.em_patient_duty_halfwidth,
                             (cfg.em_duty_max - cfg.em_duty_min) / 2.0);
  const double lo = cfg.em_duty_min + dw;
  const double hi = cfg.em_duty_max - dw;
  const double stratum =
      (static_cast<double>(patient_index) + 0.5) / static_cast<double>(cfg.n_patients);
  const double jitter = rng.next_range(-0.03, 0.03);
  const double duty_center = std::clamp(lo + stratum * (hi - lo) + jitter, lo, hi);
  style.duty_lo = duty_center - dw;
  style.duty_hi = duty_center + dw;
  return style;
}

// EM content: an on/off burst train over [start, start+span). The duty is
// drawn once per stretch (within the patient's band) and random-walks
// slowly across cycles, so a pooled minute confounds duty, amplitude, and
// activity coverage while a short window still reads the local intensity
// directly. The stretch ramps in and out: activity builds up over the first
// seconds and fades at the end, so a window that barely clips a stretch
// sees weak evidence. Interior bursts are full strength, keeping at least
// one burst at >= em_amp_min_g. Cycles stay shorter than any supported
// window, so every window over the interior of an EM stretch overlaps a
// burst.
void pack_em_bursts(const SynthConfig& cfg, const PatientStyle& style, Rng& rng,
                    double start_s, double span_s, std::vector<BurstSpec>& out) {
  if (span_s < 4.0) return;  // too short for a burst train; residual only
  const double duty_lo = style.duty_lo;
  const double duty_hi = style.duty_hi;
  // amplitude band drawn per stretch, independent of duty
  const double amp_scale = rng.next_range(0.0, 1.0);
  const double amp_lo =
      cfg.em_amp_min_g + amp_scale * 0.6 * (cfg.em_amp_max_g - cfg.em_amp_min_g);
  const double amp_hi =
      std::min(amp_lo + 0.4 * (cfg.em_amp_max_g - cfg.em_amp_min_g), cfg.em_amp_max_g);

  // per-stretch frequency band; cycles draw inside it
  const double freq_lo =
      rng.next_range(cfg.em_freq_min_hz, std::max(cfg.em_freq_min_hz, cfg.em_freq_max_hz - 1.0));
  const double freq_hi = std::min(freq_lo + 1.0, cfg.em_freq_max_hz);

  // The stretch settles in and fades out; short stretches keep a
  // full-strength interior.
  const double lead = rng.next_range(1.5, 2.5);
  const double tail = rng.next_range(1.5, 2.5);
  const double train_begin = start_s + lead;
  const double train_end = std::max(start_s + span_s - tail, train_begin + 3.0);
  const double ramp = std::clamp((train_end - train_begin - 8.0) / 3.0, 1.0, 4.0);

  double duty = rng.next_range(duty_lo, duty_hi);
  double cursor = train_begin + rng.next_range(0.0, 0.5);
  while (cursor < train_end - 0.5) {
    const double cycle = rng.next_range(cfg.em_cycle_min_s, cfg.em_cycle_max_s);
    BurstSpec b;
    b.start_s = cursor;
    b.duration_s = std::min(cycle * duty, train_end - cursor);
    b.frequency_hz = rng.next_range(freq_lo, freq_hi);
    b.phase = rng.next_range(0.0, 2.0 * kPi);
    b.chest_dir = random_unit_vector(rng);
    b.thigh_dir = random_unit_vector(rng);

    const double center = b.start_s + b.duration_s / 2.0;
    const double envelope = std::clamp(
        std::min((center - train_begin) / ramp, (train_end - center) / ramp), 0.15, 1.0);
    b.chest_amp_g = envelope * rng.next_range(amp_lo, amp_hi);
    b.thigh_amp_g = envelope * rng.next_range(amp_lo, amp_hi);
    out.push_back(b);
    cursor += cycle;
    duty = std::clamp(duty + rng.next_range(-0.06, 0.06), duty_lo, duty_hi);
  }
}

// No-EM content: one low-amplitude oscillation spanning the stretch.
void make_noem_residual(const SynthConfig& cfg, Rng& rng, double start_s, double span_s,
                        std::vector<BurstSpec>& out) {
  BurstSpec b;
  b.start_s = start_s;
  b.duration_s = span_s;
  b.frequency_hz = rng.next_range(0.5, 1.5);
  b.phase = rng.next_range(0.0, 2.0 * kPi);
  b.chest_dir = random_unit_vector(rng);
  b.thigh_dir = random_unit_vector(rng);
  b.chest_amp_g = rng.next_range(0.2 * cfg.noem_amp_max_g, cfg.noem_amp_max_g);
  b.thigh_amp_g = rng.next_range(0.2 * cfg.noem_amp_max_g, cfg.noem_amp_max_g);
  out.push_back(b);
}

ActivityProfile make_profile(const SynthConfig& cfg, const PatientStyle& style, Rng& rng,
                             Label cls, const Vec3& chest_gravity,
                             const Vec3& thigh_gravity, double start_s, double span_s) {
  ActivityProfile profile;
  profile.class_id = cls;
  profile.chest_gravity = chest_gravity;
  profile.thigh_gravity = thigh_gravity;
  // Both classes carry the low-grade residual floor; only EM adds bursts.
  make_noem_residual(cfg, rng, start_s, span_s, profile.bursts);
  if (cls == Label::kLyingEm)
    pack_em_bursts(cfg, style, rng, start_s, span_s, profile.bursts);
  return profile;
}

// Hann-enveloped sinusoid contribution of burst `b` at absolute time t.
double burst_value(const BurstSpec& b, double t) {
  if (t < b.start_s || t >= b.start_s + b.duration_s) return 0.0;
  const double u = (t - b.start_s) / b.duration_s;
  const double hann = 0.5 * (1.0 - std::cos(2.0 * kPi * u));
  return hann * std::sin(2.0 * kPi * b.frequency_hz * (t - b.start_s) + b.phase);
}

struct SensorFrame {
  Vec3 gravity;      // per-minute direction, unit norm
  Vec3 breath_dir;   // fixed per patient
};

}  // namespace

Mat3 random_rotation(Rng& rng) {
  const double u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  const double u3 = rng.next_unit();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double qx = a * std::sin(2.0 * kPi * u2);
  const double qy = a * std::cos(2.0 * kPi * u2);
  const double qz = b * std::sin(2.0 * kPi * u3);
  const double qw = b * std::cos(2.0 * kPi * u3);

  Mat3 r;
  r.m[0][0] = 1.0 - 2.0 * (qy * qy + qz * qz);
  r.m[0][1] = 2.0 * (qx * qy - qz * qw);
  r.m[0][2] = 2.0 * (qx * qz + qy * qw);
  r.m[1][0] = 2.0 * (qx * qy + qz * qw);
  r.m[1][1] = 1.0 - 2.0 * (qx * qx + qz * qz);
  r.m[1][2] = 2.0 * (qy * qz - qx * qw);
  r.m[2][0] = 2.0 * (qx * qz - qy * qw);
  r.m[2][1] = 2.0 * (qy * qz + qx * qw);
  r.m[2][2] = 1.0 - 2.0 * (qx * qx + qy * qy);
  return r;
}

namespace {

SynthPatient generate_patient(const SynthConfig& cfg, int patient_index,
                              const std::string& patient_id) {
  Rng rng(stable_hash(cfg.seed, static_cast<std::uint64_t>(patient_index)));

  SynthPatient p;
  p.chest_rotation = random_rotation(rng);
  p.thigh_rotation = random_rotation(rng);

  SensorFrame chest, thigh;
  chest.gravity = normalized({rng.next_range(-0.15, 0.15), rng.next_range(-0.15, 0.15), 1.0});
  thigh.gravity = normalized({rng.next_range(-0.15, 0.15), 0.3 + rng.next_range(-0.1, 0.1), 0.9});
  chest.breath_dir = random_unit_vector(rng);
  thigh.breath_dir = random_unit_vector(rng);
  const double breath_phase = rng.next_range(0.0, 2.0 * kPi);
  const PatientStyle style = patient_style(cfg, rng, patient_index);

  const std::size_t spm = samples_per_minute(cfg.fs_hz);
  const auto minutes = static_cast<std::size_t>(cfg.minutes_per_patient);

  LabeledRecording& rec = p.recording;
  rec.patient_id = patient_id;
  rec.sampling_rate_hz = cfg.fs_hz;
  rec.origin_s = 0.0;
  rec.chest.fs_hz = rec.thigh.fs_hz = cfg.fs_hz;
  const std::size_t total = spm * minutes;
  rec.chest.x.resize(total);
  rec.chest.y.resize(total);
  rec.chest.z.resize(total);
  rec.thigh.x.resize(total);
  rec.thigh.y.resize(total);
  rec.thigh.z.resize(total);

  for (std::size_t m = 0; m < minutes; ++m) {
    const Label label =
        rng.next_unit() < cfg.class_balance ? Label::kLyingEm : Label::kLyingNoEm;
    const Label opposite =
        label == Label::kLyingEm ? Label::kLyingNoEm : Label::kLyingEm;
    const double minute_start = static_cast<double>(m) * 60.0;

    MinuteTruth truth;
    truth.minute = static_cast<std::int64_t>(m);
    truth.label = label;
    truth.spliced = rng.next_unit() < cfg.label_mix_rate;
    if (truth.spliced) {
      truth.splice_duration_s = rng.next_range(10.0, 30.0);
      truth.splice_start_s = rng.next_range(0.0, 60.0 - truth.splice_duration_s);
    }

    // Per-minute posture jitter; the gravity direction keeps unit norm.
    const auto jitter = [&rng](const Vec3& base) {
      return normalized({base.x + rng.next_range(-0.02, 0.02),
                         base.y + rng.next_range(-0.02, 0.02),
                         base.z + rng.next_range(-0.02, 0.02)});
    };
    const Vec3 g_chest = jitter(chest.gravity);
    const Vec3 g_thigh = jitter(thigh.gravity);

    const double splice_begin = minute_start + truth.splice_start_s;
    const double splice_end = splice_begin + truth.splice_duration_s;

    const ActivityProfile primary =
        make_profile(cfg, style, rng, label, g_chest, g_thigh, minute_start, 60.0);
    ActivityProfile splice;
    if (truth.spliced)
      splice = make_profile(cfg, style, rng, opposite, g_chest, g_thigh, splice_begin,
                            truth.splice_duration_s);

    for (std::size_t k = 0; k < spm; ++k) {
      const std::size_t at = m * spm + k;
      const double t = minute_start + static_cast<double>(k) / cfg.fs_hz;
      // Spliced content crossfades in and out over one second, so the
      // activity switch leaves no spectral step.
      double splice_w = 0.0;
      if (truth.spliced) {
        constexpr double kFadeS = 0.5;
        splice_w = std::clamp(
            std::min((t - (splice_begin - kFadeS)), ((splice_end + kFadeS) - t)), 0.0, 1.0);
      }

      const double breath =
          std::sin(2.0 * kPi * cfg.breathing_freq_hz * t + breath_phase) * cfg.breathing_amp_g;
      Vec3 chest_v{g_chest.x + breath * chest.breath_dir.x,
                   g_chest.y + breath * chest.breath_dir.y,
                   g_chest.z + breath * chest.breath_dir.z};
      Vec3 thigh_v{g_thigh.x + breath * thigh.breath_dir.x,
                   g_thigh.y + breath * thigh.breath_dir.y,
                   g_thigh.z + breath * thigh.breath_dir.z};
      // burst timing is shared between sensors; direction and scale are not
      const auto add_content = [&](const std::vector<BurstSpec>& content, double weight) {
        if (weight <= 0.0) return;
        for (const BurstSpec& b : content) {
          const double v = burst_value(b, t) * weight;
          chest_v.x += v * b.chest_amp_g * b.chest_dir.x;
          chest_v.y += v * b.chest_amp_g * b.chest_dir.y;
          chest_v.z += v * b.chest_amp_g * b.chest_dir.z;
          thigh_v.x += v * b.thigh_amp_g * b.thigh_dir.x;
          thigh_v.y += v * b.thigh_amp_g * b.thigh_dir.y;
          thigh_v.z += v * b.thigh_amp_g * b.thigh_dir.z;
        }
      };
      add_content(primary.bursts, 1.0 - splice_w);
      add_content(splice.bursts, splice_w);

      chest_v.x += rng.next_gaussian() * cfg.noise_std_g;
      chest_v.y += rng.next_gaussian() * cfg.noise_std_g;
      chest_v.z += rng.next_gaussian() * cfg.noise_std_g;
      thigh_v.x += rng.next_gaussian() * cfg.noise_std_g;
      thigh_v.y += rng.next_gaussian() * cfg.noise_std_g;
      thigh_v.z += rng.next_gaussian() * cfg.noise_std_g;

      if (cfg.apply_rotations) {
        chest_v = p.chest_rotation.apply(chest_v);
        thigh_v = p.thigh_rotation.apply(thigh_v);
      }
      rec.chest.x[at] = chest_v.x;
      rec.chest.y[at] = chest_v.y;
      rec.chest.z[at] = chest_v.z;
      rec.thigh.x[at] = thigh_v.x;
      rec.thigh.y[at] = thigh_v.y;
      rec.thigh.z[at] = thigh_v.z;
    }

    rec.minutes.push_back({truth.minute, label});
    p.schedule.push_back(truth);
  }
  return p;
}

std::string patient_name(int index, int n_patients) {
  int width = 2;
  for (int v = n_patients; v >= 100; v /= 10) ++width;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p%0*d", width, index + 1);
  return buf;
}

}  // namespace

std::vector<SynthPatient> generate_dataset(const SynthConfig& cfg) {
  validate(cfg);
  std::vector<SynthPatient> patients;
  patients.reserve(static_cast<std::size_t>(cfg.n_patients));
  for (int i = 0; i < cfg.n_patients; ++i)
    patients.push_back(generate_patient(cfg, i, patient_name(i, cfg.n_patients)));
  return patients;
}

namespace {

void write_sensor_csv(const std::filesystem::path& path, const TriaxialSeries& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "timestamp,x,y,z\n";
  char buf[160];
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = static_cast<double>(k) / s.fs_hz;
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", t, s.x[k], s.y[k], s.z[k]);
    out << buf;
  }
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, std::span<const SynthPatient> patients) {
  std::filesystem::create_directories(dir);
  for (const SynthPatient& p : patients) {
    const std::string& id = p.recording.patient_id;
    write_sensor_csv(dir / (id + "_chest.csv"), p.recording.chest);
    write_sensor_csv(dir / (id + "_thigh.csv"), p.recording.thigh);

    std::ofstream labels(dir / (id + "_labels.csv"));
    if (!labels) throw IoError("cannot write labels for " + id);
    labels << "minute,label\n";
    for (const auto& minute : p.recording.minutes)
      labels << minute.minute_index << ',' << label_index(minute.label) << '\n';

    std::ofstream truth(dir / (id + "_truth.csv"));
    if (!truth) throw IoError("cannot write truth for " + id);
    truth << "minute,label,spliced,splice_start_s,splice_dur_s\n";
    char buf[96];
    for (const MinuteTruth& t : p.schedule) {
      std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%.6f,%.6f\n",
                    static_cast<long long>(t.minute), label_index(t.label),
                    t.spliced ? 1 : 0, t.splice_start_s, t.splice_duration_s);
      truth << buf;
    }
  }
}

}  // namespace emrec
