#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "emrec/types.hpp"

namespace emrec {

// Parses a sensor CSV with header `timestamp,x,y,z`. Timestamps are either
// numeric seconds or ISO-8601 (converted to seconds since the Unix epoch).
// Row numbers in errors are 1-based and count the header.
SensorRecording parse_recording(std::istream& in, SensorPosition position,
                                double sampling_rate_hz = 30.0);

// Round-trip writer for parse_recording; values keep all 17 significant
// digits so parse(write(rec)) is bit-identical.
void write_recording(std::ostream& out, const SensorRecording& rec);

// Parses an annotation CSV with header `minute,label`, labels 0/1.
AnnotationSet parse_annotations(std::istream& in, std::string patient_id);
void write_annotations(std::ostream& out, const AnnotationSet& ann);

// Resamples both streams onto a shared 1/fs grid covering the intersection
// of their spans, starting at the later start time. Grid points take the
// nearest input sample; points inside a recording gap of at most 1 s are
// linearly interpolated per axis; longer gaps raise GapError.
SyncedRecording synchronize(const SensorRecording& chest, const SensorRecording& thigh,
                            std::string patient_id = "");

// Keeps every complete 60 s minute that has an annotation; unannotated and
// incomplete trailing minutes are dropped.
LabeledRecording attach_labels(const SyncedRecording& rec, const AnnotationSet& ann);

// Loads `<id>_chest.csv` + `<id>_thigh.csv` + `<id>_labels.csv` triples for
// every patient found in `dir`, sorted by patient id.
std::vector<LabeledRecording> load_dataset(const std::filesystem::path& dir,
                                           double sampling_rate_hz = 30.0);

// Timestamp field parser (numeric seconds or ISO-8601); exposed for tests.
double parse_timestamp(const std::string& field);

}  // namespace emrec
