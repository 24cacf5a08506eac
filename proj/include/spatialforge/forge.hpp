#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spatialforge/caption.hpp"
#include "spatialforge/hrir.hpp"
#include "spatialforge/spatial.hpp"

namespace spatialforge {

struct SourceRecord {
  std::string id;
  std::filesystem::path audio_path;  // resolved against the manifest directory
  std::string label;
  double onset_s = 0.0;
  double offset_s = 0.0;
  int num_events = 1;
};

struct ManifestIssue {
  std::size_t line;
  std::string message;
};

struct Manifest {
  std::vector<SourceRecord> records;
  std::vector<ManifestIssue> skipped;  // malformed lines dropped in lenient mode
};

/// Reads a JSONL manifest with fields id, audio, label, onset_s, offset_s,
/// num_events. Malformed lines are skipped and reported, or fatal when
/// `strict`. Duplicate ids are always fatal.
Manifest load_manifest(const std::filesystem::path& path, bool strict = false);

/// Keeps records with exactly one event, preserving order.
std::vector<SourceRecord> filter_single_source(std::span<const SourceRecord> records);

/// Independent uniform draw of one category per kind.
CategoryTriple sample_category_triple(Rng& rng);

/// Random stream for one (record, variant) job, independent of job order.
Rng job_rng(std::uint64_t seed, std::string_view record_id, std::uint32_t variant);

enum class Split { Train, Test };

std::string_view to_string(Split split);

/// Seeded by-clip split: round(test_frac * n) ids go to test, chosen by a
/// shuffle of the sorted ids.
std::map<std::string, Split> assign_splits(std::span<const SourceRecord> records, double test_frac,
                                           std::uint64_t seed);

struct DatasetRecord {
  std::string id;  // "<source id>_v<variant>"
  SourceRecord source;
  std::uint32_t variant = 0;
  MotionSpec spec;  // categories plus the attributes the caption omitted
  SpatialEndpoints endpoints;
  std::string caption;
  std::filesystem::path trajectory_path;  // relative to the output directory
  std::filesystem::path binaural_path;
  Split split = Split::Train;
};

struct ForgeConfig {
  std::filesystem::path out_dir;
  std::uint32_t variants = 10;
  double test_frac = 0.1;
  std::uint64_t seed = 0;
  double omission_prob = 0.5;
  int jobs = 0;  // 0 = OpenMP default
};

struct ForgeFailure {
  std::string id;
  std::string message;
};

struct ForgeResult {
  std::vector<DatasetRecord> records;  // sorted by (source id, variant)
  std::vector<ForgeFailure> failures;
  std::size_t train_clips = 0;
  std::size_t test_clips = 0;

  std::size_t count(Split split) const;
};

/// Builds the spatialized dataset: for every record and variant, draws start
/// and end categories, samples endpoints, synthesizes the trajectory, writes
/// a caption, renders binaural audio and persists
///   out_dir/audio/<id>.wav, out_dir/traj/<id>.csv,
///   out_dir/index.jsonl, out_dir/summary.json.
/// Job failures are collected rather than thrown.
ForgeResult forge(std::span<const SourceRecord> records, const HrirSet& hrirs, const CaptionLexicon& lexicon,
                  const ForgeConfig& config);

/// One index.jsonl row.
std::string index_row(const DatasetRecord& record);

}  // namespace spatialforge
