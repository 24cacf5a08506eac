#include "spatialforge/forge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "spatialforge/audio.hpp"
#include "spatialforge/render.hpp"
#include "spatialforge/trajectory_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spatialforge {

namespace {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string file_stem(std::string_view id) {
  std::string out(id);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

SourceRecord parse_record(const nlohmann::json& row, const std::filesystem::path& base) {
  if (!row.is_object()) throw std::invalid_argument("line is not a JSON object");
  for (const char* key : {"id", "audio", "label", "onset_s", "offset_s", "num_events"}) {
    if (!row.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  }
  SourceRecord r;
  r.id = row.at("id").get<std::string>();
  r.audio_path = base / row.at("audio").get<std::string>();
  r.label = row.at("label").get<std::string>();
  r.onset_s = row.at("onset_s").get<double>();
  r.offset_s = row.at("offset_s").get<double>();
  if (!row.at("num_events").is_number_integer()) throw std::invalid_argument("num_events must be an integer");
  r.num_events = row.at("num_events").get<int>();
  if (r.id.empty()) throw std::invalid_argument("empty id");
  if (!std::isfinite(r.onset_s) || !std::isfinite(r.offset_s) || r.onset_s < 0.0) {
    throw std::invalid_argument("onset_s must be a non-negative number");
  }
  if (!(r.onset_s < r.offset_s)) throw std::invalid_argument("offset_s must be greater than onset_s");
  if (r.num_events < 1) throw std::invalid_argument("num_events must be at least 1");
  return r;
}

json spec_side(const CategoryTriple& t) {
  return {{"azimuth", category(t.azimuth).name},
          {"elevation", category(t.elevation).name},
          {"distance", category(t.distance).name}};
}

json position(const SphericalPos& p) {
  return {{"azimuth_deg", p.azimuth_deg}, {"elevation_deg", p.elevation_deg}, {"distance_m", p.distance_m}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path, bool strict) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest " + path.string());
  const auto base = path.parent_path();

  Manifest m;
  std::map<std::string, std::vector<std::size_t>> lines_by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto record = parse_record(nlohmann::json::parse(line), base);
      lines_by_id[record.id].push_back(line_no);
      m.records.push_back(std::move(record));
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      if (strict) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + msg);
      m.skipped.push_back({line_no, msg});
    }
  }

  std::string dups;
  for (const auto& [id, lines] : lines_by_id) {
    if (lines.size() < 2) continue;
    dups += "\n  '" + id + "' on lines";
    for (auto l : lines) dups += " " + std::to_string(l);
  }
  if (!dups.empty()) throw std::runtime_error(path.string() + ": duplicate ids:" + dups);
  return m;
}

std::vector<SourceRecord> filter_single_source(std::span<const SourceRecord> records) {
  std::vector<SourceRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const SourceRecord& r) { return r.num_events == 1; });
  return out;
}

CategoryTriple sample_category_triple(Rng& rng) {
  CategoryTriple t;
  for (auto kind : kAllKinds) {
    const auto options = categories_of(kind);
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    t.set(kind, options[pick(rng)]);
  }
  return t;
}

Rng job_rng(std::uint64_t seed, std::string_view record_id, std::uint32_t variant) {
  const std::uint64_t h = fnv1a(record_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32), variant};
  return Rng(seq);
}

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

std::map<std::string, Split> assign_splits(std::span<const SourceRecord> records, double test_frac,
                                           std::uint64_t seed) {
  if (!(test_frac >= 0.0 && test_frac <= 1.0)) throw std::invalid_argument("test_frac must lie in [0, 1]");
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5011u};
  Rng rng(seq);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(ids.size())));
  std::map<std::string, Split> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = i < n_test ? Split::Test : Split::Train;
  return out;
}

std::size_t ForgeResult::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [split](const auto& r) { return r.split == split; }));
}

std::string index_row(const DatasetRecord& r) {
  json omitted = json::array();
  for (auto side : {Side::Start, Side::End}) {
    for (auto kind : kAllKinds) {
      if (r.spec.omitted.contains(side, kind)) omitted.push_back(std::string(to_string(side)) + "." + std::string(to_string(kind)));
    }
  }
  json row = {
      {"id", r.id},
      {"source_id", r.source.id},
      {"variant", r.variant},
      {"label", r.source.label},
      {"onset_s", r.source.onset_s},
      {"offset_s", r.source.offset_s},
      {"split", to_string(r.split)},
      {"caption", r.caption},
      {"start", spec_side(r.spec.start)},
      {"end", spec_side(r.spec.end)},
      {"omitted", omitted},
      {"start_pos", position(r.endpoints.start)},
      {"end_pos", position(r.endpoints.end)},
      {"trajectory", r.trajectory_path.generic_string()},
      {"binaural", r.binaural_path.generic_string()},
  };
  return row.dump();
}

ForgeResult forge(std::span<const SourceRecord> records, const HrirSet& hrirs, const CaptionLexicon& lexicon,
                  const ForgeConfig& config) {
  if (config.variants == 0) throw std::invalid_argument("forge: variants must be at least 1");
  if (!(config.omission_prob >= 0.0 && config.omission_prob <= 1.0)) {
    throw std::invalid_argument("forge: omission probability must lie in [0, 1]");
  }
  std::set<std::string> stems;
  for (const auto& r : records) {
    if (r.num_events != 1) throw std::invalid_argument("forge: record '" + r.id + "' is not single-source");
    if (!stems.insert(file_stem(r.id)).second) {
      throw std::invalid_argument("forge: record id '" + r.id + "' collides with another after filename mapping");
    }
  }
  const auto splits = assign_splits(records, config.test_frac, config.seed);

  std::filesystem::create_directories(config.out_dir / "audio");
  std::filesystem::create_directories(config.out_dir / "traj");

  const std::size_t n = records.size();
  std::vector<std::vector<DatasetRecord>> produced(n);
  std::vector<std::vector<ForgeFailure>> failed(n);

  const auto run_record = [&](std::size_t i) {
    const auto& src = records[i];
    AudioClip mono;
    try {
      mono = downmix_to_mono(read_wav(src.audio_path));
    } catch (const std::exception& e) {
      for (std::uint32_t v = 0; v < config.variants; ++v) {
        failed[i].push_back({src.id + "_v" + std::to_string(v), e.what()});
      }
      return;
    }
    for (std::uint32_t v = 0; v < config.variants; ++v) {
      DatasetRecord rec;
      rec.id = src.id + "_v" + std::to_string(v);
      try {
        Rng rng = job_rng(config.seed, src.id, v);
        rec.source = src;
        rec.variant = v;
        rec.split = splits.at(src.id);
        rec.spec.start = sample_category_triple(rng);
        rec.spec.end = sample_category_triple(rng);
        rec.endpoints = sample_endpoints(rec.spec.start, rec.spec.end, rng);
        const EventWindow window{src.onset_s, src.offset_s};
        if (window.t1_s > mono.duration_s() + 1e-9) {
          throw std::invalid_argument("event window ends after the clip (" + std::to_string(mono.duration_s()) + " s)");
        }
        const Trajectory traj = linear_trajectory(rec.endpoints, window, mono.duration_s());
        auto caption = generate_caption(src.label, rec.spec, window, lexicon, rng, config.omission_prob);
        rec.caption = std::move(caption.text);
        rec.spec = caption.spec;

        const AudioClip binaural = render_binaural(mono, traj, hrirs);
        const std::string stem = file_stem(rec.id);
        rec.trajectory_path = std::filesystem::path("traj") / (stem + ".csv");
        rec.binaural_path = std::filesystem::path("audio") / (stem + ".wav");
        write_trajectory_csv(config.out_dir / rec.trajectory_path, traj);
        write_wav(config.out_dir / rec.binaural_path, binaural, SampleFormat::Float32);
        produced[i].push_back(std::move(rec));
      } catch (const std::exception& e) {
        failed[i].push_back({rec.id, e.what()});
      }
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(n);
#ifdef _OPENMP
  const int threads = config.jobs > 0 ? config.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) run_record(static_cast<std::size_t>(i));
#else
  for (std::ptrdiff_t i = 0; i < count; ++i) run_record(static_cast<std::size_t>(i));
#endif

  ForgeResult result;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& r : produced[i]) result.records.push_back(std::move(r));
    for (auto& f : failed[i]) result.failures.push_back(std::move(f));
  }
  std::sort(result.records.begin(), result.records.end(), [](const auto& a, const auto& b) {
    return a.source.id != b.source.id ? a.source.id < b.source.id : a.variant < b.variant;
  });
  for (const auto& [id, split] : splits) (split == Split::Test ? result.test_clips : result.train_clips)++;

  std::string index;
  for (const auto& r : result.records) index += index_row(r) + "\n";
  write_text(config.out_dir / "index.jsonl", index);

  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"id", f.id}, {"message", f.message}});
  const json summary = {
      {"source_records", n},
      {"samples", result.records.size()},
      {"train_samples", result.count(Split::Train)},
      {"test_samples", result.count(Split::Test)},
      {"train_clips", result.train_clips},
      {"test_clips", result.test_clips},
      {"failures", failures},
      {"seed", config.seed},
      {"config",
       {{"out_dir", config.out_dir.generic_string()},
        {"variants", config.variants},
        {"test_frac", config.test_frac},
        {"omission_prob", config.omission_prob},
        {"hrir_sample_rate_hz", hrirs.sample_rate_hz()},
        {"hrir_count", hrirs.size()}}},
  };
  write_text(config.out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace spatialforge
