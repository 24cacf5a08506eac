#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spatialforge/audio.hpp"
#include "spatialforge/caption.hpp"
#include "spatialforge/forge.hpp"
#include "spatialforge/hrir.hpp"
#include "spatialforge/metrics.hpp"
#include "spatialforge/render.hpp"
#include "spatialforge/trajectory_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sf = spatialforge;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kError = 1, kPartial = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::string kDefaultLexicon = std::string(SPATIALFORGE_DATA_DIR) + "/lexicon.json";

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 0;
  bool strict = false;
};

json triple_json(const sf::CategoryTriple& t) {
  return {{"azimuth", sf::category(t.azimuth).name},
          {"elevation", sf::category(t.elevation).name},
          {"distance", sf::category(t.distance).name}};
}

json spec_json(const sf::MotionSpec& spec) {
  json omitted = json::array();
  for (auto side : {sf::Side::Start, sf::Side::End}) {
    for (auto kind : sf::kAllKinds) {
      if (spec.omitted.contains(side, kind)) {
        omitted.push_back(std::string(sf::to_string(side)) + "." + std::string(sf::to_string(kind)));
      }
    }
  }
  return {{"start", triple_json(spec.start)}, {"end", triple_json(spec.end)}, {"omitted", omitted}};
}

// "left,up,close" -> triple. Any order; every kind exactly once.
sf::CategoryTriple parse_triple(const std::string& text, const std::string& flag) {
  sf::CategoryTriple t;
  bool seen[3] = {false, false, false};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    bool matched = false;
    for (auto kind : sf::kAllKinds) {
      if (auto id = sf::find_category(kind, item)) {
        auto& s = seen[static_cast<int>(kind)];
        if (s) throw UsageError(flag + ": " + std::string(sf::to_string(kind)) + " given twice in '" + text + "'");
        s = true;
        t.set(kind, *id);
        matched = true;
        break;
      }
    }
    if (!matched) throw UsageError(flag + ": unknown category '" + item + "'");
  }
  for (auto kind : sf::kAllKinds) {
    if (!seen[static_cast<int>(kind)]) t.set(kind, sf::default_category(kind));
  }
  return t;
}

std::vector<sf::EventWindow> read_windows(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<sf::EventWindow> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (n == 1 && line.rfind("t0", 0) == 0) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("expected 't0_s,t1_s'");
      std::size_t used = 0;
      sf::EventWindow w{std::stod(line.substr(0, comma), &used), 0.0};
      w.t1_s = std::stod(line.substr(comma + 1), &used);
      sf::validate(w);
      out.push_back(w);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void apply_jobs(const Globals& g) {
#ifdef _OPENMP
  if (g.jobs > 0) omp_set_num_threads(g.jobs);
#else
  (void)g;
#endif
}

// gen-dataset ---------------------------------------------------------------

struct GenDatasetArgs {
  std::string manifest;
  std::string hrir;
  std::string out_dir;
  std::string lexicon = kDefaultLexicon;
  std::uint32_t variants = 10;
  double test_frac = 0.1;
  double omission_prob = 0.5;
};

int run_gen_dataset(const Globals& g, const GenDatasetArgs& a) {
  const auto manifest = sf::load_manifest(a.manifest, g.strict);
  for (const auto& issue : manifest.skipped) {
    std::cerr << "warning: " << a.manifest << ":" << issue.line << ": skipped: " << issue.message << "\n";
  }
  const auto kept = sf::filter_single_source(manifest.records);
  std::cerr << "manifest: " << manifest.records.size() << " records, " << kept.size() << " single-source\n";

  const auto hrirs = sf::load_hrir_set(a.hrir);
  const auto lexicon = sf::CaptionLexicon::load(a.lexicon);

  sf::ForgeConfig cfg;
  cfg.out_dir = a.out_dir;
  cfg.variants = a.variants;
  cfg.test_frac = a.test_frac;
  cfg.seed = g.seed;
  cfg.omission_prob = a.omission_prob;
  cfg.jobs = g.jobs;
  const auto result = sf::forge(kept, hrirs, lexicon, cfg);

  for (const auto& f : result.failures) std::cerr << "failed: " << f.id << ": " << f.message << "\n";
  std::ifstream summary(std::filesystem::path(a.out_dir) / "summary.json");
  std::cout << summary.rdbuf();
  return result.failures.empty() && manifest.skipped.empty() ? kOk : kPartial;
}

// spatialize ----------------------------------------------------------------

struct SpatializeArgs {
  std::string input;
  std::string trajectory;
  std::string hrir;
  std::string output;
  std::string format = "float32";
};

int run_spatialize(const Globals& g, const SpatializeArgs& a) {
  apply_jobs(g);
  static const std::map<std::string, sf::SampleFormat> formats = {{"int16", sf::SampleFormat::Int16},
                                                                  {"int24", sf::SampleFormat::Int24},
                                                                  {"int32", sf::SampleFormat::Int32},
                                                                  {"float32", sf::SampleFormat::Float32}};
  const auto mono = sf::read_wav(a.input);
  if (mono.channel_count() != 1) {
    throw std::runtime_error(a.input + ": expected a mono file, got " + std::to_string(mono.channel_count()) +
                             " channels");
  }
  const auto traj = sf::read_trajectory_csv(std::filesystem::path(a.trajectory));
  const auto hrirs = sf::load_hrir_set(a.hrir);
  const auto out = sf::render_binaural(mono, traj, hrirs);
  sf::write_wav(a.output, out, formats.at(a.format));

  double peak = 0.0;
  for (const auto& ch : out.channels) {
    for (float s : ch) peak = std::max(peak, static_cast<double>(std::fabs(s)));
  }
  json report = {{"output", a.output},
                 {"sample_rate_hz", out.sample_rate_hz},
                 {"duration_s", out.duration_s()},
                 {"peak", peak},
                 {"peak_dbfs", peak > 0.0 ? 20.0 * std::log10(peak) : -std::numeric_limits<double>::infinity()}};
  if (peak > 1.0 && a.format != "float32") std::cerr << "warning: output clipped at " << a.format << "\n";
  std::cout << report.dump(2) << "\n";
  return kOk;
}

// eval-traj -----------------------------------------------------------------

struct EvalTrajArgs {
  std::vector<std::string> pred;
  std::vector<std::string> gt;
  sf::LossWeights weights;
  std::string mode = "clamp_pred";
  bool endpoints_only = false;
};

int run_eval_traj(const Globals& g, const EvalTrajArgs& a) {
  apply_jobs(g);
  if (a.pred.size() != a.gt.size()) {
    throw std::runtime_error("--pred has " + std::to_string(a.pred.size()) + " files but --gt has " +
                             std::to_string(a.gt.size()));
  }
  sf::validate(a.weights);
  sf::EvalOptions opts;
  opts.weights = a.weights;
  opts.mode = *sf::parse_ra_mae_mode(a.mode);
  opts.endpoints_only = a.endpoints_only;

  std::vector<sf::Trajectory> preds, gts;
  for (std::size_t i = 0; i < a.pred.size(); ++i) {
    preds.push_back(sf::read_trajectory_csv(std::filesystem::path(a.pred[i])));
    gts.push_back(sf::read_trajectory_csv(std::filesystem::path(a.gt[i])));
    if (preds.back().size() != gts.back().size()) {
      throw std::runtime_error("length mismatch: " + a.pred[i] + " has " + std::to_string(preds.back().size()) +
                               " steps, " + a.gt[i] + " has " + std::to_string(gts.back().size()));
    }
  }
  std::cout << sf::to_json(sf::evaluate_trajectories(preds, gts, opts)) << "\n";
  return kOk;
}

// eval-temporal -------------------------------------------------------------

struct EvalTemporalArgs {
  std::string pred;
  std::string gt;
  std::size_t length = 0;
  double rate = sf::kTrajectoryRateHz;
};

int run_eval_temporal(const EvalTemporalArgs& a) {
  const auto preds = read_windows(a.pred);
  const auto gts = read_windows(a.gt);
  if (preds.size() != gts.size()) {
    throw std::runtime_error(a.pred + " has " + std::to_string(preds.size()) + " windows but " + a.gt + " has " +
                             std::to_string(gts.size()));
  }
  if (preds.empty()) throw std::runtime_error("no windows in " + a.pred);
  const auto se = sf::start_end_mae(preds, gts);
  double olr_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    olr_sum += sf::olr(sf::activity_mask(preds[i], a.length, a.rate), sf::activity_mask(gts[i], a.length, a.rate));
  }
  json out = {{"start_mae", se.start_mae_s},
              {"end_mae", se.end_mae_s},
              {"olr", olr_sum / static_cast<double>(preds.size())},
              {"pairs", preds.size()}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// parse-caption / make-caption ---------------------------------------------

struct ParseCaptionArgs {
  std::vector<std::string> captions;
  std::string file;
  std::string lexicon = kDefaultLexicon;
  std::string predict_out;
  double t0 = 0.0;
  double t1 = 0.0;
  double duration = 0.0;
};

int run_parse_caption(const ParseCaptionArgs& a) {
  const auto lex = sf::CaptionLexicon::load(a.lexicon);
  std::vector<std::string> captions = a.captions;
  if (!a.file.empty()) {
    std::ifstream is(a.file);
    if (!is) throw std::runtime_error("--file: cannot open " + a.file);
    for (std::string line; std::getline(is, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      captions.push_back(line);
    }
  }
  if (captions.empty()) throw UsageError("give a caption or --file");
  if (!a.predict_out.empty()) {
    if (captions.size() != 1) throw UsageError("--predict-out takes exactly one caption");
    const sf::EventWindow w{a.t0, a.t1};
    write_trajectory_csv(std::filesystem::path(a.predict_out),
                         sf::predict_trajectory_from_caption(captions.front(), w, a.duration, lex));
  }
  for (const auto& c : captions) {
    json row = {{"caption", c}};
    row.update(spec_json(sf::parse_caption(c, lex)));
    std::cout << row.dump() << "\n";
  }
  return kOk;
}

struct MakeCaptionArgs {
  std::string label;
  std::string start = "front,middle,moderate";
  std::string end;
  double t0 = 0.0;
  double t1 = 1.0;
  double omission_prob = 0.5;
  std::string lexicon = kDefaultLexicon;
};

int run_make_caption(const Globals& g, const MakeCaptionArgs& a) {
  const auto lex = sf::CaptionLexicon::load(a.lexicon);
  if (!lex.event_phrases(a.label)) {
    std::string known;
    for (const auto& l : lex.event_labels()) known += (known.empty() ? "" : ", ") + l;
    throw UsageError("--label: unknown event label '" + a.label + "' (known: " + known + ")");
  }
  sf::MotionSpec spec;
  spec.start = parse_triple(a.start, "--start");
  spec.end = a.end.empty() ? spec.start : parse_triple(a.end, "--end");
  const sf::EventWindow w{a.t0, a.t1};
  sf::validate(w);
  sf::Rng rng(g.seed);
  const auto caption = sf::generate_caption(a.label, spec, w, lex, rng, a.omission_prob);
  json out = {{"caption", caption.text}};
  out.update(spec_json(caption.spec));
  std::cout << out.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial audio dataset forge: captions, trajectories, binaural rendering and metrics"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file mirroring the command-line flags");
  app.get_config_ptr()->check(CLI::ExistingFile);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Parallel workers (0 = all available)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_flag("--strict", g.strict, "Treat malformed manifest lines as fatal");

  GenDatasetArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Build a spatialized dataset from a mono-clip manifest");
  gen_cmd->add_option("--manifest", gen.manifest, "Source manifest (JSONL)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--hrir", gen.hrir, "HRIR set manifest (JSON)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--lexicon", gen.lexicon, "Caption lexicon (JSON)")->capture_default_str();
  gen_cmd->add_option("--variants", gen.variants, "Spatial variants per source clip")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--test-frac", gen.test_frac, "Fraction of source clips held out for test")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  gen_cmd->add_option("--omission-prob", gen.omission_prob, "Probability of leaving a default attribute unstated")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  SpatializeArgs spat;
  auto* spat_cmd = app.add_subcommand("spatialize", "Render a mono WAV along a trajectory");
  spat_cmd->add_option("--input", spat.input, "Mono WAV")->required()->check(CLI::ExistingFile);
  spat_cmd->add_option("--trajectory", spat.trajectory, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  spat_cmd->add_option("--hrir", spat.hrir, "HRIR set manifest (JSON)")->required()->check(CLI::ExistingFile);
  spat_cmd->add_option("--out", spat.output, "Output stereo WAV")->required();
  spat_cmd->add_option("--format", spat.format, "Output sample format")
      ->check(CLI::IsMember({"int16", "int24", "int32", "float32"}))
      ->capture_default_str();

  EvalTrajArgs et;
  auto* et_cmd = app.add_subcommand("eval-traj", "Score predicted trajectories against ground truth");
  et_cmd->add_option("--pred", et.pred, "Predicted trajectory CSVs")->required()->check(CLI::ExistingFile);
  et_cmd->add_option("--gt", et.gt, "Ground-truth trajectory CSVs, paired in order")
      ->required()
      ->check(CLI::ExistingFile);
  et_cmd->add_option("--w-az", et.weights.w_az, "Azimuth loss weight")->capture_default_str();
  et_cmd->add_option("--w-el", et.weights.w_el, "Elevation loss weight")->capture_default_str();
  et_cmd->add_option("--w-ds", et.weights.w_ds, "Distance loss weight")->capture_default_str();
  et_cmd->add_option("--lambda-time", et.weights.lambda_time, "Endpoint loss weight in the total")
      ->capture_default_str();
  et_cmd->add_option("--ra-mode", et.mode, "Range-aware MAE variant")
      ->check(CLI::IsMember({"clamp_pred", "clamp_gt"}))
      ->capture_default_str();
  et_cmd->add_flag("--endpoints-only", et.endpoints_only, "Score attributes on the first and last valid steps only");

  EvalTemporalArgs tt;
  auto* tt_cmd = app.add_subcommand("eval-temporal", "Score predicted event windows against ground truth");
  tt_cmd->add_option("--pred", tt.pred, "Predicted windows CSV (t0_s,t1_s)")->required()->check(CLI::ExistingFile);
  tt_cmd->add_option("--gt", tt.gt, "Ground-truth windows CSV (t0_s,t1_s)")->required()->check(CLI::ExistingFile);
  tt_cmd->add_option("--length", tt.length, "Mask length in steps")->required()->check(CLI::PositiveNumber);
  tt_cmd->add_option("--rate", tt.rate, "Mask rate in Hz")->check(CLI::PositiveNumber)->capture_default_str();

  ParseCaptionArgs pc;
  auto* pc_cmd = app.add_subcommand("parse-caption", "Recover start/end categories from captions (JSON lines)");
  pc_cmd->add_option("captions", pc.captions, "Caption text");
  pc_cmd->add_option("--file", pc.file, "File with one caption per line")->check(CLI::ExistingFile);
  pc_cmd->add_option("--lexicon", pc.lexicon, "Caption lexicon (JSON)")->capture_default_str();
  auto* predict = pc_cmd->add_option("--predict-out", pc.predict_out, "Write the midpoint baseline trajectory CSV");
  pc_cmd->add_option("--t0", pc.t0, "Event start for --predict-out (s)")->needs(predict)->capture_default_str();
  pc_cmd->add_option("--t1", pc.t1, "Event end for --predict-out (s)")->needs(predict)->capture_default_str();
  pc_cmd->add_option("--duration", pc.duration, "Clip duration for --predict-out (s)")->needs(predict);
  predict->needs(pc_cmd->get_option("--t1"))->needs(pc_cmd->get_option("--duration"));

  MakeCaptionArgs mc;
  auto* mc_cmd = app.add_subcommand("make-caption", "Write a caption for an event and its start/end categories");
  mc_cmd->add_option("--label", mc.label, "Event label from the lexicon")->required();
  mc_cmd->add_option("--start", mc.start, "Start categories, e.g. left,up,close")->capture_default_str();
  mc_cmd->add_option("--end", mc.end, "End categories (default: same as --start)");
  mc_cmd->add_option("--t0", mc.t0, "Event start (s)")->capture_default_str();
  mc_cmd->add_option("--t1", mc.t1, "Event end (s)")->capture_default_str();
  mc_cmd->add_option("--omission-prob", mc.omission_prob, "Probability of leaving a default attribute unstated")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  mc_cmd->add_option("--lexicon", mc.lexicon, "Caption lexicon (JSON)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }

  try {
    if (*gen_cmd) return run_gen_dataset(g, gen);
    if (*spat_cmd) return run_spatialize(g, spat);
    if (*et_cmd) return run_eval_traj(g, et);
    if (*tt_cmd) return run_eval_temporal(tt);
    if (*pc_cmd) return run_parse_caption(pc);
    if (*mc_cmd) return run_make_caption(g, mc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
