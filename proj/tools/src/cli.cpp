#include "automix/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "automix/audio_io.hpp"
#include "automix/loudness.hpp"
#include "automix/manifest.hpp"
#include "automix/masking_metric.hpp"
#include "automix/mix_pipeline.hpp"
#include "automix/report.hpp"

namespace automix::cli {

namespace fs = std::filesystem;

namespace {

struct MixOptions {
  std::string session;
  std::string out;
  bool no_subgroups = false;
  std::optional<std::uint64_t> seed;
  std::string trace_dir;
  std::string stems_dir;
  std::string report;
  std::string summary;
  std::string format = "pcm16";
};

struct AnalyzeOptions {
  std::string session;
  std::string report;
  std::string psycho_dump;
};

struct NormalizeOptions {
  std::string session;
  std::string out_dir;
  std::string format = "pcm16";
};

WavFormat parse_format(const std::string& name) {
  if (name == "pcm24") return WavFormat::kPcm24;
  if (name == "float32") return WavFormat::kFloat32;
  return WavFormat::kPcm16;
}

std::string lufs_text(double lufs) {
  if (!std::isfinite(lufs)) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", lufs);
  return buf;
}

void write_clip(const AudioClip& clip, const fs::path& path, WavFormat format,
                std::ostream& err) {
  const std::size_t clipped = write_wav(clip, path, format);
  if (clipped > 0) {
    err << "warning: " << path.string() << ": " << clipped
        << " samples clipped to full scale\n";
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

void ensure_parent(const std::string& file) {
  if (file.empty()) return;
  const fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) ensure_dir(parent);
}

int do_mix(const MixOptions& o, std::ostream& out, std::ostream& err) {
  Session session = report::load_session(o.session);
  for (const auto* f : {&o.out, &o.report, &o.summary}) ensure_parent(*f);
  if (o.seed) session.engine_config.pso.rng_seed = *o.seed;

  const bool flat = o.no_subgroups || session.subgroups.empty();
  const pipeline::MixResult result =
      flat ? pipeline::mix_flat(session) : pipeline::mix_subgrouped(session);

  const auto format = parse_format(o.format);
  write_clip(result.final_mix, o.out, format, err);

  if (!o.trace_dir.empty()) {
    ensure_dir(o.trace_dir);
    for (std::size_t i = 0; i < result.stage_reports.size(); ++i) {
      const auto& stage = result.stage_reports[i];
      const fs::path path =
          fs::path(o.trace_dir) / report::trace_file_name(i, stage.name);
      std::ofstream csv(path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + path.string());
      report::write_trace_csv(stage, csv);
    }
  }
  if (!o.stems_dir.empty()) {
    ensure_dir(o.stems_dir);
    for (std::size_t i = 0; i < result.stems.size(); ++i) {
      const std::string name =
          report::trace_file_name(i, result.stems[i].name);
      write_clip(result.stems[i].clip,
                 fs::path(o.stems_dir) / fs::path(name).replace_extension(".wav"),
                 format, err);
    }
  }
  if (!o.report.empty()) {
    report::write_json(report::mix_report_json(result), o.report);
  }
  if (!o.summary.empty()) report::write_summary(result, o.summary);

  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  const auto rows = report::summary_rows(result);
  report::write_summary(rows, out);
  return kOk;
}

int do_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  const Session session = report::load_session(o.session);
  ensure_parent(o.report);
  const auto& cfg = session.engine_config;
  std::vector<std::string> warnings;
  const auto normalized = pipeline::normalize_tracks(session, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';

  std::vector<AudioClip> segments;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    segments.push_back(pipeline::analysis_segment(normalized[i], cfg.analysis_window));
    ids.push_back(session.tracks[i].id);
  }
  const psycho::PsychoModel model(session.sample_rate(), cfg.psycho);
  const metric::MaskingEvaluator evaluator(model, cfg.metric);
  const metric::MaskingResult result = evaluator.evaluate(segments);

  if (!o.psycho_dump.empty()) {
    ensure_dir(o.psycho_dump);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const fs::path path = fs::path(o.psycho_dump) / (ids[i] + ".csv");
      std::ofstream csv(path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + path.string());
      report::write_psycho_dump(model.analyze_track(segments[i]), csv);
    }
  }
  const auto doc = report::masking_report_json(result, ids);
  report::write_json(doc, o.report);
  out << "f = " << result.objective << "  (M_T = " << result.m_total
      << ", M_d = " << result.m_diff << ")\n";
  return kOk;
}

int do_normalize(const NormalizeOptions& o, std::ostream& out,
                 std::ostream& err) {
  const Session session = report::load_session(o.session);
  std::vector<std::string> warnings;
  const auto normalized = pipeline::normalize_tracks(session, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  ensure_dir(o.out_dir);
  const auto format = parse_format(o.format);
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const auto& t = session.tracks[i];
    write_clip(normalized[i], fs::path(o.out_dir) / (t.id + ".wav"), format, err);
    double before = loudness::kSilenceLufs;
    double after = loudness::kSilenceLufs;
    try {
      before = loudness::integrated_loudness(t.clip).integrated_lufs;
      after = loudness::integrated_loudness(normalized[i]).integrated_lufs;
    } catch (const loudness::LoudnessError&) {
    }
    out << t.id << "  " << lufs_text(before) << " LUFS -> " << lufs_text(after)
        << " LUFS\n";
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Automatic multitrack mixing by masking minimisation", "automix"};
  app.require_subcommand(1);

  const std::vector<std::string> formats{"pcm16", "pcm24", "float32"};

  MixOptions mix;
  auto* mix_cmd = app.add_subcommand("mix", "Optimise EQ/compression and render the mix");
  mix_cmd->add_option("--session", mix.session, "Session manifest (JSON)")->required();
  mix_cmd->add_option("--out", mix.out, "Output WAV")->required();
  mix_cmd->add_flag("--no-subgroups", mix.no_subgroups, "Optimise all tracks in one stage");
  mix_cmd->add_option("--seed", mix.seed, "Override the optimiser seed");
  mix_cmd->add_option("--trace-dir", mix.trace_dir, "Write one trace CSV per stage");
  mix_cmd->add_option("--stems-dir", mix.stems_dir, "Write normalised subgroup stems");
  mix_cmd->add_option("--report", mix.report, "Write the JSON mix report");
  mix_cmd->add_option("--summary", mix.summary, "Write the summary table (+ .json)");
  mix_cmd->add_option("--format", mix.format, "WAV sample format")
      ->check(CLI::IsMember(formats));

  AnalyzeOptions analyze;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Masking metric of the normalised, unprocessed tracks");
  analyze_cmd->add_option("--session", analyze.session, "Session manifest (JSON)")
      ->required();
  analyze_cmd->add_option("--report", analyze.report, "Masking report (JSON)")->required();
  analyze_cmd->add_option("--psycho-dump", analyze.psycho_dump,
                          "Directory for per-track frame,sb,esb,thr CSVs");

  NormalizeOptions normalize;
  auto* normalize_cmd =
      app.add_subcommand("normalize", "Write loudness-normalised tracks");
  normalize_cmd->add_option("--session", normalize.session, "Session manifest (JSON)")
      ->required();
  normalize_cmd->add_option("--out-dir", normalize.out_dir, "Output directory")
      ->required();
  normalize_cmd->add_option("--format", normalize.format, "WAV sample format")
      ->check(CLI::IsMember(formats));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*mix_cmd) return do_mix(mix, out, err);
    if (*analyze_cmd) return do_analyze(analyze, out, err);
    return do_normalize(normalize, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kProcessingError;
}

}  // namespace automix::cli
