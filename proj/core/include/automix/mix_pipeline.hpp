#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "automix/audio_io.hpp"
#include "automix/channel_fx.hpp"
#include "automix/masking_metric.hpp"
#include "automix/pso.hpp"
#include "automix/session.hpp"

namespace automix::pipeline {

/// Outcome of one optimisation stage (a subgroup, the stem mix, or the flat
/// mix of every track).
struct StageReport {
  std::string name;
  std::vector<std::string> member_ids;
  std::size_t dimension = 0;
  double initial_f = 0.0;  // objective at identity parameters
  double initial_m_total = 0.0;
  double initial_m_diff = 0.0;
  double final_f = 0.0;
  std::vector<double> m_before;
  std::vector<double> m_after;
  std::vector<fx::TrackParams> params;
  pso::PsoTrace trace;
  bool skipped = false;
  std::string note;

  std::size_t track_count() const { return member_ids.size(); }
  std::size_t iterations() const { return trace.iterations(); }
  double delta_m() const { return initial_f - final_f; }
  /// Mean per-track M_n at stage start.
  double mean_m_before() const;
};

struct NamedParams {
  std::string id;
  fx::TrackParams params;
};

struct Stem {
  std::string name;
  AudioClip clip;  // loudness-normalised
  bool vocal = false;
  double applied_gain_db = 0.0;
};

struct MixResult {
  AudioClip final_mix;
  std::vector<StageReport> stage_reports;
  std::vector<NamedParams> final_params;
  std::vector<Stem> stems;
  std::vector<std::string> warnings;
};

struct PipelineHooks {
  /// Invoked after every PSO iteration of every stage.
  std::function<void(const std::string& stage, const fx::ParamBounds& bounds,
                     std::size_t iteration, const pso::Swarm& swarm)>
      on_iteration;
};

/// Normalised tracks: -24 LUFS, vocals -18 LUFS. Silent (or too short)
/// tracks pass through unchanged with a warning.
std::vector<AudioClip> normalize_tracks(const Session& session,
                                        std::vector<std::string>& warnings);

/// The part of `clip` the optimiser evaluates.
AudioClip analysis_segment(const AudioClip& clip,
                           const std::optional<AnalysisWindow>& window);

/// Objective for one stage: decode -> process every track -> masking metric.
class StageObjective {
 public:
  StageObjective(std::vector<AudioClip> clips, fx::ParamBounds bounds,
                 metric::MaskingEvaluator evaluator);

  metric::MaskingResult evaluate_params(
      std::span<const fx::TrackParams> params) const;
  pso::ObjectiveValue operator()(std::span<const double> x) const;

  std::size_t track_count() const { return clips_.size(); }
  std::size_t dimension() const { return clips_.size() * fx::kParamsPerTrack; }
  const fx::ParamBounds& bounds() const { return bounds_; }
  std::size_t clamped_values() const { return clamped_; }

 private:
  std::vector<AudioClip> clips_;
  fx::ParamBounds bounds_;
  metric::MaskingEvaluator evaluator_;
  std::vector<fx::Range> ranges_;
  mutable std::atomic<std::size_t> clamped_{0};
};

/// Runs PSO for one stage over already-normalised clips.
StageReport optimize_stage(const std::string& name,
                           std::vector<std::string> member_ids,
                           std::span<const AudioClip> clips,
                           const fx::ParamBounds& bounds,
                           const EngineConfig& config, std::uint64_t seed,
                           const PipelineHooks& hooks = {});

/// Sum of process_track outputs. No normalisation.
AudioClip render(std::span<const AudioClip> clips,
                 std::span<const fx::TrackParams> params);

MixResult mix_flat(const Session& session, const PipelineHooks& hooks = {});
MixResult mix_subgrouped(const Session& session, const PipelineHooks& hooks = {});

}  // namespace automix::pipeline
