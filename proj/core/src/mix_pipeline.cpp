#include "automix/mix_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "automix/loudness.hpp"

namespace automix::pipeline {

namespace {

std::vector<double> identity_vector(std::size_t n_tracks,
                                    const fx::ParamBounds& bounds) {
  const std::vector<fx::TrackParams> params(n_tracks,
                                            fx::identity_params(bounds));
  return fx::encode_params(params, bounds).values;
}

// Normalises `clip` to `target`, or passes it through with a warning when it
// has no measurable loudness.
AudioClip normalize_or_warn(const AudioClip& clip, double target,
                            const std::string& label,
                            std::vector<std::string>& warnings,
                            double* applied_gain_db = nullptr) {
  try {
    auto n = loudness::normalize_to(clip, target);
    if (applied_gain_db != nullptr) *applied_gain_db = n.applied_gain_db;
    return std::move(n.clip);
  } catch (const loudness::LoudnessError& e) {
    warnings.push_back(label + ": not normalised (" + e.what() + ")");
    if (applied_gain_db != nullptr) *applied_gain_db = 0.0;
    return clip;
  }
}

StageReport skipped_stage(const std::string& name,
                          std::vector<std::string> member_ids,
                          const fx::ParamBounds& bounds, std::string note) {
  StageReport r;
  r.name = name;
  r.dimension = member_ids.size() * fx::kParamsPerTrack;
  r.m_before.assign(member_ids.size(), 0.0);
  r.m_after.assign(member_ids.size(), 0.0);
  r.params.assign(member_ids.size(), fx::identity_params(bounds));
  r.member_ids = std::move(member_ids);
  r.skipped = true;
  r.note = std::move(note);
  r.trace.stop_reason = pso::StopReason::kZeroObjective;
  return r;
}

}  // namespace

double StageReport::mean_m_before() const {
  if (m_before.empty()) return 0.0;
  return std::accumulate(m_before.begin(), m_before.end(), 0.0) /
         static_cast<double>(m_before.size());
}

std::vector<AudioClip> normalize_tracks(const Session& session,
                                        std::vector<std::string>& warnings) {
  const auto& cfg = session.engine_config;
  std::vector<AudioClip> out;
  out.reserve(session.tracks.size());
  for (const auto& t : session.tracks) {
    const double target =
        t.is_vocal ? cfg.vocal_target_lufs : cfg.track_target_lufs;
    out.push_back(normalize_or_warn(t.clip, target, "track '" + t.id + "'",
                                    warnings));
  }
  return out;
}

AudioClip analysis_segment(const AudioClip& clip,
                           const std::optional<AnalysisWindow>& window) {
  if (!window) return clip;
  const double fs = clip.sample_rate();
  const auto start = static_cast<std::size_t>(std::lround(window->start_s * fs));
  const auto count = static_cast<std::size_t>(std::lround(window->length_s * fs));
  return clip.slice(start, count);
}

StageObjective::StageObjective(std::vector<AudioClip> clips,
                               fx::ParamBounds bounds,
                               metric::MaskingEvaluator evaluator)
    : clips_(std::move(clips)),
      bounds_(bounds),
      evaluator_(std::move(evaluator)),
      ranges_(fx::stage_bounds(clips_.size(), bounds_)) {}

metric::MaskingResult StageObjective::evaluate_params(
    std::span<const fx::TrackParams> params) const {
  if (params.size() != clips_.size()) {
    throw std::invalid_argument("stage objective: parameter count mismatch");
  }
  std::vector<AudioClip> processed;
  processed.reserve(clips_.size());
  for (std::size_t i = 0; i < clips_.size(); ++i) {
    processed.push_back(fx::process_track(clips_[i], params[i]));
  }
  return evaluator_.evaluate(processed);
}

pso::ObjectiveValue StageObjective::operator()(std::span<const double> x) const {
  std::size_t clamped = 0;
  const auto params = fx::decode_params(x, ranges_, clips_.size(), &clamped);
  if (clamped > 0) clamped_ += clamped;
  const auto r = evaluate_params(params);
  return {r.objective, r.m_total, r.m_diff};
}

StageReport optimize_stage(const std::string& name,
                           std::vector<std::string> member_ids,
                           std::span<const AudioClip> clips,
                           const fx::ParamBounds& bounds,
                           const EngineConfig& config, std::uint64_t seed,
                           const PipelineHooks& hooks) {
  if (clips.size() != member_ids.size()) {
    throw std::invalid_argument("optimize_stage: member/clip count mismatch");
  }
  if (clips.size() < 2) {
    return skipped_stage(name, std::move(member_ids), bounds,
                         "single-track stage: no accompaniment, objective is 0");
  }

  std::vector<AudioClip> segments;
  segments.reserve(clips.size());
  for (const auto& c : clips) {
    segments.push_back(analysis_segment(c, config.analysis_window));
  }
  const StageObjective objective(
      std::move(segments), bounds,
      metric::MaskingEvaluator(
          psycho::PsychoModel(clips.front().sample_rate(), config.psycho),
          config.metric));

  const auto identity = identity_vector(clips.size(), bounds);
  const auto identity_params =
      fx::decode_params(identity, fx::stage_bounds(clips.size(), bounds),
                        clips.size());
  const metric::MaskingResult before = objective.evaluate_params(identity_params);

  pso::PsoConfig pso_cfg = config.pso;
  pso_cfg.rng_seed = seed;
  pso::IterationObserver observer;
  if (hooks.on_iteration) {
    observer = [&](std::size_t iteration, const pso::Swarm& swarm) {
      hooks.on_iteration(name, bounds, iteration, swarm);
    };
  }
  const auto ranges = fx::stage_bounds(clips.size(), bounds);
  const pso::PsoResult result = pso::optimize(
      [&objective](std::span<const double> x) { return objective(x); }, ranges,
      pso_cfg, identity, observer);

  StageReport r;
  r.name = name;
  r.member_ids = std::move(member_ids);
  r.dimension = objective.dimension();
  r.params = fx::decode_params(result.best, ranges, clips.size());
  const metric::MaskingResult after = objective.evaluate_params(r.params);
  r.initial_f = before.objective;
  r.initial_m_total = before.m_total;
  r.initial_m_diff = before.m_diff;
  r.final_f = after.objective;
  r.m_before = before.per_track_m;
  r.m_after = after.per_track_m;
  r.trace = result.trace;
  if (objective.clamped_values() > 0) {
    r.note = std::to_string(objective.clamped_values()) +
             " out-of-bounds parameter values clamped";
  }
  return r;
}

AudioClip render(std::span<const AudioClip> clips,
                 std::span<const fx::TrackParams> params) {
  if (clips.size() != params.size()) {
    throw std::invalid_argument("render: clip/parameter count mismatch");
  }
  std::vector<AudioClip> processed;
  processed.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    processed.push_back(fx::process_track(clips[i], params[i]));
  }
  return sum_tracks(processed);
}

MixResult mix_flat(const Session& session, const PipelineHooks& hooks) {
  session.validate();
  MixResult result;
  const auto normalized = normalize_tracks(session, result.warnings);

  std::vector<std::string> ids;
  for (const auto& t : session.tracks) ids.push_back(t.id);
  StageReport stage =
      optimize_stage("All Tracks", ids, normalized, fx::ParamBounds::instrument(),
                     session.engine_config, session.engine_config.pso.rng_seed,
                     hooks);

  result.final_mix = render(normalized, stage.params);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    result.final_params.push_back({ids[i], stage.params[i]});
  }
  result.stage_reports.push_back(std::move(stage));
  return result;
}

MixResult mix_subgrouped(const Session& session, const PipelineHooks& hooks) {
  session.validate();
  if (session.subgroups.empty()) {
    throw SessionError("subgrouped mix requires declared subgroups");
  }
  const auto& cfg = session.engine_config;
  MixResult result;
  const auto normalized = normalize_tracks(session, result.warnings);

  auto index_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < session.tracks.size(); ++i) {
      if (session.tracks[i].id == id) return i;
    }
    throw SessionError("unknown track '" + id + "'");
  };

  std::uint64_t seed = cfg.pso.rng_seed;
  std::vector<AudioClip> stem_clips;
  std::vector<std::string> stem_ids;
  for (const auto& group : session.subgroups) {
    std::vector<AudioClip> members;
    for (const auto& id : group.member_ids) {
      members.push_back(normalized[index_of(id)]);
    }
    StageReport stage =
        optimize_stage(group.name, group.member_ids, members,
                       fx::ParamBounds::instrument(), cfg, seed++, hooks);

    Stem stem;
    stem.name = group.name;
    stem.vocal = group.is_vocal_group;
    stem.clip = normalize_or_warn(
        render(members, stage.params),
        group.is_vocal_group ? cfg.vocal_target_lufs : cfg.track_target_lufs,
        "stem '" + group.name + "'", result.warnings, &stem.applied_gain_db);

    for (std::size_t i = 0; i < group.member_ids.size(); ++i) {
      result.final_params.push_back({group.member_ids[i], stage.params[i]});
    }
    stem_clips.push_back(stem.clip);
    stem_ids.push_back(group.name);
    result.stems.push_back(std::move(stem));
    result.stage_reports.push_back(std::move(stage));
  }

  StageReport final_stage =
      optimize_stage("Subgroups", stem_ids, stem_clips,
                     fx::ParamBounds::subgroup(), cfg, seed, hooks);
  result.final_mix = render(stem_clips, final_stage.params);
  for (std::size_t i = 0; i < stem_ids.size(); ++i) {
    result.final_params.push_back({"stem:" + stem_ids[i], final_stage.params[i]});
  }
  result.stage_reports.push_back(std::move(final_stage));
  return result;
}

}  // namespace automix::pipeline
