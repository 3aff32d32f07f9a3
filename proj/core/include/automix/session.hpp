#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "automix/audio_io.hpp"
#include "automix/masking_metric.hpp"
#include "automix/psycho_model.hpp"
#include "automix/pso.hpp"

namespace automix {

enum class InstrumentClass { kDrums, kVox, kBass, kKeys, kGuitars, kOther };

std::string_view to_string(InstrumentClass c);
/// Throws std::invalid_argument for an unknown name.
InstrumentClass instrument_class_from_string(std::string_view name);

struct Track {
  std::string id;
  std::string name;
  AudioClip clip;
  InstrumentClass instrument_class = InstrumentClass::kOther;
  bool is_vocal = false;
  /// Where the clip was loaded from; empty for in-memory tracks.
  std::filesystem::path source_path;

  friend bool operator==(const Track&, const Track&) = default;
};

struct SubgroupSpec {
  std::string name;
  std::vector<std::string> member_ids;
  bool is_vocal_group = false;

  friend bool operator==(const SubgroupSpec&, const SubgroupSpec&) = default;
};

/// Portion of each clip the optimiser evaluates. Rendering always uses the
/// whole clip.
struct AnalysisWindow {
  double start_s = 0.0;
  double length_s = 0.0;

  friend bool operator==(const AnalysisWindow&, const AnalysisWindow&) = default;
};

struct EngineConfig {
  metric::MetricConfig metric;
  pso::PsoConfig pso;
  psycho::PsychoConfig psycho;
  std::optional<AnalysisWindow> analysis_window;
  double track_target_lufs = -24.0;
  double vocal_target_lufs = -18.0;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Session {
  std::vector<Track> tracks;
  std::vector<SubgroupSpec> subgroups;
  EngineConfig engine_config;

  int sample_rate() const;
  const Track& track(std::string_view id) const;

  /// Throws SessionError describing the first broken invariant: duplicate
  /// ids, vocal flag inconsistent with class, mixed sample rates, or a
  /// malformed subgroup list.
  void validate() const;

  friend bool operator==(const Session&, const Session&) = default;
};

}  // namespace automix
