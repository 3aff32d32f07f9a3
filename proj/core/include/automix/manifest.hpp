#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "automix/session.hpp"

namespace automix::report {

/// Manifest problem; `location()` is a JSON pointer into the document.
class ManifestError : public std::runtime_error {
 public:
  ManifestError(std::string location, const std::string& message);
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// Builds a Session from a manifest document. Track paths are resolved
/// against `base_dir`. Unknown keys are rejected.
///
/// {
///   "sample_rate_expected": 44100,
///   "tracks": [{"id": "kick", "path": "kick.wav", "name": "Kick",
///               "class": "drums", "vocal": false}],
///   "subgroups": [{"name": "Drums", "members": ["kick"], "vocal": false}],
///   "metric": {"t_max": 20, "gate_db": -70},
///   "pso": {"swarm": 50, "max_iters": 100, "tolerance": 0.05, "seed": 1,
///           "stall_window": 10},
///   "analysis_window": {"start_s": 0, "length_s": 10}
/// }
///
/// "id" defaults to "name"; "vocal" defaults to class == "vox".
Session parse_manifest(const nlohmann::json& doc,
                       const std::filesystem::path& base_dir);

/// Reads and parses a manifest file; WAV errors propagate as WavError.
Session load_session(const std::filesystem::path& manifest_path);

/// Inverse of parse_manifest. Paths are written relative to `base_dir` when
/// possible.
nlohmann::json session_to_manifest(const Session& session,
                                   const std::filesystem::path& base_dir);

}  // namespace automix::report
