#include "automix/manifest.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

namespace automix::report {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ManifestError(where.empty() ? "/" : where, "expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) {
      throw ManifestError(where + "/" + key, "unknown key '" + key + "'");
    }
  }
}

template <typename T>
T required(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) {
    throw ManifestError(where + "/" + key, std::string("missing '") + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ManifestError(where + "/" + key, e.what());
  }
}

template <typename T>
T optional(const json& obj, const std::string& where, const char* key,
           T fallback) {
  if (!obj.contains(key)) return fallback;
  return required<T>(obj, where, key);
}

}  // namespace

ManifestError::ManifestError(std::string location, const std::string& message)
    : std::runtime_error("manifest " + location + ": " + message),
      location_(std::move(location)) {}

Session parse_manifest(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown_keys(doc, "",
                      {"sample_rate_expected", "tracks", "subgroups", "metric",
                       "pso", "analysis_window"});
  Session session;
  EngineConfig& cfg = session.engine_config;

  if (!doc.contains("tracks") || !doc["tracks"].is_array() ||
      doc["tracks"].empty()) {
    throw ManifestError("/tracks", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < doc["tracks"].size(); ++i) {
    const json& t = doc["tracks"][i];
    const std::string where = "/tracks/" + std::to_string(i);
    reject_unknown_keys(t, where, {"id", "path", "name", "class", "vocal"});
    Track track;
    track.name = required<std::string>(t, where, "name");
    track.id = optional<std::string>(t, where, "id", track.name);
    const auto cls = optional<std::string>(t, where, "class", "other");
    try {
      track.instrument_class = instrument_class_from_string(cls);
    } catch (const std::invalid_argument& e) {
      throw ManifestError(where + "/class", e.what());
    }
    track.is_vocal = optional<bool>(t, where, "vocal",
                                    track.instrument_class == InstrumentClass::kVox);
    track.source_path = required<std::string>(t, where, "path");
    const auto path = track.source_path.is_absolute()
                          ? track.source_path
                          : base_dir / track.source_path;
    track.clip = read_wav(path);
    session.tracks.push_back(std::move(track));
  }

  if (doc.contains("sample_rate_expected")) {
    const int expected =
        required<int>(doc, "", "sample_rate_expected");
    for (std::size_t i = 0; i < session.tracks.size(); ++i) {
      if (session.tracks[i].clip.sample_rate() != expected) {
        throw ManifestError("/tracks/" + std::to_string(i) + "/path",
                            "sample rate " +
                                std::to_string(session.tracks[i].clip.sample_rate()) +
                                " differs from sample_rate_expected " +
                                std::to_string(expected));
      }
    }
  }

  if (doc.contains("subgroups")) {
    if (!doc["subgroups"].is_array()) {
      throw ManifestError("/subgroups", "expected an array");
    }
    for (std::size_t i = 0; i < doc["subgroups"].size(); ++i) {
      const json& g = doc["subgroups"][i];
      const std::string where = "/subgroups/" + std::to_string(i);
      reject_unknown_keys(g, where, {"name", "members", "vocal"});
      SubgroupSpec spec;
      spec.name = required<std::string>(g, where, "name");
      spec.member_ids = required<std::vector<std::string>>(g, where, "members");
      spec.is_vocal_group = optional<bool>(g, where, "vocal", false);
      session.subgroups.push_back(std::move(spec));
    }
  }

  if (doc.contains("metric")) {
    const json& m = doc["metric"];
    reject_unknown_keys(m, "/metric", {"t_max", "gate_db"});
    cfg.metric.t_max_db = optional<double>(m, "/metric", "t_max", cfg.metric.t_max_db);
    cfg.metric.activity_gate_db =
        optional<double>(m, "/metric", "gate_db", cfg.metric.activity_gate_db);
    if (!(cfg.metric.t_max_db > 0.0)) {
      throw ManifestError("/metric/t_max", "must be positive");
    }
  }

  if (doc.contains("pso")) {
    const json& p = doc["pso"];
    reject_unknown_keys(p, "/pso",
                        {"swarm", "max_iters", "tolerance", "seed", "stall_window"});
    auto& pso = cfg.pso;
    pso.swarm_size = optional<std::size_t>(p, "/pso", "swarm", pso.swarm_size);
    pso.max_iterations =
        optional<std::size_t>(p, "/pso", "max_iters", pso.max_iterations);
    pso.stall_tolerance =
        optional<double>(p, "/pso", "tolerance", pso.stall_tolerance);
    pso.rng_seed = optional<std::uint64_t>(p, "/pso", "seed", pso.rng_seed);
    pso.stall_window =
        optional<std::size_t>(p, "/pso", "stall_window", pso.stall_window);
    try {
      pso.validate();
    } catch (const std::invalid_argument& e) {
      throw ManifestError("/pso", e.what());
    }
  }

  if (doc.contains("analysis_window")) {
    const json& w = doc["analysis_window"];
    reject_unknown_keys(w, "/analysis_window", {"start_s", "length_s"});
    AnalysisWindow window;
    window.start_s = optional<double>(w, "/analysis_window", "start_s", 0.0);
    window.length_s = required<double>(w, "/analysis_window", "length_s");
    if (window.start_s < 0.0 || !(window.length_s > 0.0)) {
      throw ManifestError("/analysis_window",
                          "start_s must be >= 0 and length_s > 0");
    }
    cfg.analysis_window = window;
  }

  try {
    session.validate();
  } catch (const SessionError& e) {
    throw ManifestError("/", e.what());
  }
  return session;
}

Session load_session(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw ManifestError("/", "cannot open " + manifest_path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ManifestError("/", e.what());
  }
  return parse_manifest(doc, manifest_path.parent_path());
}

json session_to_manifest(const Session& session,
                         const std::filesystem::path& base_dir) {
  json doc;
  doc["sample_rate_expected"] = session.sample_rate();
  doc["tracks"] = json::array();
  for (const auto& t : session.tracks) {
    std::filesystem::path p = t.source_path;
    if (!base_dir.empty() && p.is_absolute()) {
      p = p.lexically_relative(base_dir);
    }
    doc["tracks"].push_back({{"id", t.id},
                             {"name", t.name},
                             {"path", p.generic_string()},
                             {"class", std::string(to_string(t.instrument_class))},
                             {"vocal", t.is_vocal}});
  }
  if (!session.subgroups.empty()) {
    doc["subgroups"] = json::array();
    for (const auto& g : session.subgroups) {
      doc["subgroups"].push_back(
          {{"name", g.name}, {"members", g.member_ids}, {"vocal", g.is_vocal_group}});
    }
  }
  const auto& cfg = session.engine_config;
  doc["metric"] = {{"t_max", cfg.metric.t_max_db},
                   {"gate_db", cfg.metric.activity_gate_db}};
  doc["pso"] = {{"swarm", cfg.pso.swarm_size},
                {"max_iters", cfg.pso.max_iterations},
                {"tolerance", cfg.pso.stall_tolerance},
                {"seed", cfg.pso.rng_seed},
                {"stall_window", cfg.pso.stall_window}};
  if (cfg.analysis_window) {
    doc["analysis_window"] = {{"start_s", cfg.analysis_window->start_s},
                              {"length_s", cfg.analysis_window->length_s}};
  }
  return doc;
}

}  // namespace automix::report
