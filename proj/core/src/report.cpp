#include "automix/report.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace automix::report {

using nlohmann::json;

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Round-trippable double for CSV columns.
std::string exact(double v) { return fmt("%.17g", v); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<SummaryRow> summary_rows(const pipeline::MixResult& result) {
  std::vector<SummaryRow> rows;
  for (const auto& s : result.stage_reports) {
    rows.push_back({s.name, s.iterations(), s.delta_m(), s.mean_m_before(),
                    s.track_count()});
  }
  return rows;
}

std::string format_summary_row(const SummaryRow& row) {
  return row.stage + "  " + std::to_string(row.iterations) + "  " +
         fmt("%.2f", row.delta_m) + "  " + fmt("%.2f", row.mean_m) + " (" +
         std::to_string(row.track_count) + ")";
}

std::string summary_header() { return "stage  iterations  delta_M  mean_M_pre (tracks)"; }

void write_summary(std::span<const SummaryRow> rows, std::ostream& out) {
  out << summary_header() << '\n';
  for (const auto& r : rows) out << format_summary_row(r) << '\n';
}

json summary_json(std::span<const SummaryRow> rows) {
  json doc{{"schema", kSchemaVersion}, {"mean_m", "pre-optimisation"}};
  doc["stages"] = json::array();
  for (const auto& r : rows) {
    doc["stages"].push_back({{"stage", r.stage},
                             {"iterations", r.iterations},
                             {"delta_m", r.delta_m},
                             {"mean_m", r.mean_m},
                             {"track_count", r.track_count}});
  }
  return doc;
}

void write_summary(const pipeline::MixResult& result,
                   const std::filesystem::path& destination) {
  const auto rows = summary_rows(result);
  {
    auto out = open_out(destination);
    write_summary(rows, out);
    if (!out) throw std::runtime_error("cannot write " + destination.string());
  }
  auto json_path = destination;
  json_path.replace_extension(".json");
  if (json_path == destination) json_path += ".json";
  write_json(summary_json(rows), json_path);
}

json params_json(const fx::TrackParams& p) {
  return {{"eq_gains_db", p.eq.gains_db},
          {"threshold_db", p.drc.threshold_db},
          {"ratio", p.drc.ratio},
          {"attack_s", p.drc.attack_s},
          {"release_s", p.drc.release_s}};
}

json mix_report_json(const pipeline::MixResult& result) {
  json doc{{"schema", kSchemaVersion}};
  doc["stages"] = json::array();
  for (const auto& s : result.stage_reports) {
    json tracks = json::array();
    for (std::size_t i = 0; i < s.member_ids.size(); ++i) {
      tracks.push_back({{"id", s.member_ids[i]},
                        {"M_before", s.m_before.at(i)},
                        {"M_after", s.m_after.at(i)}});
    }
    json stage{{"name", s.name},
               {"track_count", s.track_count()},
               {"dimension", s.dimension},
               {"iterations", s.iterations()},
               {"initial_f", s.initial_f},
               {"final_f", s.final_f},
               {"delta_m", s.delta_m()},
               {"mean_m_pre", s.mean_m_before()},
               {"stop_reason", std::string(pso::to_string(s.trace.stop_reason))},
               {"skipped", s.skipped},
               {"tracks", tracks}};
    if (!s.note.empty()) stage["note"] = s.note;
    doc["stages"].push_back(std::move(stage));
  }
  doc["final_params"] = json::array();
  for (const auto& p : result.final_params) {
    json entry = params_json(p.params);
    entry["id"] = p.id;
    doc["final_params"].push_back(std::move(entry));
  }
  doc["stems"] = json::array();
  for (const auto& s : result.stems) {
    doc["stems"].push_back(
        {{"name", s.name}, {"vocal", s.vocal}, {"applied_gain_db", s.applied_gain_db}});
  }
  doc["warnings"] = result.warnings;
  return doc;
}

json masking_report_json(const metric::MaskingResult& result,
                         std::span<const std::string> track_ids) {
  if (track_ids.size() != result.per_track_m.size()) {
    throw std::invalid_argument("masking report: id/track count mismatch");
  }
  json doc{{"schema", kSchemaVersion}};
  doc["tracks"] = json::array();
  for (std::size_t i = 0; i < track_ids.size(); ++i) {
    const std::size_t active = i < result.active_frame_counts.size()
                                   ? result.active_frame_counts[i]
                                   : 0;
    doc["tracks"].push_back({{"id", track_ids[i]},
                             {"M_n", result.per_track_m[i]},
                             {"active_frames", active}});
  }
  doc["M_T"] = result.m_total;
  doc["M_d"] = result.m_diff;
  doc["f"] = result.objective;
  return doc;
}

void write_trace_csv(const pipeline::StageReport& stage, std::ostream& out) {
  out << "iteration,f,m_total,m_diff,evaluations\n";
  out << "0," << exact(stage.initial_f) << ',' << exact(stage.initial_m_total)
      << ',' << exact(stage.initial_m_diff) << ",0\n";
  for (const auto& r : stage.trace.rows) {
    out << r.iteration << ',' << exact(r.best_f) << ',' << exact(r.m_total)
        << ',' << exact(r.m_diff) << ',' << r.evaluations << '\n';
  }
}

std::string trace_file_name(std::size_t stage_index, const std::string& stage) {
  std::string slug;
  for (unsigned char c : stage) {
    if (std::isalnum(c)) {
      slug += static_cast<char>(std::tolower(c));
    } else if (!slug.empty() && slug.back() != '_') {
      slug += '_';
    }
  }
  while (!slug.empty() && slug.back() == '_') slug.pop_back();
  if (slug.empty()) slug = "stage";
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%02zu_", stage_index);
  return prefix + slug + ".csv";
}

void write_psycho_dump(std::span<const psycho::PsychoFrame> frames,
                       std::ostream& out) {
  out << "frame,sb,esb,thr\n";
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t b = 0; b < frames[f].esb.size(); ++b) {
      out << f << ',' << b << ',' << exact(frames[f].esb[b]) << ','
          << exact(frames[f].thr[b]) << '\n';
    }
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace automix::report
