#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "automix/masking_metric.hpp"
#include "automix/mix_pipeline.hpp"
#include "automix/psycho_model.hpp"

namespace automix::report {

inline constexpr int kSchemaVersion = 1;

struct SummaryRow {
  std::string stage;
  std::size_t iterations = 0;
  double delta_m = 0.0;
  double mean_m = 0.0;  // mean per-track M_n before optimisation
  std::size_t track_count = 0;
};

std::vector<SummaryRow> summary_rows(const pipeline::MixResult& result);

/// `All Tracks  37  39.60  7.70 (14)`
std::string format_summary_row(const SummaryRow& row);
std::string summary_header();

/// Header line then one line per row.
void write_summary(std::span<const SummaryRow> rows, std::ostream& out);
nlohmann::json summary_json(std::span<const SummaryRow> rows);

/// Writes the text summary to `destination` and the JSON form next to it
/// (same stem, ".json"). Throws std::runtime_error on IO failure.
void write_summary(const pipeline::MixResult& result,
                   const std::filesystem::path& destination);

nlohmann::json params_json(const fx::TrackParams& params);

/// Full machine-readable MixResult (without audio).
nlohmann::json mix_report_json(const pipeline::MixResult& result);

nlohmann::json masking_report_json(const metric::MaskingResult& result,
                                   std::span<const std::string> track_ids);

/// Columns: iteration,f,m_total,m_diff,evaluations. Row 0 is the identity
/// parameter set; rows 1.. are the optimiser's best-so-far per iteration.
void write_trace_csv(const pipeline::StageReport& stage, std::ostream& out);

/// "<index>_<slug>.csv", e.g. "00_all_tracks.csv".
std::string trace_file_name(std::size_t stage_index, const std::string& stage);

/// Columns: frame,sb,esb,thr.
void write_psycho_dump(std::span<const psycho::PsychoFrame> frames,
                       std::ostream& out);

/// Writes `doc` pretty-printed with a trailing newline.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace automix::report
