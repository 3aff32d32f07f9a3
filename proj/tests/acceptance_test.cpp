// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failures. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "automix/channel_fx.hpp"
#include "automix/loudness.hpp"
#include "automix/masking_metric.hpp"
#include "automix/mix_pipeline.hpp"
#include "automix/pso.hpp"
#include "automix/psycho_model.hpp"
#include "support.hpp"

using namespace automix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Track make_track(const std::string& id, InstrumentClass cls, AudioClip clip) {
  Track t;
  t.id = id;
  t.name = id;
  t.instrument_class = cls;
  t.is_vocal = cls == InstrumentClass::kVox;
  t.clip = std::move(clip);
  return t;
}

// C6/C7 pair: masker -6 dBFS 150-350 Hz, maskee -30 dBFS 200-300 Hz.
std::pair<AudioClip, AudioClip> masking_pair(double seconds) {
  return {testsupport::band_noise(44100, 150.0, 350.0, -6.0, seconds, 61),
          testsupport::band_noise(44100, 200.0, 300.0, -30.0, seconds, 62)};
}

Outcome c1_zero_case() {
  Session s;
  s.tracks.push_back(make_track(
      "solo", InstrumentClass::kKeys,
      testsupport::band_noise(44100, 100.0, 8000.0, -20.0, 30.0, 1)));
  const auto t0 = Clock::now();
  std::vector<std::string> warnings;
  const auto clips = pipeline::normalize_tracks(s, warnings);
  const metric::MaskingEvaluator ev(psycho::PsychoModel(44100), {});
  const auto r = ev.evaluate(clips);
  const double t = seconds_since(t0);
  const auto direct = metric::objective(clips, ev.model(), {});
  const bool ok = r.per_track_m.size() == 1 && r.per_track_m[0] == 0.0 &&
                  r.objective == 0.0 && direct.objective == 0.0 && t < 5.0;
  return {ok, "M_1=" + fmt("%g", r.per_track_m.at(0)) + " f=" + fmt("%g", r.objective) +
                  " runtime " + fmt("%.2f s", t)};
}

Outcome c2_objective_arithmetic() {
  const auto r = metric::MaskingResult::from_track_values({1.0, 2.0, 4.0});
  const bool ok = r.m_total == 21.0 && r.m_diff == 3.0 && r.objective == 24.0;
  return {ok, "M_T=" + fmt("%g", r.m_total) + " M_d=" + fmt("%g", r.m_diff) +
                  " f=" + fmt("%g", r.objective)};
}

Outcome c3_scale_covariance() {
  const psycho::PsychoModel m(44100);
  const double seconds = 86.0 * 512 / 44100;
  const auto w = testsupport::white_noise(44100, 1.0, seconds, 11);
  const auto low = testsupport::band_noise(44100, 20.0, 150.0, 6.0, seconds, 12);
  std::vector<double> x(w.length());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = w[i] + low[i];
  const AudioClip a(44100, std::move(x));
  const double gain = std::pow(10.0, 6.0 / 20.0);
  const double power = gain * gain;
  const auto fa = m.analyze_track(a);
  const auto fb = m.analyze_track(a.scaled(gain));
  double worst_rel = 0.0, worst_ton = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) {
    for (std::size_t sb = 0; sb < fa[k].esb.size(); ++sb) {
      worst_rel = std::max(worst_rel, std::abs(fb[k].esb[sb] / fa[k].esb[sb] / power - 1.0));
      worst_rel = std::max(worst_rel, std::abs(fb[k].thr[sb] / fa[k].thr[sb] / power - 1.0));
    }
    for (std::size_t b = 0; b < fa[k].tonality.size(); ++b) {
      worst_ton = std::max(worst_ton, std::abs(fb[k].tonality[b] - fa[k].tonality[b]));
    }
  }
  const bool ok = fa.size() == fb.size() && worst_rel <= 1e-4 && worst_ton <= 1e-6;
  return {ok, "power ratio " + fmt("%.4f", power) + ", worst esb/thr rel dev " +
                  fmt("%.1e", worst_rel) + ", worst tonality dev " + fmt("%.1e", worst_ton)};
}

Outcome c4_loudness() {
  bool ok = true;
  std::string detail;
  for (double amp_db : {0.0, -20.0}) {
    const double expected = -3.01 + amp_db;
    for (int rate : {44100, 48000}) {
      const auto clip = testsupport::sine(rate, 997.0, std::pow(10.0, amp_db / 20.0), 5.0);
      const double l = loudness::integrated_loudness(clip).integrated_lufs;
      ok = ok && std::abs(l - expected) <= 0.1;
      if (rate == 48000) {
        const double ref = testsupport::reference_lufs_48k(clip);
        ok = ok && std::abs(ref - expected) <= 0.1 && std::abs(l - ref) <= 1e-6;
        detail += fmt("%.3f", l) + " (ref " + fmt("%.3f", ref) + ") ";
      }
    }
  }
  return {ok, detail + "LUFS"};
}

Outcome c5_effects() {
  using testsupport::db;
  const auto in = testsupport::band_noise(44100, 80.0, 6000.0, -14.0, 3.0, 8);
  const double eq_err = rms_difference(fx::apply_eq(in, fx::EqParams{}), in);
  fx::DrcParams unity{-30.0, 1.0, 0.01, 0.3};
  const double drc_err = rms_difference(fx::compress(in, unity), in);

  const fx::DrcParams drc{-20.0, 4.0, 0.005, 3.0};
  double worst_curve = 0.0;
  for (double level = -40.0; level <= 0.0; level += 2.0) {
    const auto s = testsupport::sine(44100, 1000.0, std::pow(10.0, level / 20.0), 1.0);
    const auto out = fx::compress(s, drc);
    double peak = 0.0;
    for (std::size_t i = out.length() - out.length() / 5; i < out.length(); ++i) {
      peak = std::max(peak, std::abs(out[i]));
    }
    const double expected = level > -20.0 ? -20.0 + (level + 20.0) / 4.0 : level;
    worst_curve = std::max(worst_curve, std::abs(db(peak) - expected));
  }

  fx::TrackParams p;
  p.eq.gains_db = {2, 0, -3, 1, 0, 4};
  p.drc = {-25.0, 5.0, 0.01, 0.3};
  const double l_eq = loudness::integrated_loudness(fx::apply_eq(in, p.eq)).integrated_lufs;
  const double l_out =
      loudness::integrated_loudness(fx::process_track(in, p)).integrated_lufs;
  const double makeup_err = std::abs(l_out - l_eq);

  const bool ok = eq_err <= 1e-9 && drc_err <= 1e-9 && worst_curve <= 0.5 && makeup_err <= 0.3;
  return {ok, "EQ rms " + fmt("%.1e", eq_err) + ", DRC rms " + fmt("%.1e", drc_err) +
                  ", curve " + fmt("%.3f dB", worst_curve) + ", makeup " +
                  fmt("%.3f LU", makeup_err)};
}

Outcome c6_directional() {
  const auto [masker, maskee] = masking_pair(4.0);
  const metric::MaskingEvaluator ev(psycho::PsychoModel(44100), {});
  auto m_maskee = [&](double gain_db) {
    const std::vector<AudioClip> clips{masker.scaled(std::pow(10.0, gain_db / 20.0)), maskee};
    return ev.evaluate(clips).per_track_m[1];
  };
  const double base = m_maskee(0.0), down = m_maskee(-12.0), up = m_maskee(12.0);
  return {down < base && base < up, "M_maskee -12/0/+12 dB: " + fmt("%.4f", down) + " / " +
                                        fmt("%.4f", base) + " / " + fmt("%.4f", up)};
}

struct TraceCheck {
  std::size_t runs = 0;
  std::size_t iterations = 0;
  std::size_t violations = 0;
  std::vector<std::string> problems;

  void check_trace(const std::string& where, const pso::PsoTrace& t) {
    ++runs;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      if (t.rows[i].best_f > t.rows[i - 1].best_f) problems.push_back(where + ": best_f rose");
    }
    const auto r = to_string(t.stop_reason);
    if (r != "tolerance_stall" && r != "max_iterations" && r != "zero_objective") {
      problems.push_back(where + ": stop reason " + std::string(r));
    }
    if (t.out_of_bounds_evaluations != 0) problems.push_back(where + ": out-of-bounds eval");
  }
  void check_swarm(std::span<const fx::Range> ranges, const pso::Swarm& swarm) {
    ++iterations;
    for (const auto& p : swarm.positions) {
      for (std::size_t d = 0; d < p.size(); ++d) {
        if (!ranges[d].contains(p[d])) ++violations;
      }
    }
  }
  bool ok() const { return runs > 0 && problems.empty() && violations == 0; }
};

TraceCheck g_traces;

Outcome c7_grid_oracle() {
  const auto [masker, maskee] = masking_pair(10.0);
  const metric::MaskingEvaluator ev(psycho::PsychoModel(44100), {});
  const auto bounds = fx::ParamBounds::instrument();
  auto f_at = [&](double gain) {
    fx::TrackParams p = fx::identity_params(bounds);
    p.eq.gains_db[2] = gain;
    const std::vector<AudioClip> clips{fx::process_track(masker, p), maskee};
    const auto r = ev.evaluate(clips);
    return pso::ObjectiveValue{r.objective, r.m_total, r.m_diff};
  };
  const auto t0 = Clock::now();
  double grid_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 240; ++i) grid_min = std::min(grid_min, f_at(-6.0 + 0.05 * i).f);

  const std::vector<pso::Range> range{bounds.eq_gain_db};
  std::string detail = "grid min " + fmt("%.5f", grid_min) + "; gbest";
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    pso::PsoConfig cfg;
    cfg.rng_seed = seed;
    const auto r = pso::optimize(
        [&](std::span<const double> x) { return f_at(x[0]); }, range, cfg,
        std::vector<double>{0.0},
        [&](std::size_t, const pso::Swarm& s) { g_traces.check_swarm(range, s); });
    g_traces.check_trace("c7 seed " + std::to_string(seed), r.trace);
    ok = ok && r.best_value.f <= grid_min + 0.05;
    detail += " " + fmt("%.5f", r.best_value.f);
  }
  const double t = seconds_since(t0);
  ok = ok && t < 600.0;
  return {ok, detail + ", runtime " + fmt("%.0f s", t)};
}

Session overlap_session() {
  Session s;
  const double secs = 3.0;
  auto add = [&](const char* id, InstrumentClass cls, double lo, double hi, std::uint64_t seed) {
    s.tracks.push_back(
        make_track(id, cls, testsupport::band_noise(44100, lo, hi, -20.0, secs, seed)));
  };
  add("kick", InstrumentClass::kDrums, 40.0, 300.0, 81);
  add("bass", InstrumentClass::kBass, 50.0, 600.0, 82);
  add("perc", InstrumentClass::kDrums, 1500.0, 9000.0, 83);
  add("keys", InstrumentClass::kKeys, 150.0, 3000.0, 84);
  add("guitar", InstrumentClass::kGuitars, 250.0, 4000.0, 85);
  add("pad", InstrumentClass::kOther, 120.0, 2500.0, 86);
  add("vox", InstrumentClass::kVox, 200.0, 4500.0, 87);
  add("bvox", InstrumentClass::kVox, 250.0, 3500.0, 88);
  s.subgroups = {{"Rhythm", {"kick", "bass", "perc"}, false},
                 {"Harmony", {"keys", "guitar", "pad"}, false},
                 {"Vocals", {"vox", "bvox"}, true}};
  s.engine_config.analysis_window = AnalysisWindow{1.0, 1.0};
  s.engine_config.pso.rng_seed = 3;
  return s;
}

pipeline::PipelineHooks trace_hooks() {
  pipeline::PipelineHooks hooks;
  hooks.on_iteration = [](const std::string&, const fx::ParamBounds& b, std::size_t,
                          const pso::Swarm& swarm) {
    const auto ranges = fx::stage_bounds(swarm.positions[0].size() / fx::kParamsPerTrack, b);
    g_traces.check_swarm(ranges, swarm);
  };
  return hooks;
}

Outcome c8_end_to_end() {
  const auto s = overlap_session();
  const auto t0 = Clock::now();
  const auto flat = pipeline::mix_flat(s, trace_hooks());
  const auto& fs0 = flat.stage_reports.at(0);
  g_traces.check_trace("c8 flat", fs0.trace);
  bool ok = fs0.final_f <= 0.7 * fs0.initial_f && fs0.iterations() <= 100;
  std::string detail = "flat f " + fmt("%.3f", fs0.initial_f) + " -> " +
                       fmt("%.3f", fs0.final_f) + " in " +
                       std::to_string(fs0.iterations()) + " it (dim " +
                       std::to_string(fs0.dimension) + ");";

  const auto sub = pipeline::mix_subgrouped(s, trace_hooks());
  for (const auto& st : sub.stage_reports) {
    if (!st.skipped) g_traces.check_trace("c8 " + st.name, st.trace);
    ok = ok && st.dimension < fs0.dimension;
    detail += " " + st.name + " dim " + std::to_string(st.dimension);
  }
  const auto& last = sub.stage_reports.back();
  ok = ok && last.final_f < last.initial_f;
  detail += "; final stage f " + fmt("%.3f", last.initial_f) + " -> " +
            fmt("%.3f", last.final_f) + ", runtime " + fmt("%.0f s", seconds_since(t0));
  return {ok, detail};
}

Outcome c9_traces() {
  std::string detail = std::to_string(g_traces.runs) + " runs, " +
                       std::to_string(g_traces.iterations) + " iterations sampled, " +
                       std::to_string(g_traces.violations) + " bound violations";
  for (const auto& p : g_traces.problems) detail += "; " + p;
  if (g_traces.runs == 0) detail = "no optimiser runs recorded (run with criteria 7 and 8)";
  return {g_traces.ok(), detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome c10_determinism() {
  const auto dir = testsupport::scratch_dir("acceptance_c10");
  nlohmann::json doc{{"tracks", nlohmann::json::array()}};
  const char* classes[] = {"drums", "bass", "keys", "vox"};
  for (int i = 0; i < 4; ++i) {
    const std::string id = "t" + std::to_string(i);
    const double lo = 80.0 * (i + 1);
    write_wav(testsupport::band_noise(44100, lo, lo * 10.0, -18.0, 1.5, 200 + i),
              dir / (id + ".wav"), WavFormat::kPcm24);
    doc["tracks"].push_back(
        {{"id", id}, {"name", id}, {"path", id + ".wav"}, {"class", classes[i]}});
  }
  doc["subgroups"] = {{{"name", "Low"}, {"members", {"t0", "t1"}}},
                      {{"name", "High"}, {"members", {"t2", "t3"}}}};
  doc["pso"] = {{"swarm", 8}, {"max_iters", 6}, {"seed", 9}};
  std::ofstream(dir / "session.json") << doc.dump(2);

  std::vector<std::string> names;
  for (const char* run : {"a", "b"}) {
    const fs::path out = dir / run;
    const std::string cmd = std::string("\"") + AUTOMIX_CLI_PATH + "\" mix --session \"" +
                            (dir / "session.json").string() + "\" --out \"" +
                            (out / "mix.wav").string() + "\" --trace-dir \"" +
                            (out / "trace").string() + "\" > /dev/null";
    fs::create_directories(out);
    if (std::system(cmd.c_str()) != 0) return {false, "automix mix failed"};
  }
  bool ok = slurp(dir / "a" / "mix.wav") == slurp(dir / "b" / "mix.wav") &&
            !slurp(dir / "a" / "mix.wav").empty();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "trace")) {
    ++files;
    ok = ok && slurp(e.path()) == slurp(dir / "b" / "trace" / e.path().filename());
  }
  ok = ok && files == 3;
  return {ok, "mix.wav and " + std::to_string(files) + " trace CSVs compared byte for byte"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 metric zero case", c1_zero_case},
      {"2 objective arithmetic", c2_objective_arithmetic},
      {"3 psychoacoustic scale covariance", c3_scale_covariance},
      {"4 loudness conformance", c4_loudness},
      {"5 effects identities", c5_effects},
      {"6 directional de-masking", c6_directional},
      {"7 optimiser vs exhaustive grid", c7_grid_oracle},
      {"8 end-to-end masking reduction", c8_end_to_end},
      {"9 trace well-formedness", c9_traces},
      {"10 determinism", c10_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(static_cast<int>(i + 1))) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  C%s  [%s]\n", o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
