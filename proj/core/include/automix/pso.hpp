#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "automix/channel_fx.hpp"

namespace automix::pso {

using fx::Range;

struct PsoConfig {
  std::size_t swarm_size = 50;
  std::size_t max_iterations = 100;
  double stall_tolerance = 0.05;
  std::size_t stall_window = 10;
  double inertia = 0.7298;
  double cognitive = 1.49618;
  double social = 1.49618;
  /// Per-dimension velocity limit as a fraction of the range.
  double velocity_clamp = 0.2;
  std::uint64_t rng_seed = 1;
  /// Concurrent objective evaluations; 0 reads AUTOMIX_THREADS, else 1.
  std::size_t threads = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  friend bool operator==(const PsoConfig&, const PsoConfig&) = default;
};

/// One objective evaluation. For the masking objective `f` equals
/// m_total + m_diff; scalar problems leave the components at f and 0.
struct ObjectiveValue {
  double f = 0.0;
  double m_total = 0.0;
  double m_diff = 0.0;
};

using Objective = std::function<ObjectiveValue(std::span<const double>)>;

enum class StopReason { kToleranceStall, kMaxIterations, kZeroObjective };

std::string_view to_string(StopReason reason);

struct TraceRow {
  std::size_t iteration = 0;
  double best_f = 0.0;
  double m_total = 0.0;
  double m_diff = 0.0;
  std::size_t evaluations = 0;
};

struct PsoTrace {
  std::vector<TraceRow> rows;
  std::vector<double> best;
  StopReason stop_reason = StopReason::kMaxIterations;
  /// Candidates whose objective was NaN (scored as +infinity).
  std::size_t nan_evaluations = 0;
  /// Candidates evaluated outside the box (must stay 0).
  std::size_t out_of_bounds_evaluations = 0;

  std::size_t iterations() const { return rows.size(); }
};

struct Swarm {
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> velocities;
};

struct PsoResult {
  std::vector<double> best;
  ObjectiveValue best_value;
  PsoTrace trace;
};

/// Seeded uniform positions within `bounds`, zero velocities.
Swarm initialize_swarm(std::span<const Range> bounds, const PsoConfig& cfg,
                       std::uint64_t seed);

/// Pins particle 0 to `identity`. Throws std::invalid_argument if any
/// coordinate lies outside its bound.
void seed_identity_particle(Swarm& swarm, std::span<const Range> bounds,
                            std::span<const double> identity);

/// Called after each iteration's evaluation with the positions just scored.
using IterationObserver =
    std::function<void(std::size_t iteration, const Swarm& swarm)>;

/// Global-best PSO. Positions are reflected at the bounds (velocity sign
/// flipped). Stops when the best value improved by less than
/// `stall_tolerance` over the last `stall_window` iterations, at
/// `max_iterations`, or when the best value reaches 0.
PsoResult optimize(const Objective& objective, std::span<const Range> bounds,
                   const PsoConfig& cfg,
                   std::optional<std::vector<double>> identity = std::nullopt,
                   const IterationObserver& observer = {});

/// Worker count from AUTOMIX_THREADS (defaults to 1).
std::size_t threads_from_environment();

}  // namespace automix::pso
