#include "automix/pso.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace automix::pso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_bounds(std::span<const Range> bounds) {
  if (bounds.empty()) {
    throw std::invalid_argument("pso: empty search space");
  }
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    if (!std::isfinite(bounds[d].lo) || !std::isfinite(bounds[d].hi) ||
        !(bounds[d].lo < bounds[d].hi)) {
      throw std::invalid_argument("pso: invalid bounds in dimension " +
                                  std::to_string(d));
    }
  }
}

// Evaluates every position, possibly on several threads. Results land in
// `values` by index, so the outcome is independent of scheduling.
void evaluate_all(const Objective& objective,
                  const std::vector<std::vector<double>>& positions,
                  std::vector<ObjectiveValue>& values, std::size_t threads) {
  values.assign(positions.size(), {});
  auto run_one = [&](std::size_t i) { values[i] = objective(positions[i]); };
  const std::size_t workers = std::min(threads, positions.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < positions.size(); ++i) run_one(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < positions.size(); i = next++) run_one(i);
    });
  }
}

}  // namespace

void PsoConfig::validate() const {
  if (swarm_size < 2) throw std::invalid_argument("pso: swarm_size must be >= 2");
  if (max_iterations < 1) {
    throw std::invalid_argument("pso: max_iterations must be >= 1");
  }
  if (!(stall_tolerance >= 0.0)) {
    throw std::invalid_argument("pso: stall_tolerance must be >= 0");
  }
  if (!(velocity_clamp > 0.0 && velocity_clamp <= 1.0)) {
    throw std::invalid_argument("pso: velocity_clamp must be in (0, 1]");
  }
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kToleranceStall:
      return "tolerance_stall";
    case StopReason::kMaxIterations:
      return "max_iterations";
    case StopReason::kZeroObjective:
      return "zero_objective";
  }
  return "unknown";
}

std::size_t threads_from_environment() {
  if (const char* env = std::getenv("AUTOMIX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

Swarm initialize_swarm(std::span<const Range> bounds, const PsoConfig& cfg,
                       std::uint64_t seed) {
  check_bounds(bounds);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Swarm s;
  s.positions.resize(cfg.swarm_size, std::vector<double>(bounds.size()));
  s.velocities.assign(cfg.swarm_size, std::vector<double>(bounds.size(), 0.0));
  for (auto& p : s.positions) {
    for (std::size_t d = 0; d < bounds.size(); ++d) {
      p[d] = bounds[d].lo + unit(rng) * (bounds[d].hi - bounds[d].lo);
    }
  }
  return s;
}

void seed_identity_particle(Swarm& swarm, std::span<const Range> bounds,
                            std::span<const double> identity) {
  if (identity.size() != bounds.size()) {
    throw std::invalid_argument("pso: identity particle has wrong dimension");
  }
  for (std::size_t d = 0; d < bounds.size(); ++d) {
    if (!bounds[d].contains(identity[d])) {
      throw std::invalid_argument(
          "pso: identity parameters lie outside the bounds in dimension " +
          std::to_string(d));
    }
  }
  if (swarm.positions.empty()) {
    throw std::invalid_argument("pso: empty swarm");
  }
  swarm.positions[0].assign(identity.begin(), identity.end());
  std::ranges::fill(swarm.velocities[0], 0.0);
}

PsoResult optimize(const Objective& objective, std::span<const Range> bounds,
                   const PsoConfig& cfg,
                   std::optional<std::vector<double>> identity,
                   const IterationObserver& observer) {
  cfg.validate();
  check_bounds(bounds);
  const std::size_t dims = bounds.size();
  const std::size_t threads =
      cfg.threads > 0 ? cfg.threads : threads_from_environment();

  // Initial positions and the velocity updates draw from separate streams so
  // a pinned identity particle does not shift the random sequence.
  Swarm swarm = initialize_swarm(bounds, cfg, cfg.rng_seed);
  if (identity) seed_identity_particle(swarm, bounds, *identity);
  std::mt19937_64 rng(cfg.rng_seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> vmax(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    vmax[d] = cfg.velocity_clamp * (bounds[d].hi - bounds[d].lo);
  }

  PsoResult result;
  PsoTrace& trace = result.trace;
  std::vector<std::vector<double>> pbest = swarm.positions;
  std::vector<double> pbest_f(cfg.swarm_size, kInf);
  std::vector<double> gbest;
  ObjectiveValue gbest_value{kInf, kInf, 0.0};
  std::vector<ObjectiveValue> values;
  std::size_t evaluations = 0;

  auto score = [&](std::size_t iteration) {
    for (const auto& p : swarm.positions) {
      for (std::size_t d = 0; d < dims; ++d) {
        if (!bounds[d].contains(p[d])) {
          ++trace.out_of_bounds_evaluations;
          break;
        }
      }
    }
    evaluate_all(objective, swarm.positions, values, threads);
    evaluations += values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (std::isnan(values[i].f)) {
        ++trace.nan_evaluations;
        values[i] = {kInf, kInf, kInf};
      }
      if (values[i].f < pbest_f[i]) {
        pbest_f[i] = values[i].f;
        pbest[i] = swarm.positions[i];
      }
      if (values[i].f < gbest_value.f || gbest.empty()) {
        gbest_value = values[i];
        gbest = swarm.positions[i];
      }
    }
    trace.rows.push_back({iteration, gbest_value.f, gbest_value.m_total,
                          gbest_value.m_diff, evaluations});
    if (observer) observer(iteration, swarm);
  };

  score(1);
  for (std::size_t iteration = 1;; ++iteration) {
    if (gbest_value.f == 0.0) {
      trace.stop_reason = StopReason::kZeroObjective;
      break;
    }
    if (iteration > cfg.stall_window) {
      const double earlier = trace.rows[iteration - 1 - cfg.stall_window].best_f;
      if (earlier - gbest_value.f < cfg.stall_tolerance) {
        trace.stop_reason = StopReason::kToleranceStall;
        break;
      }
    }
    if (iteration >= cfg.max_iterations) {
      trace.stop_reason = StopReason::kMaxIterations;
      break;
    }

    for (std::size_t i = 0; i < cfg.swarm_size; ++i) {
      auto& x = swarm.positions[i];
      auto& v = swarm.velocities[i];
      for (std::size_t d = 0; d < dims; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double vd = cfg.inertia * v[d] +
                    cfg.cognitive * r1 * (pbest[i][d] - x[d]) +
                    cfg.social * r2 * (gbest[d] - x[d]);
        vd = std::clamp(vd, -vmax[d], vmax[d]);
        double xd = x[d] + vd;
        if (xd < bounds[d].lo) {
          xd = bounds[d].lo + (bounds[d].lo - xd);
          vd = -vd;
        } else if (xd > bounds[d].hi) {
          xd = bounds[d].hi - (xd - bounds[d].hi);
          vd = -vd;
        }
        x[d] = std::clamp(xd, bounds[d].lo, bounds[d].hi);
        v[d] = vd;
      }
    }
    score(iteration + 1);
  }

  result.best = gbest;
  result.best_value = gbest_value;
  trace.best = gbest;
  return result;
}

}  // namespace automix::pso
