#include "eviz/train_math.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <numbers>

#include "eviz/error.hpp"

namespace eviz {

void validate(const ScheduleConfig& cfg) {
  if (!(cfg.eta_min >= 0.0 && cfg.eta_min <= cfg.eta_max)) {
    throw Error(Errc::InvalidArgument, "need 0 <= eta_min <= eta_max");
  }
  if (!(cfg.t_warm > 0.0 && cfg.t_warm < cfg.t_max)) {
    throw Error(Errc::InvalidArgument, "need 0 < t_warm < t_max");
  }
  if (!(cfg.warmup_floor >= 0.0 && cfg.warmup_floor <= cfg.eta_max)) {
    throw Error(Errc::InvalidArgument, "need 0 <= warmup_floor <= eta_max");
  }
}

double lr_at(double step, const ScheduleConfig& cfg) {
  validate(cfg);
  if (!(step >= 0.0 && step <= cfg.t_max)) {
    throw Error(Errc::StepOutOfRange, "step " + std::to_string(step) + " outside [0, " +
                                          std::to_string(cfg.t_max) + "]");
  }
  if (step < cfg.t_warm) {
    return cfg.warmup_floor + (cfg.eta_max - cfg.warmup_floor) * (step / cfg.t_warm);
  }
  const double progress = (step - cfg.t_warm) / (cfg.t_max - cfg.t_warm);
  return cfg.eta_min +
         0.5 * (cfg.eta_max - cfg.eta_min) * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<std::pair<int, double>> schedule_trace(const ScheduleConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<int, double>> out;
  const auto last = static_cast<int>(std::floor(cfg.t_max));
  for (int t = 0; t <= last; ++t) out.emplace_back(t, lr_at(t, cfg));
  return out;
}

void write_schedule_csv(std::ostream& out, const ScheduleConfig& cfg) {
  out << "step,lr\n";
  char buf[64];
  for (const auto& [step, lr] : schedule_trace(cfg)) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", step, lr);
    out << buf;
  }
}

std::size_t effective_batch(const AccumulationConfig& cfg) {
  if (cfg.micro_batch == 0 || cfg.accumulation == 0) {
    throw Error(Errc::InvalidArgument, "micro batch and accumulation steps must be >= 1");
  }
  return cfg.accumulation * cfg.micro_batch;
}

double cross_entropy(const ProbabilityGrid& grid) {
  if (grid.n == 0 || grid.t == 0 || grid.v == 0) {
    throw Error(Errc::InvalidArgument, "N, T and V must all be >= 1");
  }
  if (grid.probs.size() != grid.n * grid.t * grid.v || grid.targets.size() != grid.n * grid.t) {
    throw Error(Errc::InvalidArgument, "probability grid does not match its shape");
  }
  double total = 0.0;
  for (std::size_t row = 0; row < grid.n * grid.t; ++row) {
    const auto dist = grid.probs.subspan(row * grid.v, grid.v);
    double mass = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0)) throw Error(Errc::NonNormalizedDistribution, "negative probability");
      mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-6) {
      throw Error(Errc::NonNormalizedDistribution,
                  "row " + std::to_string(row) + " sums to " + std::to_string(mass));
    }
    const std::size_t target = grid.targets[row];
    if (target >= grid.v) throw Error(Errc::InvalidArgument, "target id out of vocabulary");
    if (!(dist[target] > 0.0)) {
      throw Error(Errc::InvalidArgument, "zero probability on a target token");
    }
    total += std::log(dist[target]);
  }
  return -total / static_cast<double>(grid.n * grid.t);
}

std::string training_constants_json(const TrainingConstants& c) {
  nlohmann::ordered_json j;
  j["schedule"] = {{"eta_max", c.schedule.eta_max},
                   {"eta_min", c.schedule.eta_min},
                   {"warmup_floor", c.schedule.warmup_floor},
                   {"t_warm", c.schedule.t_warm},
                   {"t_max", c.schedule.t_max}};
  j["micro_batch"] = c.accumulation.micro_batch;
  j["accumulation_steps"] = c.accumulation.accumulation;
  j["effective_batch"] = effective_batch(c.accumulation);
  j["weight_decay"] = c.weight_decay;
  j["beam_width"] = c.beam_width;
  j["max_new_tokens"] = c.max_new_tokens;
  j["frozen"] = c.frozen;
  j["trainable"] = c.trainable;
  return j.dump(2) + "\n";
}

}  // namespace eviz
