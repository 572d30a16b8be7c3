#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eviz {

struct ScheduleConfig {
  double eta_max = 1e-4;
  double eta_min = 0.0;
  double warmup_floor = 0.0;  // rate at step 0
  double t_warm = 50;
  double t_max = 800;
};

void validate(const ScheduleConfig& cfg);

/// Linear warmup from warmup_floor to eta_max over [0, t_warm), then
/// eta_min + (eta_max - eta_min)/2 * (1 + cos(pi * (t - t_warm) / (t_max - t_warm))).
double lr_at(double step, const ScheduleConfig& cfg = {});

/// (step, lr) for step = 0 .. t_max.
std::vector<std::pair<int, double>> schedule_trace(const ScheduleConfig& cfg = {});

/// `step,lr` header then one row per step, lr printed with 17 significant digits.
void write_schedule_csv(std::ostream& out, const ScheduleConfig& cfg = {});

struct AccumulationConfig {
  std::size_t micro_batch = 6;
  std::size_t accumulation = 8;
};

/// accumulation * micro_batch
std::size_t effective_batch(const AccumulationConfig& cfg = {});

/// Dense N x T x V probabilities (row-major, V fastest) with N x T target ids.
struct ProbabilityGrid {
  std::size_t n = 0;
  std::size_t t = 0;
  std::size_t v = 0;
  std::span<const double> probs;
  std::span<const std::size_t> targets;
};

/// -(1/(N*T)) * sum_i sum_j log P(target_ij). Each distribution must sum to 1
/// within 1e-6 and the target probability must be positive.
double cross_entropy(const ProbabilityGrid& grid);

/// Optimisation constants handed to the fine-tuning harness alongside the
/// schedule. No primary-side computation uses the last four.
struct TrainingConstants {
  ScheduleConfig schedule;
  AccumulationConfig accumulation;
  double weight_decay = 0.01;
  std::size_t beam_width = 3;
  std::size_t max_new_tokens = 1024;
  std::vector<std::string> frozen = {"vision_encoder"};
  std::vector<std::string> trainable = {"language_decoder", "cross_attention"};
};

std::string training_constants_json(const TrainingConstants& c = {});

}  // namespace eviz
