#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eviz/dataset.hpp"

namespace eviz {

struct TokenLogRecord {
  std::string example_id;
  std::vector<double> token_logprobs;  // natural log, all <= 0
  Split split = Split::val;
};

/// -(1/N) * sum of every token logprob in `split`. Records are reduced in id
/// order with compensated summation, so the result does not depend on the
/// order they are passed in.
double mean_nll(std::span<const TokenLogRecord> records, Split split);

/// exp(mean_nll)
double perplexity(std::span<const TokenLogRecord> records, Split split);

using Tokens = std::vector<std::string>;

struct TokenizerOptions {
  bool lowercase = true;
  bool keep_punctuation = false;  // emit ASCII punctuation as one-char tokens
};

/// Splits on whitespace and ASCII punctuation. Bytes >= 0x80 are word bytes.
Tokens tokenize(std::string_view text, const TokenizerOptions& options = {});

struct TextPair {
  Tokens candidate;
  std::vector<Tokens> references;  // non-empty
};

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Corpus LCS recall: sum_k LCS(r_k, c_k) / sum_k |r_k|. With several
/// references the one with the longest LCS is used (first on ties).
double rouge_l(std::span<const TextPair> pairs);

struct BleuOptions {
  std::size_t max_n = 4;
  std::vector<double> weights;  // empty means uniform 1/max_n
  bool add_one_smoothing = false;  // applied to n >= 2 only
};

struct BleuStats {
  double score = 0;
  double brevity_penalty = 0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::vector<std::size_t> matches;  // clipped n-gram matches per order
  std::vector<std::size_t> totals;   // candidate n-grams per order
  std::vector<double> precisions;
};

/// Corpus BLEU with clipped n-gram precisions and brevity penalty. The
/// effective reference length of each pair is the reference length closest to
/// the candidate (shorter on ties). Any zero precision makes the score 0.
BleuStats bleu_stats(std::span<const TextPair> pairs, const BleuOptions& options = {});
double bleu(std::span<const TextPair> pairs, const BleuOptions& options = {});

struct Generation {
  std::string id;
  std::string text;
  std::optional<std::vector<double>> token_logprobs;
};

std::vector<Generation> parse_generations(std::string_view jsonl);
std::vector<Generation> read_generations(const std::filesystem::path& path);
std::vector<TokenLogRecord> read_token_logs(const std::filesystem::path& path);

struct GroupMetrics {
  std::size_t count = 0;
  double rouge_l = 0;
  double bleu = 0;
  std::optional<double> mean_nll;  // only when logprobs were supplied
  std::optional<double> perplexity;
};

struct MetricReport {
  GroupMetrics overall;
  std::map<AnalysisType, GroupMetrics> per_task;
  std::optional<double> train_loss;
  std::optional<double> val_loss;
};

struct EvalOptions {
  TokenizerOptions tokenizer;
  BleuOptions bleu;
};

/// Scores every validation record of `manifest` against its generation.
/// Throws MissingGeneration listing every validation id without one.
/// `token_logs`, when given, supplies the train/validation loss rows.
MetricReport evaluate_manifest(const Manifest& manifest, std::span<const Generation> generations,
                               std::span<const TokenLogRecord> token_logs = {},
                               const EvalOptions& options = {});

inline constexpr int kReportSchemaVersion = 1;
std::string report_to_json(const MetricReport& report);
std::string report_to_table(const MetricReport& report);

}  // namespace eviz
