#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eviz {

enum class AnalysisType { Monitoring, AnomalyDetection, Recommendation };

inline constexpr AnalysisType kAllAnalysisTypes[] = {
    AnalysisType::Monitoring, AnalysisType::AnomalyDetection, AnalysisType::Recommendation};

std::string_view analysis_type_name(AnalysisType t) noexcept;
AnalysisType parse_analysis_type(std::string_view name);

enum class Split { train, val };
std::string_view split_name(Split s) noexcept;
Split parse_split(std::string_view name);

struct WindowMeta {
  std::string channel;
  std::string window_start;  // ISO-8601 UTC
  std::string encoding;      // cwt | rp

  friend bool operator==(const WindowMeta&, const WindowMeta&) = default;
};

struct DatasetRecord {
  std::string id;
  std::string image_path;  // relative to the manifest directory
  AnalysisType analysis_type = AnalysisType::Monitoring;
  std::string question;
  std::string answer;
  Split split = Split::train;
  WindowMeta meta;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// `<ANALYSIS_TYPE> Query: question`
std::string build_prompt(AnalysisType type, std::string_view question);
inline std::string build_prompt(const DatasetRecord& rec) {
  return build_prompt(rec.analysis_type, rec.question);
}

struct ParsedPrompt {
  AnalysisType analysis_type;
  std::string question;
};
/// Inverse of build_prompt; nullopt when the text does not follow the template.
std::optional<ParsedPrompt> parse_prompt(std::string_view prompt);

struct Manifest {
  std::vector<DatasetRecord> records;  // ordered by id
  std::uint64_t split_seed = 0;
  double train_fraction = 0.75;
  std::size_t train_count = 0;
  std::size_t val_count = 0;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Number of validation records for `n` records: floor(n * (1 - train_fraction)).
std::size_t validation_count(std::size_t n, double train_fraction);

/// Seeded shuffle, stratified by analysis type. Per-type validation quotas are
/// allocated by largest remainder so the total equals validation_count(n).
Manifest split_dataset(std::vector<DatasetRecord> records, std::uint64_t seed,
                       double train_fraction = 0.75);

inline constexpr int kManifestSchemaVersion = 1;

/// One JSON object per line, ordered by id. Field order is fixed:
/// schema_version, id, image, analysis_type, question, answer, split, meta.
/// Every image path must exist relative to `path`'s directory.
void emit_manifest(const Manifest& m, const std::filesystem::path& path);
std::string manifest_to_jsonl(const Manifest& m);
Manifest parse_manifest(std::string_view jsonl);
Manifest read_manifest(const std::filesystem::path& path);

/// Answers file: JSONL of {"id": ..., "answer": ...}.
std::map<std::string, std::string> read_answers(const std::filesystem::path& path);

/// Keeps at most `cap` records per channel, lowest ids first. 0 keeps all.
std::vector<DatasetRecord> apply_class_cap(std::vector<DatasetRecord> records, std::size_t cap);

std::string record_id(const WindowMeta& meta, AnalysisType type);

/// Question text for one window and task.
std::string default_question(AnalysisType type, const WindowMeta& meta);

}  // namespace eviz
