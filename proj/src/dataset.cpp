#include "eviz/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "eviz/error.hpp"
#include "eviz/rng.hpp"

namespace eviz {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kQueryMarker = "> Query: ";

ojson record_to_json(const DatasetRecord& r, const Manifest& m) {
  ojson j;
  j["schema_version"] = kManifestSchemaVersion;
  j["id"] = r.id;
  j["image"] = r.image_path;
  j["analysis_type"] = analysis_type_name(r.analysis_type);
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["split"] = split_name(r.split);
  j["meta"] = ojson{{"channel", r.meta.channel},
                    {"window_start", r.meta.window_start},
                    {"encoding", r.meta.encoding},
                    {"split_seed", m.split_seed},
                    {"train_fraction", m.train_fraction}};
  return j;
}

template <typename T>
T field(const ojson& j, const char* key, std::size_t line) {
  if (!j.contains(key)) {
    throw Error(Errc::SchemaMismatch,
                "manifest line " + std::to_string(line) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::SchemaMismatch,
                "manifest line " + std::to_string(line) + ": bad field '" + key + "'");
  }
}

}  // namespace

std::string_view analysis_type_name(AnalysisType t) noexcept {
  switch (t) {
    case AnalysisType::Monitoring: return "Monitoring";
    case AnalysisType::AnomalyDetection: return "AnomalyDetection";
    case AnalysisType::Recommendation: return "Recommendation";
  }
  return "Monitoring";
}

AnalysisType parse_analysis_type(std::string_view name) {
  for (AnalysisType t : kAllAnalysisTypes) {
    if (analysis_type_name(t) == name) return t;
  }
  throw Error(Errc::InvalidArgument, "unknown analysis type '" + std::string(name) + "'");
}

std::string_view split_name(Split s) noexcept { return s == Split::train ? "train" : "val"; }

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  throw Error(Errc::InvalidArgument, "unknown split '" + std::string(name) + "'");
}

std::string build_prompt(AnalysisType type, std::string_view question) {
  std::string out = "<";
  out += analysis_type_name(type);
  out += kQueryMarker;
  out += question;
  return out;
}

std::optional<ParsedPrompt> parse_prompt(std::string_view prompt) {
  if (prompt.empty() || prompt.front() != '<') return std::nullopt;
  const auto marker = prompt.find(kQueryMarker);
  if (marker == std::string_view::npos) return std::nullopt;
  const auto name = prompt.substr(1, marker - 1);
  for (AnalysisType t : kAllAnalysisTypes) {
    if (analysis_type_name(t) == name) {
      return ParsedPrompt{t, std::string(prompt.substr(marker + kQueryMarker.size()))};
    }
  }
  return std::nullopt;
}

std::size_t validation_count(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(std::floor(double(n) * (1.0 - train_fraction) + 1e-9));
}

Manifest split_dataset(std::vector<DatasetRecord> records, std::uint64_t seed,
                       double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  if (records.size() < 4) {
    throw Error(Errc::TooFewRecords,
                "need at least 4 records to split, got " + std::to_string(records.size()));
  }
  std::sort(records.begin(), records.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].id == records[i - 1].id) {
      throw Error(Errc::InvalidArgument, "duplicate record id '" + records[i].id + "'");
    }
  }

  const std::size_t n = records.size();
  const std::size_t n_val = validation_count(n, train_fraction);

  // Group indices by analysis type, then hand out validation quotas by
  // largest remainder of n_val * n_k / n (ties go to the earlier type).
  std::vector<std::vector<std::size_t>> groups(std::size(kAllAnalysisTypes));
  for (std::size_t i = 0; i < n; ++i) {
    groups[static_cast<std::size_t>(records[i].analysis_type)].push_back(i);
  }
  std::vector<std::size_t> quota(groups.size());
  std::vector<std::size_t> remainder(groups.size());
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    quota[g] = n_val * groups[g].size() / n;
    remainder[g] = n_val * groups[g].size() % n;
    assigned += quota[g];
  }
  std::vector<std::size_t> order(groups.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n_val; ++k) {
    ++quota[order[k % order.size()]];
    ++assigned;
  }

  Rng rng(seed);
  for (auto& r : records) r.split = Split::train;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    shuffle(groups[g], rng);
    for (std::size_t k = 0; k < quota[g]; ++k) records[groups[g][k]].split = Split::val;
  }

  Manifest m;
  m.records = std::move(records);
  m.split_seed = seed;
  m.train_fraction = train_fraction;
  m.val_count = n_val;
  m.train_count = n - n_val;
  return m;
}

std::string manifest_to_jsonl(const Manifest& m) {
  std::string out;
  for (const auto& r : m.records) {
    out += record_to_json(r, m).dump();
    out += '\n';
  }
  return out;
}

void emit_manifest(const Manifest& m, const fs::path& path) {
  if (m.records.size() < 4) {
    throw Error(Errc::TooFewRecords, "manifest has " + std::to_string(m.records.size()) +
                                         " records");
  }
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (const auto& r : m.records) {
    if (!fs::exists(base / r.image_path)) {
      throw Error(Errc::MissingImage, (base / r.image_path).string());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << manifest_to_jsonl(m);
  if (!out) throw Error(Errc::Io, "short write to '" + path.string() + "'");
}

Manifest parse_manifest(std::string_view jsonl) {
  Manifest m;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::SchemaMismatch,
                  "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (field<int>(j, "schema_version", line_no) != kManifestSchemaVersion) {
      throw Error(Errc::SchemaMismatch, "unsupported manifest schema version");
    }
    DatasetRecord r;
    r.id = field<std::string>(j, "id", line_no);
    r.image_path = field<std::string>(j, "image", line_no);
    r.analysis_type = parse_analysis_type(field<std::string>(j, "analysis_type", line_no));
    r.question = field<std::string>(j, "question", line_no);
    r.answer = field<std::string>(j, "answer", line_no);
    r.split = parse_split(field<std::string>(j, "split", line_no));
    const ojson meta = field<ojson>(j, "meta", line_no);
    r.meta.channel = field<std::string>(meta, "channel", line_no);
    r.meta.window_start = field<std::string>(meta, "window_start", line_no);
    r.meta.encoding = field<std::string>(meta, "encoding", line_no);
    const auto seed = field<std::uint64_t>(meta, "split_seed", line_no);
    const auto fraction = field<double>(meta, "train_fraction", line_no);
    if (first) {
      m.split_seed = seed;
      m.train_fraction = fraction;
      first = false;
    }
    (r.split == Split::train ? m.train_count : m.val_count) += 1;
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

std::map<std::string, std::string> read_answers(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ojson::parse(line);
      out[j.at("id").get<std::string>()] = j.at("answer").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaMismatch,
                  "answers line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DatasetRecord> apply_class_cap(std::vector<DatasetRecord> records, std::size_t cap) {
  std::sort(records.begin(), records.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
  if (cap == 0) return records;
  std::map<std::string, std::size_t> seen;
  std::vector<DatasetRecord> out;
  for (auto& r : records) {
    if (seen[r.meta.channel]++ < cap) out.push_back(std::move(r));
  }
  return out;
}

std::string record_id(const WindowMeta& meta, AnalysisType type) {
  std::string stamp;
  for (char c : meta.window_start) {
    if (c != '-' && c != ':') stamp += c;
  }
  return meta.channel + "_" + stamp + "_" + meta.encoding + "_" +
         std::string(analysis_type_name(type));
}

std::string default_question(AnalysisType type, const WindowMeta& meta) {
  const std::string day = meta.window_start.substr(0, 10);
  switch (type) {
    case AnalysisType::Monitoring:
      return "Describe the consumption pattern of the " + meta.channel + " on " + day;
    case AnalysisType::AnomalyDetection:
      return "Identify anomalies in the " + meta.channel + " data starting " + day;
    case AnalysisType::Recommendation:
      return "Recommend energy-saving actions for the " + meta.channel + " based on " + day;
  }
  return {};
}

}  // namespace eviz
