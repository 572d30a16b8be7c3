#include "eviz/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "eviz/error.hpp"

namespace eviz {

using ojson = nlohmann::ordered_json;

namespace {

// Neumaier's compensated sum; callers fix the order of `add` calls.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<const TokenLogRecord*> in_id_order(std::span<const TokenLogRecord> records) {
  std::vector<const TokenLogRecord*> out;
  for (const auto& r : records) out.push_back(&r);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    if (a->example_id != b->example_id) return a->example_id < b->example_id;
    return a->token_logprobs < b->token_logprobs;
  });
  return out;
}

std::string ngram_key(std::span<const std::string> tokens, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) key += '\x1f';
    key += tokens[start + i];
  }
  return key;
}

std::map<std::string, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[ngram_key(tokens, i, n)];
  return counts;
}

void require_references(const TextPair& p) {
  if (p.references.empty()) throw Error(Errc::InvalidArgument, "text pair without references");
}

std::vector<double> parse_logprobs(const ojson& j) {
  auto v = j.get<std::vector<double>>();
  for (double x : v) {
    if (!std::isfinite(x) || x > 0.0) {
      throw Error(Errc::InvalidArgument, "token logprobs must be finite and <= 0");
    }
  }
  return v;
}

template <typename F>
void for_each_jsonl(const std::filesystem::path& path, const char* what, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      f(ojson::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaMismatch,
                  std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

ojson group_to_json(const GroupMetrics& g) {
  ojson j;
  j["count"] = g.count;
  j["rouge_l"] = g.rouge_l;
  j["bleu"] = g.bleu;
  j["mean_nll"] = g.mean_nll ? ojson(*g.mean_nll) : ojson(nullptr);
  j["perplexity"] = g.perplexity ? ojson(*g.perplexity) : ojson(nullptr);
  return j;
}

}  // namespace

double mean_nll(std::span<const TokenLogRecord> records, Split split) {
  CompensatedSum sum;
  std::size_t count = 0;
  for (const auto* r : in_id_order(records)) {
    if (r->split != split) continue;
    for (double lp : r->token_logprobs) {
      if (!std::isfinite(lp) || lp > 0.0) {
        throw Error(Errc::InvalidArgument,
                    "logprob " + std::to_string(lp) + " in '" + r->example_id + "' is not <= 0");
      }
      sum.add(lp);
      ++count;
    }
  }
  if (count == 0) {
    throw Error(Errc::EmptySplit, "no tokens in split '" + std::string(split_name(split)) + "'");
  }
  return -sum.value() / static_cast<double>(count);
}

double perplexity(std::span<const TokenLogRecord> records, Split split) {
  return std::exp(mean_nll(records, split));
}

Tokens tokenize(std::string_view text, const TokenizerOptions& options) {
  Tokens out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80 && std::isspace(u)) {
      flush();
    } else if (u < 0x80 && std::ispunct(u)) {
      flush();
      if (options.keep_punctuation) out.emplace_back(1, ch);
    } else {
      current += options.lowercase && u < 0x80 ? static_cast<char>(std::tolower(u)) : ch;
    }
  }
  flush();
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const TextPair> pairs) {
  std::size_t hits = 0, reference_tokens = 0;
  for (const auto& p : pairs) {
    require_references(p);
    std::size_t best = 0, best_len = p.references.front().size();
    for (std::size_t k = 0; k < p.references.size(); ++k) {
      const std::size_t l = lcs_length(p.references[k], p.candidate);
      if (k == 0 || l > best) {
        best = l;
        best_len = p.references[k].size();
      }
    }
    hits += best;
    reference_tokens += best_len;
  }
  return reference_tokens == 0 ? 0.0 : double(hits) / double(reference_tokens);
}

BleuStats bleu_stats(std::span<const TextPair> pairs, const BleuOptions& options) {
  if (options.max_n == 0) throw Error(Errc::InvalidArgument, "BLEU max_n must be >= 1");
  std::vector<double> weights = options.weights;
  if (weights.empty()) weights.assign(options.max_n, 1.0 / double(options.max_n));
  if (weights.size() != options.max_n) {
    throw Error(Errc::InvalidArgument, "BLEU weights must have max_n entries");
  }

  BleuStats s;
  s.matches.assign(options.max_n, 0);
  s.totals.assign(options.max_n, 0);
  for (const auto& p : pairs) {
    require_references(p);
    const std::size_t c = p.candidate.size();
    s.candidate_length += c;
    std::size_t best_ref = p.references.front().size();
    for (const auto& ref : p.references) {
      const auto diff = [c](std::size_t len) { return len > c ? len - c : c - len; };
      if (diff(ref.size()) < diff(best_ref) ||
          (diff(ref.size()) == diff(best_ref) && ref.size() < best_ref)) {
        best_ref = ref.size();
      }
    }
    s.reference_length += best_ref;

    for (std::size_t n = 1; n <= options.max_n; ++n) {
      const auto cand = ngram_counts(p.candidate, n);
      std::map<std::string, std::size_t> max_ref;
      for (const auto& ref : p.references) {
        for (const auto& [gram, count] : ngram_counts(ref, n)) {
          max_ref[gram] = std::max(max_ref[gram], count);
        }
      }
      for (const auto& [gram, count] : cand) {
        const auto it = max_ref.find(gram);
        s.matches[n - 1] += std::min(count, it == max_ref.end() ? 0 : it->second);
        s.totals[n - 1] += count;
      }
    }
  }

  s.precisions.assign(options.max_n, 0.0);
  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < options.max_n; ++n) {
    double m = double(s.matches[n]), t = double(s.totals[n]);
    if (options.add_one_smoothing && n > 0) {
      m += 1.0;
      t += 1.0;
    }
    s.precisions[n] = t > 0 ? m / t : 0.0;
    if (s.precisions[n] == 0.0) {
      any_zero = true;
    } else {
      log_sum += weights[n] * std::log(s.precisions[n]);
    }
  }

  if (s.candidate_length == 0) {
    s.brevity_penalty = 0.0;
  } else if (s.candidate_length > s.reference_length) {
    s.brevity_penalty = 1.0;
  } else {
    s.brevity_penalty =
        std::exp(1.0 - double(s.reference_length) / double(s.candidate_length));
  }
  s.score = any_zero || s.candidate_length == 0 ? 0.0 : s.brevity_penalty * std::exp(log_sum);
  return s;
}

double bleu(std::span<const TextPair> pairs, const BleuOptions& options) {
  return bleu_stats(pairs, options).score;
}

std::vector<Generation> parse_generations(std::string_view jsonl) {
  std::vector<Generation> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ojson::parse(line);
      Generation g;
      g.id = j.at("id").get<std::string>();
      g.text = j.at("text").get<std::string>();
      if (j.contains("token_logprobs") && !j["token_logprobs"].is_null()) {
        g.token_logprobs = parse_logprobs(j["token_logprobs"]);
      }
      out.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaMismatch,
                  "generations line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Generation> read_generations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_generations(buf.str());
}

std::vector<TokenLogRecord> read_token_logs(const std::filesystem::path& path) {
  std::vector<TokenLogRecord> out;
  for_each_jsonl(path, "token log", [&](const ojson& j) {
    TokenLogRecord r;
    r.example_id = j.at("example_id").get<std::string>();
    r.token_logprobs = parse_logprobs(j.at("token_logprobs"));
    r.split = parse_split(j.at("split").get<std::string>());
    out.push_back(std::move(r));
  });
  return out;
}

MetricReport evaluate_manifest(const Manifest& manifest, std::span<const Generation> generations,
                               std::span<const TokenLogRecord> token_logs,
                               const EvalOptions& options) {
  std::map<std::string, const Generation*> by_id;
  for (const auto& g : generations) by_id[g.id] = &g;

  std::vector<const DatasetRecord*> val;
  for (const auto& r : manifest.records) {
    if (r.split == Split::val) val.push_back(&r);
  }
  std::sort(val.begin(), val.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

  std::string missing;
  for (const auto* r : val) {
    if (!by_id.count(r->id)) missing += (missing.empty() ? "" : ", ") + r->id;
  }
  if (!missing.empty()) throw Error(Errc::MissingGeneration, missing);

  auto score = [&](const std::vector<const DatasetRecord*>& group) {
    GroupMetrics g;
    g.count = group.size();
    std::vector<TextPair> pairs;
    std::vector<TokenLogRecord> logs;
    for (const auto* r : group) {
      const Generation& gen = *by_id.at(r->id);
      pairs.push_back({tokenize(gen.text, options.tokenizer),
                       {tokenize(r->answer, options.tokenizer)}});
      if (gen.token_logprobs) logs.push_back({r->id, *gen.token_logprobs, Split::val});
    }
    g.rouge_l = rouge_l(pairs);
    g.bleu = bleu(pairs, options.bleu);
    const bool has_tokens = std::any_of(logs.begin(), logs.end(), [](const auto& l) {
      return !l.token_logprobs.empty();
    });
    if (has_tokens) {
      g.mean_nll = mean_nll(logs, Split::val);
      g.perplexity = std::exp(*g.mean_nll);
    }
    return g;
  };

  MetricReport report;
  report.overall = score(val);
  for (AnalysisType t : kAllAnalysisTypes) {
    std::vector<const DatasetRecord*> group;
    for (const auto* r : val) {
      if (r->analysis_type == t) group.push_back(r);
    }
    if (!group.empty()) report.per_task[t] = score(group);
  }

  auto split_loss = [&](Split s) -> std::optional<double> {
    for (const auto& r : token_logs) {
      if (r.split == s && !r.token_logprobs.empty()) return mean_nll(token_logs, s);
    }
    return std::nullopt;
  };
  report.train_loss = split_loss(Split::train);
  report.val_loss = split_loss(Split::val);
  return report;
}

std::string report_to_json(const MetricReport& report) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["split"] = "val";
  j["overall"] = group_to_json(report.overall);
  ojson tasks = ojson::object();
  for (const auto& [t, g] : report.per_task) tasks[std::string(analysis_type_name(t))] = group_to_json(g);
  j["per_task"] = tasks;
  j["loss"] = ojson{{"train", report.train_loss ? ojson(*report.train_loss) : ojson(nullptr)},
                    {"val", report.val_loss ? ojson(*report.val_loss) : ojson(nullptr)}};
  return j.dump(2) + "\n";
}

std::string report_to_table(const MetricReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-18s %6s %10s %8s %8s\n", "task", "n", "PPL", "ROUGE-L",
                "BLEU");
  out += line;
  auto row = [&](std::string_view name, const GroupMetrics& g) {
    char ppl[32] = "-";
    if (g.perplexity) std::snprintf(ppl, sizeof ppl, "%.3f", *g.perplexity);
    std::snprintf(line, sizeof line, "%-18.*s %6zu %10s %8.4f %8.4f\n", int(name.size()),
                  name.data(), g.count, ppl, g.rouge_l, g.bleu);
    out += line;
  };
  for (const auto& [t, g] : report.per_task) row(analysis_type_name(t), g);
  row("overall", report.overall);
  if (report.train_loss || report.val_loss) {
    std::snprintf(line, sizeof line, "train loss %s  val loss %s\n",
                  report.train_loss ? std::to_string(*report.train_loss).c_str() : "-",
                  report.val_loss ? std::to_string(*report.val_loss).c_str() : "-");
    out += line;
  }
  return out;
}

}  // namespace eviz
