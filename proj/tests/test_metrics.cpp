#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include <json.hpp>

#include "eviz/error.hpp"
#include "eviz/metrics.hpp"
#include "oracles.hpp"

using namespace eviz;

namespace {

TextPair pair_of(std::string_view cand, std::string_view ref) {
  return {tokenize(cand), {tokenize(ref)}};
}

std::vector<TextPair> fixture_pairs() {
  std::vector<TextPair> out;
  std::istringstream in(oracle::slurp(EVIZ_TEST_DATA "/metric_pairs.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    out.push_back(pair_of(j["candidate"].get<std::string>(), j["reference"].get<std::string>()));
  }
  return out;
}

Manifest small_manifest() {
  Manifest m;
  const char* answers[] = {"Power spikes at noon.", "No anomaly was found today.",
                           "Switch the kettle off overnight to save energy.",
                           "Usage is flat with a short evening peak."};
  for (int i = 0; i < 4; ++i) {
    DatasetRecord r;
    r.id = "r" + std::to_string(i);
    r.image_path = "images/r.png";
    r.analysis_type = kAllAnalysisTypes[i % 3];
    r.question = "q";
    r.answer = answers[i];
    r.split = Split::val;
    m.records.push_back(r);
  }
  DatasetRecord t = m.records[0];
  t.id = "t0";
  t.split = Split::train;
  m.records.push_back(t);
  m.val_count = 4;
  m.train_count = 1;
  return m;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("The cat, sat!") == Tokens{"the", "cat", "sat"});
  CHECK(tokenize("  09:00  0.4 kW ") == Tokens{"09", "00", "0", "4", "kw"});
  CHECK(tokenize("a-b", {false, true}) == Tokens{"a", "-", "b"});
  CHECK(tokenize("ABC", {false, false}) == Tokens{"ABC"});
  CHECK(tokenize("") == Tokens{});
  CHECK(tokenize("caf\xc3\xa9 ok") == Tokens{"caf\xc3\xa9", "ok"});
}

TEST_CASE("mean nll and perplexity") {
  const std::vector<TokenLogRecord> one{{"a", {-0.5}, Split::val}};
  CHECK(mean_nll(one, Split::val) == 0.5);
  const std::vector<TokenLogRecord> two{{"a", {-1.0, -3.0}, Split::val}};
  CHECK(mean_nll(two, Split::val) == 2.0);
  CHECK(perplexity(two, Split::val) == doctest::Approx(7.389056098930650227230427).epsilon(1e-15));

  const std::vector<TokenLogRecord> perfect{{"a", {0.0, 0.0, 0.0}, Split::val}};
  CHECK(perplexity(perfect, Split::val) == 1.0);

  try {
    mean_nll(one, Split::train);
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptySplit);
  }
}

TEST_CASE("uniform model perplexity is the vocabulary size") {
  for (double v : {2.0, 10.0, 100.0, 1000.0, 32000.0, 32064.0, 151936.0}) {
    std::vector<TokenLogRecord> recs;
    for (int i = 0; i < 5; ++i) recs.push_back({"r" + std::to_string(i), std::vector<double>(7, -std::log(v)), Split::val});
    const double ppl = perplexity(recs, Split::val);
    CHECK(ppl == std::exp(std::log(v)));  // exact functional identity
    // -log V is itself rounded, which moves exp(.) by up to |log V| ulps
    const double eps = std::numeric_limits<double>::epsilon();
    CHECK(std::abs(ppl - v) <= (std::log(v) + 2.0) * eps * v);
  }
}

TEST_CASE("mean nll against a long double oracle") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-12.0, 0.0);
  std::vector<TokenLogRecord> recs;
  long double sum = 0;
  std::size_t count = 0;
  for (int r = 0; r < 40; ++r) {
    TokenLogRecord rec{"id" + std::to_string(r), {}, r % 5 ? Split::val : Split::train};
    for (int k = 0; k < 25; ++k) {
      rec.token_logprobs.push_back(u(gen));
      if (rec.split == Split::val) sum += rec.token_logprobs.back(), ++count;
    }
    recs.push_back(rec);
  }
  const double oracle_mean = double(-sum / count);
  CHECK(std::abs(mean_nll(recs, Split::val) - oracle_mean) < 1e-12);
  auto shuffled = recs;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  CHECK(mean_nll(shuffled, Split::val) == mean_nll(recs, Split::val));
}

TEST_CASE("rouge-l") {
  const std::vector<TextPair> same{pair_of("the cat sat on the mat", "the cat sat on the mat")};
  CHECK(rouge_l(same) == 1.0);
  const std::vector<TextPair> half{pair_of("the cat", "the cat sat")};
  CHECK(rouge_l(half) == doctest::Approx(2.0 / 3.0));
  const std::vector<TextPair> empty{pair_of("", "the cat sat")};
  CHECK(rouge_l(empty) == 0.0);

  TextPair multi{tokenize("a b c d"), {tokenize("x y"), tokenize("a c d"), tokenize("b d")}};
  const std::vector<TextPair> m{multi};
  CHECK(rouge_l(m) == 1.0);
}

TEST_CASE("lcs matches the memoized oracle exhaustively on small inputs") {
  // every pair of strings of length <= 5 over {a, b, c}, plus random longer ones
  std::vector<Tokens> all{{}};
  for (std::size_t len = 1; len <= 5; ++len) {
    const std::size_t before = all.size();
    for (std::size_t i = 0; i < before; ++i) {
      if (all[i].size() != len - 1) continue;
      for (const char* s : {"a", "b", "c"}) {
        Tokens t = all[i];
        t.push_back(s);
        all.push_back(t);
      }
    }
  }
  for (std::size_t i = 0; i < all.size(); i += 3)
    for (std::size_t j = 0; j < all.size(); j += 5) CHECK(lcs_length(all[i], all[j]) == oracle::lcs(all[i], all[j]));

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 500; ++trial) {
    Tokens a(gen() % 13), b(gen() % 13);
    for (auto& t : a) t = std::string(1, char('a' + gen() % 4));
    for (auto& t : b) t = std::string(1, char('a' + gen() % 4));
    CHECK(lcs_length(a, b) == oracle::lcs(a, b));
  }
}

TEST_CASE("bleu") {
  const std::vector<TextPair> same{pair_of("the kettle spikes at noon today", "the kettle spikes at noon today")};
  CHECK(bleu(same) == 1.0);
  const std::vector<TextPair> none{pair_of("alpha beta gamma delta", "one two three four")};
  CHECK(bleu(none) == 0.0);

  const std::vector<TextPair> clip{pair_of("the the the", "the cat")};
  const auto s = bleu_stats(clip);
  CHECK(s.matches[0] == 1);
  CHECK(s.totals[0] == 3);
  CHECK(s.precisions[0] == doctest::Approx(1.0 / 3.0));
  CHECK(s.score == 0.0);

  // closest reference length, shorter on ties
  TextPair multi{tokenize("a b c d e"), {tokenize("a b c"), tokenize("a b c d e f g")}};
  const std::vector<TextPair> mp{multi};
  CHECK(bleu_stats(mp).reference_length == 3);
  TextPair tie{tokenize("a b c d"), {tokenize("a b c d e f"), tokenize("a b")}};
  const std::vector<TextPair> tp{tie};
  CHECK(bleu_stats(tp).reference_length == 2);

  // smoothing only lifts n >= 2
  const std::vector<TextPair> partial{pair_of("the cat ran far away", "the cat sat down here")};
  CHECK(bleu(partial) == 0.0);
  BleuOptions smooth;
  smooth.add_one_smoothing = true;
  CHECK(bleu(partial, smooth) > 0.0);
}

TEST_CASE("ten-pair fixture matches an independent computation") {
  const auto pairs = fixture_pairs();
  REQUIRE(pairs.size() == 10);
  CHECK(rouge_l(pairs) == doctest::Approx(62.0 / 94.0).epsilon(1e-15));
  const auto s = bleu_stats(pairs);
  CHECK(s.matches == std::vector<std::size_t>{66, 46, 32, 21});
  CHECK(s.totals == std::vector<std::size_t>{76, 66, 56, 46});
  CHECK(s.candidate_length == 76);
  CHECK(s.reference_length == 94);
  CHECK(s.brevity_penalty == doctest::Approx(0.7891158754249911).epsilon(1e-14));
  CHECK(s.score == doctest::Approx(0.4974308246963499).epsilon(1e-14));

  auto reversed = pairs;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(rouge_l(reversed) == rouge_l(pairs));
  CHECK(bleu(reversed) == bleu(pairs));
}

TEST_CASE("metric ranges") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TextPair> pairs(1 + gen() % 3);
    for (auto& p : pairs) {
      p.candidate.resize(gen() % 9);
      p.references.assign(1, Tokens(1 + gen() % 9));
      for (auto& t : p.candidate) t = std::string(1, char('a' + gen() % 3));
      for (auto& t : p.references[0]) t = std::string(1, char('a' + gen() % 3));
    }
    const double r = rouge_l(pairs), b = bleu(pairs);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("evaluate manifest") {
  const auto m = small_manifest();
  std::vector<Generation> gens;
  for (const auto& r : m.records)
    if (r.split == Split::val) gens.push_back({r.id, r.answer, std::vector<double>{-0.1, -0.2}});
  const auto rep = evaluate_manifest(m, gens);
  CHECK(rep.overall.count == 4);
  CHECK(rep.overall.rouge_l == 1.0);
  CHECK(rep.overall.bleu == 1.0);
  REQUIRE(rep.overall.mean_nll);
  CHECK(*rep.overall.mean_nll == doctest::Approx(0.15));
  CHECK(rep.per_task.at(AnalysisType::Monitoring).count == 2);

  auto shuffled = gens;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(report_to_json(evaluate_manifest(m, shuffled)) == report_to_json(rep));

  const auto json = nlohmann::json::parse(report_to_json(rep));
  CHECK(json["schema_version"] == 1);
  CHECK(json["overall"]["rouge_l"] == 1.0);
  CHECK(report_to_table(rep).find("overall") != std::string::npos);

  gens.erase(gens.begin() + 1, gens.begin() + 3);
  try {
    evaluate_manifest(m, gens);
    FAIL("expected MissingGeneration");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingGeneration);
    CHECK(std::string(e.what()).find("r1") != std::string::npos);
    CHECK(std::string(e.what()).find("r2") != std::string::npos);
  }
}

TEST_CASE("train and validation loss from token logs") {
  const auto m = small_manifest();
  std::vector<Generation> gens;
  for (const auto& r : m.records)
    if (r.split == Split::val) gens.push_back({r.id, r.answer, std::nullopt});
  const std::vector<TokenLogRecord> logs{{"t0", {-2.0, -4.0}, Split::train},
                                         {"r0", {-1.0}, Split::val}};
  const auto rep = evaluate_manifest(m, gens, logs);
  REQUIRE(rep.train_loss);
  REQUIRE(rep.val_loss);
  CHECK(*rep.train_loss == 3.0);
  CHECK(*rep.val_loss == 1.0);
  CHECK_FALSE(rep.overall.mean_nll);
}

TEST_CASE("generations parsing") {
  const auto g = parse_generations(
      "{\"id\":\"a\",\"text\":\"hello\"}\n{\"id\":\"b\",\"text\":\"x\",\"token_logprobs\":[-1.5]}\n");
  REQUIRE(g.size() == 2);
  CHECK_FALSE(g[0].token_logprobs);
  CHECK(g[1].token_logprobs == std::vector<double>{-1.5});
  CHECK_THROWS_AS(parse_generations("{\"id\":\"a\"}\n"), Error);
  CHECK_THROWS_AS(parse_generations("{\"id\":\"a\",\"text\":\"t\",\"token_logprobs\":[0.5]}\n"), Error);
}
