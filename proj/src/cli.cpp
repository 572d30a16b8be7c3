#include "eviz/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "byteio.hpp"
#include "eviz/dataset.hpp"
#include "eviz/digest.hpp"
#include "eviz/error.hpp"
#include "eviz/fixtures.hpp"
#include "eviz/ingest.hpp"
#include "eviz/metrics.hpp"
#include "eviz/pipeline.hpp"
#include "eviz/train_math.hpp"

namespace eviz {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  std::string out_dir;
  std::size_t days = 2;
  std::uint64_t seed = 7;
  std::vector<std::string> appliances;
  double noise = 0.01;
  std::size_t anomalies_per_day = 1;
  std::string start = "2023-07-01T00:00:00Z";
};

struct ConvertArgs {
  std::string input;
  std::string out_dir;
  std::string encoding = "cwt";
  std::string render_mode = "heatmap";
  double sample_period = 60.0;
  double window_hours = 24.0;
  double stride_hours = 0.0;  // 0 means equal to the window
  double max_gap_minutes = 15.0;
  std::size_t scales = 64;
  double omega0 = 6.0;
  std::string freq_mode = "inverse_scale";
  std::string cwt_method = "fft";
  std::string value_scale = "linear";
  double rp_rate = 0.10;
  double rp_epsilon = -1.0;  // negative means solve for rp_rate
  std::size_t rp_dim = 1;
  std::size_t rp_delay = 1;
  std::size_t width = 512;
  std::size_t height = 512;
  bool axes = false;
  std::string colormap;
  bool dump = false;
};

struct BuildArgs {
  std::string images_dir;
  std::string out;
  std::string answers;
  std::string synthetic_answers;
  std::vector<std::string> tasks{"Monitoring", "AnomalyDetection", "Recommendation"};
  std::vector<std::string> encodings;
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  std::size_t per_class_cap = 0;
};

struct EvalArgs {
  std::string manifest;
  std::string generations;
  std::string token_logs;
  std::string out;
  bool keep_punctuation = false;
  bool no_lowercase = false;
  bool bleu_smoothing = false;
};

struct ScheduleArgs {
  ScheduleConfig schedule;
  std::string out;
  std::string constants;
  std::size_t micro_batch = 6;
  std::size_t accumulation = 8;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(Errc::Io, "short write to '" + path.string() + "'");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

void echo_config(const CLI::App& app, const fs::path& run_dir, const std::string& name) {
  make_dirs(run_dir / "config");
  write_text(run_dir / "config" / (name + ".toml"), app.config_to_str(true, false));
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  CorpusSpec spec;
  spec.days = a.days;
  spec.seed = a.seed;
  spec.noise_sigma = a.noise;
  spec.anomalies_per_day = a.anomalies_per_day;
  spec.start = parse_timestamp(a.start);
  if (!a.appliances.empty()) {
    spec.appliances.clear();
    for (const auto& name : a.appliances) spec.appliances.push_back(parse_appliance(name));
  }
  const auto corpus = make_corpus(spec);

  const fs::path dir(a.out_dir);
  make_dirs(dir);
  std::vector<TimeSeries> series;
  std::vector<AnomalyRecord> truth;
  for (const auto& g : corpus) {
    series.push_back(g.series);
    truth.insert(truth.end(), g.anomalies.begin(), g.anomalies.end());
  }
  std::ostringstream csv;
  write_csv(csv, series);
  write_text(dir / "energy.csv", csv.str());
  write_text(dir / "ground_truth.jsonl", ground_truth_to_jsonl(truth));
  out << "wrote " << series.size() << " channels x " << series.front().size() << " samples, "
      << truth.size() << " anomalies to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_convert(const CLI::App& app, const ConvertArgs& a, std::ostream& out) {
  IngestConfig ingest;
  ingest.columns.sample_period = a.sample_period;
  ingest.window_length = a.window_hours * 3600.0;
  ingest.stride = a.stride_hours > 0 ? a.stride_hours * 3600.0 : ingest.window_length;
  ingest.max_gap = a.max_gap_minutes * 60.0;

  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + a.input + "'");
  const auto windows = ingest_windows(in, ingest);
  if (windows.empty()) throw Error(Errc::InvalidArgument, "input yields no complete windows");

  std::optional<Colormap> custom;
  if (!a.colormap.empty()) custom = Colormap::from_csv(a.colormap);

  EncodeConfig cfg;
  cfg.scale_count = a.scales;
  cfg.cwt.morlet.omega0 = a.omega0;
  cfg.cwt.method = a.cwt_method == "direct" ? CwtMethod::direct : CwtMethod::fft;
  cfg.cwt.frequency_mode =
      a.freq_mode == "inverse_scale" ? FrequencyMode::inverse_scale : FrequencyMode::center_corrected;
  cfg.embedding = {a.rp_dim, a.rp_delay};
  if (a.rp_epsilon >= 0) {
    cfg.threshold = FixedEpsilon{a.rp_epsilon};
  } else {
    cfg.threshold = TargetRate{a.rp_rate};
  }
  cfg.render.width = a.width;
  cfg.render.height = a.height;
  cfg.render.mode = a.render_mode == "surface3d" ? RenderMode::surface3d : RenderMode::heatmap;
  cfg.render.value_scale = a.value_scale == "log" ? ValueScale::log : ValueScale::linear;
  cfg.render.annotate_axes = a.axes;
  if (custom) cfg.render.colormap = &*custom;

  std::vector<SourceKind> kinds;
  if (a.encoding != "rp") kinds.push_back(SourceKind::cwt);
  if (a.encoding != "cwt") kinds.push_back(SourceKind::rp);

  const fs::path run_dir(a.out_dir);
  const fs::path images = run_dir / "images";
  make_dirs(images);
  echo_config(app, run_dir, "convert");

  std::size_t written = 0;
  for (const auto& w : windows) {
    for (SourceKind kind : kinds) {
      const EncodedWindow e = encode_window(w, kind, cfg);
      const auto png = encode_png(e.image);
      const std::string name = image_filename(w.parent_channel, w.start_time, kind);
      detail::write_file((images / name).string(), png);
      const std::string stem = name.substr(0, name.size() - 4);
      write_text(images / (stem + ".json"), sidecar_json(w, e, cfg, name, sha256_hex(png)));
      if (a.dump && e.scalogram) write_scalogram_dump(*e.scalogram, (images / (stem + ".evsg")).string());
      if (a.dump && e.recurrence) write_recurrence_dump(*e.recurrence, (images / (stem + ".evrp")).string());
      ++written;
    }
  }
  out << "wrote " << written << " images (" << a.width << "x" << a.height << ") from "
      << windows.size() << " windows to " << images.string() << "\n";
  return kExitOk;
}

int cmd_build_dataset(const CLI::App& app, const BuildArgs& a, std::ostream& out) {
  const fs::path images(a.images_dir);
  if (!fs::is_directory(images)) throw Error(Errc::Io, "no image directory '" + a.images_dir + "'");
  const fs::path manifest_path =
      a.out.empty() ? fs::absolute(images).parent_path() / "manifest.jsonl" : fs::path(a.out);
  const fs::path manifest_dir = fs::absolute(manifest_path).parent_path();
  if (a.answers.empty() == a.synthetic_answers.empty()) {
    throw Error(Errc::InvalidArgument, "pass exactly one of --answers or --synthetic-answers");
  }

  std::vector<AnalysisType> tasks;
  for (const auto& t : a.tasks) tasks.push_back(parse_analysis_type(t));

  std::map<std::string, std::string> answers;
  std::vector<AnomalyRecord> truth;
  if (!a.answers.empty()) answers = read_answers(a.answers);
  if (!a.synthetic_answers.empty()) truth = read_ground_truth(a.synthetic_answers);

  std::vector<fs::path> sidecars;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.path().extension() == ".json") sidecars.push_back(entry.path());
  }
  std::sort(sidecars.begin(), sidecars.end());

  std::vector<DatasetRecord> records;
  std::vector<std::string> missing;
  for (const auto& path : sidecars) {
    nlohmann::json side;
    try {
      std::ifstream in(path);
      side = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaMismatch, path.string() + ": " + e.what());
    }
    const std::string encoding = side.value("encoding", "");
    if (!a.encodings.empty() &&
        std::find(a.encodings.begin(), a.encodings.end(), encoding) == a.encodings.end()) {
      continue;
    }
    WindowMeta meta{side.at("channel").get<std::string>(),
                    side.at("window_start").get<std::string>(), encoding};
    const fs::path image = fs::absolute(images / side.at("image").get<std::string>());
    for (AnalysisType t : tasks) {
      DatasetRecord r;
      r.meta = meta;
      r.analysis_type = t;
      r.id = record_id(meta, t);
      r.image_path = image.lexically_relative(manifest_dir).generic_string();
      r.question = default_question(t, meta);
      if (!a.synthetic_answers.empty()) {
        const auto in_window = anomalies_in_window(truth, meta.channel,
                                                   parse_timestamp(meta.window_start),
                                                   side.at("window_seconds").get<double>());
        r.answer = synthetic_answer(t, meta, in_window);
      } else if (auto it = answers.find(r.id); it != answers.end()) {
        r.answer = it->second;
      } else {
        missing.push_back(r.id);
        continue;
      }
      records.push_back(std::move(r));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += "\n  " + id;
    throw Error(Errc::MissingAnswer, std::to_string(missing.size()) + " ids have no answer:" + list);
  }
  if (a.per_class_cap > 0) records = apply_class_cap(std::move(records), a.per_class_cap);

  const Manifest m = split_dataset(std::move(records), a.seed, a.train_fraction);
  make_dirs(manifest_dir);
  emit_manifest(m, manifest_path);
  write_text(manifest_dir / "training.json", training_constants_json());
  echo_config(app, manifest_dir, "build-dataset");
  out << m.train_count << " train / " << m.val_count << " val\n";
  return kExitOk;
}

int cmd_eval(const CLI::App& app, const EvalArgs& a, std::ostream& out) {
  const Manifest m = read_manifest(a.manifest);
  const auto generations = read_generations(a.generations);
  std::vector<TokenLogRecord> logs;
  if (!a.token_logs.empty()) logs = read_token_logs(a.token_logs);

  EvalOptions opts;
  opts.tokenizer.keep_punctuation = a.keep_punctuation;
  opts.tokenizer.lowercase = !a.no_lowercase;
  opts.bleu.add_one_smoothing = a.bleu_smoothing;
  const MetricReport report = evaluate_manifest(m, generations, logs, opts);

  const fs::path run_dir = fs::absolute(a.manifest).parent_path();
  const fs::path report_path = a.out.empty() ? run_dir / "report.json" : fs::path(a.out);
  write_text(report_path, report_to_json(report));
  echo_config(app, run_dir, "eval");
  out << report_to_table(report);
  return kExitOk;
}

int cmd_schedule(const ScheduleArgs& a, std::ostream& out) {
  validate(a.schedule);
  if (a.out.empty()) {
    write_schedule_csv(out, a.schedule);
  } else {
    std::ostringstream csv;
    write_schedule_csv(csv, a.schedule);
    write_text(a.out, csv.str());
  }
  if (!a.constants.empty()) {
    TrainingConstants c;
    c.schedule = a.schedule;
    c.accumulation = {a.micro_batch, a.accumulation};
    write_text(a.constants, training_constants_json(c));
  }
  return kExitOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Io:
    case Errc::MissingImage: return kExitIo;
    default: return kExitConfig;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Building-energy time series to CWT / recurrence images and VLM datasets", "eviz"};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic appliance corpus with ground truth");
  synth->add_option("--out", synth_args.out_dir, "Output directory")->required();
  synth->add_option("--days", synth_args.days, "Days per channel")->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth->add_option("--appliances", synth_args.appliances, "Appliance archetypes (default all)");
  synth->add_option("--noise", synth_args.noise, "Noise sigma in kW")->capture_default_str();
  synth->add_option("--anomalies-per-day", synth_args.anomalies_per_day)->capture_default_str();
  synth->add_option("--start", synth_args.start, "First timestamp (UTC)")->capture_default_str();

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "Render per-window CWT scalograms and/or recurrence plots");
  convert->add_option("--input", conv.input, "Input CSV")->required();
  convert->add_option("--out", conv.out_dir, "Run directory")->required();
  convert->add_option("--encoding", conv.encoding)->check(CLI::IsMember({"cwt", "rp", "both"}))->capture_default_str();
  convert->add_option("--render", conv.render_mode)->check(CLI::IsMember({"heatmap", "surface3d"}))->capture_default_str();
  convert->add_option("--sample-period", conv.sample_period, "Seconds per sample")->check(CLI::PositiveNumber)->capture_default_str();
  convert->add_option("--window-hours", conv.window_hours)->check(CLI::PositiveNumber)->capture_default_str();
  convert->add_option("--stride-hours", conv.stride_hours, "0 = window length")->check(CLI::NonNegativeNumber)->capture_default_str();
  convert->add_option("--max-gap-minutes", conv.max_gap_minutes)->check(CLI::NonNegativeNumber)->capture_default_str();
  convert->add_option("--scales", conv.scales)->check(CLI::Range(1, 4096))->capture_default_str();
  convert->add_option("--omega0", conv.omega0)->check(CLI::PositiveNumber)->capture_default_str();
  convert->add_option("--freq-mode", conv.freq_mode)->check(CLI::IsMember({"inverse_scale", "center_corrected"}))->capture_default_str();
  convert->add_option("--cwt-method", conv.cwt_method)->check(CLI::IsMember({"fft", "direct"}))->capture_default_str();
  convert->add_option("--value-scale", conv.value_scale)->check(CLI::IsMember({"linear", "log"}))->capture_default_str();
  convert->add_option("--rp-rate", conv.rp_rate, "Target recurrence rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  convert->add_option("--rp-epsilon", conv.rp_epsilon, "Fixed threshold (overrides --rp-rate when >= 0)")->capture_default_str();
  convert->add_option("--rp-dim", conv.rp_dim)->check(CLI::PositiveNumber)->capture_default_str();
  convert->add_option("--rp-delay", conv.rp_delay)->check(CLI::PositiveNumber)->capture_default_str();
  convert->add_option("--width", conv.width)->check(CLI::Range(1, 16384))->capture_default_str();
  convert->add_option("--height", conv.height)->check(CLI::Range(1, 16384))->capture_default_str();
  convert->add_flag("--axes", conv.axes, "Draw frame and tick marks");
  convert->add_option("--colormap", conv.colormap, "256-line r,g,b CSV (default viridis)");
  convert->add_flag("--dump", conv.dump, "Also write binary scalogram / recurrence dumps");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-dataset", "Assemble and split the instruction-tuning manifest");
  build_cmd->add_option("--images", build.images_dir, "Directory written by convert")->required();
  build_cmd->add_option("--out", build.out, "Manifest path (default <run>/manifest.jsonl)");
  build_cmd->add_option("--answers", build.answers, "JSONL of {id, answer}");
  build_cmd->add_option("--synthetic-answers", build.synthetic_answers, "Ground-truth JSONL from synth");
  build_cmd->add_option("--tasks", build.tasks)->check(CLI::IsMember({"Monitoring", "AnomalyDetection", "Recommendation"}))->capture_default_str();
  build_cmd->add_option("--encodings", build.encodings, "Keep only these encodings (cwt, rp)");
  build_cmd->add_option("--seed", build.seed)->capture_default_str();
  build_cmd->add_option("--train-fraction", build.train_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  build_cmd->add_option("--per-class-cap", build.per_class_cap, "Max records per channel, 0 = unlimited")->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score generations against the manifest's validation split");
  eval->add_option("--manifest", ev.manifest)->required();
  eval->add_option("--generations", ev.generations, "JSONL of {id, text, token_logprobs?}")->required();
  eval->add_option("--token-logs", ev.token_logs, "JSONL of {example_id, token_logprobs, split}");
  eval->add_option("--out", ev.out, "Report path (default <run>/report.json)");
  eval->add_flag("--keep-punctuation", ev.keep_punctuation);
  eval->add_flag("--no-lowercase", ev.no_lowercase);
  eval->add_flag("--bleu-smoothing", ev.bleu_smoothing, "Add-one smoothing for n >= 2");

  ScheduleArgs sch;
  auto* schedule = app.add_subcommand("schedule", "Dump the warmup + cosine learning-rate schedule as CSV");
  schedule->add_option("--eta-max", sch.schedule.eta_max)->capture_default_str();
  schedule->add_option("--eta-min", sch.schedule.eta_min)->capture_default_str();
  schedule->add_option("--warmup-floor", sch.schedule.warmup_floor)->capture_default_str();
  schedule->add_option("--warmup", sch.schedule.t_warm)->capture_default_str();
  schedule->add_option("--steps", sch.schedule.t_max)->capture_default_str();
  schedule->add_option("--micro-batch", sch.micro_batch)->capture_default_str();
  schedule->add_option("--accumulation", sch.accumulation)->capture_default_str();
  schedule->add_option("--out", sch.out, "CSV path (default stdout)");
  schedule->add_option("--constants", sch.constants, "Also write harness constants JSON");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(synth_args, out);
    if (convert->parsed()) return cmd_convert(app, conv, out);
    if (build_cmd->parsed()) return cmd_build_dataset(app, build, out);
    if (eval->parsed()) return cmd_eval(app, ev, out);
    if (schedule->parsed()) return cmd_schedule(sch, out);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  } catch (const Error& e) {
    err << "eviz: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "eviz: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "eviz: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace eviz
