#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "eviz/cli.hpp"
#include "eviz/dataset.hpp"
#include "eviz/error.hpp"
#include "eviz/metrics.hpp"
#include "eviz/recurrence.hpp"
#include "eviz/render.hpp"
#include "eviz/train_math.hpp"
#include "eviz/wavelet.hpp"

namespace py = pybind11;
using namespace eviz;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

GridView grid_view(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  return {std::size_t(a.shape(0)), std::size_t(a.shape(1)), {a.data(), std::size_t(a.size())}};
}

py::array_t<double> matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  py::array_t<double> out({rows, cols});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> image_array(const RenderedImage& img) {
  py::array_t<std::uint8_t> out({img.height, img.width, std::size_t(3)});
  std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
  return out;
}

RenderedImage from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an HxWx3 uint8 array");
  RenderedImage img;
  img.height = a.shape(0);
  img.width = a.shape(1);
  img.pixels.assign(a.data(), a.data() + a.size());
  return img;
}

std::vector<TextPair> text_pairs(const std::vector<std::string>& candidates,
                                 const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size())
    throw py::value_error("candidates and references differ in length");
  std::vector<TextPair> pairs;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    TextPair p{tokenize(candidates[i]), {}};
    for (const auto& r : references[i]) p.references.push_back(tokenize(r));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<TokenLogRecord> single_record(const std::vector<double>& logprobs) {
  return {{"x", logprobs, Split::val}};
}

RenderConfig render_config(std::size_t width, std::size_t height, const std::string& scale,
                           RenderMode mode) {
  RenderConfig cfg;
  cfg.width = width;
  cfg.height = height;
  cfg.mode = mode;
  if (scale == "log") cfg.value_scale = ValueScale::log;
  else if (scale != "linear") throw py::value_error("value_scale must be 'linear' or 'log'");
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_eviz, m) {
  m.doc() = "Energy time series to image encodings, dataset and metric utilities";

  static py::exception<Error> error(m, "EvizError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("morlet", [](double t, double omega0) {
    return morlet(t, {omega0});
  }, py::arg("t"), py::arg("omega0") = 6.0);

  m.def("default_scales", [](std::size_t n, std::size_t count) {
    return default_scale_grid(n, count).scales;
  }, py::arg("window_samples"), py::arg("count") = 64);

  m.def("scale_to_frequency", [](double scale, double fs, double omega0, const std::string& mode) {
    return scale_to_frequency(scale, fs, {omega0},
                              mode == "inverse_scale" ? FrequencyMode::inverse_scale : FrequencyMode::center_corrected);
  }, py::arg("scale"), py::arg("sample_rate"), py::arg("omega0") = 6.0, py::arg("mode") = "inverse_scale");

  m.def("cwt", [](const Array& x, double fs, std::optional<std::vector<double>> scales,
                  double omega0, const std::string& method) {
    const auto samples = to_vector(x);
    ScaleGrid grid = scales ? ScaleGrid{*scales} : default_scale_grid(samples.size());
    CwtOptions opt{{omega0}, method == "direct" ? CwtMethod::direct : CwtMethod::fft};
    if (method != "direct" && method != "fft") throw py::value_error("method must be 'fft' or 'direct'");
    const auto s = cwt(samples, fs, grid, opt);
    py::array_t<std::complex<double>> out({s.rows, s.cols});
    auto* d = out.mutable_data();
    for (std::size_t i = 0; i < s.power.size(); ++i) d[i] = {s.coeffs_real[i], s.coeffs_imag[i]};
    return out;
  }, py::arg("x"), py::arg("sample_rate") = 1.0, py::arg("scales") = py::none(),
     py::arg("omega0") = 6.0, py::arg("method") = "fft",
     "Complex coefficients, one row per scale (smallest first), one column per sample.");

  m.def("embed", [](const Array& x, std::size_t dim, std::size_t delay) {
    const auto s = embed(to_vector(x), {dim, delay});
    return matrix(s.flat(), s.size(), s.dimension());
  }, py::arg("x"), py::arg("dimension") = 1, py::arg("delay") = 1);

  m.def("recurrence_matrix", [](const Array& x, std::size_t dim, std::size_t delay,
                                std::optional<double> epsilon, double rate) {
    const EmbeddingSpec spec{dim, delay};
    const auto states = embed(to_vector(x), spec);
    const ThresholdPolicy policy = epsilon ? ThresholdPolicy{FixedEpsilon{*epsilon}}
                                           : ThresholdPolicy{TargetRate{rate}};
    const auto rm = recurrence_matrix(states, policy, spec);
    py::array_t<std::uint8_t> bits({rm.n, rm.n});
    std::copy(rm.bits.begin(), rm.bits.end(), bits.mutable_data());
    return py::make_tuple(bits, rm.epsilon, rm.recurrence_rate);
  }, py::arg("x"), py::arg("dimension") = 1, py::arg("delay") = 1,
     py::arg("epsilon") = py::none(), py::arg("rate") = 0.1,
     "Returns (bits, epsilon, rate).");

  m.def("solve_epsilon", [](const Array& x, std::size_t dim, std::size_t delay, double rate) {
    return solve_epsilon(embed(to_vector(x), {dim, delay}), rate);
  }, py::arg("x"), py::arg("dimension") = 1, py::arg("delay") = 1, py::arg("rate") = 0.1);

  m.def("render_heatmap", [](const Array& grid, std::size_t w, std::size_t h, const std::string& scale) {
    return image_array(render(grid_view(grid), render_config(w, h, scale, RenderMode::heatmap)));
  }, py::arg("grid"), py::arg("width") = 512, py::arg("height") = 512, py::arg("value_scale") = "linear");

  m.def("render_surface", [](const Array& grid, std::size_t w, std::size_t h, const std::string& scale) {
    return image_array(render(grid_view(grid), render_config(w, h, scale, RenderMode::surface3d)));
  }, py::arg("grid"), py::arg("width") = 512, py::arg("height") = 512, py::arg("value_scale") = "linear");

  m.def("encode_png", [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    const auto bytes = encode_png(from_array(a));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }, py::arg("image"));

  m.def("build_prompt", [](const std::string& type, const std::string& question) {
    return build_prompt(parse_analysis_type(type), question);
  }, py::arg("analysis_type"), py::arg("question"));

  m.def("parse_prompt", [](const std::string& prompt) -> std::optional<py::tuple> {
    const auto p = parse_prompt(prompt);
    if (!p) return std::nullopt;
    return py::make_tuple(std::string(analysis_type_name(p->analysis_type)), p->question);
  }, py::arg("prompt"));

  m.def("tokenize", [](const std::string& text) { return tokenize(text); }, py::arg("text"));

  m.def("rouge_l", [](const std::vector<std::string>& c, const std::vector<std::vector<std::string>>& r) {
    return rouge_l(text_pairs(c, r));
  }, py::arg("candidates"), py::arg("references"));

  m.def("bleu", [](const std::vector<std::string>& c, const std::vector<std::vector<std::string>>& r,
                   bool smoothing) {
    BleuOptions opt;
    opt.add_one_smoothing = smoothing;
    return bleu(text_pairs(c, r), opt);
  }, py::arg("candidates"), py::arg("references"), py::arg("smoothing") = false);

  m.def("mean_nll", [](const std::vector<double>& lp) {
    return mean_nll(single_record(lp), Split::val);
  }, py::arg("token_logprobs"));

  m.def("perplexity", [](const std::vector<double>& lp) {
    return perplexity(single_record(lp), Split::val);
  }, py::arg("token_logprobs"));

  m.def("lr_at", [](double step, double eta_max, double eta_min, double floor, double warm, double steps) {
    return lr_at(step, {eta_max, eta_min, floor, warm, steps});
  }, py::arg("step"), py::arg("eta_max") = 1e-4, py::arg("eta_min") = 0.0,
     py::arg("warmup_floor") = 0.0, py::arg("warmup") = 50.0, py::arg("steps") = 800.0);

  m.def("effective_batch", [](std::size_t micro, std::size_t accum) {
    return effective_batch({micro, accum});
  }, py::arg("micro_batch") = 6, py::arg("accumulation") = 8);

  m.def("cross_entropy", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& probs,
                            const py::array_t<std::size_t, py::array::c_style | py::array::forcecast>& targets) {
    if (probs.ndim() != 3 || targets.ndim() != 2 || targets.shape(0) != probs.shape(0) ||
        targets.shape(1) != probs.shape(1))
      throw py::value_error("expected probs N x T x V and targets N x T");
    return cross_entropy({std::size_t(probs.shape(0)), std::size_t(probs.shape(1)),
                          std::size_t(probs.shape(2)), {probs.data(), std::size_t(probs.size())},
                          {targets.data(), std::size_t(targets.size())}});
  }, py::arg("probs"), py::arg("targets"));

  m.def("training_constants_json", [] { return training_constants_json(); });

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "eviz");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(int(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
