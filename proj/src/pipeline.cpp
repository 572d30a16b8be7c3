#include "eviz/pipeline.hpp"

#include <json.hpp>

namespace eviz {

EncodedWindow encode_window(const Window& w, SourceKind kind, const EncodeConfig& cfg) {
  EncodedWindow out;
  if (kind == SourceKind::cwt) {
    const double fs = 1.0 / w.sample_period;
    out.scalogram = cwt(w.samples, fs, default_scale_grid(w.samples.size(), cfg.scale_count),
                        cfg.cwt);
    const Scalogram& s = *out.scalogram;
    out.image = render({s.rows, s.cols, s.power}, cfg.render);
  } else {
    const auto states = embed(w.samples, cfg.embedding);
    out.recurrence = recurrence_matrix(states, cfg.threshold, cfg.embedding);
    const RecurrenceMatrix& m = *out.recurrence;
    const std::vector<double> grid(m.bits.begin(), m.bits.end());
    out.image = render({m.n, m.n, grid}, cfg.render);
  }
  out.image.source_kind = kind;
  out.image.provenance = {w.parent_channel, w.start_time};
  return out;
}

std::string sidecar_json(const Window& w, const EncodedWindow& e, const EncodeConfig& cfg,
                         const std::string& png_name, const std::string& png_sha256) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["image"] = png_name;
  j["png_sha256"] = png_sha256;
  j["channel"] = w.parent_channel;
  j["window_start"] = format_timestamp(w.start_time);
  j["window_seconds"] = static_cast<double>(w.samples.size()) * w.sample_period;
  j["sample_period"] = w.sample_period;
  j["start_index"] = w.start_index;
  j["encoding"] = source_kind_name(e.image.source_kind);
  j["render"] = {{"mode", cfg.render.mode == RenderMode::heatmap ? "heatmap" : "surface3d"},
                 {"width", e.image.width},
                 {"height", e.image.height},
                 {"colormap", cfg.render.colormap->name()},
                 {"value_scale", cfg.render.value_scale == ValueScale::linear ? "linear" : "log"},
                 {"annotate_axes", cfg.render.annotate_axes}};
  if (e.scalogram) {
    const Scalogram& s = *e.scalogram;
    j["cwt"] = {{"omega0", cfg.cwt.morlet.omega0},
                {"method", cfg.cwt.method == CwtMethod::fft ? "fft" : "direct"},
                {"frequency_mode",
                 cfg.cwt.frequency_mode == FrequencyMode::inverse_scale ? "inverse_scale" : "center_corrected"},
                {"scales", s.scale_grid.scales.size()},
                {"scale_min", s.scale_grid.scales.front()},
                {"scale_max", s.scale_grid.scales.back()},
                {"frequency_max_hz", s.frequency_map.front()},
                {"frequency_min_hz", s.frequency_map.back()}};
  }
  if (e.recurrence) {
    const RecurrenceMatrix& m = *e.recurrence;
    j["rp"] = {{"n", m.n},
               {"epsilon", m.epsilon},
               {"recurrence_rate", m.recurrence_rate},
               {"dimension", m.embedding.dimension},
               {"delay", m.embedding.delay}};
  }
  return j.dump(2) + "\n";
}

}  // namespace eviz
