#pragma once

#include <optional>
#include <string>

#include "eviz/ingest.hpp"
#include "eviz/recurrence.hpp"
#include "eviz/render.hpp"
#include "eviz/wavelet.hpp"

namespace eviz {

struct EncodeConfig {
  std::size_t scale_count = 64;
  CwtOptions cwt;
  EmbeddingSpec embedding;
  ThresholdPolicy threshold = TargetRate{0.10};
  RenderConfig render;
};

/// A rendered window plus what produced it.
struct EncodedWindow {
  RenderedImage image;
  std::optional<Scalogram> scalogram;
  std::optional<RecurrenceMatrix> recurrence;
};

/// Window -> scalogram (cwt) or recurrence matrix (rp) -> image.
EncodedWindow encode_window(const Window& w, SourceKind kind, const EncodeConfig& cfg);

/// Sidecar JSON describing an encoded window and the PNG it was written to.
std::string sidecar_json(const Window& w, const EncodedWindow& e, const EncodeConfig& cfg,
                         const std::string& png_name, const std::string& png_sha256);

}  // namespace eviz
