#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eviz/ingest.hpp"

namespace eviz {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 256-entry lookup table.
class Colormap {
 public:
  static constexpr std::size_t kSize = 256;

  explicit Colormap(std::string name, const std::array<Rgb, kSize>& table)
      : name_(std::move(name)), table_(table) {}

  /// The viridis table shipped in data/viridis.csv, compiled in.
  static const Colormap& viridis();
  /// Reads `r,g,b` lines (0..255); `#` starts a comment. Exactly 256 entries.
  static Colormap from_csv(const std::string& path);

  const std::string& name() const noexcept { return name_; }
  const Rgb& operator[](std::size_t index) const { return table_[index]; }
  const Rgb& front() const noexcept { return table_.front(); }
  const Rgb& back() const noexcept { return table_.back(); }

  /// Index for a value already scaled to [0, 1]: min(255, floor(v * 256)).
  static std::size_t index_of(double unit_value) noexcept;

 private:
  std::string name_;
  std::array<Rgb, kSize> table_;
};

enum class RenderMode { heatmap, surface3d };
enum class ValueScale { linear, log };
enum class SourceKind { cwt, rp };

std::string_view source_kind_name(SourceKind k) noexcept;

struct RenderConfig {
  std::size_t width = 512;
  std::size_t height = 512;
  RenderMode mode = RenderMode::heatmap;
  const Colormap* colormap = &Colormap::viridis();
  ValueScale value_scale = ValueScale::linear;
  bool annotate_axes = false;
};

/// Read-only view of a row-major grid.
struct GridView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct Provenance {
  std::string channel;
  Timestamp window_start{};
};

struct RenderedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // RGB8, row-major, top row first
  RenderConfig config;
  SourceKind source_kind = SourceKind::cwt;
  Provenance provenance;

  Rgb pixel(std::size_t x, std::size_t y) const {
    const std::size_t i = 3 * (y * width + x);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

/// Min-max scales the grid to [0, 1] (a constant grid becomes 0.5), applying
/// log10 after clamping at 1e-12 first when `scale` is log.
std::vector<double> unit_scale(const GridView& grid, ValueScale scale);

/// Nearest-neighbour heatmap. Grid row 0 lands on the bottom image row.
RenderedImage render_heatmap(const GridView& grid, const RenderConfig& cfg);

/// Fixed orthographic camera for surface renders.
struct SurfaceCamera {
  static constexpr double kAzimuthDeg = 45.0;
  static constexpr double kElevationDeg = 30.0;
  static constexpr double kHeight = 0.5;  // z extent relative to the unit base
  static constexpr double kMargin = 0.05;  // fraction of the image on each side
};

inline constexpr Rgb kBackground{255, 255, 255};

/// Surface z = unit-scaled value over the unit square; columns at x, rows at
/// y (row 0 nearest the viewer). Quads are filled back to front, coloured by
/// their mean height.
RenderedImage render_surface3d(const GridView& grid, const RenderConfig& cfg);

/// Dispatches on cfg.mode.
RenderedImage render(const GridView& grid, const RenderConfig& cfg);

/// PNG, RGB8, no alpha, zlib level 9, no ancillary chunks.
std::vector<std::uint8_t> encode_png(const RenderedImage& img);

struct DecodedPng {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
};
DecodedPng decode_png(std::span<const std::uint8_t> bytes);

/// `{channel}_{windowstart}_{cwt|rp}.png`, window start in compact UTC form.
std::string image_filename(const std::string& channel, Timestamp window_start, SourceKind kind);

}  // namespace eviz
