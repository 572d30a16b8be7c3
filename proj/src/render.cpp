#include "eviz/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eviz/error.hpp"

namespace eviz {

namespace {

constexpr std::array<Rgb, Colormap::kSize> kViridis = {{
#include "viridis_table.inc"
}};

void require_grid(const GridView& grid) {
  if (grid.rows == 0 || grid.cols == 0 || grid.values.size() != grid.rows * grid.cols) {
    throw Error(Errc::EmptyGrid, "grid is empty or its size does not match its shape");
  }
}

void require_config(const RenderConfig& cfg) {
  if (cfg.width == 0 || cfg.height == 0) {
    throw Error(Errc::InvalidArgument, "image dimensions must be positive");
  }
  if (cfg.colormap == nullptr) throw Error(Errc::InvalidArgument, "no colormap");
}

RenderedImage blank_image(const RenderConfig& cfg, Rgb fill) {
  RenderedImage img;
  img.width = cfg.width;
  img.height = cfg.height;
  img.config = cfg;
  img.pixels.resize(3 * cfg.width * cfg.height);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = fill.r;
    img.pixels[i + 1] = fill.g;
    img.pixels[i + 2] = fill.b;
  }
  return img;
}

void put(RenderedImage& img, std::size_t x, std::size_t y, Rgb c) {
  const std::size_t i = 3 * (y * img.width + x);
  img.pixels[i] = c.r;
  img.pixels[i + 1] = c.g;
  img.pixels[i + 2] = c.b;
}

// Black frame plus eight tick marks along the left and bottom edges.
void draw_axes(RenderedImage& img) {
  const Rgb ink{0, 0, 0};
  const std::size_t w = img.width, h = img.height;
  for (std::size_t x = 0; x < w; ++x) {
    put(img, x, 0, ink);
    put(img, x, h - 1, ink);
  }
  for (std::size_t y = 0; y < h; ++y) {
    put(img, 0, y, ink);
    put(img, w - 1, y, ink);
  }
  const std::size_t tick = std::max<std::size_t>(2, std::min(w, h) / 64);
  for (std::size_t k = 1; k < 8; ++k) {
    const std::size_t x = k * w / 8, y = k * h / 8;
    for (std::size_t t = 0; t < tick && t < h; ++t) put(img, x, h - 1 - t, ink);
    for (std::size_t t = 0; t < tick && t < w; ++t) put(img, t, y, ink);
  }
}

struct Point {
  double x, y;
};

double edge(const Point& a, const Point& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Fills every pixel whose centre lies inside or on the triangle.
void fill_triangle(RenderedImage& img, Point a, Point b, Point c, Rgb color) {
  const double area = edge(a, b, c.x, c.y);
  if (area == 0.0) return;
  if (area < 0) std::swap(b, c);
  const double min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
  const double min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
  const auto x0 = static_cast<long>(std::max(0.0, std::floor(min_x - 0.5)));
  const auto x1 = static_cast<long>(std::min(double(img.width) - 1, std::ceil(max_x - 0.5)));
  const auto y0 = static_cast<long>(std::max(0.0, std::floor(min_y - 0.5)));
  const auto y1 = static_cast<long>(std::min(double(img.height) - 1, std::ceil(max_y - 0.5)));
  for (long y = y0; y <= y1; ++y) {
    const double py = static_cast<double>(y) + 0.5;
    for (long x = x0; x <= x1; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      if (edge(a, b, px, py) >= 0 && edge(b, c, px, py) >= 0 && edge(c, a, px, py) >= 0) {
        put(img, static_cast<std::size_t>(x), static_cast<std::size_t>(y), color);
      }
    }
  }
}

}  // namespace

const Colormap& Colormap::viridis() {
  static const Colormap cmap("viridis", kViridis);
  return cmap;
}

Colormap Colormap::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open colormap '" + path + "'");
  std::array<Rgb, kSize> table{};
  std::size_t count = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    int r, g, b;
    if (!(fields >> r >> g >> b) || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw Error(Errc::InvalidArgument, "bad colormap entry '" + line + "'");
    }
    if (count == kSize) break;
    table[count++] = {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
  }
  if (count != kSize || in.good()) {
    throw Error(Errc::InvalidArgument, "colormap must have exactly 256 entries");
  }
  auto name = path.substr(path.find_last_of('/') + 1);
  return Colormap(name.substr(0, name.find('.')), table);
}

std::size_t Colormap::index_of(double unit_value) noexcept {
  if (!(unit_value > 0.0)) return 0;
  return std::min<std::size_t>(kSize - 1, static_cast<std::size_t>(unit_value * kSize));
}

std::string_view source_kind_name(SourceKind k) noexcept {
  return k == SourceKind::cwt ? "cwt" : "rp";
}

std::vector<double> unit_scale(const GridView& grid, ValueScale scale) {
  require_grid(grid);
  std::vector<double> v(grid.values.begin(), grid.values.end());
  if (scale == ValueScale::log) {
    for (double& x : v) x = std::log10(std::max(x, 1e-12));
  }
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  for (double& x : v) x = range > 0 ? (x - lo) / range : 0.5;
  return v;
}

RenderedImage render_heatmap(const GridView& grid, const RenderConfig& cfg) {
  require_config(cfg);
  const auto unit = unit_scale(grid, cfg.value_scale);
  RenderedImage img = blank_image(cfg, kBackground);
  const Colormap& cmap = *cfg.colormap;
  for (std::size_t y = 0; y < cfg.height; ++y) {
    const std::size_t from_bottom = cfg.height - 1 - y;
    const std::size_t row = from_bottom * grid.rows / cfg.height;
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const std::size_t col = x * grid.cols / cfg.width;
      put(img, x, y, cmap[Colormap::index_of(unit[row * grid.cols + col])]);
    }
  }
  if (cfg.annotate_axes) draw_axes(img);
  return img;
}

RenderedImage render_surface3d(const GridView& grid, const RenderConfig& cfg) {
  require_config(cfg);
  const auto unit = unit_scale(grid, cfg.value_scale);
  RenderedImage img = blank_image(cfg, kBackground);

  const double az = SurfaceCamera::kAzimuthDeg * std::numbers::pi / 180.0;
  const double el = SurfaceCamera::kElevationDeg * std::numbers::pi / 180.0;
  const double ca = std::cos(az), sa = std::sin(az), ce = std::cos(el), se = std::sin(el);

  auto depth_of = [&](double x, double y) { return x * sa + y * ca; };
  auto project_raw = [&](double x, double y, double z) {
    return Point{x * ca - y * sa, depth_of(x, y) * se + z * ce};
  };

  // Fit the bounding box of the unit base and full height into the image.
  double sx_lo = 1e300, sx_hi = -1e300, sy_lo = 1e300, sy_hi = -1e300;
  for (double x : {-0.5, 0.5}) {
    for (double y : {-0.5, 0.5}) {
      for (double z : {0.0, SurfaceCamera::kHeight}) {
        const Point p = project_raw(x, y, z);
        sx_lo = std::min(sx_lo, p.x), sx_hi = std::max(sx_hi, p.x);
        sy_lo = std::min(sy_lo, p.y), sy_hi = std::max(sy_hi, p.y);
      }
    }
  }
  const double usable = 1.0 - 2.0 * SurfaceCamera::kMargin;
  const double zoom = std::min(usable * double(cfg.width) / (sx_hi - sx_lo),
                               usable * double(cfg.height) / (sy_hi - sy_lo));
  const double cx = 0.5 * double(cfg.width), cy = 0.5 * double(cfg.height);
  const double mid_x = 0.5 * (sx_lo + sx_hi), mid_y = 0.5 * (sy_lo + sy_hi);

  const auto coord = [](std::size_t i, std::size_t n) {
    return n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1) - 0.5;
  };
  const auto to_pixel = [&](std::size_t r, std::size_t c) {
    const double z = unit[r * grid.cols + c] * SurfaceCamera::kHeight;
    const Point p = project_raw(coord(c, grid.cols), coord(r, grid.rows), z);
    return Point{cx + (p.x - mid_x) * zoom, cy - (p.y - mid_y) * zoom};
  };

  // Degenerate grids are extended to one quad so they still cover the base.
  const std::size_t qr = std::max<std::size_t>(1, grid.rows - 1);
  const std::size_t qc = std::max<std::size_t>(1, grid.cols - 1);
  struct Quad {
    double depth;
    std::size_t r, c;
  };
  std::vector<Quad> quads;
  quads.reserve(qr * qc);
  for (std::size_t r = 0; r < qr; ++r) {
    for (std::size_t c = 0; c < qc; ++c) {
      const double x = 0.5 * (coord(c, grid.cols) + coord(std::min(c + 1, grid.cols - 1), grid.cols));
      const double y = 0.5 * (coord(r, grid.rows) + coord(std::min(r + 1, grid.rows - 1), grid.rows));
      quads.push_back({depth_of(x, y), r, c});
    }
  }
  std::sort(quads.begin(), quads.end(), [](const Quad& a, const Quad& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    if (a.r != b.r) return a.r > b.r;
    return a.c > b.c;
  });

  const Colormap& cmap = *cfg.colormap;
  for (const Quad& q : quads) {
    const std::size_t r1 = std::min(q.r + 1, grid.rows - 1);
    const std::size_t c1 = std::min(q.c + 1, grid.cols - 1);
    const double mean = 0.25 * (unit[q.r * grid.cols + q.c] + unit[q.r * grid.cols + c1] +
                                unit[r1 * grid.cols + q.c] + unit[r1 * grid.cols + c1]);
    const Rgb color = cmap[Colormap::index_of(mean)];
    const Point p00 = to_pixel(q.r, q.c), p01 = to_pixel(q.r, c1);
    const Point p10 = to_pixel(r1, q.c), p11 = to_pixel(r1, c1);
    fill_triangle(img, p00, p01, p11, color);
    fill_triangle(img, p00, p11, p10, color);
  }
  if (cfg.annotate_axes) draw_axes(img);
  return img;
}

RenderedImage render(const GridView& grid, const RenderConfig& cfg) {
  return cfg.mode == RenderMode::heatmap ? render_heatmap(grid, cfg)
                                         : render_surface3d(grid, cfg);
}

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const RenderedImage& img) {
  if (img.width == 0 || img.height == 0 || img.pixels.size() != 3 * img.width * img.height) {
    throw Error(Errc::InvalidArgument, "image buffer does not match its dimensions");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.pixels.data() + 3 * y * img.width);
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(Errc::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::Io, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 9);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_ALL_FILTERS);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

DecodedPng decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(Errc::InvalidArgument, std::string("PNG decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  DecodedPng out;
  out.width = image.width;
  out.height = image.height;
  out.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(Errc::InvalidArgument, std::string("PNG decode failed: ") + image.message);
  }
  return out;
}

std::string image_filename(const std::string& channel, Timestamp window_start, SourceKind kind) {
  return channel + "_" + format_timestamp_compact(window_start) + "_" +
         std::string(source_kind_name(kind)) + ".png";
}

}  // namespace eviz
