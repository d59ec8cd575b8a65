#include "uaix/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <vector>

#include "uaix/error.hpp"
#include "uaix/rng.hpp"

namespace uaix {
namespace {

struct Point {
  double x, y;
};
using Stroke = std::vector<Point>;
using Glyph = std::vector<Stroke>;

constexpr float kBackgroundCeiling = 0.85f;
constexpr float kGlyphFloor = 0.9f;

Stroke ellipse(double cx, double cy, double rx, double ry, int segments = 20) {
  Stroke s;
  for (int i = 0; i <= segments; ++i) {
    const double t = 2.0 * std::numbers::pi * i / segments;
    s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return s;
}

// Digit-like stroke templates on the unit square (x right, y down).
const std::array<Glyph, 10>& templates() {
  static const std::array<Glyph, 10> glyphs = {
      Glyph{ellipse(0.5, 0.5, 0.26, 0.36)},
      Glyph{{{0.5, 0.12}, {0.5, 0.88}}, {{0.36, 0.27}, {0.5, 0.12}}, {{0.36, 0.88}, {0.64, 0.88}}},
      Glyph{{{0.25, 0.3}, {0.35, 0.15}, {0.6, 0.12}, {0.72, 0.28}, {0.65, 0.45}, {0.25, 0.85}, {0.78, 0.85}}},
      Glyph{{{0.25, 0.15}, {0.7, 0.15}, {0.45, 0.45}, {0.7, 0.6}, {0.68, 0.8}, {0.5, 0.88}, {0.25, 0.82}}},
      Glyph{{{0.65, 0.88}, {0.65, 0.12}, {0.22, 0.62}, {0.8, 0.62}}},
      Glyph{{{0.72, 0.14}, {0.3, 0.14}, {0.28, 0.45}, {0.6, 0.42}, {0.74, 0.6}, {0.65, 0.82}, {0.28, 0.85}}},
      Glyph{{{0.68, 0.12}, {0.35, 0.4}, {0.27, 0.68}, {0.4, 0.86}, {0.62, 0.84}, {0.7, 0.65}, {0.55, 0.52}, {0.3, 0.62}}},
      Glyph{{{0.22, 0.15}, {0.78, 0.15}, {0.42, 0.88}}, {{0.4, 0.5}, {0.68, 0.5}}},
      Glyph{ellipse(0.5, 0.3, 0.2, 0.17), ellipse(0.5, 0.68, 0.24, 0.2)},
      Glyph{ellipse(0.5, 0.33, 0.2, 0.2), {{0.7, 0.33}, {0.62, 0.88}}},
  };
  return glyphs;
}

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x, ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

std::uint64_t image_seed(const SynthConfig& cfg, std::size_t index, std::uint64_t part) {
  return derive_seed(derive_seed(cfg.seed, Stream::Data, index), part);
}

// Glyph mask for one class under a random affine jitter; retries until the
// glyph lies fully inside the image with an admissible area.
std::vector<std::uint8_t> draw_glyph(const SynthConfig& cfg, std::size_t label, Rng& rng) {
  const std::size_t size = cfg.image_size;
  const double extent = static_cast<double>(size - 1);
  std::uniform_real_distribution<double> rotation(-0.26, 0.26), scale(0.8, 1.05), shift(-0.07, 0.07),
      area(cfg.area_target - 0.04, cfg.area_target + 0.04);
  std::vector<double> dist(size * size);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double angle = rotation(rng), s = scale(rng), tx = shift(rng), ty = shift(rng);
    const double target = std::clamp(area(rng), cfg.area_min, cfg.area_max);
    const double c = std::cos(angle), sn = std::sin(angle);
    std::vector<Stroke> strokes;
    double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
    for (const Stroke& stroke : templates()[label]) {
      Stroke t;
      for (Point p : stroke) {
        const double u = (p.x - 0.5) * s, v = (p.y - 0.5) * s;
        const Point q{(c * u - sn * v + 0.5 + tx) * extent, (sn * u + c * v + 0.5 + ty) * extent};
        min_x = std::min(min_x, q.x);
        max_x = std::max(max_x, q.x);
        min_y = std::min(min_y, q.y);
        max_y = std::max(max_y, q.y);
        t.push_back(q);
      }
      strokes.push_back(std::move(t));
    }
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) {
        const Point p{static_cast<double>(x), static_cast<double>(y)};
        double d = 1e9;
        for (const Stroke& stroke : strokes)
          for (std::size_t k = 0; k + 1 < stroke.size(); ++k) d = std::min(d, segment_distance(p, stroke[k], stroke[k + 1]));
        dist[y * size + x] = d;
      }
    std::vector<double> sorted = dist;
    const auto want = static_cast<std::size_t>(std::lround(target * static_cast<double>(size * size)));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(want - 1), sorted.end());
    const double radius = std::max(0.5, sorted[want - 1]);
    if (min_x - radius < 0.0 || min_y - radius < 0.0 || max_x + radius > extent || max_y + radius > extent) continue;
    std::vector<std::uint8_t> mask(size * size);
    std::size_t count = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = dist[i] <= radius ? 1 : 0;
      count += mask[i];
    }
    const double fraction = static_cast<double>(count) / static_cast<double>(mask.size());
    if (fraction >= cfg.area_min && fraction <= cfg.area_max) return mask;
  }
  throw InvalidArgument("could not place a glyph with the requested area; check image_size and area bounds");
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what) {
  if (offset + 4 > bytes.size()) throw ParseError(std::string("IDX ") + what + " file truncated in header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void SynthConfig::validate() const {
  if (image_size < 8) throw InvalidArgument("image_size must be at least 8");
  if (channels != 1 && channels != 3) throw InvalidArgument("channels must be 1 or 3");
  if (num_classes < 2 || num_classes > templates().size())
    throw InvalidArgument("num_classes must lie in [2, " + std::to_string(templates().size()) + "]");
  if (!(area_min > 0.0 && area_min <= area_target && area_target <= area_max && area_max < 1.0))
    throw InvalidArgument("glyph area bounds must satisfy 0 < min <= target <= max < 1");
}

Tensor synth_background(const SynthConfig& cfg, std::size_t index) {
  cfg.validate();
  Rng rng(image_seed(cfg, index, 0));
  std::uniform_real_distribution<float> mean(0.1f, 0.6f), noise(-0.25f, 0.25f);
  const std::size_t plane = cfg.image_size * cfg.image_size;
  Tensor bg({cfg.channels, cfg.image_size, cfg.image_size});
  for (std::size_t c = 0; c < cfg.channels; ++c) {
    const float mu = mean(rng);
    for (std::size_t i = 0; i < plane; ++i) bg[c * plane + i] = std::clamp(mu + noise(rng), 0.0f, kBackgroundCeiling);
  }
  return bg;
}

Dataset generate(const SynthConfig& cfg, std::size_t n, std::size_t first_index) {
  cfg.validate();
  if (n == 0) throw InvalidArgument("number of images must be at least 1");
  Dataset out;
  out.reserve(n);
  const std::size_t plane = cfg.image_size * cfg.image_size;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t index = first_index + k;
    Tensor image = synth_background(cfg, index);
    Rng rng(image_seed(cfg, index, 1));
    std::uniform_int_distribution<std::size_t> pick_label(0, cfg.num_classes - 1);
    const std::size_t label = pick_label(rng);
    std::uniform_real_distribution<float> ink(kGlyphFloor, 1.0f);
    std::vector<float> color(cfg.channels);
    for (float& v : color) v = ink(rng);
    const std::vector<std::uint8_t> glyph = draw_glyph(cfg, label, rng);
    Tensor mask({cfg.image_size, cfg.image_size});
    for (std::size_t i = 0; i < plane; ++i) {
      if (!glyph[i]) continue;
      mask[i] = 1.0f;
      for (std::size_t c = 0; c < cfg.channels; ++c) image[c * plane + i] = color[c];
    }
    out.push_back({std::move(image), label, ObjectMask(std::move(mask))});
  }
  return out;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
  const std::uint32_t image_magic = read_be32(images, 0, "image");
  if (image_magic != 0x00000803u) throw ParseError("IDX image file has bad magic number");
  const std::uint32_t label_magic = read_be32(labels, 0, "label");
  if (label_magic != 0x00000801u) throw ParseError("IDX label file has bad magic number");
  const std::size_t count = read_be32(images, 4, "image");
  const std::size_t rows = read_be32(images, 8, "image");
  const std::size_t cols = read_be32(images, 12, "image");
  const std::size_t label_count = read_be32(labels, 4, "label");
  if (count != label_count)
    throw ParseError("IDX files disagree on item count: " + std::to_string(count) + " images, " +
                     std::to_string(label_count) + " labels");
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) throw ParseError("IDX image file truncated");
  if (labels.size() < 8 + count) throw ParseError("IDX label file truncated");
  Dataset out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Tensor image({1, rows, cols});
    for (std::size_t i = 0; i < pixels; ++i) image[i] = static_cast<float>(images[16 + n * pixels + i]) / 255.0f;
    out.push_back({std::move(image), labels[8 + n], std::nullopt});
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  return parse_idx(images, labels);
}

}  // namespace uaix
