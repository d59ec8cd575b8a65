#include "uaix/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uaix/container.hpp"
#include "uaix/error.hpp"

namespace uaix {
namespace {

std::uint8_t floor_byte(double t) { return static_cast<std::uint8_t>(std::floor(255.0 * t)); }

std::uint8_t round_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

void require_map(const Tensor& map) {
  if (map.rank() != 2 || map.size() == 0) throw ShapeError("heatmaps need a nonempty [H x W] map, got " + shape_string(map.shape()));
}

}  // namespace

Rgb RgbImage::at(std::size_t row, std::size_t col) const {
  const std::size_t i = 3 * (row * width + col);
  return {pixels.at(i), pixels.at(i + 1), pixels.at(i + 2)};
}

Rgb seismic(float v) {
  if (!(v >= -1.0f && v <= 1.0f)) throw InvalidArgument("seismic colormap expects values in [-1,1], got " + std::to_string(v));
  const double x = v;
  if (x < 0.0) {
    const std::uint8_t c = floor_byte(1.0 + x);
    return {c, c, 255};
  }
  const std::uint8_t c = floor_byte(1.0 - x);
  return {255, c, c};
}

RgbImage seismic_image(const Tensor& map) {
  require_map(map);
  RgbImage img{map.shape()[1], map.shape()[0], {}};
  img.pixels.reserve(3 * map.size());
  for (float v : map.values()) {
    const Rgb c = seismic(v);
    img.pixels.insert(img.pixels.end(), c.begin(), c.end());
  }
  return img;
}

RgbImage input_image(const Tensor& base) {
  std::size_t channels = 1, h = 0, w = 0;
  if (base.rank() == 3) {
    channels = base.shape()[0];
    h = base.shape()[1];
    w = base.shape()[2];
  } else if (base.rank() == 2) {
    h = base.shape()[0];
    w = base.shape()[1];
  }
  if ((channels != 1 && channels != 3) || h == 0 || w == 0)
    throw ShapeError("base image must be [1|3 x H x W] or [H x W], got " + shape_string(base.shape()));
  RgbImage img{w, h, std::vector<std::uint8_t>(3 * h * w)};
  const std::size_t plane = h * w;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < 3; ++c) img.pixels[3 * p + c] = round_byte(255.0 * base[(channels == 3 ? c : 0) * plane + p]);
  return img;
}

RgbImage overlay_image(const Tensor& map, const Tensor& base, double threshold) {
  require_map(map);
  RgbImage img = input_image(base);
  if (img.height != map.shape()[0] || img.width != map.shape()[1])
    throw ShapeError("overlay map " + shape_string(map.shape()) + " does not match base image " + shape_string(base.shape()));
  for (std::size_t p = 0; p < map.size(); ++p) {
    const double v = map[p];
    if (!(v > threshold)) continue;
    const double a = std::min(v, 1.0);
    const Rgb red{255, 0, 0};
    for (std::size_t c = 0; c < 3; ++c)
      img.pixels[3 * p + c] = round_byte((1.0 - a) * img.pixels[3 * p + c] + a * red[c]);
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
  if (image.pixels.size() != 3 * image.width * image.height) throw ShapeError("image pixel buffer has the wrong size");
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) { write_file(path, encode_ppm(image)); }

void export_heatmap(const AggregateMap& map, const std::filesystem::path& path, HeatmapMode mode, const Tensor& base,
                    double threshold) {
  if (mode == HeatmapMode::Seismic) {
    if (map.normalization != Normalization::MinMax)
      throw InvalidArgument("seismic export needs a MinMax-normalized map");
    write_ppm(path, seismic_image(map.values));
  } else {
    if (base.empty()) throw InvalidArgument("overlay export needs a base image");
    write_ppm(path, overlay_image(map.values, base, threshold));
  }
}

}  // namespace uaix
