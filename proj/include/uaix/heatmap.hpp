#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "uaix/tensor.hpp"
#include "uaix/uai.hpp"

namespace uaix {

using Rgb = std::array<std::uint8_t, 3>;

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triplets

  Rgb at(std::size_t row, std::size_t col) const;
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// -1 -> blue, 0 -> white, +1 -> red, linear on each half; channel bytes are
// floor(255 t). Values outside [-1,1] are rejected.
Rgb seismic(float v);

// Renders a [H x W] map whose values lie in [-1,1].
RgbImage seismic_image(const Tensor& map);

// Base image ([C x H x W] with C in {1,3}, or [H x W], values in [0,1])
// with red blended in where the map exceeds `threshold`, opacity equal to
// the clamped map value.
RgbImage overlay_image(const Tensor& map, const Tensor& base, double threshold);

// Base image alone, as 8-bit RGB.
RgbImage input_image(const Tensor& base);

std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

enum class HeatmapMode { Seismic, Overlay };

// Seismic mode needs a MinMax-normalized map; overlay mode needs `base`.
void export_heatmap(const AggregateMap& map, const std::filesystem::path& path, HeatmapMode mode,
                    const Tensor& base = Tensor(), double threshold = 0.05);

}  // namespace uaix
