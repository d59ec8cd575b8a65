#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "uaix/dataset.hpp"

namespace uaix {

// Glyph-on-noise images: a procedural class glyph drawn over per-pixel
// uniform RGB noise whose mean is drawn per image.
struct SynthConfig {
  std::size_t image_size = 28;
  std::size_t channels = 3;
  std::size_t num_classes = 10;
  double area_target = 0.25;
  double area_min = 0.15;
  double area_max = 0.35;
  std::uint64_t seed = 0;

  void validate() const;
};

// Images first_index .. first_index + n - 1. Each image depends only on
// (seed, index), so disjoint index ranges give disjoint splits.
Dataset generate(const SynthConfig& cfg, std::size_t n, std::size_t first_index = 0);

// The noise background of image `index` before its glyph is drawn.
Tensor synth_background(const SynthConfig& cfg, std::size_t index);

// IDX (MNIST) ingestion. Images come back as [1 x rows x cols] in [0,1]
// without masks.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

}  // namespace uaix
