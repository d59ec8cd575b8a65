#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "uaix/tensor.hpp"

namespace uaix {

// Binary object segmentation over the spatial grid of an image:
// 1 marks object pixels, 0 background. Both classes must be present.
class ObjectMask {
 public:
  explicit ObjectMask(Tensor values);

  const Tensor& values() const noexcept { return values_; }
  const Shape& shape() const noexcept { return values_.shape(); }
  bool contains(std::size_t i) const noexcept { return values_[i] != 0.0f; }
  std::size_t object_pixels() const noexcept { return object_; }
  double area_fraction() const noexcept { return static_cast<double>(object_) / static_cast<double>(values_.size()); }

  friend bool operator==(const ObjectMask&, const ObjectMask&) = default;

 private:
  Tensor values_;
  std::size_t object_ = 0;
};

struct LabeledImage {
  Tensor image;
  std::size_t label = 0;
  std::optional<ObjectMask> mask;

  friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

using Dataset = std::vector<LabeledImage>;

// Spatial shape of an input: CHW -> HW, anything else unchanged.
Shape spatial_shape(const Shape& input_shape);

}  // namespace uaix
