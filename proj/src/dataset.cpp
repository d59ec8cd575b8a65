#include "uaix/dataset.hpp"

#include "uaix/error.hpp"

namespace uaix {

ObjectMask::ObjectMask(Tensor values) : values_(std::move(values)) {
  for (float v : values_.values()) {
    if (v != 0.0f && v != 1.0f) throw InvalidArgument("object mask entries must be 0 or 1");
    if (v == 1.0f) ++object_;
  }
  if (object_ == 0 || object_ == values_.size())
    throw InvalidArgument("object mask must contain both object and background pixels");
}

Shape spatial_shape(const Shape& input_shape) {
  if (input_shape.size() == 3) return {input_shape[1], input_shape[2]};
  return input_shape;
}

}  // namespace uaix
