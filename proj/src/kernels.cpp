#include "kernels.hpp"

#include <algorithm>
#include <vector>

#include "uaix/error.hpp"

namespace uaix::detail {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

struct Geometry {
  long channels, height, width;
  long out_height, out_width;
  long kernel, stride, padding;
};

Geometry conv_geometry(const Conv2d& c, const Shape& in, const Shape& out) {
  return {static_cast<long>(in[0]), static_cast<long>(in[1]), static_cast<long>(in[2]),
          static_cast<long>(out[1]), static_cast<long>(out[2]), static_cast<long>(c.kernel),
          static_cast<long>(c.stride), static_cast<long>(c.padding)};
}

Geometry pool_geometry(std::size_t kernel, std::size_t stride, const Shape& in, const Shape& out) {
  return {static_cast<long>(in[0]), static_cast<long>(in[1]), static_cast<long>(in[2]),
          static_cast<long>(out[1]), static_cast<long>(out[2]), static_cast<long>(kernel),
          static_cast<long>(stride), 0};
}

// Output columns [lo, hi) whose input column ox*stride + kx - padding is in range.
inline void column_range(const Geometry& g, long kx, long& lo, long& hi) {
  const long shift = kx - g.padding;
  lo = shift >= 0 ? 0 : (-shift + g.stride - 1) / g.stride;
  const long last = g.width - 1 - shift;
  hi = last < 0 ? 0 : std::min(g.out_width, last / g.stride + 1);
}

Tensor to_float(const std::vector<double>& acc, Shape shape) {
  std::vector<float> v(acc.size());
  std::transform(acc.begin(), acc.end(), v.begin(), [](double d) { return static_cast<float>(d); });
  return Tensor(std::move(shape), std::move(v));
}

Tensor conv_forward(const Conv2d& c, const LayerParams& p, const Tensor& in, const Shape& out_shape) {
  const Geometry g = conv_geometry(c, in.shape(), out_shape);
  const long oc_count = static_cast<long>(c.out_channels);
  const long plane = g.out_height * g.out_width;
  std::vector<double> acc(static_cast<std::size_t>(oc_count * plane));
  const float* x = in.data();
  const float* w = p.weight.data();
  for (long oc = 0; oc < oc_count; ++oc) {
    double* out = acc.data() + oc * plane;
    std::fill(out, out + plane, static_cast<double>(p.bias[static_cast<std::size_t>(oc)]));
    for (long ic = 0; ic < g.channels; ++ic) {
      for (long ky = 0; ky < g.kernel; ++ky) {
        for (long kx = 0; kx < g.kernel; ++kx) {
          const double wv = w[((oc * g.channels + ic) * g.kernel + ky) * g.kernel + kx];
          long lo, hi;
          column_range(g, kx, lo, hi);
          const long shift = kx - g.padding;
          for (long oy = 0; oy < g.out_height; ++oy) {
            const long iy = oy * g.stride + ky - g.padding;
            if (iy < 0 || iy >= g.height) continue;
            const float* row = x + (ic * g.height + iy) * g.width;
            double* orow = out + oy * g.out_width;
            if (g.stride == 1) {
              for (long ox = lo; ox < hi; ++ox) orow[ox] += wv * row[ox + shift];
            } else {
              for (long ox = lo; ox < hi; ++ox) orow[ox] += wv * row[ox * g.stride + shift];
            }
          }
        }
      }
    }
  }
  return to_float(acc, out_shape);
}

Tensor conv_backward_input(const Conv2d& c, const LayerParams& p, const Tensor& in, const Tensor& grad_out) {
  const Geometry g = conv_geometry(c, in.shape(), grad_out.shape());
  const long oc_count = static_cast<long>(c.out_channels);
  std::vector<double> acc(in.size(), 0.0);
  const float* w = p.weight.data();
  const float* go = grad_out.data();
  for (long oc = 0; oc < oc_count; ++oc) {
    for (long ic = 0; ic < g.channels; ++ic) {
      for (long ky = 0; ky < g.kernel; ++ky) {
        for (long kx = 0; kx < g.kernel; ++kx) {
          const double wv = w[((oc * g.channels + ic) * g.kernel + ky) * g.kernel + kx];
          long lo, hi;
          column_range(g, kx, lo, hi);
          const long shift = kx - g.padding;
          for (long oy = 0; oy < g.out_height; ++oy) {
            const long iy = oy * g.stride + ky - g.padding;
            if (iy < 0 || iy >= g.height) continue;
            double* row = acc.data() + (ic * g.height + iy) * g.width;
            const float* grow = go + (oc * g.out_height + oy) * g.out_width;
            if (g.stride == 1) {
              for (long ox = lo; ox < hi; ++ox) row[ox + shift] += wv * grow[ox];
            } else {
              for (long ox = lo; ox < hi; ++ox) row[ox * g.stride + shift] += wv * grow[ox];
            }
          }
        }
      }
    }
  }
  return to_float(acc, in.shape());
}

void conv_backward_params(const Conv2d& c, const Tensor& in, const Tensor& grad_out, LayerParams& grads) {
  const Geometry g = conv_geometry(c, in.shape(), grad_out.shape());
  const long oc_count = static_cast<long>(c.out_channels);
  const long plane = g.out_height * g.out_width;
  const float* x = in.data();
  const float* go = grad_out.data();
  for (long oc = 0; oc < oc_count; ++oc) {
    const float* gplane = go + oc * plane;
    double bsum = 0.0;
    for (long i = 0; i < plane; ++i) bsum += gplane[i];
    grads.bias[static_cast<std::size_t>(oc)] = static_cast<float>(bsum);
    for (long ic = 0; ic < g.channels; ++ic) {
      for (long ky = 0; ky < g.kernel; ++ky) {
        for (long kx = 0; kx < g.kernel; ++kx) {
          long lo, hi;
          column_range(g, kx, lo, hi);
          const long shift = kx - g.padding;
          double sum = 0.0;
          for (long oy = 0; oy < g.out_height; ++oy) {
            const long iy = oy * g.stride + ky - g.padding;
            if (iy < 0 || iy >= g.height) continue;
            const float* row = x + (ic * g.height + iy) * g.width;
            const float* grow = gplane + oy * g.out_width;
            for (long ox = lo; ox < hi; ++ox) sum += static_cast<double>(grow[ox]) * row[ox * g.stride + shift];
          }
          grads.weight[static_cast<std::size_t>(((oc * g.channels + ic) * g.kernel + ky) * g.kernel + kx)] =
              static_cast<float>(sum);
        }
      }
    }
  }
}

Tensor dense_forward(const Dense& d, const LayerParams& p, const Tensor& in) {
  std::vector<double> acc(d.out);
  const float* w = p.weight.data();
  const float* x = in.data();
  for (std::size_t i = 0; i < d.out; ++i) {
    double s = p.bias[i];
    const float* row = w + i * d.in;
    for (std::size_t j = 0; j < d.in; ++j) s += static_cast<double>(row[j]) * x[j];
    acc[i] = s;
  }
  return to_float(acc, {d.out});
}

Tensor dense_backward_input(const Dense& d, const LayerParams& p, const Tensor& grad_out) {
  std::vector<double> acc(d.in, 0.0);
  const float* w = p.weight.data();
  for (std::size_t i = 0; i < d.out; ++i) {
    const double g = grad_out[i];
    if (g == 0.0) continue;
    const float* row = w + i * d.in;
    for (std::size_t j = 0; j < d.in; ++j) acc[j] += g * row[j];
  }
  return to_float(acc, {d.in});
}

void dense_backward_params(const Dense& d, const Tensor& in, const Tensor& grad_out, LayerParams& grads) {
  for (std::size_t i = 0; i < d.out; ++i) {
    const double g = grad_out[i];
    float* row = grads.weight.data() + i * d.in;
    for (std::size_t j = 0; j < d.in; ++j) row[j] = static_cast<float>(g * in[j]);
    grads.bias[i] = grad_out[i];
  }
}

Tensor avgpool_forward(const AvgPool2d& a, const Tensor& in, const Shape& out_shape) {
  const Geometry g = pool_geometry(a.kernel, a.stride, in.shape(), out_shape);
  const double inv = 1.0 / static_cast<double>(g.kernel * g.kernel);
  std::vector<double> acc(shape_size(out_shape));
  for (long c = 0; c < g.channels; ++c)
    for (long oy = 0; oy < g.out_height; ++oy)
      for (long ox = 0; ox < g.out_width; ++ox) {
        double s = 0.0;
        for (long ky = 0; ky < g.kernel; ++ky)
          for (long kx = 0; kx < g.kernel; ++kx)
            s += in[static_cast<std::size_t>((c * g.height + oy * g.stride + ky) * g.width + ox * g.stride + kx)];
        acc[static_cast<std::size_t>((c * g.out_height + oy) * g.out_width + ox)] = s * inv;
      }
  return to_float(acc, out_shape);
}

Tensor avgpool_backward_input(const AvgPool2d& a, const Tensor& in, const Tensor& grad_out) {
  const Geometry g = pool_geometry(a.kernel, a.stride, in.shape(), grad_out.shape());
  const double inv = 1.0 / static_cast<double>(g.kernel * g.kernel);
  std::vector<double> acc(in.size(), 0.0);
  for (long c = 0; c < g.channels; ++c)
    for (long oy = 0; oy < g.out_height; ++oy)
      for (long ox = 0; ox < g.out_width; ++ox) {
        const double v = grad_out[static_cast<std::size_t>((c * g.out_height + oy) * g.out_width + ox)] * inv;
        for (long ky = 0; ky < g.kernel; ++ky)
          for (long kx = 0; kx < g.kernel; ++kx)
            acc[static_cast<std::size_t>((c * g.height + oy * g.stride + ky) * g.width + ox * g.stride + kx)] += v;
      }
  return to_float(acc, in.shape());
}

// Flat input index of the first maximal element (row-major) of a window.
inline std::size_t max_index(const Geometry& g, const Tensor& in, long c, long oy, long ox) {
  std::size_t best = static_cast<std::size_t>((c * g.height + oy * g.stride) * g.width + ox * g.stride);
  for (long ky = 0; ky < g.kernel; ++ky)
    for (long kx = 0; kx < g.kernel; ++kx) {
      const auto idx = static_cast<std::size_t>((c * g.height + oy * g.stride + ky) * g.width + ox * g.stride + kx);
      if (in[idx] > in[best]) best = idx;
    }
  return best;
}

Tensor maxpool_forward(const MaxPool2d& m, const Tensor& in, const Shape& out_shape) {
  const Geometry g = pool_geometry(m.kernel, m.stride, in.shape(), out_shape);
  Tensor out(out_shape);
  for (long c = 0; c < g.channels; ++c)
    for (long oy = 0; oy < g.out_height; ++oy)
      for (long ox = 0; ox < g.out_width; ++ox)
        out[static_cast<std::size_t>((c * g.out_height + oy) * g.out_width + ox)] = in[max_index(g, in, c, oy, ox)];
  return out;
}

Tensor maxpool_backward_input(const MaxPool2d& m, const Tensor& in, const Tensor& grad_out) {
  const Geometry g = pool_geometry(m.kernel, m.stride, in.shape(), grad_out.shape());
  std::vector<double> acc(in.size(), 0.0);
  for (long c = 0; c < g.channels; ++c)
    for (long oy = 0; oy < g.out_height; ++oy)
      for (long ox = 0; ox < g.out_width; ++ox)
        acc[max_index(g, in, c, oy, ox)] += grad_out[static_cast<std::size_t>((c * g.out_height + oy) * g.out_width + ox)];
  return to_float(acc, in.shape());
}

}  // namespace

bool has_params(const LayerSpec& layer) {
  return std::holds_alternative<Dense>(layer) || std::holds_alternative<Conv2d>(layer);
}

Tensor layer_forward(const LayerSpec& layer, const LayerParams& params, const Tensor& in, const Shape& out_shape,
                     const Tensor* mask) {
  return std::visit(
      overloaded{
          [&](const Dense& d) { return dense_forward(d, params, in); },
          [&](const Conv2d& c) { return conv_forward(c, params, in, out_shape); },
          [&](const ReLU&) {
            Tensor out = in;
            for (float& v : out.values()) v = v > 0.0f ? v : 0.0f;
            return out;
          },
          [&](const AvgPool2d& a) { return avgpool_forward(a, in, out_shape); },
          [&](const MaxPool2d& m) { return maxpool_forward(m, in, out_shape); },
          [&](const Flatten&) { return in.reshaped(out_shape); },
          [&](const Dropout&) {
            Tensor out = in;
            if (mask) {
              for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
            }
            return out;
          },
      },
      layer);
}

Tensor layer_backward_input(const LayerSpec& layer, const LayerParams& params, const Tensor& in,
                            const Tensor& grad_out, const Tensor* mask) {
  return std::visit(
      overloaded{
          [&](const Dense& d) { return dense_backward_input(d, params, grad_out); },
          [&](const Conv2d& c) { return conv_backward_input(c, params, in, grad_out); },
          [&](const ReLU&) {
            Tensor g = grad_out.reshaped(in.shape());
            for (std::size_t i = 0; i < g.size(); ++i)
              if (!(in[i] > 0.0f)) g[i] = 0.0f;
            return g;
          },
          [&](const AvgPool2d& a) { return avgpool_backward_input(a, in, grad_out); },
          [&](const MaxPool2d& m) { return maxpool_backward_input(m, in, grad_out); },
          [&](const Flatten&) { return grad_out.reshaped(in.shape()); },
          [&](const Dropout&) {
            Tensor g = grad_out;
            if (mask) {
              for (std::size_t i = 0; i < g.size(); ++i) g[i] *= (*mask)[i];
            }
            return g;
          },
      },
      layer);
}

void layer_backward_params(const LayerSpec& layer, const Tensor& in, const Tensor& grad_out, LayerParams& grads) {
  if (const auto* d = std::get_if<Dense>(&layer)) {
    dense_backward_params(*d, in, grad_out, grads);
  } else if (const auto* c = std::get_if<Conv2d>(&layer)) {
    conv_backward_params(*c, in, grad_out, grads);
  }
}

}  // namespace uaix::detail
