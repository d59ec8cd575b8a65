#include "uaix/serialize.hpp"

#include <array>
#include <bit>

#include "uaix/error.hpp"

namespace uaix {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

enum LayerCode : std::uint32_t { kDense, kConv, kRelu, kAvgPool, kMaxPool, kFlatten, kDropout };
constexpr std::size_t kLayerFields = 6;

std::uint32_t narrow(std::size_t v, const std::string& what) {
  if (v > 0xFFFFFFFFu) throw InvalidArgument(what + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::vector<std::uint32_t> to_u32(const Shape& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t d : s) out.push_back(narrow(d, "dimension"));
  return out;
}

Shape to_shape(const std::vector<std::uint32_t>& v) { return Shape(v.begin(), v.end()); }

std::string key(const std::string& prefix, const std::string& name) { return prefix.empty() ? name : prefix + "." + name; }

void put_shared_weights(TensorContainer& c, const std::string& prefix, const WeightsPtr& w) {
  if (!w) throw InvalidArgument("cannot save missing weights");
  put_weights(c, prefix, *w);
}

WeightsPtr get_shared_weights(const TensorContainer& c, const std::string& prefix) {
  return std::make_shared<const WeightSet>(get_weights(c, prefix));
}

TensorContainer load_expecting(const std::filesystem::path& path, const std::string& kind) {
  TensorContainer c = TensorContainer::load(path);
  const std::string found = c.contains("kind") ? c.text("kind") : "";
  if (found != kind)
    throw ParseError("'" + path.string() + "' holds " + (found.empty() ? "no recognised object" : found) + ", expected " +
                     kind);
  return c;
}

}  // namespace

void put_network(TensorContainer& c, const std::string& prefix, const Network& net) {
  c.put_u32(key(prefix, "input_shape"), {net.input_shape().size()}, to_u32(net.input_shape()));
  std::vector<std::uint32_t> rows;
  for (const auto& layer : net.layers()) {
    std::array<std::uint32_t, kLayerFields> f{};
    std::visit(overloaded{
                   [&](const Dense& d) { f = {kDense, narrow(d.in, "in"), narrow(d.out, "out")}; },
                   [&](const Conv2d& k) {
                     f = {kConv, narrow(k.in_channels, "channels"), narrow(k.out_channels, "channels"),
                          narrow(k.kernel, "kernel"), narrow(k.stride, "stride"), narrow(k.padding, "padding")};
                   },
                   [&](const ReLU&) { f = {kRelu}; },
                   [&](const AvgPool2d& p) { f = {kAvgPool, narrow(p.kernel, "kernel"), narrow(p.stride, "stride")}; },
                   [&](const MaxPool2d& p) { f = {kMaxPool, narrow(p.kernel, "kernel"), narrow(p.stride, "stride")}; },
                   [&](const Flatten&) { f = {kFlatten}; },
                   [&](const Dropout& d) { f = {kDropout, std::bit_cast<std::uint32_t>(d.rate), d.channelwise ? 1u : 0u}; },
               },
               layer);
    rows.insert(rows.end(), f.begin(), f.end());
  }
  c.put_u32(key(prefix, "layers"), {net.num_layers(), kLayerFields}, std::move(rows));
}

Network get_network(const TensorContainer& c, const std::string& prefix) {
  const Shape input = to_shape(c.u32s(key(prefix, "input_shape")));
  const auto& e = c.entry(key(prefix, "layers"));
  if (e.dtype != DType::U32 || e.dims.size() != 2 || e.dims[1] != kLayerFields)
    throw ParseError("entry '" + e.name + "' is not a layer table");
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < e.dims[0]; ++i) {
    const std::uint32_t* f = &e.words[i * kLayerFields];
    switch (f[0]) {
      case kDense: layers.push_back(Dense{f[1], f[2]}); break;
      case kConv: layers.push_back(Conv2d{f[1], f[2], f[3], f[4], f[5]}); break;
      case kRelu: layers.push_back(ReLU{}); break;
      case kAvgPool: layers.push_back(AvgPool2d{f[1], f[2]}); break;
      case kMaxPool: layers.push_back(MaxPool2d{f[1], f[2]}); break;
      case kFlatten: layers.push_back(Flatten{}); break;
      case kDropout: layers.push_back(Dropout{std::bit_cast<float>(f[1]), f[2] != 0}); break;
      default: throw ParseError("layer " + std::to_string(i) + " has unknown type code " + std::to_string(f[0]));
    }
  }
  return Network(input, std::move(layers));
}

void put_weights(TensorContainer& c, const std::string& prefix, const WeightSet& w) {
  c.put_u32(key(prefix, "layer_count"), narrow(w.layers.size(), "layer count"));
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    if (w.layers[i].weight.empty()) continue;
    c.put(key(prefix, std::to_string(i) + ".weight"), w.layers[i].weight);
    c.put(key(prefix, std::to_string(i) + ".bias"), w.layers[i].bias);
  }
}

WeightSet get_weights(const TensorContainer& c, const std::string& prefix) {
  WeightSet w;
  w.layers.resize(c.u32(key(prefix, "layer_count")));
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const std::string k = key(prefix, std::to_string(i) + ".weight");
    if (!c.contains(k)) continue;
    w.layers[i].weight = c.tensor(k);
    w.layers[i].bias = c.tensor(key(prefix, std::to_string(i) + ".bias"));
  }
  return w;
}

void put_posterior(TensorContainer& c, const std::string& prefix, const WeightPosterior& posterior) {
  c.put_text(key(prefix, "variant"), posterior_tag(posterior));
  std::visit(overloaded{
                 [&](const EnsemblePosterior& e) {
                   c.put_u32(key(prefix, "members"), narrow(e.members.size(), "member count"));
                   for (std::size_t m = 0; m < e.members.size(); ++m)
                     put_shared_weights(c, key(prefix, "member." + std::to_string(m)), e.members[m]);
                 },
                 [&](const McDropoutPosterior& d) {
                   put_shared_weights(c, key(prefix, "map"), d.map);
                   std::vector<std::uint32_t> rates;
                   for (const auto& [layer, rate] : d.rates) {
                     rates.push_back(narrow(layer, "layer index"));
                     rates.push_back(std::bit_cast<std::uint32_t>(rate));
                   }
                   c.put_u32(key(prefix, "rates"), {d.rates.size(), 2}, std::move(rates));
                 },
                 [&](const LaplacePosterior& l) {
                   put_shared_weights(c, key(prefix, "map"), l.map);
                   put_shared_weights(c, key(prefix, "variance"), l.variance);
                 },
             },
             posterior);
}

WeightPosterior get_posterior(const TensorContainer& c, const std::string& prefix) {
  const std::string variant = c.text(key(prefix, "variant"));
  if (variant == "ensemble") {
    EnsemblePosterior e;
    const std::uint32_t n = c.u32(key(prefix, "members"));
    for (std::uint32_t m = 0; m < n; ++m) e.members.push_back(get_shared_weights(c, key(prefix, "member." + std::to_string(m))));
    return e;
  }
  if (variant == "dropout") {
    McDropoutPosterior d;
    d.map = get_shared_weights(c, key(prefix, "map"));
    const auto rates = c.u32s(key(prefix, "rates"));
    for (std::size_t i = 0; i + 1 < rates.size(); i += 2) d.rates[rates[i]] = std::bit_cast<float>(rates[i + 1]);
    return d;
  }
  if (variant == "laplace")
    return LaplacePosterior{get_shared_weights(c, key(prefix, "map")), get_shared_weights(c, key(prefix, "variance"))};
  throw ParseError("unknown posterior variant '" + variant + "'");
}

void put_relevance_set(TensorContainer& c, const std::string& prefix, const RelevanceSet& set) {
  set.validate();
  Shape stacked{set.size()};
  const Shape& ms = set.map_shape();
  stacked.insert(stacked.end(), ms.begin(), ms.end());
  std::vector<float> data;
  data.reserve(shape_size(stacked));
  for (const auto& s : set.samples) data.insert(data.end(), s.values().begin(), s.values().end());
  c.put(key(prefix, "samples"), Tensor(stacked, std::move(data)));
  c.put(key(prefix, "input"), set.input);
  c.put_u32(key(prefix, "class_index"), narrow(set.class_index, "class index"));
  c.put_text(key(prefix, "method"), set.method);
  c.put_text(key(prefix, "posterior"), set.posterior);
  c.put_u64(key(prefix, "seeds"), set.seeds);
  c.put_u32(key(prefix, "group_normalized"), set.group_normalized ? 1u : 0u);
}

RelevanceSet get_relevance_set(const TensorContainer& c, const std::string& prefix) {
  RelevanceSet set;
  const Tensor stacked = c.tensor(key(prefix, "samples"));
  if (stacked.rank() < 2) throw ParseError("relevance samples must have rank >= 2");
  const Shape ms(stacked.shape().begin() + 1, stacked.shape().end());
  const std::size_t per = shape_size(ms);
  for (std::size_t i = 0; i < stacked.shape()[0]; ++i)
    set.samples.emplace_back(ms, std::vector<float>(stacked.data() + i * per, stacked.data() + (i + 1) * per));
  set.input = c.tensor(key(prefix, "input"));
  set.class_index = c.u32(key(prefix, "class_index"));
  set.method = c.text(key(prefix, "method"));
  set.posterior = c.text(key(prefix, "posterior"));
  set.seeds = c.u64s(key(prefix, "seeds"));
  set.group_normalized = c.u32(key(prefix, "group_normalized")) != 0;
  set.validate();
  return set;
}

void put_dataset(TensorContainer& c, const std::string& prefix, const Dataset& data) {
  if (data.empty()) {
    c.put_u32(key(prefix, "count"), 0u);
    return;
  }
  const Shape& is = data.front().image.shape();
  const Shape ms = spatial_shape(is);
  Shape images{data.size()}, masks{data.size()};
  images.insert(images.end(), is.begin(), is.end());
  masks.insert(masks.end(), ms.begin(), ms.end());
  std::vector<float> img, msk;
  std::vector<std::uint32_t> labels, has_mask;
  for (const auto& ex : data) {
    if (ex.image.shape() != is) throw ShapeError("dataset images must share one shape");
    img.insert(img.end(), ex.image.values().begin(), ex.image.values().end());
    labels.push_back(narrow(ex.label, "label"));
    has_mask.push_back(ex.mask ? 1u : 0u);
    if (ex.mask) {
      if (ex.mask->shape() != ms) throw ShapeError("mask shape does not match image");
      msk.insert(msk.end(), ex.mask->values().values().begin(), ex.mask->values().values().end());
    } else {
      msk.insert(msk.end(), shape_size(ms), 0.0f);
    }
  }
  c.put_u32(key(prefix, "count"), narrow(data.size(), "dataset size"));
  c.put(key(prefix, "images"), Tensor(images, std::move(img)));
  c.put_u32(key(prefix, "labels"), {data.size()}, std::move(labels));
  c.put_u32(key(prefix, "has_mask"), {data.size()}, std::move(has_mask));
  c.put(key(prefix, "masks"), Tensor(masks, std::move(msk)));
}

Dataset get_dataset(const TensorContainer& c, const std::string& prefix) {
  const std::size_t n = c.u32(key(prefix, "count"));
  Dataset data;
  if (n == 0) return data;
  const Tensor images = c.tensor(key(prefix, "images"));
  const Tensor masks = c.tensor(key(prefix, "masks"));
  const auto labels = c.u32s(key(prefix, "labels"));
  const auto has_mask = c.u32s(key(prefix, "has_mask"));
  if (images.rank() < 2 || images.shape()[0] != n || masks.shape().empty() || masks.shape()[0] != n ||
      labels.size() != n || has_mask.size() != n)
    throw ParseError("dataset entries disagree on the number of images");
  const Shape is(images.shape().begin() + 1, images.shape().end());
  const Shape ms(masks.shape().begin() + 1, masks.shape().end());
  const std::size_t ip = shape_size(is), mp = shape_size(ms);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledImage ex;
    ex.image = Tensor(is, std::vector<float>(images.data() + i * ip, images.data() + (i + 1) * ip));
    ex.label = labels[i];
    if (has_mask[i]) ex.mask = ObjectMask(Tensor(ms, std::vector<float>(masks.data() + i * mp, masks.data() + (i + 1) * mp)));
    data.push_back(std::move(ex));
  }
  return data;
}

void put_aggregate(TensorContainer& c, const std::string& prefix, const AggregateMap& map) {
  c.put(key(prefix, "values"), map.values);
  c.put_u32(key(prefix, "kind"), static_cast<std::uint32_t>(map.kind));
  c.put_u64(key(prefix, "parameter"), std::vector<std::uint64_t>{std::bit_cast<std::uint64_t>(map.parameter)});
  c.put_u32(key(prefix, "normalization"), static_cast<std::uint32_t>(map.normalization));
}

AggregateMap get_aggregate(const TensorContainer& c, const std::string& prefix) {
  AggregateMap map;
  map.values = c.tensor(key(prefix, "values"));
  const auto kind = c.u32(key(prefix, "kind"));
  const auto norm = c.u32(key(prefix, "normalization"));
  if (kind > 2 || norm > 2) throw ParseError("aggregate '" + prefix + "' has an unknown kind or normalization");
  map.kind = static_cast<AggregateKind>(kind);
  map.normalization = static_cast<Normalization>(norm);
  const auto p = c.u64s(key(prefix, "parameter"));
  if (p.size() != 1) throw ParseError("aggregate '" + prefix + "' parameter must be a scalar");
  map.parameter = std::bit_cast<double>(p[0]);
  return map;
}

void save_weights(const std::filesystem::path& path, const Network& net, const WeightSet& w) {
  check_weights(net, w);
  TensorContainer c;
  c.put_text("kind", "weights");
  put_network(c, "net", net);
  put_weights(c, "weights", w);
  c.save(path);
}

std::pair<Network, WeightSet> load_weights(const std::filesystem::path& path) {
  const TensorContainer c = load_expecting(path, "weights");
  Network net = get_network(c, "net");
  WeightSet w = get_weights(c, "weights");
  check_weights(net, w);
  return {std::move(net), std::move(w)};
}

void save_posterior(const std::filesystem::path& path, const Network& net, const WeightPosterior& posterior) {
  check_posterior(net, posterior);
  TensorContainer c;
  c.put_text("kind", "posterior");
  put_network(c, "net", net);
  put_posterior(c, "posterior", posterior);
  c.save(path);
}

Model load_posterior(const std::filesystem::path& path) {
  const TensorContainer c = load_expecting(path, "posterior");
  Model m{get_network(c, "net"), get_posterior(c, "posterior")};
  check_posterior(m.net, m.posterior);
  return m;
}

void save_relevance_set(const std::filesystem::path& path, const RelevanceSet& set) {
  TensorContainer c;
  c.put_text("kind", "relevance");
  put_relevance_set(c, "relevance", set);
  c.save(path);
}

RelevanceSet load_relevance_set(const std::filesystem::path& path) {
  return get_relevance_set(load_expecting(path, "relevance"), "relevance");
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  TensorContainer c;
  c.put_text("kind", "dataset");
  put_dataset(c, "data", data);
  c.save(path);
}

Dataset load_dataset(const std::filesystem::path& path) { return get_dataset(load_expecting(path, "dataset"), "data"); }

}  // namespace uaix
