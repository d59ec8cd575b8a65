#include "uaix/container.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "uaix/error.hpp"

namespace uaix {
namespace {

constexpr char kMagic[4] = {'U', 'A', 'I', 'X'};

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t le(int n, const std::string& what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const std::string& what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const std::string& what) {
    if (remaining() < n) throw ParseError("truncated container: incomplete " + what);
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void TensorContainer::add(ContainerEntry e) {
  if (e.name.empty()) throw InvalidArgument("container entry names must be nonempty");
  if (contains(e.name)) throw InvalidArgument("duplicate container entry '" + e.name + "'");
  if (shape_size(e.dims) != e.words.size())
    throw ShapeError("entry '" + e.name + "' dims " + shape_string(e.dims) + " do not match its payload");
  entries_.push_back(std::move(e));
}

void TensorContainer::put(const std::string& name, const Tensor& t) {
  ContainerEntry e{name, DType::F32, t.shape(), {}};
  e.words.reserve(t.size());
  for (float v : t.values()) e.words.push_back(std::bit_cast<std::uint32_t>(v));
  add(std::move(e));
}

void TensorContainer::put_u32(const std::string& name, Shape dims, std::vector<std::uint32_t> values) {
  add(ContainerEntry{name, DType::U32, std::move(dims), std::move(values)});
}

void TensorContainer::put_u32(const std::string& name, std::uint32_t value) { put_u32(name, {1}, {value}); }

void TensorContainer::put_u64(const std::string& name, std::span<const std::uint64_t> values) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t v : values) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  }
  put_u32(name, {values.size(), 2}, std::move(words));
}

void TensorContainer::put_text(const std::string& name, const std::string& text) {
  std::vector<std::uint32_t> words(text.begin(), text.end());
  for (auto& w : words) w &= 0xFFu;
  put_u32(name, {text.size()}, std::move(words));
}

bool TensorContainer::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return true;
  return false;
}

const ContainerEntry& TensorContainer::entry(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw ParseError("container has no entry '" + name + "'");
}

const ContainerEntry& TensorContainer::typed(const std::string& name, DType dtype) const {
  const auto& e = entry(name);
  if (e.dtype != dtype) throw ParseError("entry '" + name + "' has the wrong dtype");
  return e;
}

Tensor TensorContainer::tensor(const std::string& name) const {
  const auto& e = typed(name, DType::F32);
  std::vector<float> data;
  data.reserve(e.words.size());
  for (std::uint32_t w : e.words) data.push_back(std::bit_cast<float>(w));
  return Tensor(e.dims, std::move(data));
}

std::vector<std::uint32_t> TensorContainer::u32s(const std::string& name) const { return typed(name, DType::U32).words; }

std::uint32_t TensorContainer::u32(const std::string& name) const {
  const auto& e = typed(name, DType::U32);
  if (e.words.size() != 1) throw ParseError("entry '" + name + "' is not a scalar");
  return e.words[0];
}

std::vector<std::uint64_t> TensorContainer::u64s(const std::string& name) const {
  const auto& e = typed(name, DType::U32);
  if (e.dims.size() != 2 || e.dims[1] != 2) throw ParseError("entry '" + name + "' is not a 64-bit array");
  std::vector<std::uint64_t> out(e.dims[0]);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint64_t>(e.words[2 * i]) | (static_cast<std::uint64_t>(e.words[2 * i + 1]) << 32);
  return out;
}

std::string TensorContainer::text(const std::string& name) const {
  const auto& e = typed(name, DType::U32);
  std::string s;
  for (std::uint32_t w : e.words) {
    if (w > 0xFF) throw ParseError("entry '" + name + "' is not text");
    s.push_back(static_cast<char>(w));
  }
  return s;
}

std::vector<std::uint8_t> TensorContainer::encode() const {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le(out, kContainerVersion, 2);
  put_le(out, entries_.size(), 4);
  for (const auto& e : entries_) {
    put_le(out, e.name.size(), 4);
    out.insert(out.end(), e.name.begin(), e.name.end());
    out.push_back(static_cast<std::uint8_t>(e.dtype));
    put_le(out, e.dims.size(), 4);
    for (std::size_t d : e.dims) put_le(out, d, 4);
    for (std::uint32_t w : e.words) put_le(out, w, 4);
  }
  return out;
}

TensorContainer TensorContainer::decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "header");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw ParseError("not a UAIX container (bad magic)");
  const auto version = r.le(2, "header");
  if (version != kContainerVersion)
    throw ParseError("unsupported container version " + std::to_string(version) + " (expected " +
                     std::to_string(kContainerVersion) + ")");
  const auto count = r.le(4, "header");
  TensorContainer c;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string label = "entry " + std::to_string(i);
    const auto name_len = r.le(4, label + " name");
    const auto name_bytes = r.take(name_len, label + " name");
    ContainerEntry e;
    e.name.assign(name_bytes.begin(), name_bytes.end());
    const std::string named = "entry '" + e.name + "'";
    const auto dtype = r.le(1, named);
    if (dtype > 1) throw ParseError(named + " has unknown dtype " + std::to_string(dtype));
    e.dtype = static_cast<DType>(dtype);
    const auto rank = r.le(4, named);
    std::size_t n = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      e.dims.push_back(r.le(4, named));
      n *= e.dims.back();
    }
    if (n > r.remaining() / 4) throw ParseError("truncated container: incomplete " + named);
    e.words.resize(n);
    for (auto& w : e.words) w = static_cast<std::uint32_t>(r.le(4, named));
    if (c.contains(e.name)) throw ParseError("duplicate container entry '" + e.name + "'");
    c.entries_.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after the last container entry");
  return c;
}

void TensorContainer::save(const std::filesystem::path& path) const { write_file(path, encode()); }

TensorContainer TensorContainer::load(const std::filesystem::path& path) { return decode(read_file(path)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace uaix
