#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uaix/tensor.hpp"

namespace uaix {

// Binary layout (little-endian throughout):
//   "UAIX", u16 version, u32 entry count, then per entry
//   u32 name length, UTF-8 name, u8 dtype, u32 rank, rank x u32 dims,
//   product(dims) x 4 payload bytes.
// dtype 0 is f32, 1 is u32. Text and 64-bit values are stored as u32 arrays.
enum class DType : std::uint8_t { F32 = 0, U32 = 1 };

inline constexpr std::uint16_t kContainerVersion = 1;

struct ContainerEntry {
  std::string name;
  DType dtype = DType::F32;
  Shape dims;
  std::vector<std::uint32_t> words;  // raw 32-bit payload
};

class TensorContainer {
 public:
  void put(const std::string& name, const Tensor& t);
  void put_u32(const std::string& name, Shape dims, std::vector<std::uint32_t> values);
  void put_u32(const std::string& name, std::uint32_t value);
  void put_u64(const std::string& name, std::span<const std::uint64_t> values);
  void put_text(const std::string& name, const std::string& text);

  bool contains(const std::string& name) const;
  const ContainerEntry& entry(const std::string& name) const;
  Tensor tensor(const std::string& name) const;
  std::vector<std::uint32_t> u32s(const std::string& name) const;
  std::uint32_t u32(const std::string& name) const;
  std::vector<std::uint64_t> u64s(const std::string& name) const;
  std::string text(const std::string& name) const;

  const std::vector<ContainerEntry>& entries() const noexcept { return entries_; }

  std::vector<std::uint8_t> encode() const;
  static TensorContainer decode(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static TensorContainer load(const std::filesystem::path& path);

 private:
  void add(ContainerEntry e);
  const ContainerEntry& typed(const std::string& name, DType dtype) const;
  std::vector<ContainerEntry> entries_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace uaix
