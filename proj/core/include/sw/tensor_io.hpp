#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "sw/tensor.hpp"

namespace sw {

// Binary tensor file layout (all integers little-endian):
//   16 bytes  magic "SWTENSR1" followed by 8 NUL bytes
//   u32       rank
//   u32[rank] dims
//   u8        dtype (0 = f32, 1 = f64)
//   ...       prod(dims) little-endian scalars

inline constexpr std::string_view kTensorMagic = "SWTENSR1";
inline constexpr std::size_t kTensorMagicBytes = 16;

enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

/// In-memory form of one tensor file. Values are held as double regardless of
/// the on-disk dtype; f32 values survive the round trip exactly.
struct TensorRecord {
  std::vector<std::uint32_t> dims;
  DType dtype = DType::F64;
  std::vector<double> values;

  std::size_t numel() const noexcept;
};

void append_tensor(std::vector<unsigned char>& out, const TensorRecord& record);

/// Parses one record starting at `pos` and advances it. Throws FormatError
/// carrying the absolute byte offset of the problem.
TensorRecord parse_tensor(std::span<const unsigned char> bytes, std::size_t& pos);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

void save_tensor_file(const std::filesystem::path& path, const TensorRecord& record);
TensorRecord load_tensor_file(const std::filesystem::path& path);

template <typename T>
TensorRecord to_record(const Tensor4<T>& x, DType dtype);

/// Requires a rank-4 record (ShapeError otherwise).
template <typename T>
Tensor4<T> to_tensor4(const TensorRecord& record);

}  // namespace sw
