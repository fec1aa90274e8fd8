#include "sw/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "sw/errors.hpp"

namespace sw {
namespace {

template <typename U>
void put_le(std::vector<unsigned char>& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<unsigned char>((value >> (8 * b)) & 0xFFu));
}

template <typename U>
U get_le(std::span<const unsigned char> bytes, std::size_t pos) {
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) value |= static_cast<U>(bytes[pos + b]) << (8 * b);
  return value;
}

void need(std::span<const unsigned char> bytes, std::size_t pos, std::size_t count, const char* what) {
  if (pos > bytes.size() || bytes.size() - pos < count) {
    throw FormatError(std::string("truncated tensor: expected ") + what, bytes.size());
  }
}

}  // namespace

std::size_t TensorRecord::numel() const noexcept {
  std::size_t n = 1;
  for (const auto d : dims) n *= d;
  return n;
}

void append_tensor(std::vector<unsigned char>& out, const TensorRecord& record) {
  if (record.values.size() != record.numel()) {
    throw ShapeError("append_tensor: value count does not match dims");
  }
  out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
  out.insert(out.end(), kTensorMagicBytes - kTensorMagic.size(), 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(record.dims.size()));
  for (const auto d : record.dims) put_le<std::uint32_t>(out, d);
  out.push_back(static_cast<unsigned char>(record.dtype));
  if (record.dtype == DType::F32) {
    for (const double v : record.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else {
    for (const double v : record.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
}

TensorRecord parse_tensor(std::span<const unsigned char> bytes, std::size_t& pos) {
  need(bytes, pos, kTensorMagicBytes, "magic");
  for (std::size_t i = 0; i < kTensorMagicBytes; ++i) {
    const unsigned char expected = i < kTensorMagic.size() ? static_cast<unsigned char>(kTensorMagic[i]) : 0;
    if (bytes[pos + i] != expected) throw FormatError("bad tensor magic", pos + i);
  }
  pos += kTensorMagicBytes;

  need(bytes, pos, 4, "rank");
  const auto rank = get_le<std::uint32_t>(bytes, pos);
  if (rank > 16) throw FormatError("implausible tensor rank " + std::to_string(rank), pos);
  pos += 4;

  TensorRecord rec;
  need(bytes, pos, 4 * std::size_t{rank}, "dims");
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto d = get_le<std::uint32_t>(bytes, pos);
    if (d != 0 && count > std::numeric_limits<std::size_t>::max() / d) {
      throw FormatError("tensor element count overflows", pos);
    }
    count *= d;
    rec.dims.push_back(d);
    pos += 4;
  }

  need(bytes, pos, 1, "dtype");
  const unsigned char tag = bytes[pos];
  if (tag > 1) throw FormatError("unknown dtype tag " + std::to_string(tag), pos);
  rec.dtype = static_cast<DType>(tag);
  pos += 1;

  const std::size_t width = rec.dtype == DType::F32 ? 4 : 8;
  if (count > (bytes.size() - std::min(pos, bytes.size())) / width) {
    throw FormatError("truncated tensor: expected " + std::to_string(count) + " scalars", bytes.size());
  }
  rec.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (rec.dtype == DType::F32) {
      rec.values[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
    } else {
      rec.values[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
    }
    pos += width;
  }
  return rec;
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FileError("write failed for " + path.string());
}

void save_tensor_file(const std::filesystem::path& path, const TensorRecord& record) {
  std::vector<unsigned char> bytes;
  append_tensor(bytes, record);
  write_file_bytes(path, bytes);
}

TensorRecord load_tensor_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::size_t pos = 0;
  TensorRecord rec = parse_tensor(bytes, pos);
  if (pos != bytes.size()) throw FormatError("trailing bytes after tensor", pos);
  return rec;
}

template <typename T>
TensorRecord to_record(const Tensor4<T>& x, DType dtype) {
  const Shape4& s = x.shape();
  TensorRecord rec;
  rec.dims = {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c), static_cast<std::uint32_t>(s.h),
              static_cast<std::uint32_t>(s.w)};
  rec.dtype = dtype;
  rec.values.assign(x.data().begin(), x.data().end());
  return rec;
}

template <typename T>
Tensor4<T> to_tensor4(const TensorRecord& record) {
  if (record.dims.size() != 4) {
    throw ShapeError("expected a rank-4 (N,C,H,W) tensor, got rank " + std::to_string(record.dims.size()));
  }
  Shape4 s{record.dims[0], record.dims[1], record.dims[2], record.dims[3]};
  std::vector<T> data(record.values.begin(), record.values.end());
  return Tensor4<T>::from_data(s, std::move(data));
}

template TensorRecord to_record(const Tensor4<float>&, DType);
template TensorRecord to_record(const Tensor4<double>&, DType);
template Tensor4<float> to_tensor4(const TensorRecord&);
template Tensor4<double> to_tensor4(const TensorRecord&);

}  // namespace sw
