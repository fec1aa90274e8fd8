#include <cstring>
#include <filesystem>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sw/errors.hpp"
#include "sw/tensor_io.hpp"

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("sw_io_" + name); }

TEST(TensorFormat, HeaderLayout) {
  sw::TensorRecord rec{{2, 3}, sw::DType::F32, {1, 2, 3, 4, 5, 6}};
  std::vector<unsigned char> bytes;
  sw::append_tensor(bytes, rec);
  ASSERT_EQ(bytes.size(), 16u + 4u + 8u + 1u + 24u);
  EXPECT_EQ(std::memcmp(bytes.data(), "SWTENSR1", 8), 0);
  for (int i = 8; i < 16; ++i) EXPECT_EQ(bytes[i], 0);
  EXPECT_EQ(bytes[16], 2);  // rank, little-endian
  EXPECT_EQ(bytes[20], 2);
  EXPECT_EQ(bytes[24], 3);
  EXPECT_EQ(bytes[28], 0);  // f32 tag
  float first = 0;
  std::memcpy(&first, bytes.data() + 29, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(TensorFormat, RoundTripBothDtypes) {
  const auto x = sw::oracle::random_tensor(sw::Shape4{2, 3, 4, 5}, 7);
  for (const auto dtype : {sw::DType::F32, sw::DType::F64}) {
    const auto path = temp_file(dtype == sw::DType::F32 ? "f32.bin" : "f64.bin");
    sw::save_tensor_file(path, sw::to_record(x, dtype));
    const auto back = sw::to_tensor4<double>(sw::load_tensor_file(path));
    EXPECT_EQ(back.shape(), x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const double expected = dtype == sw::DType::F32 ? static_cast<double>(static_cast<float>(x.data()[i]))
                                                      : x.data()[i];
      ASSERT_EQ(back.data()[i], expected);
    }
    fs::remove(path);
  }
}

TEST(TensorFormat, TruncationReportsOffset) {
  sw::TensorRecord rec{{4}, sw::DType::F64, {1, 2, 3, 4}};
  std::vector<unsigned char> bytes;
  sw::append_tensor(bytes, rec);
  for (const std::size_t cut : {std::size_t{5}, std::size_t{18}, std::size_t{22}, bytes.size() - 3}) {
    std::vector<unsigned char> shorter(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    std::size_t pos = 0;
    try {
      sw::parse_tensor(shorter, pos);
      FAIL() << "cut " << cut;
    } catch (const sw::FormatError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }
}

TEST(TensorFormat, BadMagicAndDtype) {
  sw::TensorRecord rec{{1}, sw::DType::F64, {1}};
  std::vector<unsigned char> bytes;
  sw::append_tensor(bytes, rec);
  auto bad_magic = bytes;
  bad_magic[3] = 'X';
  std::size_t pos = 0;
  try {
    sw::parse_tensor(bad_magic, pos);
    FAIL();
  } catch (const sw::FormatError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
  auto bad_dtype = bytes;
  bad_dtype[24] = 9;
  pos = 0;
  try {
    sw::parse_tensor(bad_dtype, pos);
    FAIL();
  } catch (const sw::FormatError& e) {
    EXPECT_EQ(e.offset(), 24u);
  }
}

TEST(TensorFormat, TrailingBytesRejected) {
  sw::TensorRecord rec{{1}, sw::DType::F64, {1}};
  std::vector<unsigned char> bytes;
  sw::append_tensor(bytes, rec);
  bytes.push_back(0);
  const auto path = temp_file("trailing.bin");
  sw::write_file_bytes(path, bytes);
  EXPECT_THROW(sw::load_tensor_file(path), sw::FormatError);
  fs::remove(path);
}

TEST(TensorFormat, MissingFileAndWrongRank) {
  EXPECT_THROW(sw::load_tensor_file(temp_file("does_not_exist.bin")), sw::FileError);
  sw::TensorRecord rec{{2, 2}, sw::DType::F64, {1, 2, 3, 4}};
  EXPECT_THROW(sw::to_tensor4<double>(rec), sw::ShapeError);
}

TEST(TensorFormat, NonFiniteValuesRejectedOnLoad) {
  sw::TensorRecord rec{{1, 1, 1, 2}, sw::DType::F64, {1, std::numeric_limits<double>::quiet_NaN()}};
  EXPECT_THROW(sw::to_tensor4<double>(rec), sw::InvalidInput);
}

}  // namespace
