#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sw/errors.hpp"
#include "sw/tensor.hpp"

namespace {

using sw::Shape4;
using sw::Tensor4;

TEST(Tensor4, LayoutIsWFastest) {
  Tensor4<double> t(Shape4{2, 3, 4, 5});
  EXPECT_EQ(t.numel(), 120u);
  EXPECT_EQ(t.offset(0, 0, 0, 1), 1u);
  EXPECT_EQ(t.offset(0, 0, 1, 0), 5u);
  EXPECT_EQ(t.offset(0, 1, 0, 0), 20u);
  EXPECT_EQ(t.offset(1, 0, 0, 0), 60u);
}

TEST(Tensor4, FromDataValidates) {
  EXPECT_THROW(Tensor4<double>::from_data(Shape4{1, 1, 2, 2}, {1, 2, 3}), sw::ShapeError);
  EXPECT_THROW(Tensor4<double>::from_data(Shape4{1, 1, 1, 2}, {1, std::numeric_limits<double>::infinity()}),
               sw::InvalidInput);
  const auto t = Tensor4<double>::from_data(Shape4{1, 1, 1, 2}, {1, 2});
  EXPECT_DOUBLE_EQ(t.at(0, 0, 0, 1), 2.0);
}

TEST(Tensor4, SampleBlockRoundTrip) {
  const auto x = sw::oracle::random_tensor(Shape4{3, 6, 2, 2}, 1);
  const auto block = x.sample_block(1, 2, 3);
  ASSERT_EQ(block.rows(), 3u);
  ASSERT_EQ(block.cols(), 4u);
  EXPECT_DOUBLE_EQ(block(1, 2), x.at(1, 3, 1, 0));
  Tensor4<double> y(x.shape());
  for (std::size_t n = 0; n < 3; ++n) {
    y.set_sample_block(n, 0, x.sample_block(n, 0, 3));
    y.set_sample_block(n, 3, x.sample_block(n, 3, 3));
  }
  EXPECT_EQ(x, y);
}

TEST(SplitGroups, CountsAndRoundTrip) {
  const auto x = sw::oracle::random_tensor(Shape4{2, 8, 3, 3}, 2);
  const auto four = sw::split_groups(x, 4);
  ASSERT_EQ(four.size(), 2u);
  EXPECT_EQ(four[1].shape().c, 4u);
  EXPECT_DOUBLE_EQ(four[1].at(1, 0, 2, 1), x.at(1, 4, 2, 1));
  EXPECT_EQ(sw::split_groups(x, 8).size(), 1u);
  EXPECT_EQ(sw::merge_groups(four), x);
}

TEST(SplitGroups, RejectsBadGroupSize) {
  const Tensor4<double> x(Shape4{1, 8, 1, 1});
  EXPECT_THROW(sw::split_groups(x, 16), sw::ConfigError);
  EXPECT_THROW(sw::split_groups(x, 3), sw::ConfigError);
  EXPECT_THROW(sw::split_groups(x, 0), sw::ConfigError);
}

TEST(BatchMatrix, ConcatenatesSamples) {
  const auto x = sw::oracle::random_tensor(Shape4{2, 2, 2, 3}, 3);
  const auto m = sw::batch_matrix(x);
  ASSERT_EQ(m.rows(), 2u);
  ASSERT_EQ(m.cols(), 12u);
  EXPECT_DOUBLE_EQ(m(1, 6 + 4), x.at(1, 1, 1, 1));
}

}  // namespace
