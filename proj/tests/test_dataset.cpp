#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "wfl/dataset.hpp"

using namespace wfl;

namespace {

Dataset sample_dataset(std::size_t n) {
  const Propagation p(fixtures::small_room(4), fixtures::small_band(), 2);
  std::mt19937_64 rng(4);
  std::vector<Vec2> locs;
  for (std::size_t i = 0; i < n; ++i) locs.push_back(sample_location(p.scene(), rng));
  return build_dataset(p, locs);
}

}  // namespace

TEST(Dataset, BuildMatchesPropagation) {
  const Propagation p(fixtures::small_room(4), fixtures::small_band(), 2);
  const Dataset ds = build_dataset(p, {{0.1, 0.2}, {-1, 1}});
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.antennas, 4u);
  EXPECT_EQ(ds.freqs, 8u);
  const auto h = p.channel({-1, 1});
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(ds.channels[1].data()[i], h.data()[i]);
}

TEST(Dataset, BinaryRoundTripIsBitExact) {
  const Dataset ds = sample_dataset(25);
  std::stringstream ss;
  io::write_dataset(ss, ds);
  const Dataset back = io::read_dataset(ss);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.antennas, ds.antennas);
  EXPECT_EQ(back.freqs, ds.freqs);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    EXPECT_EQ(back.locations[r].x, ds.locations[r].x);
    EXPECT_EQ(back.locations[r].y, ds.locations[r].y);
    for (std::size_t i = 0; i < ds.channels[r].size(); ++i)
      EXPECT_EQ(back.channels[r].data()[i], ds.channels[r].data()[i]);
  }
}

TEST(Dataset, FileRoundTripAndHeaderLayout) {
  const Dataset ds = sample_dataset(3);
  const auto path = (std::filesystem::temp_directory_path() / "wfl_test_ds.bin").string();
  io::save_dataset(path, ds);
  EXPECT_EQ(std::filesystem::file_size(path), 20u + 3u * (16u + 4u * 8u * 16u));
  const Dataset back = io::load_dataset(path);
  EXPECT_EQ(back.size(), 3u);
  std::filesystem::remove(path);
}

TEST(Dataset, RejectsCorruptInput) {
  std::stringstream bad("NOPE");
  EXPECT_THROW(io::read_dataset(bad), FormatError);
  const Dataset ds = sample_dataset(2);
  std::stringstream ss;
  io::write_dataset(ss, ds);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 5);
  std::stringstream trunc(bytes);
  EXPECT_THROW(io::read_dataset(trunc), FormatError);
  EXPECT_THROW(io::load_dataset("/nonexistent/dir/x.bin"), FormatError);
}

TEST(Dataset, StreamingWriterChecksShapeAndCount) {
  std::stringstream ss;
  io::DatasetWriter w(ss, 1, 2, 2);
  EXPECT_THROW(w.write({0, 0}, ChannelMatrix(3, 2)), DimensionMismatch);
  w.write({0, 0}, ChannelMatrix(2, 2));
  EXPECT_EQ(w.remaining(), 0u);
  EXPECT_THROW(w.write({0, 0}, ChannelMatrix(2, 2)), FormatError);
}

TEST(Dataset, PushBackAndSubset) {
  Dataset ds;
  ds.push_back({1, 2}, ChannelMatrix(2, 3));
  EXPECT_THROW(ds.push_back({1, 2}, ChannelMatrix(3, 3)), DimensionMismatch);
  ds.push_back({5, 6}, ChannelMatrix(2, 3));
  const Dataset s = ds.subset({1});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.locations[0].x, 5.0);
  EXPECT_THROW(ds.subset({7}), std::out_of_range);
}

TEST(Dataset, CsvHasOneRowPerRecord) {
  const Dataset ds = sample_dataset(4);
  std::stringstream ss;
  io::write_dataset_csv(ss, ds);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("x,y,re_0_0,im_0_0", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')), 1u + 2u * 32u);
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
