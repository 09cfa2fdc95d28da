#include <gtest/gtest.h>

#include <filesystem>
#include <regex>

#include "wfl/svg.hpp"

using namespace wfl;
namespace fs = std::filesystem;

namespace {

ErrorSummary summary(double q10, double q25, double med, double q75, double q90) {
  ErrorSummary s;
  s.q10 = q10;
  s.q25 = q25;
  s.median = med;
  s.q75 = q75;
  s.q90 = q90;
  s.max = q90;
  s.count = 10;
  return s;
}

/// y coordinates of the horizontal whisker caps (short lines of width bw/2 = 20).
std::vector<double> cap_heights(const std::string& svg) {
  const std::regex re(R"re(<line x1="([-0-9.]+)" y1="([-0-9.]+)" x2="([-0-9.]+)" y2="([-0-9.]+)")re");
  std::vector<double> ys;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    const double x1 = std::stod((*it)[1]), y1 = std::stod((*it)[2]);
    const double x2 = std::stod((*it)[3]), y2 = std::stod((*it)[4]);
    if (y1 == y2 && std::abs(x2 - x1 - 20) < 1e-9) ys.push_back(y1);
  }
  return ys;
}

}  // namespace

TEST(Boxplot, WhiskersAtOuterQuantiles) {
  const auto svg = svg::boxplot({{"a", summary(1e-4, 1e-3, 2e-3, 5e-3, 1e-2)}}, "t");
  EXPECT_NE(svg.find("data-q10=\"0.0001\""), std::string::npos);
  EXPECT_NE(svg.find("data-q90=\"0.01\""), std::string::npos);
  // Log axis: the caps sit where log10 q10 and log10 q90 map to.
  const auto caps = cap_heights(svg);
  ASSERT_EQ(caps.size(), 2u);
  const double top = 40, bottom = 360;  // decades 1e-4 .. 1e-2
  EXPECT_NEAR(caps[0], bottom, 0.01);
  EXPECT_NEAR(caps[1], top, 0.01);
}

TEST(Boxplot, ReferenceLineAtLambda0) {
  const auto svg = svg::boxplot({{"a", summary(1e-4, 1e-3, 2e-3, 5e-3, 1e-2)}}, "t", 0.0857);
  EXPECT_NE(svg.find("class=\"reference\" data-value=\"0.0857\""), std::string::npos);
  EXPECT_NE(svg.find("stroke=\"red\""), std::string::npos);
  EXPECT_EQ(svg::boxplot({{"a", summary(1, 1, 1, 1, 1)}}, "t").find("reference"), std::string::npos);
  EXPECT_THROW(svg::boxplot({}, "t"), InvalidArgument);
}

TEST(Boxplot, EscapesLabelsAndIsDeterministic) {
  const std::vector<svg::BoxGroup> g{{"a<b & c", summary(1e-3, 2e-3, 3e-3, 4e-3, 5e-3)}};
  const auto a = svg::boxplot(g, "x"), b = svg::boxplot(g, "x");
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("a&lt;b &amp; c"), std::string::npos);
  EXPECT_EQ(a.rfind("</svg>\n"), a.size() - 7);
}

TEST(Heatmap, ValidatesShape) {
  const Rect r{{0, 0}, {1, 1}};
  EXPECT_THROW(svg::heatmap({1, 2, 3}, 2, 2, r, "h"), InvalidArgument);
  const auto s = svg::heatmap({0, 1, 2, 3}, 2, 2, r, "h");
  EXPECT_GT(std::count(s.begin(), s.end(), '\n'), 4);
  EXPECT_THROW(svg::scatter({{0, 0}}, {}, r, "s"), InvalidArgument);
}

TEST(EmitFigures, EmptyResultWritesNothing) {
  const fs::path dir = fs::temp_directory_path() / "wfl_svg_empty";
  fs::remove_all(dir);
  fs::create_directories(dir);
  EXPECT_THROW(svg::emit_figures(ExperimentResult{}, {{-1, -1}, {1, 1}}, 0.0857, dir.string()), InvalidArgument);
  EXPECT_TRUE(fs::is_empty(dir));

  ExperimentResult r;
  r.rows.resize(2);
  r.rows[0].truth = {0, 0};
  r.rows[1].truth = {0.5, 0.5};
  r.rows[1].loc.estimate = {0.4, 0.5};
  r.summary = summary(0, 0, 0.05, 0.1, 0.1);
  r.grid_summary = r.summary;
  const auto files = svg::emit_figures(r, {{-1, -1}, {1, 1}}, 0.0857, dir.string());
  ASSERT_EQ(files.size(), 2u);
  for (const auto& f : files) EXPECT_GT(fs::file_size(f), 100u);
}
