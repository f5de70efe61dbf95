#include "fairrec/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "fairrec/error.hpp"
#include "fairrec/rng.hpp"
#include "fairrec/worlds.hpp"

namespace fairrec {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fairrec_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

TEST(FormatDouble, RoundTripsExactly) {
  CounterRng rng(21, 0);
  for (int i = 0; i < 2000; ++i) {
    const double v = (rng.Uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.Below(20)) - 10);
    EXPECT_EQ(ParseDouble(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(-2.0), "-2");
}

TEST(ParseDouble, RejectsGarbage) {
  EXPECT_EQ(CodeOf([] { ParseDouble("1.5x"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseDouble(""); }), ErrorCode::kParseError);
}

TEST(Split, CsvAndWhitespace) {
  EXPECT_EQ(SplitCsvLine("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(SplitWhitespace("  x \t y  z "), (std::vector<std::string>{"x", "y", "z"}));
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { ReadFile("/nonexistent/fairrec/file.txt"); }), ErrorCode::kIoError);
}

class ScmText : public ::testing::TestWithParam<World> {};

TEST_P(ScmText, RoundTrip) {
  const Scm scm = BuildWorld(GetParam());
  const Scm back = ParseScm(SerializeScm(scm));
  EXPECT_TRUE(back == scm);
  EXPECT_EQ(SerializeScm(back), SerializeScm(scm));
}

INSTANTIATE_TEST_SUITE_P(Worlds, ScmText,
                         ::testing::Values(World::kImf, World::kCauLin, World::kCauAnm, World::kProp1Bernoulli,
                                           World::kVarianceExample),
                         [](const auto& info) {
                           std::string n(WorldName(info.param));
                           for (char& c : n) if (c == '-') c = '_';
                           return n;
                         });

TEST(ScmText, SubsidisedWorldRoundTrips) {
  const Scm scm = ApplySubsidy(BuildWorld(World::kVarianceExample), {0.5, -0.8, 1.2});
  EXPECT_TRUE(ParseScm(SerializeScm(scm)) == scm);
}

TEST(ScmText, SaveAndLoad) {
  const fs::path dir = TempDir("scm");
  const Scm scm = BuildWorld(World::kCauAnm);
  SaveScm(scm, dir / "m.txt");
  EXPECT_TRUE(LoadScm(dir / "m.txt") == scm);
}

TEST(ScmText, Errors) {
  EXPECT_EQ(CodeOf([] { ParseScm("scm 1\nvariable a bogus\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseScm("scm 1\nfrobnicate\n"); }), ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([] { ParseScm("scm 1\nvariable a protected\nexogenous u_a bernoulli\n"); }),
            ErrorCode::kParseError);
}

TEST(Dataset, RoundTripWithSidecars) {
  const fs::path dir = TempDir("data");
  const Scm scm = BuildWorld(World::kCauLin);
  const auto rows = GenerateLabels(scm, SampleInstances(scm, 50, 3), {}, 4);
  WriteDataset(dir / "d.csv", scm, rows);
  EXPECT_TRUE(fs::exists(dir / "d.csv.schema"));
  EXPECT_TRUE(fs::exists(dir / "d.csv.exogenous.csv"));
  EXPECT_EQ(ReadFile(dir / "d.csv").substr(0, 12), "a,x1,x2,x3,y");
  EXPECT_EQ(ReadDataset(dir / "d.csv", scm), rows);
}

TEST(Dataset, NoExogenousSidecarWithoutNoise) {
  const fs::path dir = TempDir("plain");
  const Scm scm = BuildWorld(World::kImf);
  auto rows = SampleInstances(scm, 5, 1);
  for (auto& r : rows) r.exogenous.reset();
  WriteDataset(dir / "d.csv", scm, rows);
  EXPECT_FALSE(fs::exists(dir / "d.csv.exogenous.csv"));
  EXPECT_EQ(ReadDataset(dir / "d.csv", scm), rows);
}

TEST(Dataset, MissingColumn) {
  const fs::path dir = TempDir("missing");
  WriteFile(dir / "d.csv", "a,x1,x2\n1,0,0\n");
  EXPECT_EQ(CodeOf([&] { ReadDataset(dir / "d.csv", BuildWorld(World::kImf)); }), ErrorCode::kMissingVariable);
}

}  // namespace
}  // namespace fairrec
