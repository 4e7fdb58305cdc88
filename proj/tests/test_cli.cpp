#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fpx/fpx.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fpx_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  /// Runs the binary with args; returns its exit status, stdout in `out`.
  int run(const std::string& args, std::string* out = nullptr) const {
    const std::string so = path("stdout.txt"), se = path("stderr.txt");
    const std::string cmd = std::string(FPX_CLI_PATH) + " " + args + " > " + so + " 2> " + se;
    const int st = std::system(cmd.c_str());
    if (out) *out = fpx::detail::slurp(so);
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }

  static std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
      if (!l.empty()) v.push_back(l);
    return v;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitNonzero) {
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("frobnicate"), 0);
  EXPECT_NE(run("find"), 0);
  EXPECT_NE(run("find --mesh refined-box --bogus 1"), 0);
  EXPECT_NE(run("find --mesh refined-box --ranks 0"), 0);
  EXPECT_NE(run("find --mesh refined-box --npts 0"), 0);
  EXPECT_NE(run("find --mesh refined-box --points /nonexistent.csv"), 0);
  EXPECT_NE(run("demo nosuchdemo"), 0);
  EXPECT_NE(run("setup --mesh refined-box,n=1"), 0);  // no --out
  EXPECT_NE(run("find --mesh refined-box,order=99 --npts 5"), 0);
  EXPECT_NE(run("find --mesh " + path("missing.mesh") + " --npts 5"), 0);
  EXPECT_NE(run("particles --field wavefront --npts 10 --steps 1"), 0);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, OutOfDomainPointsAreNotFound) {
  fpx::detail::spit(path("pts.csv"), "x,y,z\n5,5,5\n-3,0.5,0.5\n0.5,0.5,9\n");
  std::string out;
  ASSERT_EQ(run("find --mesh refined-box,n=2 --ranks 2 --points " + path("pts.csv"), &out), 0);
  const auto rows = lines(out);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i)
    EXPECT_EQ(rows[i], std::to_string(i - 1) + ",NOT_FOUND,-1,-1,nan,nan,nan,nan");
}

TEST_F(Cli, BenchWritesOneRowPerCount) {
  std::string out;
  ASSERT_EQ(run("bench --mesh refined-box,n=2 --npts 100,300,1000", &out), 0);
  const auto rows = lines(out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].substr(0, 5), "npts,");
  EXPECT_EQ(rows[1].substr(0, 4), "100,");
  EXPECT_EQ(rows[3].substr(0, 5), "1000,");
}

TEST_F(Cli, FindThenInterpMatchesFindAndInterpolate) {
  const std::string mesh = "--mesh refined-box,dim=3,order=3,n=3,amp=0.08 --ranks 3";
  ASSERT_EQ(run("find " + mesh + " --npts 2000 --seed 11 --out " + path("recs.csv")), 0);
  ASSERT_EQ(run("interp " + mesh + " --field wavefront --order 5 --records " + path("recs.csv") + " --out " +
                path("a.csv")),
            0);
  ASSERT_EQ(run("interp " + mesh + " --field wavefront --order 5 --npts 2000 --seed 11 --out " + path("b.csv")), 0);
  const std::string a = fpx::detail::slurp(path("a.csv"));
  EXPECT_EQ(lines(a).size(), 2001u);
  EXPECT_EQ(a, fpx::detail::slurp(path("b.csv")));

  // The same points given as a file.
  const fpx::Mesh m = fpx::generate_mesh(fpx::parse_mesh_spec("refined-box,dim=3,order=3,n=3,amp=0.08"));
  std::vector<fpx::Point> pts;
  for (const auto& s : fpx::sample_mesh_points(m, 2000, 11)) pts.push_back(s.x);
  fpx::detail::spit(path("pts.csv"), fpx::points_to_csv(pts, 3));
  ASSERT_EQ(run("interp " + mesh + " --field wavefront --order 5 --points " + path("pts.csv") + " --out " +
                path("c.csv")),
            0);
  EXPECT_EQ(a, fpx::detail::slurp(path("c.csv")));

  // Records from a different rank count are refused.
  EXPECT_NE(run("interp --mesh refined-box,dim=3,order=3,n=3,amp=0.08 --ranks 1 --records " + path("recs.csv")), 0);
}

TEST_F(Cli, SetupCacheGivesTheSameRecords) {
  const std::string mesh = "--mesh refined-box,dim=2,order=4,n=5 --ranks 2";
  ASSERT_EQ(run("setup " + mesh + " --out " + path("setup.bin")), 0);
  std::string with, without;
  ASSERT_EQ(run("find " + mesh + " --npts 500 --cache " + path("setup.bin"), &with), 0);
  ASSERT_EQ(run("find " + mesh + " --npts 500", &without), 0);
  EXPECT_EQ(with, without);
  EXPECT_NE(run("find --mesh refined-box,dim=2,order=4,n=5 --ranks 4 --npts 5 --cache " + path("setup.bin")), 0);
  EXPECT_NE(run("find --mesh refined-box,dim=2,order=4,n=6 --ranks 2 --npts 5 --cache " + path("setup.bin")), 0);
}

TEST_F(Cli, MeshFileInput) {
  const fpx::Mesh m = fpx::generate_mesh(fpx::parse_mesh_spec("refined-box,dim=2,order=2,n=3"));
  fpx::write_mesh_file(path("box.mesh"), m, true);
  std::string a, b;
  ASSERT_EQ(run("find --mesh " + path("box.mesh") + " --npts 50", &a), 0);
  ASSERT_EQ(run("find --mesh refined-box,dim=2,order=2,n=3 --npts 50", &b), 0);
  EXPECT_EQ(a, b);
}

TEST_F(Cli, ParticlesAndDemosRun) {
  std::string out;
  ASSERT_EQ(run("particles --npts 300 --steps 20 --ranks 2 --trajectory " + path("traj.csv"), &out), 0);
  auto rows = lines(out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].substr(0, 13), "300,20,2,300,");  // particles, steps, ranks, final
  EXPECT_EQ(lines(fpx::detail::slurp(path("traj.csv"))).size(), 301u);

  ASSERT_EQ(run("demo surface --levels 1 --npts 10", &out), 0);
  EXPECT_EQ(lines(out).size(), 3u);
  ASSERT_EQ(run("demo spiral --npts 1000", &out), 0);
  rows = lines(out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NE(rows[1].find(",1.000000,"), std::string::npos);  // all converged
  ASSERT_EQ(run("demo triplepoint --npts 1000 --ranks 2", &out), 0);
  EXPECT_EQ(lines(out).size(), 2u);
}
