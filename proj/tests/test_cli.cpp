#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = VMPLANE_CLI;
const fs::path kGolden = VMPLANE_GOLDEN_DIR;
const fs::path kData = fs::path(VMPLANE_GOLDEN_DIR).parent_path() / "data";

struct Run {
  int code = -1;
  std::string out;
};

// stdout only; stderr goes to a side file so the JSON stays parseable.
Run run(const std::string& args, std::string* err = nullptr) {
  const fs::path err_file = fs::temp_directory_path() / "vmplane_cli_stderr.txt";
  const std::string cmd = kCli + " " + args + " 2>" + err_file.string();
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (err) {
    std::ifstream in(err_file);
    err->assign(std::istreambuf_iterator<char>(in), {});
  }
  return r;
}

json golden(const std::string& name) {
  std::ifstream in(kGolden / name);
  return json::parse(in);
}

void expect_close(const json& want, const json& got, const std::string& path = "$") {
  if (want.is_number() && got.is_number()) {
    const double a = want.get<double>(), b = got.get<double>();
    EXPECT_LE(std::abs(a - b), 1e-6 * std::max(std::abs(a), std::abs(b)) + 1e-9) << path << ": " << a << " vs " << b;
    return;
  }
  ASSERT_EQ(want.type(), got.type()) << path;
  if (want.is_object()) {
    for (const auto& [k, v] : want.items()) {
      ASSERT_TRUE(got.contains(k)) << path << "." << k;
      expect_close(v, got[k], path + "." + k);
    }
  } else if (want.is_array()) {
    ASSERT_EQ(want.size(), got.size()) << path;
    for (std::size_t i = 0; i < want.size(); ++i) expect_close(want[i], got[i], path + "[" + std::to_string(i) + "]");
  } else {
    EXPECT_EQ(want, got) << path;
  }
}

std::string data(const char* f) { return (kData / f).string(); }

}  // namespace

TEST(Cli, ConeAndRadiiGolden) {
  const auto c3 = (fs::temp_directory_path() / "vmplane_cli_cone03.json").string();
  auto r = run("cone --slope 0.3 --out " + c3);
  ASSERT_EQ(r.code, 0);
  expect_close(golden("cone_0.3.json"), json::parse(r.out));
  r = run("radii --profile " + c3);
  ASSERT_EQ(r.code, 0);
  expect_close(golden("radii_cone_0.3.json"), json::parse(r.out));
}

TEST(Cli, HalfSlopeConeHasInfiniteBall) {
  const auto c5 = (fs::temp_directory_path() / "vmplane_cli_cone05.json").string();
  ASSERT_EQ(run("cone --slope 0.5 --out " + c5).code, 0);
  const auto r = run("radii --profile " + c5);
  ASSERT_EQ(r.code, 0);
  expect_close(golden("radii_cone_0.5.json"), json::parse(r.out));
}

TEST(Cli, UnsmoothedFamilyGolden) {
  auto r = run("radii --spec " + data("ku0_spec.json") + " --rmax 200");
  ASSERT_EQ(r.code, 0);
  expect_close(golden("radii_ku0.json"), json::parse(r.out));
  r = run("turn-angle --spec " + data("ku0_spec.json") + " --rmax 200 --r 3 --kappa 1.5707963267948966");
  ASSERT_EQ(r.code, 0);
  expect_close(golden("turn_angle_ku0_r3.json"), json::parse(r.out));
}

TEST(Cli, ExitCodes) {
  std::string err;
  const auto bad = fs::temp_directory_path() / "vmplane_cli_bad.json";
  std::ofstream(bad) << "{\"kind\": ";
  EXPECT_EQ(run("plane build --spec " + bad.string() + " --rmax 5", &err).code, 2);
  EXPECT_EQ(json::parse(err)["error"], "input_error");
  EXPECT_EQ(run("turn-angle --r 1").code, 2);
  EXPECT_EQ(run("bogus").code, 2);

  const auto r = run("plane build --spec " + data("sphere_spec.json") + " --rmax 5", &err);
  EXPECT_EQ(r.code, 3);
  const auto e = json::parse(err);
  EXPECT_EQ(e["error"], "star_violation");
  EXPECT_NEAR(e["first_zero"].get<double>(), M_PI, 1e-8);

  // The pole boundary of this plane sits exactly at r = e - 1, where the limit slope vanishes.
  EXPECT_EQ(run("classify --spec " + data("ku0_spec.json") + " --rmax 200 --r 1.718281828459045", &err).code, 5);
  EXPECT_EQ(json::parse(err)["error"], "undetermined");
}
