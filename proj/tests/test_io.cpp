#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "vmplane/constructions.hpp"
#include "vmplane/io.hpp"

using namespace vmp;

TEST(SpecJson, RoundTripIsExact) {
  const std::vector<CurvatureSpec> specs = {
      CurvatureSpec::constant(-0.3),
      CurvatureSpec::ku_family(0.0123456789012345),
      CurvatureSpec::smoothed_ku(5.071634683758881e-06, 0.1),
      CurvatureSpec::spliced(CurvatureSpec::smoothed_ku(1e-3, 0.5), 3.0 * M_PI / 4, {5, 0.5}),
      CurvatureSpec::table({0, 0.1, 1.0 / 3}, {1, 0.5, 0.1}, Extrapolation::inverse_square)};
  for (const auto& s : specs) {
    const auto j = io::spec_to_json(s);
    const auto back = io::spec_from_json(io::json::parse(j.dump()));
    EXPECT_EQ(io::spec_to_json(back), j);
    for (double r : {0.0, 0.05, 0.7, 2.3, 40.0}) EXPECT_EQ(back(r), s(r)) << j.dump();
  }
}

TEST(SpecJson, Errors) {
  EXPECT_THROW(io::spec_from_json(io::json::parse(R"({"kind":"nope"})")), InputError);
  EXPECT_THROW(io::spec_from_json(io::json::parse(R"({"kind":"constant","params":{}})")), InputError);
  EXPECT_THROW(io::spec_from_json(io::json::parse("[1,2]")), InputError);
  EXPECT_THROW(io::spec_to_json(CurvatureSpec::expression([](double) { return 0.0; })), InputError);
}

TEST(ProfileCsv, TableRoundTrip) {
  const auto p = solve_jacobi(CurvatureSpec::ku_family(0), 10);
  std::stringstream ss;
  io::write_profile_csv(ss, p, 2001);
  const auto back = io::profile_from_csv(ss);
  EXPECT_EQ(back.spec().kind(), CurvatureSpec::Kind::table);
  for (double r : {0.5, 2.0, 9.0}) EXPECT_NEAR(back.m(r) / p.m(r), 1.0, 1e-6) << r;
}

TEST(ProfileCsv, BadInput) {
  std::stringstream a("r,m\n0,0\n");
  EXPECT_THROW(io::profile_from_csv(a), InputError);
  std::stringstream b("r,m,mp,K\n0,0,1,x\n");
  EXPECT_THROW(io::profile_from_csv(b), InputError);
}

TEST(Report, JsonAndSvg) {
  const auto p = solve_jacobi(CurvatureSpec::ku_family(0), 200);
  const auto rep = scan_sets(p, default_scan_grid(p, 16), {}, {false});
  const auto j = io::to_json(rep);
  EXPECT_EQ(j["samples"].size(), 16u);
  EXPECT_EQ(j["critical_intervals"].size(), 1u);
  const auto svg = io::turn_angle_svg(rep);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find(">pi<"), std::string::npos);
  EXPECT_EQ(io::number(kInf), "inf");
}
