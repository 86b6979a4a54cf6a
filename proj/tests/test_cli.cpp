#include <sstream>

#include "cli_io.hpp"
#include "doctest.h"

using namespace orr;
using namespace orr::cli;

TEST_CASE("query tokens") {
  CHECK(parse_bound("3:9") == AxisBound::closed(3, 9));
  CHECK(parse_bound("*:9") == AxisBound::up_to(9));
  CHECK(parse_bound("3:*") == AxisBound::from(3));
  CHECK_THROWS_AS(parse_bound("*:*"), std::invalid_argument);
  CHECK_THROWS_AS(parse_bound("9:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_bound("0:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_bound("3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_bound("a:3"), std::invalid_argument);
  for (const char* t : {"3:9", "*:9", "3:*"}) CHECK(format_bound(parse_bound(t)) == t);
}

TEST_CASE("points file with and without header") {
  std::istringstream a("# d=3 U=8\n1 2 3\n\n4 5 6\n");
  const PointsFile f = read_points(a, "a");
  CHECK(f.d == 3);
  CHECK(f.universe == 8);
  REQUIRE(f.points.size() == 2);
  CHECK(f.points[0].id == 2);  // line numbers
  CHECK(f.points[1].id == 4);
  CHECK(f.points[1][2] == 6);

  std::istringstream b("7 1\n2 9\n");
  const PointsFile g = read_points(b, "b");
  CHECK(g.d == 2);
  CHECK(g.universe == 9);
}

TEST_CASE("points file errors carry line numbers") {
  std::istringstream a("# d=3 U=8\n1 2 3\n1 2\n");
  try {
    read_points(a, "a");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream b("# d=3 U=8\n1 2 9\n");
  CHECK_THROWS_AS(read_points(b, "b"), ParseError);
  std::istringstream c("1 x 3\n");
  CHECK_THROWS_AS(read_points(c, "c"), ParseError);
  std::istringstream e("0 1 1\n");
  CHECK_THROWS_AS(read_points(e, "e"), ParseError);
}

TEST_CASE("queries file") {
  std::istringstream a("1:2 *:5 4:*\n\n# note\n1:1 1:1 1:1\n");
  const auto qs = read_queries(a, "q", 3);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].line == 1);
  CHECK(qs[1].line == 4);
  CHECK(qs[0].box.sidedness() == std::vector<int>{2, 1, 1});
  std::istringstream b("1:2 *:*  3:4\n");
  CHECK_THROWS_AS(read_queries(b, "q", 3), ParseError);
  std::istringstream c("1:2 3:4\n");
  CHECK_THROWS_AS(read_queries(c, "q", 3), ParseError);
  std::istringstream empty("");
  CHECK(read_queries(empty, "q", 3).empty());
}

TEST_CASE("generation is deterministic and in range") {
  const PointSet a = generate_points(1, 4, 8, 3, Dist::Uniform);
  const PointSet b = generate_points(1, 4, 8, 3, Dist::Uniform);
  REQUIRE(a.size() == 4);
  CHECK(a == b);
  for (const Point& p : a)
    for (int k = 0; k < 3; ++k) CHECK((p[k] >= 1 && p[k] <= 8));

  const PointSet diag = generate_points(1, 10, 100, 3, Dist::Diagonal);
  for (std::size_t i = 0; i < diag.size(); ++i)
    for (int k = 0; k < 3; ++k) CHECK(diag[i][k] == (i + 1) * 10);

  GenInfo info;
  const PointSet cl = generate_points(9, 2000, 1u << 16, 3, Dist::Clustered, &info);
  REQUIRE(!info.centers.empty());
  for (const Point& p : cl) {
    bool near = false;
    for (const auto& c : info.centers) {
      bool all = true;
      for (int k = 0; k < 3; ++k) {
        const Coord lo = c[k] > info.radius ? c[k] - info.radius : 1;
        all = all && p[k] >= lo && p[k] <= c[k] + info.radius;
      }
      near = near || all;
    }
    CHECK(near);
  }

  std::ostringstream out;
  write_points(out, a, 3, 8);
  std::istringstream back(out.str());
  const PointsFile f = read_points(back, "round");
  REQUIRE(f.points.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (int k = 0; k < 3; ++k) CHECK(f.points[i][k] == a[i][k]);
}

TEST_CASE("stats record is key=value") {
  StatsRecord r;
  r.add("n", std::size_t{4}).add("structure", std::string("full3d")).add_ms("build_ms", 1.5);
  CHECK(r.line() == "n=4 structure=full3d build_ms=1.500");
  detail::QueryStats st;
  st.ladder_levels[2] = 3;
  StatsRecord s;
  s.add_stats(st);
  CHECK(s.line().find("ladder_levels=2:3") != std::string::npos);
}
