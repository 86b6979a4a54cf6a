#include <random>

#include "doctest.h"
#include "orr/oracle.hpp"
#include "support.hpp"

using namespace orr;
using namespace testing_support;

TEST_CASE("oracle_report on a hand-checked instance") {
  PointSet ps{Point{{1, 1, 1}, 0}, Point{{2, 3, 5}, 1}, Point{{4, 4, 4}, 2}};
  QueryBox q{AxisBound::closed(1, 4), AxisBound::closed(1, 3), AxisBound::closed(1, 5)};
  CHECK(ids_of(oracle_report(ps, q)) == std::vector<PointId>{0, 1});
  CHECK(oracle_count(ps, q) == 2);
  QueryBox all{AxisBound::closed(1, 5), AxisBound::closed(1, 5), AxisBound::closed(1, 5)};
  CHECK(oracle_count(ps, all) == 3);
  CHECK(oracle_report(PointSet{}, q).empty());
  QueryBox two{AxisBound::closed(2, 2), AxisBound::closed(2, 2), AxisBound::closed(2, 2)};
  CHECK(oracle_count(PointSet{Point{1, 1, 1}}, two) == 0);
}

TEST_CASE("oracle_dominators on the diagonal") {
  PointSet ps;
  for (Coord i = 1; i <= 10; ++i) ps.push_back(Point{{i, i, i}, static_cast<PointId>(i)});
  CHECK(ids_of(oracle_dominators(ps, Point{9, 9, 9})) == std::vector<PointId>{9, 10});
  CHECK(oracle_dominators(ps, Point{11, 11, 11}).empty());
  CHECK(oracle_dominators(ps, Point{2, 2, 2}, {-1, -1, -1}).size() == 2);
}

TEST_CASE("dominators agree with a From/UpTo report") {
  std::mt19937_64 rng(4);
  PointSet ps = random_points(rng, 200, 3, 50);
  for (int k = 0; k < 100; ++k) {
    Point q = random_points(rng, 1, 3, 50)[0];
    Orientation o{k % 2 ? 1 : -1, k % 3 ? 1 : -1, 1};
    std::vector<AxisBound> b;
    for (int a = 0; a < 3; ++a) b.push_back(o[a] > 0 ? AxisBound::from(q[a]) : AxisBound::up_to(q[a]));
    CHECK(ids_of(oracle_dominators(ps, q, o)) == oracle_ids(ps, QueryBox(b)));
  }
}
