#include <random>

#include "doctest.h"
#include "orr/geometry.hpp"
#include "orr/rank_mapper.hpp"
#include "support.hpp"

using namespace orr;
using namespace testing_support;

TEST_CASE("contains checks each axis bound") {
  QueryBox q{AxisBound::closed(1, 4), AxisBound::up_to(3), AxisBound::up_to(5)};
  CHECK(contains(q, Point{2, 3, 5}));
  CHECK_FALSE(contains(q, Point{5, 1, 1}));
  QueryBox dom{AxisBound::from(2), AxisBound::from(2), AxisBound::from(2)};
  CHECK(contains(dom, Point{2, 2, 2}));
  CHECK_THROWS_AS(contains(q, Point{1, 1}), DimensionMismatch);
}

TEST_CASE("sidedness follows the bound kinds") {
  QueryBox q{AxisBound::closed(1, 4), AxisBound::up_to(3), AxisBound::from(5)};
  CHECK(q.sidedness() == std::vector<int>{2, 1, 1});
  CHECK_THROWS(AxisBound::closed(5, 4));
}

TEST_CASE("rank_reduce matches the counting definition") {
  PointSet ps{Point{{5, 9, 2}, 0}, Point{{7, 1, 4}, 1}, Point{{7, 3, 3}, 2}};
  auto [m, r] = rank_reduce(ps);
  CHECK(r[0] == Point{{1, 3, 1}, 0});
  CHECK(r[1] == Point{{2, 1, 3}, 1});
  CHECK(r[2] == Point{{2, 2, 2}, 2});
  CHECK(unmap(r[0], *m) == ps[0]);

  auto [m1, r1] = rank_reduce(PointSet{Point{1, 1, 1}});
  CHECK(r1[0] == Point{1, 1, 1});

  // idempotent on rank space
  auto [m2, r2] = rank_reduce(r);
  CHECK(r2 == r);
  CHECK_THROWS(rank_reduce(PointSet{}));
}

TEST_CASE("query_to_rank_space uses succ for lower and pred for upper endpoints") {
  RankMapper m({{5, 7}});
  auto q = query_to_rank_space(QueryBox{AxisBound::closed(4, 6)}, m);
  REQUIRE(q);
  CHECK((*q)[0] == AxisBound::closed(1, 1));
  CHECK_FALSE(query_to_rank_space(QueryBox{AxisBound::closed(6, 6)}, m));
  auto u = query_to_rank_space(QueryBox{AxisBound::up_to(100)}, m);
  REQUIRE(u);
  CHECK((*u)[0] == AxisBound::up_to(2));
  CHECK_FALSE(query_to_rank_space(QueryBox{AxisBound::up_to(4)}, m));
  CHECK_FALSE(query_to_rank_space(QueryBox{AxisBound::from(8)}, m));
}

TEST_CASE("unmap through identity and nested mappers") {
  auto id = RankMapper::identity(3, 10);
  CHECK(unmap(Point{{3, 4, 5}, 7}, id) == Point{{3, 4, 5}, 7});
  CHECK_THROWS_AS(unmap(Point{11, 1, 1}, id), std::out_of_range);

  std::mt19937_64 rng(5);
  PointSet ps = random_points(rng, 40, 3, 1000);
  auto [outer, r1] = rank_reduce(ps);
  PointSet half(r1.begin(), r1.begin() + 20);
  auto [inner, r2] = rank_reduce(half, outer);
  CHECK(inner->depth() == 2);
  for (const auto& p : r2) CHECK(unmap(p, *inner) == ps[p.id]);
  CHECK_THROWS_AS(unmap(Point{{999, 1, 1}, 0}, *inner), std::out_of_range);
}

TEST_CASE("rank space preserves every query answer on small sets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    PointSet ps = random_points(rng, 1 + trial % 64, 3, 16);
    auto [m, r] = rank_reduce(ps);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(unmap(r[i], *m) == ps[i]);
      for (std::size_t j = 0; j < ps.size(); ++j)
        for (std::size_t a = 0; a < 3; ++a) {
          if (ps[i][a] < ps[j][a]) CHECK(r[i][a] < r[j][a]);
          if (ps[i][a] == ps[j][a]) CHECK(r[i][a] == r[j][a]);
        }
    }
    for (int k = 0; k < 200; ++k) {
      std::vector<AxisBound> b;
      for (int a = 0; a < 3; ++a) b.push_back(random_bound(rng, 16, k % 3));
      QueryBox q(b);
      auto rq = query_to_rank_space(q, *m);
      std::vector<PointId> got;
      if (rq)
        for (const auto& p : r)
          if (contains(*rq, p)) got.push_back(p.id);
      CHECK(sorted(got) == oracle_ids(ps, q));
    }
  }
}
