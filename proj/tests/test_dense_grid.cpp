#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "orr/dense_grid.hpp"
#include "orr/oracle.hpp"
#include "support.hpp"

using namespace orr;
using namespace testing_support;

namespace {

std::vector<PointId> grid_ids(const DenseGrid& g, const QueryBox& q, DenseGridStats& st) {
  IdCollector c;
  g.report(q, c.sink(), st);
  return sorted(c.ids());
}

// Every box over [1,m]^d (closed bounds only; half-open ones are a subset).
template <class F>
void for_each_box(std::size_t d, Coord m, F&& f) {
  std::vector<Coord> lo(d, 1), hi(d, 1);
  while (true) {
    std::vector<AxisBound> b;
    for (std::size_t a = 0; a < d; ++a) b.push_back(AxisBound::closed(lo[a], hi[a]));
    f(QueryBox(b));
    std::size_t a = 0;
    for (; a < d; ++a) {
      if (hi[a] < m) {
        ++hi[a];
        break;
      }
      if (lo[a] < m) {
        ++lo[a];
        hi[a] = lo[a];
        break;
      }
      lo[a] = hi[a] = 1;
    }
    if (a == d) return;
  }
}

}  // namespace

TEST_CASE("dense grid parameters on [4]^2") {
  PointSet ps{Point{{1, 1}, 0}, Point{{2, 3}, 1}, Point{{4, 4}, 2}};
  DenseGrid g(ps, 2, 4, 0.5);
  CHECK(g.fanout(0) == 2);
  CHECK(g.height(0) == 2);
  DenseGridStats st;
  CHECK(grid_ids(g, QueryBox{AxisBound::closed(1, 2), AxisBound::closed(1, 3)}, st) ==
        std::vector<PointId>{0, 1});
  CHECK(grid_ids(g, QueryBox{AxisBound::closed(1, 4), AxisBound::closed(1, 4)}, st).size() == 3);
  CHECK_THROWS_AS(DenseGrid(PointSet{Point{5, 1}}, 2, 4), std::out_of_range);
  CHECK_THROWS_AS(DenseGrid(PointSet{Point{1, 1, 1}}, 2, 4), DimensionMismatch);
}

TEST_CASE("empty dense grid") {
  DenseGrid g(PointSet{}, 3, 8);
  DenseGridStats st;
  CHECK(grid_ids(g, QueryBox{AxisBound::closed(1, 8), AxisBound::up_to(8), AxisBound::from(1)}, st).empty());
}

TEST_CASE("dense grid is exhaustively exact for m <= 8") {
  std::mt19937_64 rng(21);
  for (Coord m : {1, 3, 5, 8}) {
    for (std::size_t d : {1, 2}) {
      for (std::size_t n : {0, 7, 32}) {
        PointSet ps = random_points(rng, n, d, m);
        for (double eps : {0.5, 1.0 / 3.0}) {
          DenseGrid g(ps, d, m, eps);
          DenseGridStats st;
          for_each_box(d, m, [&](const QueryBox& q) { REQUIRE(grid_ids(g, q, st) == oracle_ids(ps, q)); });
          for (std::size_t a = 0; a < d; ++a) CHECK(st.max_nodes_per_tree <= 2u * g.height(a) + 1);
        }
      }
    }
  }
}

TEST_CASE("dense grid on m=64, n=64 in 3D agrees with the oracle") {
  std::mt19937_64 rng(22);
  PointSet ps = random_points(rng, 64, 3, 64);
  DenseGrid g(ps, 3, 64, 0.5);
  CHECK(g.fanout(2) == 8);
  CHECK(g.height(2) == 2);
  DenseGridStats st;
  for (int k = 0; k < 500; ++k) {
    std::vector<AxisBound> b;
    for (int a = 0; a < 3; ++a) b.push_back(random_bound(rng, 64, k % 3));
    QueryBox q(b);
    REQUIRE(grid_ids(g, q, st) == oracle_ids(ps, q));
  }
  CHECK(st.max_nodes_per_tree <= 2u * 2 + 1);
}

TEST_CASE("dense grid ledger stays within c * m^(1+d*eps)") {
  std::mt19937_64 rng(23);
  for (Coord m : {16, 64, 256}) {
    PointSet ps = random_points(rng, m, 2, m);
    DenseGrid g(ps, 2, m, 0.5);
    SpaceLedger ledger;
    g.account(ledger, 0);
    const double bound = std::pow(static_cast<double>(m), 1.0 + 2 * 0.5);
    MESSAGE("m=" << m << " words=" << g.words() << " ratio=" << g.words() / bound);
    CHECK(g.words() <= 8.0 * bound);
    CHECK(ledger.violations() == 0);
  }
}

TEST_CASE("column minima on the hand example") {
  PointSet ps{Point{{1, 1, 2}, 0}, Point{{1, 1, 5}, 1}, Point{{2, 2, 3}, 2}};
  ColumnMinStructure c(ps, {2, 2}, 5);
  REQUIRE(c.minima().size() == 2);
  CHECK(c.minima()[0][2] == 2);
  CHECK(c.minima()[1][2] == 3);
  CHECK(c.minima()[1][0] == 2);

  IdCollector out;
  std::size_t touched = 0;
  c.report(QueryBox{AxisBound::closed(1, 1), AxisBound::closed(1, 2)}, 4, out.sink(), &touched);
  CHECK(out.ids() == std::vector<PointId>{0});
  CHECK(touched == 2);  // the walk stops at z=5

  IdCollector none;
  c.report(QueryBox{AxisBound::closed(1, 2), AxisBound::closed(1, 2)}, 1, none.sink(), &touched);
  CHECK(none.ids().empty());
  CHECK(touched == 0);

  IdCollector all;
  c.report(QueryBox{AxisBound::closed(1, 2), AxisBound::closed(1, 2)}, 5, all.sink());
  CHECK(sorted(all.ids()) == std::vector<PointId>{0, 1, 2});

  ColumnMinStructure e(PointSet{}, {2, 2}, 5);
  CHECK(e.minima().empty());
}

TEST_CASE("column structure rejects an oversized column grid") {
  CHECK_THROWS_AS(ColumnMinStructure(PointSet{}, {64, 64}, 4096), std::invalid_argument);
  CHECK_NOTHROW(ColumnMinStructure(PointSet{}, {16, 16}, 4096));
}

TEST_CASE("16x16 columns with n=4096") {
  std::mt19937_64 rng(24);
  PointSet ps;
  std::uniform_int_distribution<Coord> col(1, 16), z(1, 4096);
  for (PointId i = 0; i < 4096; ++i) ps.push_back(Point{{col(rng), col(rng), z(rng)}, i});
  ColumnMinStructure c(ps, {16, 16}, 4096);

  std::map<std::pair<Coord, Coord>, Coord> want;
  for (const Point& p : ps) {
    auto key = std::pair{p[0], p[1]};
    auto it = want.find(key);
    if (it == want.end() || p[2] < it->second) want[key] = p[2];
  }
  REQUIRE(c.minima().size() == want.size());
  for (const Point& m : c.minima()) CHECK(want.at({m[0], m[1]}) == m[2]);

  for (int k = 0; k < 500; ++k) {
    QueryBox qp{random_bound(rng, 16, k % 3), random_bound(rng, 16, (k + 1) % 3)};
    const Coord x = z(rng) / (1 + k % 8);
    QueryBox full{qp[0], qp[1], AxisBound::up_to(x)};
    IdCollector out;
    std::size_t touched = 0;
    c.report(qp, x, out.sink(), &touched);
    auto got = sorted(out.ids());
    REQUIRE(got == oracle_ids(ps, full));
    std::size_t columns = 0;
    for (const auto& [key, mz] : want)
      if (qp[0].admits(key.first) && qp[1].admits(key.second) && mz <= x) ++columns;
    CHECK(touched <= got.size() + columns);
  }

  SpaceLedger ledger;
  c.account(ledger, 0);
  MESSAGE("column structure words per point: " << double(ledger.total().elements) / ps.size());
  CHECK(ledger.total().elements <= 64 * ps.size());
}

TEST_CASE("column structure is exhaustively exact on small instances") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const Coord n = 32;
    PointSet ps = random_points(rng, 1 + trial, 3, 4);
    for (Point& p : ps) p[2] = 1 + rng() % n;
    ColumnMinStructure c(ps, {4, 4}, n);
    for_each_box(2, 4, [&](const QueryBox& qp) {
      for (Coord x = 1; x <= n; x += 3) {
        IdCollector out;
        c.report(qp, x, out.sink());
        REQUIRE(sorted(out.ids()) == oracle_ids(ps, QueryBox{qp[0], qp[1], AxisBound::up_to(x)}));
      }
    });
  }
}
