#include <cmath>
#include <random>

#include "doctest.h"
#include "orr/detail/front.hpp"
#include "orr/detail/lift.hpp"
#include "orr/detail/slab_core.hpp"
#include "orr/oracle.hpp"
#include "orr/reporting3d.hpp"
#include "support.hpp"

using namespace orr;
using namespace testing_support;

namespace {

template <class S>
std::vector<PointId> ids(const S& s, const QueryBox& q, detail::QueryStats& st) {
  IdCollector c;
  s.report(q, c.sink(), st);
  return sorted(c.ids());
}

template <class F>
void for_each_closed(Coord m, F&& f) {
  std::vector<AxisBound> b;
  for (Coord lo = 1; lo <= m; ++lo)
    for (Coord hi = lo; hi <= m; ++hi) b.push_back(AxisBound::closed(lo, hi));
  for (const auto& x : b)
    for (const auto& y : b)
      for (const auto& z : b) f(QueryBox{x, y, z});
}

RecursionParams small_full() {
  auto p = RecursionParams::defaults();
  p.cutoff = 2;
  return p;
}

RecursionParams small_compact() {
  auto p = RecursionParams::compact_defaults();
  p.cutoff = 2;
  return p;
}

QueryBox random_mixed(std::mt19937_64& rng, Coord U) {
  std::uniform_int_distribution<int> kind(0, 5);
  auto pick = [&] {
    const int k = kind(rng);
    return random_bound(rng, U, k < 4 ? 0 : k - 3);
  };
  return QueryBox{pick(), pick(), pick()};
}

}  // namespace

TEST_CASE("lift splits at the node separating e from f") {
  // Points with z = 1..16; a query on [5,12] in z must split at the root and
  // query one structure on each side.
  PointSet ps;
  for (Coord z = 1; z <= 16; ++z) ps.push_back(Point{{z, 17 - z, z}, static_cast<PointId>(z - 1)});
  Lifted221 lift(ps, small_full(), 2);
  detail::QueryStats st;
  auto got = ids(lift, QueryBox{AxisBound::closed(1, 16), AxisBound::closed(1, 16), AxisBound::closed(5, 12)}, st);
  CHECK(got == oracle_ids(ps, QueryBox{AxisBound::closed(1, 16), AxisBound::closed(1, 16), AxisBound::closed(5, 12)}));
  CHECK(st.lift_subqueries == 2);
  CHECK(st.max_lift_fanout == 2);
  // [3,4] lives under one subtree and splits lower down
  detail::QueryStats st2;
  auto q2 = QueryBox{AxisBound::closed(1, 16), AxisBound::closed(1, 16), AxisBound::closed(3, 4)};
  CHECK(ids(lift, q2, st2) == oracle_ids(ps, q2));
  CHECK(st2.max_lift_fanout <= 2);
  CHECK(lift.info().height == 3);
}

TEST_CASE("reporter3d on an empty set") {
  Full3D f(PointSet{}, 100);
  Compact3D c(PointSet{}, 100);
  QueryBox q{AxisBound::closed(1, 100), AxisBound::closed(1, 100), AxisBound::closed(1, 100)};
  IdCollector col;
  CHECK(f.report(q, col.sink()) == 0);
  CHECK(c.report(q, col.sink()) == 0);
  CHECK(f.empty(q));
  CHECK(!c.report_one(q));
  CHECK(f.info().structures == 0);
}

TEST_CASE("reporter3d validates input") {
  PointSet bad{Point{{1, 2, 101}, 0}};
  CHECK_THROWS_AS(Full3D(bad, 100), std::out_of_range);
  PointSet zero{Point{{0, 2, 3}, 0}};
  CHECK_THROWS_AS(Full3D(zero, 100), std::out_of_range);
  PointSet flat{Point{{1, 2}, 0}};
  CHECK_THROWS_AS(Full3D(flat, 100), DimensionMismatch);
  CHECK_THROWS_AS(Full3D(PointSet{}, 100, RecursionParams::compact_defaults()), std::invalid_argument);
  CHECK_THROWS_AS(Compact3D(PointSet{}, 100, RecursionParams::defaults()), std::invalid_argument);
  Full3D f(PointSet{Point{{1, 2, 3}, 0}}, 100);
  IdCollector col;
  CHECK_THROWS_AS(f.report(QueryBox{AxisBound::closed(1, 2), AxisBound::closed(1, 2)}, col.sink()),
                  DimensionMismatch);
}

TEST_CASE("reporter3d matches the oracle on U = 2^32") {
  std::mt19937_64 rng(7);
  const Coord U = 0xffffffffu;
  for (std::size_t n : {1u, 9u, 64u, 300u}) {
    const PointSet ps = random_points(rng, n, 3, U);
    Full3D f(ps, U);
    Compact3D c(ps, U);
    for (int i = 0; i < 2000; ++i) {
      // half the queries are built around stored coordinates so they hit
      QueryBox q = random_mixed(rng, U);
      if (i % 2 == 0 && n > 0) {
        const Point& a = ps[rng() % n];
        const Point& b = ps[rng() % n];
        std::vector<AxisBound> bs;
        for (int k = 0; k < 3; ++k) bs.push_back(AxisBound::closed(std::min(a[k], b[k]), std::max(a[k], b[k])));
        q = QueryBox(std::move(bs));
      }
      const auto want = oracle_ids(ps, q);
      detail::QueryStats sf, sc;
      REQUIRE(ids(f, q, sf) == want);
      REQUIRE(ids(c, q, sc) == want);
      CHECK(sf.max_lift_fanout <= 2);
    }
  }
}

TEST_CASE("reporter3d exhaustive on [6]^3") {
  std::mt19937_64 rng(11);
  const PointSet ps = random_points(rng, 12, 3, 6);
  Full3D f(ps, 6, small_full(), 2);
  Compact3D c(ps, 6, small_compact(), 2);
  Lifted221 l(ps, small_full(), 2);
  std::size_t queries = 0;
  for_each_closed(6, [&](const QueryBox& q) {
    ++queries;
    const auto want = oracle_ids(ps, q);
    detail::QueryStats s1, s2, s3;
    REQUIRE(ids(f, q, s1) == want);
    REQUIRE(ids(c, q, s2) == want);
    REQUIRE(ids(l, q, s3) == want);
    CHECK(f.empty(q) == want.empty());
  });
  CHECK(queries == 9261);
}

TEST_CASE("reporter3d ties on every axis") {
  PointSet ps;
  PointId id = 0;
  for (Coord x = 1; x <= 3; ++x)
    for (int r = 0; r < 20; ++r) ps.push_back(Point{{x, 4 - x, static_cast<Coord>(r % 2 + 1)}, id++});
  Full3D f(ps, 3, small_full(), 2);
  Compact3D c(ps, 3, small_compact(), 2);
  for_each_closed(3, [&](const QueryBox& q) {
    const auto want = oracle_ids(ps, q);
    detail::QueryStats s1, s2;
    REQUIRE(ids(f, q, s1) == want);
    REQUIRE(ids(c, q, s2) == want);
  });
}

TEST_CASE("lift census stays logarithmic") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {100u, 1000u, 4096u}) {
    const PointSet ps = random_points(rng, n, 3, 1u << 20);
    Full3D f(ps, 1u << 20);
    const unsigned bound = static_cast<unsigned>(std::ceil(std::log2(double(n)))) + 1;
    CHECK(f.info().census <= bound);
    CHECK(f.info().census >= 1);
    CHECK(f.info().structures > 0);
  }
}

TEST_CASE("report_one and empty call the sink at most once") {
  std::mt19937_64 rng(5);
  const Coord U = 1000;
  const PointSet ps = random_points(rng, 2000, 3, U);
  Full3D f(ps, U);
  Compact3D c(ps, U);
  for (int i = 0; i < 500; ++i) {
    const QueryBox q = random_closed_box(rng, 3, U);
    const bool want_empty = oracle_count(ps, q) == 0;
    for (const Reporter3D* r : {static_cast<const Reporter3D*>(&f), static_cast<const Reporter3D*>(&c)}) {
      std::size_t calls = 0;
      ReportSink one([&](const Point&) { ++calls; }, true);
      r->report(q, one);
      CHECK(calls == (want_empty ? 0u : 1u));
      auto hit = r->report_one(q);
      CHECK(hit.has_value() == !want_empty);
      if (hit) CHECK(contains(q, *hit));
      CHECK(r->empty(q) == want_empty);
    }
  }
}

TEST_CASE("compact reporter pays unmap steps") {
  std::mt19937_64 rng(9);
  const PointSet ps = random_points(rng, 4096, 3, 1u << 16);
  Compact3D c(ps, 1u << 16);
  Full3D f(ps, 1u << 16);
  QueryBox all{AxisBound::closed(1, 1u << 16), AxisBound::closed(1, 1u << 16), AxisBound::closed(1, 1u << 16)};
  detail::QueryStats sc, sf;
  CHECK(ids(c, all, sc).size() == 4096);
  CHECK(ids(f, all, sf).size() == 4096);
  CHECK(sc.unmap_steps > 0);
  CHECK(c.compact());
  CHECK(!f.compact());
  SpaceLedger lc, lf;
  c.account(lc);
  f.account(lf);
  CHECK(lc.words_ideal(64) > 0);
  CHECK(lf.words_ideal(64) > 0);
}

TEST_CASE("two lifts over a (2,1,1) structure answer closed boxes") {
  // lift y, then lift z: (2,1,1) -> (2,2,1) -> (2,2,2)
  std::mt19937_64 rng(13);
  const PointSet ps = random_points(rng, 300, 3, 40);
  detail::PositionFront front(ps);
  const auto params = RecursionParams::defaults();
  const detail::u32 n = front.n();
  auto inner = [&](std::vector<detail::Pt> sub, detail::u32 u) {
    auto ctx = detail::make_context(params, sub.size());
    return detail::S211(std::move(sub), u, 0, ctx);
  };
  using YLift = detail::Lift<detail::S211>;
  auto outer = [&](std::vector<detail::Pt> sub, detail::u32 u) { return YLift(std::move(sub), 1, u, inner, 4); };
  detail::Lift<YLift> two(front.pts, 2, n, outer, 4);
  for (int i = 0; i < 1500; ++i) {
    const QueryBox q = random_closed_box(rng, 3, 40);
    detail::Box3 b;
    bool ok = true;
    for (int a = 0; a < 3; ++a) ok = ok && front.range(a, q[a], b.lo[a], b.hi[a]);
    std::vector<PointId> got;
    if (ok) {
      auto emit = [&](const detail::Pt& p) { got.push_back(p.key); };
      bool stop = false;
      detail::QueryStats st;
      two.query(b, detail::Sink{detail::FunctionRef<void(const detail::Pt&)>(emit), &stop}, st);
    }
    std::vector<PointId> want;
    for (PointId id : oracle_ids(ps, q)) want.push_back(id);
    std::vector<PointId> mapped;
    for (PointId id : sorted(got)) mapped.push_back(ps[id].id);
    REQUIRE(sorted(mapped) == want);
  }
}
