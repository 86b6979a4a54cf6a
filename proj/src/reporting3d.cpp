#include "orr/reporting3d.hpp"

#include <algorithm>
#include <stdexcept>

#include "orr/detail/front.hpp"
#include "orr/detail/lift.hpp"
#include "orr/detail/slab_core.hpp"
#include "orr/predecessor.hpp"

namespace orr {

namespace {

using detail::Pt;
using detail::u32;
using ZLift = detail::Lift<detail::S221>;

ZLift build_lift(std::vector<Pt> pts, u32 n, const RecursionParams& params, unsigned bucket, LiftInfo& info) {
  if (params.compact)
    for (Pt& p : pts) p.key = 0;
  auto build = [&](std::vector<Pt> sub, u32 universe) {
    auto ctx = detail::make_context(params, sub.size());
    detail::S221 s(std::move(sub), universe, 0, ctx);
    info.depth = std::max(info.depth, ctx.max_level);
    info.nodes += ctx.nodes;
    info.mappers += ctx.mappers;
    return s;
  };
  ZLift lift(std::move(pts), 2, n, build, bucket);
  info.n = n;
  info.structures = lift.structures();
  info.census = lift.census();
  info.height = lift.height();
  return lift;
}

void check_query(const QueryBox& q) {
  if (q.dim() != 3) throw DimensionMismatch("expected a 3D query");
}

}  // namespace

// ---------------------------------------------------------------- Reporter3D

struct Reporter3D::Impl {
  PointSet points;
  Coord universe = 0;
  RecursionParams params;
  std::array<PredecessorIndex, 3> pred;
  std::array<std::vector<u32>, 3> below;  // below[k]: points under the k-th distinct value
  std::vector<PointId> index_at_x;
  ZLift lift;
  LiftInfo info;

  // Positions of the query on every axis; false when some axis is empty.
  bool map(const QueryBox& q, detail::Box3& b) const {
    const u32 n = static_cast<u32>(points.size());
    if (n == 0) return false;
    for (int a = 0; a < 3; ++a) {
      const AxisBound& ab = q[a];
      u32 lo = 1, hi = n;
      if (ab.kind != AxisBound::Kind::UpTo) {
        if (ab.lo > universe) return false;
        auto s = pred[a].succ_index(std::max<Coord>(ab.lo, 1));
        if (!s) return false;
        lo = below[a][*s] + 1;
      }
      if (ab.kind != AxisBound::Kind::From) {
        if (ab.hi < 1) return false;
        auto p = pred[a].pred_index(std::min(ab.hi, universe));
        if (!p) return false;
        hi = below[a][*p + 1];
      }
      if (lo > hi) return false;
      b.lo[a] = lo;
      b.hi[a] = hi;
    }
    return true;
  }
};

Reporter3D::Reporter3D(const PointSet& points, Coord universe, const RecursionParams& params, unsigned bucket)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  if (universe < 1) throw std::invalid_argument("universe must be at least 1");
  params.validate();
  for (const Point& p : points) {
    if (p.dim() != 3) throw DimensionMismatch("expected 3D points");
    for (int a = 0; a < 3; ++a)
      if (p[a] < 1 || p[a] > universe) throw std::out_of_range("coordinate outside [1,U]");
  }
  m.points = points;
  m.universe = universe;
  m.params = params;
  detail::PositionFront front(points);
  for (int a = 0; a < 3; ++a) {
    const auto& s = front.sorted[a];
    std::vector<Coord> distinct;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i == 0 || s[i] != s[i - 1]) {
        distinct.push_back(s[i]);
        m.below[a].push_back(static_cast<u32>(i));
      }
    m.below[a].push_back(static_cast<u32>(s.size()));
    m.pred[a] = PredecessorIndex(std::move(distinct), universe);
  }
  if (params.compact) m.index_at_x = std::move(front.index_at_x);
  m.lift = build_lift(std::move(front.pts), static_cast<u32>(points.size()), m.params, bucket, m.info);
}

Reporter3D::~Reporter3D() = default;
Reporter3D::Reporter3D(Reporter3D&&) noexcept = default;
Reporter3D& Reporter3D::operator=(Reporter3D&&) noexcept = default;

std::size_t Reporter3D::report(const QueryBox& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t Reporter3D::report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const {
  check_query(q);
  ++st.queries;
  const Impl& m = *impl_;
  detail::Box3 b;
  if (!m.map(q, b)) return 0;
  const std::size_t before = sink.count();
  detail::Emitter em{m.points, m.index_at_x, m.params.compact, sink, st, st.unmap_steps};
  m.lift.query(b, detail::Sink{detail::FunctionRef<void(const Pt&)>(em), &sink.stop_flag()}, st);
  return sink.count() - before;
}

std::optional<Point> Reporter3D::report_one(const QueryBox& q) const {
  detail::QueryStats st;
  return report_one(q, st);
}

std::optional<Point> Reporter3D::report_one(const QueryBox& q, detail::QueryStats& st) const {
  std::optional<Point> got;
  ReportSink one([&](const Point& p) { got = p; }, true);
  report(q, one, st);
  return got;
}

std::size_t Reporter3D::size() const { return impl_->points.size(); }
const PointSet& Reporter3D::points() const { return impl_->points; }
Coord Reporter3D::universe() const { return impl_->universe; }
bool Reporter3D::compact() const { return impl_->params.compact; }
const LiftInfo& Reporter3D::info() const { return impl_->info; }

void Reporter3D::account(SpaceLedger& ledger) const {
  const Impl& m = *impl_;
  const std::uint64_t n = m.points.size();
  for (int a = 0; a < 3; ++a) {
    m.pred[a].account(ledger, 0);
    ledger.add("front.counts", 0, m.below[a].size(), std::max<std::uint64_t>(n, 2), 1, vec_bytes(m.below[a]));
  }
  if (!m.index_at_x.empty()) ledger.add("front.ids", 0, n, n, 1, vec_bytes(m.index_at_x));
  m.lift.account(ledger);
}

Full3D::Full3D(const PointSet& points, Coord universe, const RecursionParams& params, unsigned bucket)
    : Reporter3D(points, universe,
                 [&] {
                   if (params.compact) throw std::invalid_argument("Full3D takes full-mode parameters");
                   return params;
                 }(),
                 bucket) {}

Compact3D::Compact3D(const PointSet& points, Coord universe, int p, double epsilon, unsigned bucket)
    : Compact3D(points, universe, RecursionParams::compact_defaults(p, epsilon), bucket) {}

Compact3D::Compact3D(const PointSet& points, Coord universe, const RecursionParams& params, unsigned bucket)
    : Reporter3D(points, universe,
                 [&] {
                   if (!params.compact) throw std::invalid_argument("Compact3D takes compact parameters");
                   return params;
                 }(),
                 bucket) {}

// ----------------------------------------------------------------- Lifted221

struct Lifted221::Impl {
  PointSet points;
  RecursionParams params;
  detail::PositionFront front;
  ZLift lift;
  LiftInfo info;
};

Lifted221::Lifted221(const PointSet& points, const RecursionParams& params, unsigned bucket)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  params.validate();
  m.points = points;
  m.params = params;
  m.front = detail::PositionFront(points);
  m.lift = build_lift(m.front.pts, m.front.n(), m.params, bucket, m.info);
  m.front.pts = {};
}

Lifted221::~Lifted221() = default;
Lifted221::Lifted221(Lifted221&&) noexcept = default;

std::size_t Lifted221::report(const QueryBox& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t Lifted221::report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const {
  check_query(q);
  ++st.queries;
  const Impl& m = *impl_;
  detail::Box3 b;
  for (int a = 0; a < 3; ++a)
    if (!m.front.range(a, q[a], b.lo[a], b.hi[a])) return 0;
  const std::size_t before = sink.count();
  detail::Emitter em{m.points, m.front.index_at_x, m.params.compact, sink, st, st.unmap_steps};
  m.lift.query(b, detail::Sink{detail::FunctionRef<void(const Pt&)>(em), &sink.stop_flag()}, st);
  return sink.count() - before;
}

const LiftInfo& Lifted221::info() const { return impl_->info; }
void Lifted221::account(SpaceLedger& ledger) const { impl_->lift.account(ledger); }

}  // namespace orr
