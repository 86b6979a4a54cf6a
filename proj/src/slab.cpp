#include "orr/slab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orr/detail/front.hpp"
#include "orr/detail/slab_core.hpp"

namespace orr {

using detail::lower_of;
using detail::upper_of;

namespace {

double lg(double x) { return x > 1 ? std::log2(x) : 0.0; }

}  // namespace

// ------------------------------------------------------------- parameters

double RecursionParams::max_gamma(double delta) { return (std::exp2(delta / 2) - 1) / 2; }

RecursionParams RecursionParams::defaults(double eps) {
  RecursionParams r;
  r.epsilon = eps;
  r.delta = eps / 3;
  r.gamma = max_gamma(r.delta);
  return r;
}

RecursionParams RecursionParams::compact_defaults(int p, double eps) {
  RecursionParams r = defaults(eps);
  r.compact = true;
  r.p = p;
  return r;
}

double RecursionParams::v() const { return 1.0 / std::log2(2.0 / (1 + 2 * gamma)); }

int RecursionParams::period(std::size_t n) const {
  const double x = delta * lg(lg(static_cast<double>(n)));
  return std::max(1, static_cast<int>(std::ceil(x - 1e-12)));
}

int RecursionParams::depth_bound(std::size_t n) const {
  const double ll = lg(lg(static_cast<double>(n)));
  if (compact) return static_cast<int>(std::ceil(ll - 1e-12)) + 4;
  return static_cast<int>(std::ceil(v() * ll - 1e-12)) + 2;
}

std::size_t RecursionParams::terminal_limit(std::size_t n) const {
  if (!compact) return cutoff;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(lg(static_cast<double>(n)))));
}

double compact_target_formula(std::size_t n, int p) {
  const double m = static_cast<double>(n);
  return std::sqrt(m) * std::pow(lg(m), p);
}

double RecursionParams::slab_target(std::size_t m) const {
  const double base = std::pow(static_cast<double>(m), 0.5 + gamma);
  if (!compact) return base;
  return std::min(compact_target_formula(m, p), base);
}

void RecursionParams::validate() const {
  if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("epsilon must lie in (0,1]");
  if (!(delta > 0 && delta <= epsilon / 3 + 1e-12)) throw std::invalid_argument("delta must lie in (0, eps/3]");
  if (!(gamma >= 0) || 1 + 2 * gamma > std::exp2(delta / 2) + 1e-12)
    throw std::invalid_argument("gamma must satisfy 1 + 2 gamma <= 2^(delta/2)");
  if (cutoff < 1) throw std::invalid_argument("cutoff must be at least 1");
  if (compact && p < 2) throw std::invalid_argument("p must be at least 2");
}

// -------------------------------------------------------------- partition

namespace {

void cut_axis(std::vector<Coord> c, double target, std::vector<Coord>& bounds,
              std::vector<std::size_t>& counts) {
  std::sort(c.begin(), c.end());
  const std::size_t m = c.size();
  if (m == 0) return;
  const auto s = std::clamp<std::size_t>(static_cast<std::size_t>(std::round(m / target)), 1, m);
  for (std::size_t k = 1; k <= s; ++k) {
    const std::size_t end = (k * m + s / 2) / s;
    const Coord v = c[std::max<std::size_t>(end, 1) - 1];
    if (bounds.empty() || v > bounds.back()) bounds.push_back(v);
  }
  if (bounds.back() != c.back()) bounds.push_back(c.back());
  std::size_t prev = 0;
  for (Coord b : bounds) {
    const auto upto = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), b) - c.begin());
    counts.push_back(upto - prev);
    prev = upto;
  }
}

std::size_t first_at_least(const std::vector<Coord>& b, Coord v) {
  return static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), v) - b.begin()) + 1;
}
std::size_t first_above(const std::vector<Coord>& b, Coord v) {
  return static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), v) - b.begin()) + 1;
}


}  // namespace

SlabPartition build_partition(const PointSet& points, double target) {
  if (!(target >= 1)) throw std::invalid_argument("slab target must be at least 1");
  SlabPartition s;
  std::vector<Coord> xs, ys;
  for (const Point& p : points) {
    if (p.dim() < 2) throw DimensionMismatch("partition needs at least two axes");
    xs.push_back(p[0]);
    ys.push_back(p[1]);
  }
  cut_axis(std::move(xs), target, s.x_bounds, s.x_counts);
  cut_axis(std::move(ys), target, s.y_bounds, s.y_counts);
  return s;
}

SlabLocation locate_211(const SlabPartition& s, const QueryBox& q) {
  SlabLocation r;
  const Coord a = lower_of(q[0]), b = upper_of(q[0]), c = upper_of(q[1]);
  r.i1 = first_at_least(s.x_bounds, a);
  r.i2 = first_above(s.x_bounds, b);
  r.j1 = first_above(s.y_bounds, c);
  r.empty = r.i1 > s.x_slabs() || a > b;
  if (r.i1 <= s.x_slabs()) r.a0 = s.x_bounds[r.i1 - 1];
  if (r.i2 >= 2) r.b0 = s.x_bounds[r.i2 - 2];
  if (r.j1 >= 2) r.c0 = s.y_bounds[r.j1 - 2];
  return r;
}

SlabLocation locate_221(const SlabPartition& s, const QueryBox& q) {
  SlabLocation r;
  const Coord a = lower_of(q[0]), b = upper_of(q[0]), c = lower_of(q[1]), d = upper_of(q[1]);
  r.i1 = first_at_least(s.x_bounds, a);
  r.i2 = first_above(s.x_bounds, b);
  r.j1 = first_at_least(s.y_bounds, c);
  r.j2 = first_above(s.y_bounds, d);
  r.empty = r.i1 > s.x_slabs() || r.j1 > s.y_slabs() || a > b || c > d;
  if (r.i1 <= s.x_slabs()) r.a0 = s.x_bounds[r.i1 - 1];
  if (r.i2 >= 2) r.b0 = s.x_bounds[r.i2 - 2];
  if (r.j1 <= s.y_slabs()) r.c0 = s.y_bounds[r.j1 - 1];
  if (r.j2 >= 2) r.d0 = s.y_bounds[r.j2 - 2];
  return r;
}

std::optional<std::shared_ptr<const RankMapper>> apply_rank_schedule(int level, const PointSet& w,
                                                                    const RecursionParams& params,
                                                                    std::size_t n_top) {
  if (level < 0) throw std::invalid_argument("level must be non-negative");
  const int period = params.period(n_top);
  if (!params.compact && level % period != period - 1) return std::nullopt;
  if (w.empty()) return std::nullopt;
  return rank_reduce(w).first;
}

// --------------------------------------------------------- public wrappers

namespace detail {

BuildContext make_context(const RecursionParams& params, std::size_t n) {
  params.validate();
  BuildContext ctx;
  ctx.params = &params;
  ctx.n_top = n;
  ctx.compact = params.compact;
  ctx.period = params.period(n);
  ctx.terminal_limit = params.terminal_limit(n);
  return ctx;
}

}  // namespace detail

namespace {

using detail::Pt;
using detail::u32;

using Positions = detail::PositionFront;

void reflect_axis(std::vector<Pt>& pts, int a, u32 n) {
  for (Pt& p : pts) p.c[a] = detail::reflect(p.c[a], n);
}

void expect_kind(const AxisBound& b, AxisBound::Kind k, const char* what) {
  if (b.kind != k) throw SidednessMismatch(what);
}

AxisBound::Kind open_kind(int dir) { return dir > 0 ? AxisBound::Kind::From : AxisBound::Kind::UpTo; }

}  // namespace

struct Structure211::Front {
  PointSet points;
  Positions pos;
  explicit Front(const PointSet& p) : points(p), pos(p) {}
};

Structure211::Structure211(const PointSet& points, const RecursionParams& params, std::array<int, 2> open)
    : front_(std::make_unique<Front>(points)), open_(open), compact_(params.compact) {
  auto ctx = detail::make_context(params, points.size());
  std::vector<Pt> pts = front_->pos.pts;
  const u32 n = front_->pos.n();
  for (int k = 0; k < 2; ++k)
    if (open_[k] > 0) reflect_axis(pts, k + 1, n);
  if (compact_)
    for (Pt& p : pts) p.key = 0;
  core_ = std::make_unique<detail::S211>(std::move(pts), n, 0, ctx);
  info_ = StructureInfo{points.size(), ctx.max_level, ctx.nodes, ctx.mappers};
}

Structure211::~Structure211() = default;
Structure211::Structure211(Structure211&&) noexcept = default;

std::size_t Structure211::report(const QueryBox& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t Structure211::report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const {
  if (q.dim() != 3) throw DimensionMismatch("expected a 3D query");
  expect_kind(q[0], AxisBound::Kind::Closed, "axis 0 must be closed");
  expect_kind(q[1], open_kind(open_[0]), "axis 1 has the wrong open side");
  expect_kind(q[2], open_kind(open_[1]), "axis 2 has the wrong open side");
  ++st.queries;
  const Positions& pos = front_->pos;
  const u32 n = pos.n();
  detail::Box3 b{{1, 1, 1}, {0, 0, 0}};
  for (int a = 0; a < 3; ++a) {
    u32 lo, hi;
    if (!pos.range(a, q[a], lo, hi)) return 0;
    if (a > 0 && open_[a - 1] > 0) lo = detail::reflect(lo, n), hi = lo, lo = 1;
    b.lo[a] = a == 0 ? lo : 1;
    b.hi[a] = hi;
  }
  const std::size_t before = sink.count();
  detail::Emitter em{front_->points, pos.index_at_x, compact_, sink, st, st.unmap_steps};
  core_->query(b, detail::Sink{detail::FunctionRef<void(const Pt&)>(em), &sink.stop_flag()}, st);
  return sink.count() - before;
}

void Structure211::account(SpaceLedger& ledger) const { core_->account(ledger); }

struct Structure221::Front {
  PointSet points;
  Positions pos;
  explicit Front(const PointSet& p) : points(p), pos(p) {}
};

Structure221::Structure221(const PointSet& points, const RecursionParams& params, int open)
    : front_(std::make_unique<Front>(points)), open_(open), compact_(params.compact) {
  auto ctx = detail::make_context(params, points.size());
  std::vector<Pt> pts = front_->pos.pts;
  const u32 n = front_->pos.n();
  if (open_ > 0) reflect_axis(pts, 2, n);
  if (compact_)
    for (Pt& p : pts) p.key = 0;
  core_ = std::make_unique<detail::S221>(std::move(pts), n, 0, ctx);
  info_ = StructureInfo{points.size(), ctx.max_level, ctx.nodes, ctx.mappers};
}

Structure221::~Structure221() = default;
Structure221::Structure221(Structure221&&) noexcept = default;

std::size_t Structure221::report(const QueryBox& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t Structure221::report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const {
  if (q.dim() != 3) throw DimensionMismatch("expected a 3D query");
  expect_kind(q[0], AxisBound::Kind::Closed, "axis 0 must be closed");
  expect_kind(q[1], AxisBound::Kind::Closed, "axis 1 must be closed");
  expect_kind(q[2], open_kind(open_), "axis 2 has the wrong open side");
  ++st.queries;
  const Positions& pos = front_->pos;
  const u32 n = pos.n();
  detail::Box3 b;
  for (int a = 0; a < 3; ++a) {
    u32 lo, hi;
    if (!pos.range(a, q[a], lo, hi)) return 0;
    if (a == 2 && open_ > 0) hi = detail::reflect(lo, n);
    b.lo[a] = a == 2 ? 1 : lo;
    b.hi[a] = hi;
  }
  const std::size_t before = sink.count();
  detail::Emitter em{front_->points, pos.index_at_x, compact_, sink, st, st.unmap_steps};
  core_->query(b, detail::Sink{detail::FunctionRef<void(const Pt&)>(em), &sink.stop_flag()}, st);
  return sink.count() - before;
}

void Structure221::account(SpaceLedger& ledger) const { core_->account(ledger); }

}  // namespace orr
