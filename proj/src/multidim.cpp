#include "orr/multidim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "orr/detail/front.hpp"

namespace orr {

namespace {

using detail::u32;

constexpr u32 kAbsent = 0xffffffffu;
constexpr u32 kScanRun = 0xfffffffeu;
constexpr u32 kScanLimit = 16;  // runs this small are scanned, not built

unsigned fanout_for(std::size_t n, double eps) {
  if (n < 4) return 2;
  const double b = std::ceil(std::pow(std::log2(static_cast<double>(n)), eps) - 1e-9);
  return std::max(2u, static_cast<unsigned>(b));
}

// Forwards lower-structure output, mapped back through `points`, and stops
// the lower structure once the outer sink stops.
class Forward {
 public:
  Forward(const PointSet& points, ReportSink& out) : points_(points), out_(out) {
    inner_ = ReportSink([this](const Point& p) {
      out_.accept(points_[p.id]);
      if (out_.stopped()) inner_.request_stop();
    });
  }
  Forward(const Forward&) = delete;
  ReportSink& sink() { return inner_; }

 private:
  const PointSet& points_;
  ReportSink& out_;
  ReportSink inner_;
};

}  // namespace

// ------------------------------------------------------------------ DDTree

struct DDTree::Impl {
  struct Node {
    u32 begin = 0, end = 0;
    u32 chunk = 0;  // child width; 0 for leaves
    u32 kids = 0;
    u32 kid_base = 0;  // into kids_
    u32 run_base = 0;  // into runs_, kids*kids slots, run (s,t) at s*kids+t
  };
  struct Lower {
    std::unique_ptr<Full3D> f3;
    std::unique_ptr<DDTree> dd;
  };

  std::size_t d = 0;
  Coord universe = 0;
  double eps = 0.5;
  RecursionParams params;
  PointSet points;
  unsigned b = 0;
  unsigned height = 0;

  std::unique_ptr<Full3D> direct;  // d = 3

  std::vector<std::vector<Coord>> sorted;  // per axis
  std::vector<u32> pos;                    // pos[i*d + a], 1-based
  std::vector<u32> order;                  // point indices by last-axis position
  std::vector<Node> nodes;
  std::vector<u32> kids;
  std::vector<u32> runs;
  std::vector<Lower> lowers;

  u32 make(u32 begin, u32 end, unsigned depth) {
    const u32 id = static_cast<u32>(nodes.size());
    nodes.push_back(Node{begin, end});
    height = std::max(height, depth);
    const u32 size = end - begin;
    if (size <= b) return id;
    const u32 chunk = (size + b - 1) / b;
    const u32 k = (size + chunk - 1) / chunk;
    const u32 kb = static_cast<u32>(kids.size());
    kids.resize(kb + k);
    const u32 rb = static_cast<u32>(runs.size());
    runs.resize(rb + k * k, kAbsent);
    for (u32 s = 0; s < k; ++s)
      for (u32 t = s; t < k; ++t) {
        if (id != 0 && s == 0 && t == k - 1) continue;  // covered by the parent
        const u32 lo = begin + s * chunk, hi = std::min(end, begin + (t + 1) * chunk);
        runs[rb + s * k + t] = hi - lo <= kScanLimit ? kScanRun : build_lower(lo, hi);
      }
    for (u32 c = 0; c < k; ++c) {
      const u32 child = make(begin + c * chunk, std::min(end, begin + (c + 1) * chunk), depth + 1);
      kids[kb + c] = child;
    }
    Node& nd = nodes[id];
    nd.chunk = chunk;
    nd.kids = k;
    nd.kid_base = kb;
    nd.run_base = rb;
    return id;
  }

  u32 build_lower(u32 lo, u32 hi) {
    PointSet sub;
    sub.reserve(hi - lo);
    std::vector<Coord> c(d - 1);
    for (u32 r = lo; r < hi; ++r) {
      const u32 i = order[r];
      for (std::size_t a = 0; a + 1 < d; ++a) c[a] = pos[i * d + a];
      sub.emplace_back(c.data(), d - 1, i);
    }
    const Coord n = points.size();
    Lower low;
    if (d - 1 == 3)
      low.f3 = std::make_unique<Full3D>(sub, n, params);
    else
      low.dd = std::make_unique<DDTree>(sub, d - 1, n, eps, params);
    lowers.push_back(std::move(low));
    return static_cast<u32>(lowers.size() - 1);
  }

  struct Ctx {
    std::vector<u32> plo, phi;  // closed position box
    QueryBox lower_q;
    ReportSink& sink;
    Forward& fwd;
    detail::QueryStats& st;
    std::vector<std::uint64_t> per_level;
  };

  void scan(u32 lo, u32 hi, Ctx& cx, unsigned level) const {
    ++cx.per_level[level];
    for (u32 r = lo; r < hi && !cx.sink.stopped(); ++r) {
      const u32 i = order[r];
      bool in = true;
      for (std::size_t a = 0; a < d && in; ++a) in = pos[i * d + a] >= cx.plo[a] && pos[i * d + a] <= cx.phi[a];
      if (in) cx.sink.accept(points[i]);
    }
  }

  void run(const Node& nd, u32 s, u32 t, Ctx& cx, unsigned level) const {
    const u32 r = runs[nd.run_base + s * nd.kids + t];
    if (r == kAbsent) throw std::logic_error("missing run structure");
    const u32 lo = nd.begin + s * nd.chunk, hi = std::min(nd.end, nd.begin + (t + 1) * nd.chunk);
    if (r == kScanRun) return scan(lo, hi, cx, level);
    ++cx.per_level[level];
    const Lower& low = lowers[r];
    if (low.f3)
      low.f3->report(cx.lower_q, cx.fwd.sink(), cx.st);
    else
      low.dd->report(cx.lower_q, cx.fwd.sink(), cx.st);
  }

  u32 child_begin(const Node& nd, u32 c) const { return nd.begin + c * nd.chunk; }
  u32 child_end(const Node& nd, u32 c) const { return std::min(nd.end, nd.begin + (c + 1) * nd.chunk); }

  // [lo, end of v)
  void left(u32 v, u32 lo, Ctx& cx, unsigned level) const {
    for (;; ++level) {
      if (cx.sink.stopped()) return;
      const Node& nd = nodes[v];
      if (nd.kids == 0) return scan(lo, nd.end, cx, level);
      const u32 i = (lo - nd.begin) / nd.chunk;
      const u32 s = lo == child_begin(nd, i) ? i : i + 1;
      if (s < nd.kids) run(nd, s, nd.kids - 1, cx, level);
      if (lo == child_begin(nd, i)) return;
      v = kids[nd.kid_base + i];
    }
  }

  // [begin of v, hi)
  void right(u32 v, u32 hi, Ctx& cx, unsigned level) const {
    for (;; ++level) {
      if (cx.sink.stopped()) return;
      const Node& nd = nodes[v];
      if (nd.kids == 0) return scan(nd.begin, hi, cx, level);
      const u32 j = (hi - 1 - nd.begin) / nd.chunk;
      const bool whole = hi == child_end(nd, j);
      if (j > 0 || whole) run(nd, 0, whole ? j : j - 1, cx, level);
      if (whole) return;
      v = kids[nd.kid_base + j];
    }
  }

  void query(u32 lo, u32 hi, Ctx& cx) const {
    u32 v = 0;
    for (unsigned level = 0;; ++level) {
      const Node& nd = nodes[v];
      if (nd.kids == 0) return scan(std::max(lo, nd.begin), std::min(hi, nd.end), cx, level);
      if (lo <= nd.begin && hi >= nd.end) return run(nd, 0, nd.kids - 1, cx, level);
      const u32 i = (lo - nd.begin) / nd.chunk, j = (hi - 1 - nd.begin) / nd.chunk;
      const bool li = lo == child_begin(nd, i), rj = hi == child_end(nd, j);
      if (i == j && !(li && rj)) {
        v = kids[nd.kid_base + i];
        continue;
      }
      const u32 s = li ? i : i + 1;
      const u32 t = rj ? j : j - 1;
      if (s <= t) run(nd, s, t, cx, level);
      if (!li && !cx.sink.stopped()) left(kids[nd.kid_base + i], lo, cx, level + 1);
      if (!rj && !cx.sink.stopped()) right(kids[nd.kid_base + j], hi, cx, level + 1);
      return;
    }
  }

  std::size_t structure_count() const {
    std::size_t c = 0;
    for (const Lower& low : lowers) c += low.f3 ? 1 : 1 + low.dd->structures();
    return c;
  }
};

DDTree::DDTree(const PointSet& points, std::size_t d, Coord universe, double epsilon, const RecursionParams& params)
    : impl_(std::make_unique<Impl>()) {
  if (d < 3) throw std::invalid_argument("DDTree needs d >= 3");
  if (d > kMaxDim) throw std::invalid_argument("dimension above kMaxDim");
  if (universe < 1) throw std::invalid_argument("universe must be at least 1");
  if (!(epsilon > 0 && epsilon <= 1)) throw std::invalid_argument("epsilon must lie in (0,1]");
  for (const Point& p : points) {
    if (p.dim() != d) throw DimensionMismatch("point dimension differs from d");
    for (std::size_t a = 0; a < d; ++a)
      if (p[a] < 1 || p[a] > universe) throw std::out_of_range("coordinate outside [1,U]");
  }
  if (points.size() >= 0xfffffff0u) throw std::length_error("too many points");
  Impl& m = *impl_;
  m.d = d;
  m.universe = universe;
  m.eps = epsilon;
  m.params = params;
  if (d == 3) {
    m.direct = std::make_unique<Full3D>(points, universe, params);
    return;
  }
  m.points = points;
  const u32 n = static_cast<u32>(points.size());
  m.b = fanout_for(n, epsilon);
  m.sorted.assign(d, {});
  m.pos.assign(std::size_t{n} * d, 0);
  std::vector<u32> idx(n);
  for (std::size_t a = 0; a < d; ++a) {
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](u32 i, u32 j) {
      return points[i][a] != points[j][a] ? points[i][a] < points[j][a] : i < j;
    });
    m.sorted[a].resize(n);
    for (u32 r = 0; r < n; ++r) {
      m.pos[idx[r] * d + a] = r + 1;
      m.sorted[a][r] = points[idx[r]][a];
    }
  }
  m.order = std::move(idx);
  if (n > 0) m.make(0, n, 0);
}

DDTree::~DDTree() = default;
DDTree::DDTree(DDTree&&) noexcept = default;
DDTree& DDTree::operator=(DDTree&&) noexcept = default;

std::size_t DDTree::report(const QueryBox& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t DDTree::report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const {
  const Impl& m = *impl_;
  if (q.dim() != m.d) throw DimensionMismatch("query dimension differs from d");
  if (m.direct) return m.direct->report(q, sink, st);
  if (m.nodes.empty()) return 0;
  const std::size_t before = sink.count();
  Forward fwd(m.points, sink);
  Impl::Ctx cx{std::vector<u32>(m.d), std::vector<u32>(m.d), QueryBox{}, sink, fwd, st,
               std::vector<std::uint64_t>(m.height + 2, 0)};
  std::vector<AxisBound> lb;
  for (std::size_t a = 0; a < m.d; ++a) {
    const auto& s = m.sorted[a];
    const Coord lo = detail::lower_of(q[a]), hi = detail::upper_of(q[a]);
    cx.plo[a] = static_cast<u32>(std::lower_bound(s.begin(), s.end(), lo) - s.begin()) + 1;
    cx.phi[a] = static_cast<u32>(std::upper_bound(s.begin(), s.end(), hi) - s.begin());
    if (cx.plo[a] > cx.phi[a]) return 0;
    if (a + 1 < m.d) lb.push_back(AxisBound::closed(cx.plo[a], cx.phi[a]));
  }
  cx.lower_q = QueryBox(std::move(lb));
  m.query(cx.plo[m.d - 1] - 1, cx.phi[m.d - 1], cx);
  std::uint64_t total = 0, peak = 0;
  for (std::uint64_t c : cx.per_level) {
    total += c;
    peak = std::max(peak, c);
  }
  st.dd_probes += total;
  st.dd_max_probes_per_level = std::max(st.dd_max_probes_per_level, peak);
  return sink.count() - before;
}

std::size_t DDTree::size() const { return impl_->direct ? impl_->direct->size() : impl_->points.size(); }
std::size_t DDTree::dim() const { return impl_->d; }
unsigned DDTree::fanout() const { return impl_->b; }
unsigned DDTree::height() const { return impl_->height; }
std::size_t DDTree::structures() const { return impl_->direct ? 1 : impl_->structure_count(); }

void DDTree::account(SpaceLedger& ledger) const {
  const Impl& m = *impl_;
  if (m.direct) return m.direct->account(ledger);
  const std::uint64_t n = m.points.size();
  const std::uint64_t nn = std::max<std::uint64_t>(n, 2);
  std::uint64_t sorted_bytes = 0;
  for (const auto& s : m.sorted) sorted_bytes += vec_bytes(s);
  ledger.add("dd.sorted", 0, n, m.universe, static_cast<unsigned>(m.d), sorted_bytes);
  ledger.add("dd.positions", 0, n, nn, static_cast<unsigned>(m.d), vec_bytes(m.pos) + vec_bytes(m.order));
  ledger.add("dd.tree", 0, m.nodes.size(), nn, 6, vec_bytes(m.nodes) + vec_bytes(m.kids));
  ledger.add("dd.runs", 0, m.runs.size(), std::max<std::uint64_t>(m.lowers.size(), 2), 1, vec_bytes(m.runs));
  for (const auto& low : m.lowers) {
    if (low.f3)
      low.f3->account(ledger);
    else
      low.dd->account(ledger);
  }
}

// --------------------------------------------------------------- LogMethod

struct LogMethod::Impl {
  Coord universe = 0;
  RecursionParams params;
  std::size_t cap = 64;
  std::size_t n = 0;
  PointSet buffer;
  std::vector<std::unique_ptr<Full3D>> slots;
  std::uint64_t work = 0;
  double ms = 0;

  void carry() {
    PointSet merged = std::move(buffer);
    buffer = {};
    std::size_t k = 0;
    for (; k < slots.size() && slots[k]; ++k) {
      const PointSet& ps = slots[k]->points();
      merged.insert(merged.end(), ps.begin(), ps.end());
      slots[k].reset();
    }
    if (k == slots.size()) slots.emplace_back();
    const auto t0 = std::chrono::steady_clock::now();
    slots[k] = std::make_unique<Full3D>(merged, universe, params);
    ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    work += merged.size();
  }
};

LogMethod::LogMethod(Coord universe, const RecursionParams& params, std::size_t buffer)
    : impl_(std::make_unique<Impl>()) {
  if (universe < 1) throw std::invalid_argument("universe must be at least 1");
  if (buffer < 1) throw std::invalid_argument("buffer must hold at least one point");
  if (params.compact) throw std::invalid_argument("LogMethod takes full-mode parameters");
  params.validate();
  impl_->universe = universe;
  impl_->params = params;
  impl_->cap = buffer;
}

LogMethod::~LogMethod() = default;
LogMethod::LogMethod(LogMethod&&) noexcept = default;
LogMethod& LogMethod::operator=(LogMethod&&) noexcept = default;

void LogMethod::insert(const Point& p) {
  Impl& m = *impl_;
  if (p.dim() != 3) throw DimensionMismatch("expected a 3D point");
  for (int a = 0; a < 3; ++a)
    if (p[a] < 1 || p[a] > m.universe) throw std::out_of_range("coordinate outside [1,U]");
  m.buffer.push_back(p);
  ++m.n;
  if (m.buffer.size() >= m.cap) m.carry();
}

std::size_t LogMethod::report(const QueryBox& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t LogMethod::report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const {
  if (q.dim() != 3) throw DimensionMismatch("expected a 3D query");
  const Impl& m = *impl_;
  const std::size_t before = sink.count();
  for (const Point& p : m.buffer) {
    if (sink.stopped()) break;
    if (contains(q, p)) sink.accept(p);
  }
  for (const auto& s : m.slots)
    if (s && !sink.stopped()) s->report(q, sink, st);
  return sink.count() - before;
}

std::size_t LogMethod::size() const { return impl_->n; }
std::size_t LogMethod::buffered() const { return impl_->buffer.size(); }

std::size_t LogMethod::substructures() const {
  std::size_t c = 0;
  for (const auto& s : impl_->slots) c += s ? 1 : 0;
  return c;
}

std::vector<std::size_t> LogMethod::slot_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& s : impl_->slots) out.push_back(s ? s->size() : 0);
  return out;
}

std::uint64_t LogMethod::rebuild_work() const { return impl_->work; }
double LogMethod::rebuild_ms() const { return impl_->ms; }

bool LogMethod::census_ok() const {
  const Impl& m = *impl_;
  std::vector<PointId> ids;
  ids.reserve(m.n);
  for (const Point& p : m.buffer) ids.push_back(p.id);
  for (const auto& s : m.slots)
    if (s)
      for (const Point& p : s->points()) ids.push_back(p.id);
  if (ids.size() != m.n) return false;
  std::sort(ids.begin(), ids.end());
  return std::adjacent_find(ids.begin(), ids.end()) == ids.end();
}

void LogMethod::account(SpaceLedger& ledger) const {
  const Impl& m = *impl_;
  ledger.add("semidyn.buffer", 0, m.buffer.size(), m.universe, 3, vec_bytes(m.buffer));
  for (const auto& s : m.slots)
    if (s) s->account(ledger);
}

}  // namespace orr
