#include "orr/detail/slab_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orr/slab.hpp"

namespace orr::detail {

namespace {

using Fn = FunctionRef<void(const Pt&)>;

// Collects the identity of every point a node reports, to catch overlap
// between its sub-queries.
struct Tally {
  const Sink& out;
  bool by_key;
  std::vector<u32> seen;

  void operator()(const Pt& p) {
    seen.push_back(by_key ? p.key : p.c[0]);
    out(p);
  }
  void finish(QueryStats& st) {
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) ++st.overlap_violations;
  }
};

std::size_t slab_index(const std::vector<u32>& bounds, u32 c) {
  return static_cast<std::size_t>(std::lower_bound(bounds.begin(), bounds.end(), c) - bounds.begin());
}

std::vector<u32> sorted_axis(const std::vector<Pt>& pts, int a) {
  std::vector<u32> v;
  v.reserve(pts.size());
  for (const Pt& p : pts) v.push_back(p.c[a]);
  std::sort(v.begin(), v.end());
  return v;
}

// Builds the frame of slice W and returns W in that frame.
std::vector<Pt> enter_frame(std::vector<Pt> w, u32 universe, bool reduce, SliceFrame& f,
                            BuildContext& ctx) {
  if (!reduce) {
    f.universe = universe;
    return w;
  }
  f.ranks = AxisRanks::of(w);
  f.reduced = true;
  f.universe = static_cast<u32>(w.size());
  for (Pt& p : w)
    for (int a = 0; a < 3; ++a) p.c[a] = f.ranks.rank(a, p.c[a]);
  ++ctx.mappers;
  return w;
}

void account_frame(const SliceFrame& f, SpaceLedger& ledger, int level, u32 parent_universe) {
  if (!f.reduced) return;
  ledger.add("slab.mapper", level, f.ranks.size(), parent_universe, 3, f.ranks.bytes());
}

}  // namespace

std::size_t slab_count(std::size_t m, double target) {
  if (m < 2) return 1;
  const double s = std::round(static_cast<double>(m) / std::max(target, 1.0));
  return std::clamp<std::size_t>(static_cast<std::size_t>(s), 2, m);
}

std::vector<u32> cut_slabs(const std::vector<u32>& sorted, std::size_t slabs) {
  std::vector<u32> b;
  const std::size_t m = sorted.size();
  if (m == 0) return b;
  slabs = std::clamp<std::size_t>(slabs, 1, m);
  for (std::size_t k = 1; k <= slabs; ++k) {
    const std::size_t end = (k * m + slabs / 2) / slabs;  // round(k*m/slabs)
    const u32 v = sorted[std::max<std::size_t>(end, 1) - 1];
    if (b.empty() || v > b.back()) b.push_back(v);
  }
  if (b.back() != sorted.back()) b.push_back(sorted.back());
  return b;
}

// ---------------------------------------------------------------- Terminal

Terminal::Terminal(std::vector<Pt> pts) {
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.c[2] < b.c[2]; });
  pts_ = PackedPts(pts);
}

void Terminal::query(const Box3& q, const Sink& sink, QueryStats&) const {
  // first index whose z passes `below`
  auto first = [&](auto below) {
    u32 lo = 0, hi = pts_.size();
    while (lo < hi) {
      const u32 mid = (lo + hi) / 2;
      if (below(pts_.coord(mid, 2))) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  };
  const u32 lo = first([&](u32 z) { return z < q.lo[2]; });
  const u32 hi = first([&](u32 z) { return z <= q.hi[2]; });
  for (u32 i = lo; i < hi; ++i) {
    if (sink.done()) return;
    const Pt p = pts_[i];
    if (p.c[0] >= q.lo[0] && p.c[0] <= q.hi[0] && p.c[1] >= q.lo[1] && p.c[1] <= q.hi[1]) sink(p);
  }
}

void Terminal::account(SpaceLedger& ledger, int level, u32 universe) const {
  ledger.add("slab.terminal", level, pts_.size(), universe, 3, pts_.bytes());
}

// --------------------------------------------------------------- CellTable

CellTable::CellTable(std::vector<CellEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const CellEntry& a, const CellEntry& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    return a.p.c[2] < b.p.c[2];
  });
  std::vector<u32> ci, cj, cb;
  for (u32 k = 0; k < entries.size(); ++k) {
    if (k == 0 || entries[k].i != entries[k - 1].i || entries[k].j != entries[k - 1].j) {
      ci.push_back(entries[k].i);
      cj.push_back(entries[k].j);
      cb.push_back(k);
    }
  }
  cb.push_back(static_cast<u32>(entries.size()));
  const u32 nc = static_cast<u32>(ci.size());

  // kd order over the cells, then regroup the lists in that order
  cell_i_ = ci;
  cell_j_ = cj;
  std::vector<u32> order(nc);
  std::iota(order.begin(), order.end(), 0u);
  cell_begin_ = order;  // scratch: original cell id per kd slot
  if (nc > 0) {
    nodes_.reserve(2 * (nc / kLeaf + 1));
    // build() permutes cell_i_/cell_j_/cell_begin_ together
    build(0, nc);
  }
  std::vector<u32> orig = std::move(cell_begin_);
  cell_begin_.assign(nc + 1, 0);
  std::vector<Pt> grouped;
  grouped.reserve(entries.size());
  for (u32 c = 0; c < nc; ++c) {
    cell_begin_[c] = static_cast<u32>(grouped.size());
    for (u32 k = cb[orig[c]]; k < cb[orig[c] + 1]; ++k) grouped.push_back(entries[k].p);
  }
  cell_begin_[nc] = static_cast<u32>(grouped.size());
  pts_ = PackedPts(grouped);
  // minima are known only now that the lists are regrouped
  for (Node& nd : nodes_) nd.zmin = 0xffffffffu;
  for (u32 id = static_cast<u32>(nodes_.size()); id-- > 0;) {
    Node& nd = nodes_[id];
    if (nd.left == kNone) {
      for (u32 c = nd.begin; c < nd.end; ++c) nd.zmin = std::min(nd.zmin, pts_.coord(cell_begin_[c], 2));
    } else {
      nd.zmin = std::min(nodes_[nd.left].zmin, nodes_[nd.right].zmin);
    }
  }
}

u32 CellTable::build(u32 begin, u32 end) {
  const u32 id = static_cast<u32>(nodes_.size());
  nodes_.push_back(Node{0xffffffffu, 0, 0xffffffffu, 0, 0, begin, end, kNone, kNone});
  for (u32 c = begin; c < end; ++c) {
    Node& nd = nodes_[id];
    nd.ilo = std::min(nd.ilo, cell_i_[c]);
    nd.ihi = std::max(nd.ihi, cell_i_[c]);
    nd.jlo = std::min(nd.jlo, cell_j_[c]);
    nd.jhi = std::max(nd.jhi, cell_j_[c]);
  }
  if (end - begin <= kLeaf) return id;
  const Node nd = nodes_[id];
  const bool by_i = (nd.ihi - nd.ilo) >= (nd.jhi - nd.jlo);
  const u32 mid = begin + (end - begin) / 2;
  std::vector<u32> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  std::nth_element(idx.begin(), idx.begin() + (mid - begin), idx.end(), [&](u32 a, u32 b) {
    return by_i ? std::pair{cell_i_[a], cell_j_[a]} < std::pair{cell_i_[b], cell_j_[b]}
                : std::pair{cell_j_[a], cell_i_[a]} < std::pair{cell_j_[b], cell_i_[b]};
  });
  std::vector<u32> ti, tj, tb;
  for (u32 k : idx) {
    ti.push_back(cell_i_[k]);
    tj.push_back(cell_j_[k]);
    tb.push_back(cell_begin_[k]);
  }
  std::copy(ti.begin(), ti.end(), cell_i_.begin() + begin);
  std::copy(tj.begin(), tj.end(), cell_j_.begin() + begin);
  std::copy(tb.begin(), tb.end(), cell_begin_.begin() + begin);
  const u32 l = build(begin, mid);
  const u32 r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void CellTable::walk(u32 cell, u32 zmax, const Sink& sink, QueryStats& st) const {
  ++st.columns_walked;
  for (u32 k = cell_begin_[cell]; k < cell_begin_[cell + 1]; ++k) {
    if (sink.done()) return;
    ++st.column_touched;
    if (pts_.coord(k, 2) > zmax) return;
    ++st.column_reported;
    sink(pts_[k]);
  }
}

void CellTable::visit(u32 id, u32 ilo, u32 ihi, u32 jlo, u32 jhi, u32 zmax, const Sink& sink,
                      QueryStats& st) const {
  const Node& nd = nodes_[id];
  if (nd.zmin > zmax || nd.ihi < ilo || nd.ilo > ihi || nd.jhi < jlo || nd.jlo > jhi) return;
  if (nd.left == kNone) {
    for (u32 c = nd.begin; c < nd.end && !sink.done(); ++c)
      if (cell_i_[c] >= ilo && cell_i_[c] <= ihi && cell_j_[c] >= jlo && cell_j_[c] <= jhi &&
          pts_.coord(cell_begin_[c], 2) <= zmax)
        walk(c, zmax, sink, st);
    return;
  }
  visit(nd.left, ilo, ihi, jlo, jhi, zmax, sink, st);
  if (!sink.done()) visit(nd.right, ilo, ihi, jlo, jhi, zmax, sink, st);
}

void CellTable::query(u32 ilo, u32 ihi, u32 jlo, u32 jhi, u32 zmax, const Sink& sink,
                      QueryStats& st) const {
  ++st.cell_queries;
  if (nodes_.empty() || ilo > ihi || jlo > jhi) return;
  visit(0, ilo, ihi, jlo, jhi, zmax, sink, st);
}

void CellTable::account(SpaceLedger& ledger, int level, u32 universe, u32 slabs, bool min_only) const {
  const std::uint64_t nc = cell_i_.size();
  // one (i,j,z) record per point, or per nonempty cell plus the cell lists
  const char* kind = min_only ? "slab.cells.min" : "slab.cells.full";
  ledger.add_bits(kind, level, min_only ? nc : pts_.size(),
                  (min_only ? nc : pts_.size()) * (2ull * bits_for(slabs) + bits_for(universe)),
                  vec_bytes(cell_i_) + vec_bytes(cell_j_) + vec_bytes(cell_begin_));
  ledger.add("slab.cells.lists", level, pts_.size(), universe, 3, pts_.bytes());
  ledger.add_bits("slab.cells.index", level, nodes_.size(),
                  nodes_.size() * (4ull * bits_for(slabs) + bits_for(universe) + 4ull * bits_for(std::max<std::uint64_t>(nc, 2))),
                  vec_bytes(nodes_));
}

// ------------------------------------------------------------------ frames

bool map_box(const AxisRanks* ranks, const Box3& in, Box3& out) {
  if (!ranks) {
    out = in;
    return !in.empty();
  }
  for (int a = 0; a < 3; ++a) {
    out.lo[a] = ranks->lower(a, in.lo[a]);
    out.hi[a] = ranks->upper(a, in.hi[a]);
    if (out.lo[a] > out.hi[a]) return false;
  }
  return true;
}

Pt to_side_frame(const Pt& p, S221::Side side, u32 u) {
  Pt o = p;
  switch (side) {
    case S221::Side::PlusX: o.c = {p.c[1], reflect(p.c[0], u), p.c[2]}; break;
    case S221::Side::MinusX: o.c = {p.c[1], p.c[0], p.c[2]}; break;
    case S221::Side::PlusY: o.c = {p.c[0], reflect(p.c[1], u), p.c[2]}; break;
    case S221::Side::MinusY: break;
  }
  return o;
}

Pt from_side_frame(const Pt& p, S221::Side side, u32 u) {
  Pt o = p;
  switch (side) {
    case S221::Side::PlusX: o.c = {reflect(p.c[1], u), p.c[0], p.c[2]}; break;
    case S221::Side::MinusX: o.c = {p.c[1], p.c[0], p.c[2]}; break;
    case S221::Side::PlusY: o.c = {p.c[0], reflect(p.c[1], u), p.c[2]}; break;
    case S221::Side::MinusY: break;
  }
  return o;
}

// -------------------------------------------------------------------- S211

struct S211::XSlice {
  SliceFrame frame;
  Ladder plus, minus;  // (+,-,-) and (-,-,-) in the node frame
  S211 child;
};
struct S211::YSlice {
  SliceFrame frame;
  S211 child;
};
struct S211::Body {
  std::vector<u32> xb, yb;
  CellTable cells;
  std::vector<XSlice> xs;
  std::vector<YSlice> ys;
};

S211::S211(std::vector<Pt> pts, u32 universe, int level, BuildContext& ctx)
    : n_(static_cast<u32>(pts.size())), universe_(universe), level_(static_cast<std::int16_t>(level)), compact_(ctx.compact) {
  ++ctx.nodes;
  ctx.max_level = std::max(ctx.max_level, level);
  if (n_ <= ctx.terminal_limit) {
    term_ = Terminal(std::move(pts));
    return;
  }
  body_ = std::make_unique<Body>();
  Body& B = *body_;
  const std::size_t s = slab_count(n_, ctx.params->slab_target(n_));
  B.xb = cut_slabs(sorted_axis(pts, 0), s);
  B.yb = cut_slabs(sorted_axis(pts, 1), s);

  std::vector<std::vector<Pt>> xpart(B.xb.size()), ypart(B.yb.size());
  std::vector<CellEntry> entries;
  entries.reserve(n_);
  for (const Pt& p : pts) {
    const std::size_t i = slab_index(B.xb, p.c[0]), j = slab_index(B.yb, p.c[1]);
    xpart[i].push_back(p);
    ypart[j].push_back(p);
    entries.push_back(CellEntry{static_cast<u32>(i + 1), static_cast<u32>(j + 1), p});
  }
  pts.clear();
  pts.shrink_to_fit();
  B.cells = CellTable(std::move(entries));

  const bool reduce = ctx.reduces_at(level);
  B.xs.resize(B.xb.size());
  for (std::size_t i = 0; i < B.xb.size(); ++i) {
    XSlice& x = B.xs[i];
    x.plus = Ladder(xpart[i], {1, -1, -1});
    x.minus = Ladder(xpart[i], {-1, -1, -1});
    auto local = enter_frame(std::move(xpart[i]), universe, reduce, x.frame, ctx);
    x.child = S211(std::move(local), x.frame.universe, level + 1, ctx);
  }
  B.ys.resize(B.yb.size());
  for (std::size_t j = 0; j < B.yb.size(); ++j) {
    YSlice& y = B.ys[j];
    auto local = enter_frame(std::move(ypart[j]), universe, reduce, y.frame, ctx);
    y.child = S211(std::move(local), y.frame.universe, level + 1, ctx);
  }
}

S211::~S211() = default;
S211::S211(S211&&) noexcept = default;
S211& S211::operator=(S211&&) noexcept = default;

int S211::depth() const {
  int d = level_;
  if (!body_) return d;
  const Body& B = *body_;
  for (const auto& x : B.xs) d = std::max(d, x.child.depth());
  for (const auto& y : B.ys) d = std::max(d, y.child.depth());
  return d;
}

void S211::to_child(const SliceFrame& f, const S211& child, const Box3& q, const Sink& sink,
                    QueryStats& st) const {
  Box3 m;
  const AxisRanks* r = f.mapper();
  if (!map_box(r, q, m)) return;
  if (!compact_ || !r) {
    child.query(m, sink, st);
    return;
  }
  auto back = [&](const Pt& p) {
    Pt o = p;
    for (int a = 0; a < 3; ++a) o.c[a] = r->coord(a, p.c[a]);
    ++st.unmap_steps;
    sink(o);
  };
  child.query(m, Sink{Fn(back), sink.stop}, st);
}

void S211::query(const Box3& q, const Sink& sink, QueryStats& st) const {
  if (sink.done()) return;
  st.note_level(level_);
  if (!body_) {
    ++st.terminal_scans;
    term_.query(Box3{{q.lo[0], 1, 1}, q.hi}, sink, st);
    return;
  }
  ++st.steps211;
  const Body& B = *body_;
  const u32 a = q.lo[0], b = q.hi[0], c = q.hi[1], d = q.hi[2];
  if (a > b) return;
  const std::size_t sx = B.xb.size(), sy = B.yb.size();
  const std::size_t i1 = slab_index(B.xb, a) + 1;
  if (i1 > sx) return;
  const std::size_t i2 = static_cast<std::size_t>(std::upper_bound(B.xb.begin(), B.xb.end(), b) - B.xb.begin()) + 1;
  const std::size_t j1 = static_cast<std::size_t>(std::upper_bound(B.yb.begin(), B.yb.end(), c) - B.yb.begin()) + 1;

  Tally tally{sink, !compact_, {}};
  const Sink tsink{Fn(tally), sink.stop};
  const Sink& out = st.check_disjoint ? tsink : sink;
  const Box3 canon{{a, 1, 1}, {b, c, d}};

  std::uint64_t arity = 0;
  if (i1 == i2) {
    ++arity;
    ++st.transfers;
    to_child(B.xs[i1 - 1].frame, B.xs[i1 - 1].child, canon, out, st);
  } else if (j1 == 1) {
    ++arity;
    ++st.transfers;
    to_child(B.ys[0].frame, B.ys[0].child, canon, out, st);
  } else {
    const bool interior = i1 + 1 <= i2 - 1;
    if (interior) {
      ++arity;
      B.cells.query(static_cast<u32>(i1 + 1), static_cast<u32>(i2 - 1), 1, static_cast<u32>(j1 - 1), d, out, st);
    }
    ++arity;
    ++st.dominance_queries;
    B.xs[i1 - 1].plus.report({a, c, d}, out, st);
    if (i2 <= sx) {
      ++arity;
      ++st.dominance_queries;
      B.xs[i2 - 1].minus.report({b, c, d}, out, st);
    }
    if (interior && j1 <= sy) {
      ++arity;
      ++st.subqueries;
      const Box3 inner{{B.xb[i1 - 1] + 1, 1, 1}, {B.xb[i2 - 2], c, d}};
      to_child(B.ys[j1 - 1].frame, B.ys[j1 - 1].child, inner, out, st);
    }
  }
  st.max_arity211 = std::max(st.max_arity211, arity);
  if (st.check_disjoint) tally.finish(st);
}

void S211::account(SpaceLedger& ledger) const {
  if (!body_) {
    term_.account(ledger, level_, universe_);
    return;
  }
  const Body& B = *body_;
  ledger.add("slab.bounds", level_, B.xb.size() + B.yb.size(), universe_, 1, vec_bytes(B.xb) + vec_bytes(B.yb));
  B.cells.account(ledger, level_, universe_, static_cast<u32>(std::max(B.xb.size(), B.yb.size())), compact_);
  for (const auto& x : B.xs) {
    x.plus.account(ledger, level_, universe_);
    x.minus.account(ledger, level_, universe_);
    account_frame(x.frame, ledger, level_ + 1, universe_);
    x.child.account(ledger);
  }
  for (const auto& y : B.ys) {
    account_frame(y.frame, ledger, level_ + 1, universe_);
    y.child.account(ledger);
  }
}

// -------------------------------------------------------------------- S221

struct S221::Slice {
  SliceFrame frame;
  S221 child;
  S211 plus, minus;
};
struct S221::Body {
  std::vector<u32> xb, yb;
  CellTable cells;
  std::vector<Slice> xs, ys;
};

S221::S221(std::vector<Pt> pts, u32 universe, int level, BuildContext& ctx)
    : n_(static_cast<u32>(pts.size())), universe_(universe), level_(static_cast<std::int16_t>(level)), compact_(ctx.compact) {
  ++ctx.nodes;
  ctx.max_level = std::max(ctx.max_level, level);
  if (n_ <= ctx.terminal_limit) {
    term_ = Terminal(std::move(pts));
    return;
  }
  body_ = std::make_unique<Body>();
  Body& B = *body_;
  const std::size_t s = slab_count(n_, ctx.params->slab_target(n_));
  B.xb = cut_slabs(sorted_axis(pts, 0), s);
  B.yb = cut_slabs(sorted_axis(pts, 1), s);

  std::vector<std::vector<Pt>> xpart(B.xb.size()), ypart(B.yb.size());
  std::vector<CellEntry> entries;
  entries.reserve(n_);
  for (const Pt& p : pts) {
    const std::size_t i = slab_index(B.xb, p.c[0]), j = slab_index(B.yb, p.c[1]);
    xpart[i].push_back(p);
    ypart[j].push_back(p);
    entries.push_back(CellEntry{static_cast<u32>(i + 1), static_cast<u32>(j + 1), p});
  }
  pts.clear();
  pts.shrink_to_fit();
  B.cells = CellTable(std::move(entries));

  const bool reduce = ctx.reduces_at(level);
  auto side_points = [](const std::vector<Pt>& w, Side side, u32 u) {
    std::vector<Pt> t;
    t.reserve(w.size());
    for (const Pt& p : w) t.push_back(to_side_frame(p, side, u));
    return t;
  };
  auto make = [&](std::vector<Pt> part, Side plus, Side minus) {
    Slice sl;
    auto local = enter_frame(std::move(part), universe, reduce, sl.frame, ctx);
    const u32 u = sl.frame.universe;
    sl.plus = S211(side_points(local, plus, u), u, level + 1, ctx);
    sl.minus = S211(side_points(local, minus, u), u, level + 1, ctx);
    sl.child = S221(std::move(local), u, level + 1, ctx);
    return sl;
  };
  for (auto& part : xpart) B.xs.push_back(make(std::move(part), Side::PlusX, Side::MinusX));
  for (auto& part : ypart) B.ys.push_back(make(std::move(part), Side::PlusY, Side::MinusY));
}

S221::~S221() = default;
S221::S221(S221&&) noexcept = default;
S221& S221::operator=(S221&&) noexcept = default;

int S221::depth() const {
  int d = level_;
  if (!body_) return d;
  const Body& B = *body_;
  for (const auto* v : {&B.xs, &B.ys})
    for (const auto& s : *v) d = std::max({d, s.child.depth(), s.plus.depth(), s.minus.depth()});
  return d;
}

void S221::to_child(const Slice& s, const Box3& q, const Sink& sink, QueryStats& st) const {
  Box3 m;
  const AxisRanks* r = s.frame.mapper();
  if (!map_box(r, q, m)) return;
  if (!compact_ || !r) {
    s.child.query(m, sink, st);
    return;
  }
  auto back = [&](const Pt& p) {
    Pt o = p;
    for (int a = 0; a < 3; ++a) o.c[a] = r->coord(a, p.c[a]);
    ++st.unmap_steps;
    sink(o);
  };
  s.child.query(m, Sink{Fn(back), sink.stop}, st);
}

void S221::to_side(const Slice& s, Side side, const Box3& q, const Sink& sink, QueryStats& st) const {
  Box3 m;
  const AxisRanks* r = s.frame.mapper();
  if (!map_box(r, q, m)) return;
  const u32 u = s.frame.universe;
  Box3 t{{1, 1, 1}, {0, 0, m.hi[2]}};
  const S211* target = nullptr;
  switch (side) {
    case Side::PlusX:
      t.lo[0] = m.lo[1], t.hi[0] = m.hi[1], t.hi[1] = reflect(m.lo[0], u), target = &s.plus;
      break;
    case Side::MinusX:
      t.lo[0] = m.lo[1], t.hi[0] = m.hi[1], t.hi[1] = m.hi[0], target = &s.minus;
      break;
    case Side::PlusY:
      t.lo[0] = m.lo[0], t.hi[0] = m.hi[0], t.hi[1] = reflect(m.lo[1], u), target = &s.plus;
      break;
    case Side::MinusY:
      t.lo[0] = m.lo[0], t.hi[0] = m.hi[0], t.hi[1] = m.hi[1], target = &s.minus;
      break;
  }
  ++st.subqueries;
  if (!compact_) {
    target->query(t, sink, st);
    return;
  }
  auto back = [&](const Pt& p) {
    Pt o = from_side_frame(p, side, u);
    if (r)
      for (int a = 0; a < 3; ++a) o.c[a] = r->coord(a, o.c[a]);
    ++st.unmap_steps;
    sink(o);
  };
  target->query(t, Sink{Fn(back), sink.stop}, st);
}

void S221::query(const Box3& q, const Sink& sink, QueryStats& st) const {
  if (sink.done()) return;
  st.note_level(level_);
  if (!body_) {
    ++st.terminal_scans;
    term_.query(Box3{{q.lo[0], q.lo[1], 1}, q.hi}, sink, st);
    return;
  }
  ++st.steps221;
  const Body& B = *body_;
  const u32 a = q.lo[0], b = q.hi[0], c = q.lo[1], d = q.hi[1], e = q.hi[2];
  if (a > b || c > d) return;
  const std::size_t sx = B.xb.size(), sy = B.yb.size();
  const std::size_t i1 = slab_index(B.xb, a) + 1;
  const std::size_t j1 = slab_index(B.yb, c) + 1;
  if (i1 > sx || j1 > sy) return;
  const std::size_t i2 = static_cast<std::size_t>(std::upper_bound(B.xb.begin(), B.xb.end(), b) - B.xb.begin()) + 1;
  const std::size_t j2 = static_cast<std::size_t>(std::upper_bound(B.yb.begin(), B.yb.end(), d) - B.yb.begin()) + 1;

  Tally tally{sink, !compact_, {}};
  const Sink tsink{Fn(tally), sink.stop};
  const Sink& out = st.check_disjoint ? tsink : sink;
  const Box3 canon{{a, c, 1}, {b, d, e}};

  std::uint64_t arity = 0;
  if (i1 == i2) {
    ++arity;
    ++st.transfers;
    to_child(B.xs[i1 - 1], canon, out, st);
  } else if (j1 == j2) {
    ++arity;
    ++st.transfers;
    to_child(B.ys[j1 - 1], canon, out, st);
  } else {
    const bool interior = i1 + 1 <= i2 - 1;
    if (interior && j1 + 1 <= j2 - 1) {
      ++arity;
      B.cells.query(static_cast<u32>(i1 + 1), static_cast<u32>(i2 - 1), static_cast<u32>(j1 + 1),
                   static_cast<u32>(j2 - 1), e, out, st);
    }
    ++arity;
    to_side(B.xs[i1 - 1], Side::PlusX, Box3{{a, c, 1}, {universe_, d, e}}, out, st);
    if (i2 <= sx) {
      ++arity;
      to_side(B.xs[i2 - 1], Side::MinusX, Box3{{1, c, 1}, {b, d, e}}, out, st);
    }
    if (interior) {
      const u32 xl = B.xb[i1 - 1] + 1, xh = B.xb[i2 - 2];
      ++arity;
      to_side(B.ys[j1 - 1], Side::PlusY, Box3{{xl, c, 1}, {xh, universe_, e}}, out, st);
      if (j2 <= sy) {
        ++arity;
        to_side(B.ys[j2 - 1], Side::MinusY, Box3{{xl, 1, 1}, {xh, d, e}}, out, st);
      }
    }
  }
  st.max_arity221 = std::max(st.max_arity221, arity);
  if (st.check_disjoint) tally.finish(st);
}

void S221::account(SpaceLedger& ledger) const {
  if (!body_) {
    term_.account(ledger, level_, universe_);
    return;
  }
  const Body& B = *body_;
  ledger.add("slab.bounds", level_, B.xb.size() + B.yb.size(), universe_, 1, vec_bytes(B.xb) + vec_bytes(B.yb));
  B.cells.account(ledger, level_, universe_, static_cast<u32>(std::max(B.xb.size(), B.yb.size())), compact_);
  for (const auto* v : {&B.xs, &B.ys})
    for (const auto& s : *v) {
      account_frame(s.frame, ledger, level_ + 1, universe_);
      s.child.account(ledger);
      s.plus.account(ledger);
      s.minus.account(ledger);
    }
}

namespace {
const std::vector<u32> kNoBounds;
}

const std::vector<u32>& S211::x_bounds() const { return body_ ? body_->xb : kNoBounds; }
const std::vector<u32>& S211::y_bounds() const { return body_ ? body_->yb : kNoBounds; }
const std::vector<u32>& S221::x_bounds() const { return body_ ? body_->xb : kNoBounds; }
const std::vector<u32>& S221::y_bounds() const { return body_ ? body_->yb : kNoBounds; }

}  // namespace orr::detail
