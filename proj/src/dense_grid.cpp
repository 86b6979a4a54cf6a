#include "orr/dense_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace orr {

namespace {

using u32 = std::uint32_t;

std::uint32_t fanout_for(Coord m, double eps) {
  const double v = std::pow(static_cast<double>(m), eps);
  const double r = std::round(v);
  Coord b = std::abs(r - v) < 1e-9 * std::max(1.0, v) ? static_cast<Coord>(r)
                                                       : static_cast<Coord>(std::ceil(v));
  return static_cast<std::uint32_t>(std::max<Coord>(2, b));
}

int height_for(Coord m, std::uint32_t b) {
  int h = 1;
  for (Coord cover = b; cover < m; ++h) cover *= b;
  return h;
}

Coord ipow(Coord b, int e) {
  Coord r = 1;
  while (e-- > 0) r *= b;
  return r;
}

constexpr std::size_t kScanLimit = 8;

std::size_t run_index(std::uint32_t b, std::uint32_t c1, std::uint32_t c2) {
  return static_cast<std::size_t>(c1) * (2 * b - c1 + 1) / 2 + (c2 - c1);
}

}  // namespace

struct DenseGrid::Layer {
  // Tree axes. Runs that hold the same points share one secondary.
  struct Node {
    Coord base = 1;
    std::vector<std::int32_t> child;
    std::vector<std::shared_ptr<const Layer>> runs;
  };
  std::vector<Node> nodes;

  // Last axis: indices sorted by coordinate, plus a successor trie unless
  // the list is short enough to scan.
  std::vector<u32> order;
  std::vector<Coord> keys;
  std::vector<u32> first;           // (b+1) per trie node
  std::vector<std::int32_t> tchild;  // b per trie node

  std::size_t words(std::unordered_set<const Layer*>& seen) const {
    if (!seen.insert(this).second) return 0;
    std::size_t w = order.size() + keys.size() + first.size() + tchild.size();
    for (const Node& nd : nodes) {
      w += 1 + nd.child.size() + nd.runs.size();
      for (const auto& r : nd.runs)
        if (r) w += r->words(seen);
    }
    return w;
  }
};

namespace {

struct Builder {
  const PointSet& pts;
  const std::vector<std::uint32_t>& fan;
  const std::vector<int>& hgt;
  std::size_t d;

  std::shared_ptr<DenseGrid::Layer> build(std::size_t axis, std::vector<u32> idx) const {
    auto L = std::make_shared<DenseGrid::Layer>();
    if (axis + 1 == d) {
      build_last(*L, axis, std::move(idx));
    } else {
      build_tree(*L, axis, idx, 1, 0);
    }
    return L;
  }

  std::int32_t build_tree(DenseGrid::Layer& L, std::size_t axis, const std::vector<u32>& idx,
                          Coord base, int depth) const {
    const std::uint32_t b = fan[axis];
    const int h = hgt[axis];
    const Coord w = ipow(b, h - 1 - depth);
    const auto id = static_cast<std::int32_t>(L.nodes.size());
    L.nodes.emplace_back();
    L.nodes[id].base = base;
    L.nodes[id].child.assign(b, -1);
    L.nodes[id].runs.resize(static_cast<std::size_t>(b) * (b + 1) / 2);

    std::vector<std::vector<u32>> part(b);
    for (u32 i : idx) part[(pts[i][axis] - base) / w].push_back(i);

    auto& runs = L.nodes[id].runs;
    for (std::uint32_t c1 = b; c1-- > 0;) {
      std::vector<u32> acc;
      for (std::uint32_t c2 = c1; c2 < b; ++c2) {
        // the whole range of a non-root node is served by its parent
        if (depth > 0 && c1 == 0 && c2 == b - 1) continue;
        if (part[c1].empty()) {
          if (c2 > c1) runs[run_index(b, c1, c2)] = runs[run_index(b, c1 + 1, c2)];
          continue;
        }
        if (c2 > c1 && part[c2].empty()) {
          runs[run_index(b, c1, c2)] = runs[run_index(b, c1, c2 - 1)];
          continue;
        }
        acc.clear();
        for (std::uint32_t k = c1; k <= c2; ++k) acc.insert(acc.end(), part[k].begin(), part[k].end());
        runs[run_index(b, c1, c2)] = build(axis + 1, acc);
      }
    }
    if (depth + 1 < h) {
      for (std::uint32_t k = 0; k < b; ++k) {
        if (part[k].empty()) continue;
        const std::int32_t c = build_tree(L, axis, part[k], base + k * w, depth + 1);
        L.nodes[id].child[k] = c;
      }
    }
    return id;
  }

  void build_last(DenseGrid::Layer& L, std::size_t axis, std::vector<u32> idx) const {
    std::sort(idx.begin(), idx.end(), [&](u32 a, u32 c) { return pts[a][axis] < pts[c][axis]; });
    L.order = std::move(idx);
    L.keys.reserve(L.order.size());
    for (u32 i : L.order) L.keys.push_back(pts[i][axis]);
    if (L.keys.size() > kScanLimit) build_trie(L, axis, 1, 0, 0, static_cast<u32>(L.keys.size()));
  }

  std::int32_t build_trie(DenseGrid::Layer& L, std::size_t axis, Coord base, int depth, u32 i,
                          u32 j) const {
    const std::uint32_t b = fan[axis];
    const int h = hgt[axis];
    const Coord w = ipow(b, h - 1 - depth);
    const auto id = static_cast<std::int32_t>(L.tchild.size() / b);
    L.first.resize(L.first.size() + b + 1);
    L.tchild.resize(L.tchild.size() + b, -1);
    for (std::uint32_t k = 0; k <= b; ++k) {
      const Coord start = base + k * w;
      L.first[id * (b + 1) + k] =
          static_cast<u32>(std::lower_bound(L.keys.begin() + i, L.keys.begin() + j, start) - L.keys.begin());
    }
    if (depth + 1 < h) {
      for (std::uint32_t k = 0; k < b; ++k) {
        const u32 s = L.first[id * (b + 1) + k], e = L.first[id * (b + 1) + k + 1];
        if (s == e) continue;
        const std::int32_t c = build_trie(L, axis, base + k * w, depth + 1, s, e);
        L.tchild[id * b + k] = c;
      }
    }
    return id;
  }
};

struct Querier {
  const PointSet& pts;
  const std::vector<std::uint32_t>& fan;
  const std::vector<int>& hgt;
  const std::vector<Coord>& sizes;
  std::vector<Coord> lo, hi;
  ReportSink& sink;
  DenseGridStats& st;

  // Index of the first key >= v.
  u32 succ_index(const DenseGrid::Layer& L, std::size_t axis, Coord v, std::size_t& visited) const {
    const std::uint32_t b = fan[axis];
    const int h = hgt[axis];
    if (v > ipow(b, h)) return static_cast<u32>(L.keys.size());
    if (L.tchild.empty()) {
      ++visited;
      u32 i = 0;
      while (i < L.keys.size() && L.keys[i] < v) ++i;
      return i;
    }
    std::int32_t node = 0;
    Coord base = 1;
    for (int depth = 0;; ++depth) {
      ++visited;
      const Coord w = ipow(b, h - 1 - depth);
      const auto k = static_cast<std::uint32_t>((v - base) / w);
      const std::int32_t c = L.tchild[node * b + k];
      if (depth + 1 == h || c < 0) {
        // an absent child holds no keys, so first[k] equals first[k+1]
        return L.first[node * (b + 1) + k];
      }
      node = c;
      base += k * w;
    }
  }

  void layer(const DenseGrid::Layer& L, std::size_t axis) {
    if (sink.stopped()) return;
    if (axis + 1 == sizes.size()) {
      std::size_t visited = 0;
      const u32 i1 = succ_index(L, axis, lo[axis], visited);
      const u32 i2 = succ_index(L, axis, hi[axis] + 1, visited);
      st.max_nodes_per_tree = std::max(st.max_nodes_per_tree, visited);
      ++st.probes;
      for (u32 i = i1; i < i2 && !sink.stopped(); ++i) sink.accept(pts[L.order[i]]);
      return;
    }
    std::size_t visited = 0;
    tree(L, axis, 0, lo[axis], hi[axis], 0, visited);
    st.max_nodes_per_tree = std::max(st.max_nodes_per_tree, visited);
  }

  void tree(const DenseGrid::Layer& L, std::size_t axis, std::int32_t id, Coord a, Coord z,
            int depth, std::size_t& visited) {
    if (sink.stopped()) return;
    ++visited;
    const std::uint32_t b = fan[axis];
    const int h = hgt[axis];
    const auto& nd = L.nodes[id];
    const Coord w = ipow(b, h - 1 - depth);
    const auto k1 = static_cast<std::uint32_t>((a - nd.base) / w);
    const auto k2 = static_cast<std::uint32_t>((z - nd.base) / w);
    const bool left_full = a == nd.base + k1 * w;
    const bool right_full = z == nd.base + (k2 + 1) * w - 1;
    const std::uint32_t f = left_full ? k1 : k1 + 1;
    const std::uint32_t l = right_full ? k2 : k2 - 1;  // wraps when k2 == 0; guarded below
    if (f <= l && (right_full || k2 > 0)) {
      const auto& r = nd.runs[run_index(b, f, l)];
      if (r) layer(*r, axis + 1);
    }
    if (!left_full) {
      const std::int32_t c = nd.child[k1];
      if (c >= 0) tree(L, axis, c, a, std::min(z, nd.base + (k1 + 1) * w - 1), depth + 1, visited);
    }
    if (!right_full && (k2 != k1 || left_full)) {
      const std::int32_t c = nd.child[k2];
      if (c >= 0) tree(L, axis, c, std::max(a, nd.base + k2 * w), z, depth + 1, visited);
    }
  }
};

}  // namespace

DenseGrid::DenseGrid(const PointSet& points, std::vector<Coord> axis_sizes, double eps)
    : sizes_(std::move(axis_sizes)), points_(points) {
  if (sizes_.empty() || sizes_.size() > kMaxDim) throw std::invalid_argument("DenseGrid: bad dimension");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("DenseGrid: eps must lie in (0,1]");
  for (Coord m : sizes_)
    if (m == 0) throw std::invalid_argument("DenseGrid: empty axis");
  for (const Point& p : points_) {
    if (p.dim() != sizes_.size()) throw DimensionMismatch("DenseGrid: point dimension");
    for (std::size_t a = 0; a < sizes_.size(); ++a)
      if (p[a] < 1 || p[a] > sizes_[a]) throw std::out_of_range("DenseGrid: coordinate outside grid");
  }
  for (Coord m : sizes_) {
    fanout_.push_back(fanout_for(m, eps));
    height_.push_back(height_for(m, fanout_.back()));
  }
  std::vector<u32> all(points_.size());
  std::iota(all.begin(), all.end(), 0u);
  Builder bld{points_, fanout_, height_, sizes_.size()};
  root_ = bld.build(0, std::move(all));
}

DenseGrid::DenseGrid(const PointSet& points, std::size_t d, Coord m, double eps)
    : DenseGrid(points, std::vector<Coord>(d, m), eps) {}


std::size_t DenseGrid::report(const QueryBox& q, ReportSink& sink) const {
  DenseGridStats st;
  return report(q, sink, st);
}

std::size_t DenseGrid::report(const QueryBox& q, ReportSink& sink, DenseGridStats& st) const {
  if (q.dim() != sizes_.size()) throw DimensionMismatch("DenseGrid: query dimension");
  if (!root_) return 0;
  const std::size_t before = sink.count();
  Querier qr{points_, fanout_, height_, sizes_, {}, {}, sink, st};
  for (std::size_t a = 0; a < sizes_.size(); ++a) {
    const AxisBound& bd = q[a];
    Coord lo = bd.kind == AxisBound::Kind::UpTo ? 1 : std::max<Coord>(bd.lo, 1);
    Coord hi = bd.kind == AxisBound::Kind::From ? sizes_[a] : std::min(bd.hi, sizes_[a]);
    if (lo > hi) return 0;
    qr.lo.push_back(lo);
    qr.hi.push_back(hi);
  }
  qr.layer(*root_, 0);
  return sink.count() - before;
}

std::size_t DenseGrid::words() const {
  std::unordered_set<const Layer*> seen;
  return root_ ? root_->words(seen) : 0;
}

void DenseGrid::account(SpaceLedger& ledger, int level) const {
  const std::size_t w = words();
  ledger.add("dense.grid", level, w, std::max<std::size_t>(points_.size(), 2), 1,
             w * sizeof(u32) + vec_bytes(points_));
}

ColumnMinStructure::ColumnMinStructure(const PointSet& points, std::vector<Coord> column_sizes,
                                       Coord n, double eps)
    : d_(column_sizes.size() + 1), n_(n) {
  if (column_sizes.empty() || d_ > kMaxDim) throw std::invalid_argument("ColumnMinStructure: bad dimension");
  double product = 1;
  for (Coord u : column_sizes) product *= static_cast<double>(u);
  const double cap = kProductSlack * std::pow(static_cast<double>(n), 1.0 - eps);
  if (product > cap)
    throw std::invalid_argument("ColumnMinStructure: column grid has " + std::to_string(product) +
                                " cells, more than " + std::to_string(cap));
  for (const Point& p : points) {
    if (p.dim() != d_) throw DimensionMismatch("ColumnMinStructure: point dimension");
    for (std::size_t a = 0; a + 1 < d_; ++a)
      if (p[a] < 1 || p[a] > column_sizes[a]) throw std::out_of_range("ColumnMinStructure: column outside grid");
    if (p[d_ - 1] < 1 || p[d_ - 1] > n) throw std::out_of_range("ColumnMinStructure: last coordinate");
  }

  entries_ = points;
  const std::size_t dc = d_ - 1;
  auto same_column = [dc](const Point& a, const Point& b) {
    for (std::size_t k = 0; k < dc; ++k)
      if (a[k] != b[k]) return false;
    return true;
  };
  std::sort(entries_.begin(), entries_.end(), [dc](const Point& a, const Point& b) {
    for (std::size_t k = 0; k <= dc; ++k)
      if (a[k] != b[k]) return a[k] < b[k];
    return a.id < b.id;
  });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i == 0 || !same_column(entries_[i - 1], entries_[i])) {
      Point m = entries_[i];
      m.id = static_cast<PointId>(col_begin_.size());
      minima_.push_back(m);
      col_begin_.push_back(static_cast<u32>(i));
    }
  }
  col_begin_.push_back(static_cast<u32>(entries_.size()));

  for (const Point& m : minima_) min_values_.push_back(m[dc]);
  std::sort(min_values_.begin(), min_values_.end());
  min_values_.erase(std::unique(min_values_.begin(), min_values_.end()), min_values_.end());
  PointSet reduced = minima_;
  for (Point& m : reduced)
    m[dc] = static_cast<Coord>(std::lower_bound(min_values_.begin(), min_values_.end(), m[dc]) -
                               min_values_.begin()) + 1;
  std::vector<Coord> sizes = column_sizes;
  sizes.push_back(std::max<Coord>(1, min_values_.size()));
  grid_ = DenseGrid(reduced, std::move(sizes), eps);
}

std::size_t ColumnMinStructure::report(const QueryBox& qprime, Coord x, ReportSink& sink,
                                       std::size_t* touched) const {
  if (qprime.dim() + 1 != d_) throw DimensionMismatch("ColumnMinStructure: query dimension");
  std::size_t seen = 0;
  if (touched) *touched = 0;
  const auto r = static_cast<Coord>(std::upper_bound(min_values_.begin(), min_values_.end(), x) -
                                    min_values_.begin());
  if (r == 0 || grid_.size() == 0) return 0;
  std::vector<AxisBound> b;
  for (std::size_t a = 0; a < qprime.dim(); ++a) b.push_back(qprime[a]);
  b.push_back(AxisBound::up_to(r));
  std::vector<PointId> cols;
  ReportSink inner([&cols](const Point& p) { cols.push_back(p.id); });
  grid_.report(QueryBox(std::move(b)), inner);

  const std::size_t before = sink.count();
  const std::size_t dc = d_ - 1;
  for (PointId c : cols) {
    for (u32 i = col_begin_[c]; i < col_begin_[c + 1]; ++i) {
      if (sink.stopped()) break;
      ++seen;
      if (entries_[i][dc] > x) break;
      sink.accept(entries_[i]);
    }
  }
  if (touched) *touched = seen;
  return sink.count() - before;
}

void ColumnMinStructure::account(SpaceLedger& ledger, int level) const {
  ledger.add("dense.columns", level, entries_.size(), std::max<Coord>(n_, 2), 1,
             vec_bytes(entries_) + vec_bytes(col_begin_));
  ledger.add("dense.minima", level, minima_.size(), std::max<Coord>(n_, 2), 1,
             vec_bytes(minima_) + vec_bytes(min_values_));
  grid_.account(ledger, level);
}

}  // namespace orr
