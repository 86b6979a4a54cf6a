#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/space_ledger.hpp"

namespace orr::detail {

// Turns a structure that is half-open (UpTo) on `axis` into one that is
// closed there. A balanced tree over the points in axis order gives every
// left child a structure for "axis >= e" (built on the reflected axis) and
// every right child one for "axis <= f". A closed [e,f] splits at the first
// node that separates e from f. Nodes of at most `bucket` points keep no
// structure and are scanned.
//
// Inner must provide query(const Box3&, const Sink&, QueryStats&) const and
// account(SpaceLedger&) const; `build(std::vector<Pt>, u32 universe)` makes
// one over coordinates in [1, universe].
template <class Inner>
class Lift {
 public:
  static constexpr u32 kNone = 0xffffffffu;

  Lift() = default;

  template <class Build>
  Lift(std::vector<Pt> pts, int axis, u32 universe, Build&& build, u32 bucket = 8)
      : axis_(axis), universe_(universe), bucket_(std::max<u32>(bucket, 1)) {
    std::sort(pts.begin(), pts.end(), [a = axis](const Pt& p, const Pt& q) { return p.c[a] < q.c[a]; });
    pts_ = std::move(pts);
    if (pts_.empty()) return;
    std::vector<u32> count(pts_.size(), 0);
    make(0, static_cast<u32>(pts_.size()), 0, build, count);
    for (u32 c : count) census_ = std::max(census_, c);
  }

  void query(const Box3& q, const Sink& sink, QueryStats& st) const {
    if (nodes_.empty() || sink.done()) return;
    const int a = axis_;
    const u32 e = q.lo[a], f = q.hi[a];
    if (e > f) return;
    u32 v = 0;
    while (nodes_[v].left != kNone) {
      const Node& nd = nodes_[v];
      if (f < nd.split) {
        v = nd.left;
      } else if (e >= nd.split) {
        v = nd.right;
      } else {
        std::uint64_t fanout = 0;
        // left part: axis >= e
        const Node& l = nodes_[nd.left];
        if (l.inner == kNone) {
          scan(l, q, sink);
        } else {
          Box3 t = q;
          t.lo[a] = 1;
          t.hi[a] = reflect(e, universe_);
          const u32 u = universe_;
          auto back = [&](const Pt& p) {
            Pt o = p;
            o.c[a] = reflect(p.c[a], u);
            sink(o);
          };
          ++fanout;
          inner_[l.inner].query(t, Sink{FunctionRef<void(const Pt&)>(back), sink.stop}, st);
        }
        // right part: axis <= f
        const Node& r = nodes_[nd.right];
        if (!sink.done()) {
          if (r.inner == kNone) {
            scan(r, q, sink);
          } else {
            Box3 t = q;
            t.lo[a] = 1;
            ++fanout;
            inner_[r.inner].query(t, sink, st);
          }
        }
        st.lift_subqueries += fanout;
        st.max_lift_fanout = std::max(st.max_lift_fanout, fanout);
        return;
      }
    }
    scan(nodes_[v], q, sink);
  }

  // Largest number of inner structures holding one point.
  u32 census() const { return census_; }
  u32 height() const { return height_; }
  std::size_t structures() const { return inner_.size(); }
  std::size_t size() const { return pts_.size(); }
  const std::vector<Inner>& inner() const { return inner_; }

  void account(SpaceLedger& ledger, int level = 0) const {
    ledger.add("lift.points", level, pts_.size(), universe_, 3, vec_bytes(pts_));
    ledger.add("lift.tree", level, nodes_.size(), std::max<std::uint64_t>(pts_.size(), 2), 5, vec_bytes(nodes_));
    for (const Inner& s : inner_) s.account(ledger);
  }

 private:
  struct Node {
    u32 begin, end;
    u32 split;  // first axis value of the right child
    u32 left = kNone, right = kNone;
    u32 inner = kNone;
  };

  void scan(const Node& nd, const Box3& q, const Sink& sink) const {
    for (u32 i = nd.begin; i < nd.end && !sink.done(); ++i)
      if (q.admits(pts_[i])) sink(pts_[i]);
  }

  // side: 0 root, -1 left child, +1 right child
  template <class Build>
  u32 make(u32 begin, u32 end, int side, Build& build, std::vector<u32>& count, u32 depth = 0) {
    const u32 id = static_cast<u32>(nodes_.size());
    nodes_.push_back(Node{begin, end, 0});
    height_ = std::max(height_, depth);
    const bool leaf = end - begin <= bucket_;
    if (side != 0 && !leaf) {
      std::vector<Pt> sub(pts_.begin() + begin, pts_.begin() + end);
      if (side < 0)
        for (Pt& p : sub) p.c[axis_] = reflect(p.c[axis_], universe_);
      for (u32 i = begin; i < end; ++i) ++count[i];
      nodes_[id].inner = static_cast<u32>(inner_.size());
      inner_.push_back(build(std::move(sub), universe_));
    }
    if (leaf) return id;
    const u32 mid = begin + (end - begin) / 2;
    nodes_[id].split = pts_[mid].c[axis_];
    const u32 l = make(begin, mid, -1, build, count, depth + 1);
    const u32 r = make(mid, end, +1, build, count, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  int axis_ = 2;
  u32 universe_ = 0;
  u32 bucket_ = 8;
  u32 census_ = 0;
  u32 height_ = 0;
  std::vector<Pt> pts_;  // ascending on axis_
  std::vector<Node> nodes_;
  std::vector<Inner> inner_;
};

}  // namespace orr::detail
