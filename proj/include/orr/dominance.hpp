#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/geometry.hpp"
#include "orr/oracle.hpp"
#include "orr/report_sink.hpp"
#include "orr/space_ledger.hpp"

namespace orr {

// Candidate lists of an AtMost answer hold at most kCandFactor * t points.
inline constexpr std::size_t kCandFactor = 4;

// [i_min, i_max] for a set of n points; levels have t_i = 4^i.
std::pair<int, int> ladder_range(std::size_t n);

namespace detail {

// Sorts each axis by (coordinate, key) into positions 1..m, reflecting the
// axes whose orientation is -1 so that the query becomes p >= q.
std::vector<Pt> normalize_ranks(std::span<const Pt> pts, const Orientation& orient, AxisRanks& ranks);
// Maps a caller-frame query to local thresholds; false when nothing can match.
bool local_threshold(const AxisRanks& ranks, const Orientation& orient,
                     const std::array<u32, 3>& q, std::array<u32, 3>& out);

// Canonical dominance (p >= q on every axis) over points whose coordinates
// are distinct ranks 1..m per axis.
class TBoundCore {
 public:
  struct Result {
    bool more_than = false;
    std::span<const u32> candidates;  // indices into the point array
  };

  TBoundCore() = default;
  TBoundCore(std::span<const Pt> local, u32 t);

  Result query(const std::array<u32, 3>& q, std::span<const Pt> local) const;

  u32 t() const { return t_; }
  std::size_t cell_count() const { return cells_.size(); }
  std::size_t max_list() const { return max_list_; }
  std::size_t words() const;
  std::size_t bytes() const;

 private:
  struct Cell {
    u32 ys, ye;   // y interval [ys, ye)
    u32 cz;       // corner z
    u32 x_lo, x_hi;  // alive for sweep positions x in [x_lo, x_hi]
    u32 off, len;
  };

  void index_cells();

  u32 m_ = 0, t_ = 1;
  std::vector<Cell> cells_;
  std::vector<u32> conflicts_;
  u32 seg_size_ = 0;
  std::vector<u32> seg_off_, seg_cells_;
  std::size_t max_list_ = 0;
};

// Exact dominance by a bucketed kd-tree; O(n) words.
class KdDominance {
 public:
  KdDominance() = default;
  explicit KdDominance(std::span<const Pt> local);

  template <class F>
  std::size_t report(const std::array<u32, 3>& q, std::span<const Pt> local, F&& emit,
                     const bool* stop) const {
    if (nodes_.empty()) return 0;
    return visit(0, q, local, emit, stop);
  }

  std::size_t words() const { return order_.size() + nodes_.size() * 9; }
  std::size_t bytes() const { return vec_bytes(order_) + vec_bytes(nodes_); }

 private:
  struct Node {
    std::array<u32, 3> lo, hi;
    u32 begin, end;
    u32 left, right;  // kNone for leaves
  };
  static constexpr u32 kNone = 0xffffffffu;

  u32 build(u32 begin, u32 end, std::span<const Pt> local);

  template <class F>
  std::size_t visit(u32 id, const std::array<u32, 3>& q, std::span<const Pt> local, F& emit,
                    const bool* stop) const {
    const Node& nd = nodes_[id];
    for (int a = 0; a < 3; ++a)
      if (nd.hi[a] < q[a]) return 0;
    std::size_t k = 0;
    const bool inside = nd.lo[0] >= q[0] && nd.lo[1] >= q[1] && nd.lo[2] >= q[2];
    if (inside || nd.left == kNone) {
      for (u32 i = nd.begin; i < nd.end; ++i) {
        if (*stop) return k;
        const Pt& p = local[order_[i]];
        if (inside || (p.c[0] >= q[0] && p.c[1] >= q[1] && p.c[2] >= q[2])) {
          emit(order_[i]);
          ++k;
        }
      }
      return k;
    }
    k += visit(nd.left, q, local, emit, stop);
    if (*stop) return k;
    return k + visit(nd.right, q, local, emit, stop);
  }

  std::vector<u32> order_;
  std::vector<Node> nodes_;
};

struct LadderOptions {
  // Explicit [i_min, i_max]; derived from n when absent.
  std::optional<std::pair<int, int>> levels;
};

// Dominance reporting over one slab, in the frame of its caller. Orientation
// +1 asks p >= q on that axis, -1 asks p <= q. A slab of at most 16 points,
// or no larger than the smallest t, keeps only its points and is scanned.
class Ladder {
 public:
  Ladder() = default;
  Ladder(std::span<const Pt> pts, const Orientation& orient, const LadderOptions& opt = {});

  // Reports points in the caller's frame.
  std::size_t report(const std::array<u32, 3>& q, const Sink& sink, QueryStats& st) const;
  // Reports local indices only (no unmapping).
  template <class F>
  std::size_t report_indices(const std::array<u32, 3>& q, F&& f, QueryStats& st,
                             const bool* stop) const;

  std::size_t size() const { return full_ ? full_->local.size() : small_.size(); }
  int i_min() const { return i_min_; }
  int i_max() const { return i_max_; }
  bool scans() const { return !full_; }
  const std::vector<TBoundCore>& levels() const;
  Pt original(u32 idx) const;
  void account(SpaceLedger& ledger, int level, u32 frame_universe) const;

 private:
  struct Full {
    AxisRanks ranks;
    std::vector<Pt> local;  // key = caller key
    std::vector<TBoundCore> levels;
    KdDominance fallback;
  };

  bool admits(u32 i, const std::array<u32, 3>& q) const {
    for (int a = 0; a < 3; ++a) {
      const u32 c = small_.coord(i, a);
      if (orient_[a] > 0 ? c < q[a] : c > q[a]) return false;
    }
    return true;
  }

  Orientation orient_{1, 1, 1};
  std::int8_t i_min_ = 1, i_max_ = 1;
  PackedPts small_;  // caller frame, when scanning
  std::unique_ptr<Full> full_;
};

template <class F>
std::size_t Ladder::report_indices(const std::array<u32, 3>& q, F&& f, QueryStats& st,
                                   const bool* stop) const {
  if (!full_) {
    std::size_t k = 0;
    for (u32 i = 0; i < small_.size() && !*stop; ++i)
      if (admits(i, q)) {
        f(i);
        ++k;
      }
    if (!small_.empty()) ++st.ladder_levels[i_min_];
    return k;
  }
  std::array<u32, 3> lq;
  const Full& L = *full_;
  if (L.local.empty() || !local_threshold(L.ranks, orient_, q, lq)) return 0;
  for (int l = i_min_; l <= i_max_; ++l) {
    auto r = L.levels[l - i_min_].query(lq, L.local);
    if (r.more_than) continue;
    std::size_t k = 0;
    for (u32 idx : r.candidates) {
      if (*stop) break;
      const Pt& p = L.local[idx];
      if (p.c[0] >= lq[0] && p.c[1] >= lq[1] && p.c[2] >= lq[2]) {
        f(idx);
        ++k;
      }
    }
    ++st.ladder_levels[l];
    if (l > i_min_ && !*stop && k <= (std::size_t{1} << (2 * (l - 1)))) ++st.doubling_violations;
    return k;
  }
  ++st.ladder_fallbacks;
  ++st.ladder_levels[0];
  return L.fallback.report(lq, L.local, f, stop);
}

}  // namespace detail

// Public wrappers over PointSet input (3D, rank space; ties allowed).

struct TBoundResult {
  bool more_than = false;
  PointSet candidates;
};

class TBound {
 public:
  TBound(const PointSet& points, std::size_t t, const Orientation& orient = {1, 1, 1});
  TBoundResult query(const Point& q) const;
  std::size_t t() const { return core_.t(); }
  std::size_t max_list() const { return core_.max_list(); }
  void account(SpaceLedger& ledger, int level) const;

 private:
  friend class DominanceLadder;
  Orientation orient_;
  detail::AxisRanks ranks_;
  std::vector<detail::Pt> local_;
  detail::TBoundCore core_;
  PointSet originals_;
  bool to_local(const Point& q, std::array<detail::u32, 3>& out) const;
};

class FallbackDominance {
 public:
  FallbackDominance(const PointSet& points, const Orientation& orient = {1, 1, 1});
  std::size_t report(const Point& q, ReportSink& sink) const;

 private:
  PointSet originals_;
  Orientation orient_;
  detail::AxisRanks ranks_;
  std::vector<detail::Pt> local_;
  detail::KdDominance kd_;
};

class DominanceLadder {
 public:
  DominanceLadder(const PointSet& points, const Orientation& orient = {1, 1, 1},
                  const detail::LadderOptions& opt = {});
  std::size_t report(const Point& q, ReportSink& sink) const;
  std::size_t report(const Point& q, ReportSink& sink, detail::QueryStats& st) const;
  int i_min() const { return ladder_.i_min(); }
  int i_max() const { return ladder_.i_max(); }
  void account(SpaceLedger& ledger, int level) const;
  const detail::Ladder& core() const { return ladder_; }

 private:
  detail::Ladder ladder_;
  PointSet originals_;
};

}  // namespace orr
