#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/geometry.hpp"
#include "orr/report_sink.hpp"

namespace orr {
struct RecursionParams;
}

namespace orr::detail {

struct BuildContext;
BuildContext make_context(const RecursionParams& params, std::size_t n);

inline Coord lower_of(const AxisBound& b) { return b.kind == AxisBound::Kind::UpTo ? 0 : b.lo; }
inline Coord upper_of(const AxisBound& b) { return b.kind == AxisBound::Kind::From ? ~Coord{0} : b.hi; }

// Tie-broken positions of a 3D point set: on every axis, points are ordered
// by (coordinate, index) and numbered 1..n.
struct PositionFront {
  std::array<std::vector<Coord>, 3> sorted;
  std::vector<PointId> index_at_x;
  std::vector<Pt> pts;  // key = input index

  PositionFront() = default;
  explicit PositionFront(const PointSet& points) {
    const std::size_t n = points.size();
    if (n >= 0xfffffff0u) throw std::length_error("too many points");
    for (const Point& p : points)
      if (p.dim() != 3) throw DimensionMismatch("expected 3D points");
    pts.assign(n, Pt{});
    std::vector<u32> idx(n);
    for (int a = 0; a < 3; ++a) {
      std::iota(idx.begin(), idx.end(), 0u);
      std::sort(idx.begin(), idx.end(), [&](u32 i, u32 j) {
        return points[i][a] != points[j][a] ? points[i][a] < points[j][a] : i < j;
      });
      sorted[a].resize(n);
      for (u32 r = 0; r < n; ++r) {
        pts[idx[r]].c[a] = r + 1;
        sorted[a][r] = points[idx[r]][a];
      }
      if (a == 0) index_at_x.assign(idx.begin(), idx.end());
    }
    for (u32 i = 0; i < n; ++i) pts[i].key = i;
  }

  u32 n() const { return static_cast<u32>(index_at_x.size()); }
  // positions whose coordinate lies in [lo, hi]
  bool range(int a, Coord lo, Coord hi, u32& plo, u32& phi) const {
    const auto& s = sorted[a];
    plo = static_cast<u32>(std::lower_bound(s.begin(), s.end(), lo) - s.begin()) + 1;
    phi = static_cast<u32>(std::upper_bound(s.begin(), s.end(), hi) - s.begin());
    return plo <= phi;
  }
  bool range(int a, const AxisBound& b, u32& plo, u32& phi) const {
    return range(a, lower_of(b), upper_of(b), plo, phi);
  }
};

// Emits input points for internal ones. Full structures carry the input
// index as key; compact ones are identified by their x position. Records
// the longest unmap chain between consecutive outputs.
struct Emitter {
  const PointSet& points;
  const std::vector<PointId>& index_at_x;
  bool compact;
  ReportSink& sink;
  QueryStats& st;
  std::uint64_t last_steps;

  void operator()(const Pt& p) {
    const std::uint64_t chain = st.unmap_steps - last_steps;
    st.max_unmap_chain = std::max(st.max_unmap_chain, chain);
    last_steps = st.unmap_steps;
    const PointId i = compact ? index_at_x[p.c[0] - 1] : p.key;
    sink.accept(points[i]);
  }
};

}  // namespace orr::detail
