#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/geometry.hpp"
#include "orr/oracle.hpp"
#include "orr/rank_mapper.hpp"
#include "orr/report_sink.hpp"
#include "orr/space_ledger.hpp"

namespace orr {

class SidednessMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RecursionParams {
  double epsilon = 0.5;
  double delta = 0.5 / 3;
  double gamma = 0;      // set by defaults()
  std::size_t cutoff = 64;
  bool compact = false;
  int p = 2;

  // delta = eps/3 and the largest gamma with (1 + 2 gamma) <= 2^(delta/2).
  static RecursionParams defaults(double eps = 0.5);
  static RecursionParams compact_defaults(int p = 2, double eps = 0.5);
  static double max_gamma(double delta);

  double v() const;
  int period(std::size_t n) const;
  // Level bound on the deepest node for a structure over n points.
  int depth_bound(std::size_t n) const;
  // Node size at or below which recursion stops.
  std::size_t terminal_limit(std::size_t n) const;
  // Points per slab for a node with m points.
  double slab_target(std::size_t m) const;
  void validate() const;
};

// n^{1/2} log^p n; larger than n itself below roughly n = 2^20 for p = 2.
double compact_target_formula(std::size_t n, int p);

struct SlabPartition {
  std::vector<Coord> x_bounds, y_bounds;  // slab k covers (bound[k-1], bound[k]]
  std::vector<std::size_t> x_counts, y_counts;

  std::size_t x_slabs() const { return x_bounds.size(); }
  std::size_t y_slabs() const { return y_bounds.size(); }
};

// Equal-count cuts of the x and y orders. A run of equal coordinates that
// straddles a cut goes entirely to the lower slab.
SlabPartition build_partition(const PointSet& points, double target);

struct SlabLocation {
  std::size_t i1 = 0, i2 = 0, j1 = 0, j2 = 0;  // 1-based; S+1 means past the last slab
  std::optional<Coord> a0, b0, c0, d0;
  bool empty = false;
};

// [a,b] x UpTo(c) x *.
SlabLocation locate_211(const SlabPartition& s, const QueryBox& q);
// [a,b] x [c,d] x *.
SlabLocation locate_221(const SlabPartition& s, const QueryBox& q);

// Mapper for the slice W of a level-r node, when the schedule asks for one.
std::optional<std::shared_ptr<const RankMapper>> apply_rank_schedule(int level, const PointSet& w,
                                                                    const RecursionParams& params,
                                                                    std::size_t n_top);

struct StructureInfo {
  std::size_t n = 0;
  int depth = 0;
  std::size_t nodes = 0;
  std::size_t mappers = 0;
};

namespace detail {
class S211;
class S221;
}  // namespace detail

// Public wrappers over arbitrary 3D point sets. Axis 0 is closed; the
// half-open axes are fixed at build by `open`: -1 for UpTo, +1 for From.
class Structure211 {
 public:
  Structure211(const PointSet& points, const RecursionParams& params = RecursionParams::defaults(),
               std::array<int, 2> open = {-1, -1});
  ~Structure211();
  Structure211(Structure211&&) noexcept;

  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const;
  const StructureInfo& info() const { return info_; }
  void account(SpaceLedger& ledger) const;
  const detail::S211& core() const { return *core_; }

 private:
  struct Front;
  std::unique_ptr<Front> front_;
  std::unique_ptr<detail::S211> core_;
  std::array<int, 2> open_;
  bool compact_;
  StructureInfo info_;
};

// Axes 0 and 1 closed, axis 2 half-open in direction `open`.
class Structure221 {
 public:
  Structure221(const PointSet& points, const RecursionParams& params = RecursionParams::defaults(),
               int open = -1);
  ~Structure221();
  Structure221(Structure221&&) noexcept;

  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const;
  const StructureInfo& info() const { return info_; }
  void account(SpaceLedger& ledger) const;
  const detail::S221& core() const { return *core_; }

 private:
  struct Front;
  std::unique_ptr<Front> front_;
  std::unique_ptr<detail::S221> core_;
  int open_;
  bool compact_;
  StructureInfo info_;
};

}  // namespace orr
