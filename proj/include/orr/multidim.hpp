#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/geometry.hpp"
#include "orr/report_sink.hpp"
#include "orr/reporting3d.hpp"
#include "orr/slab.hpp"
#include "orr/space_ledger.hpp"

namespace orr {

// d-dimensional reporting for d >= 3. Coordinates are reduced to positions
// per axis; a tree of fanout b = max(2, ceil(log2^eps n)) over the last axis
// keeps, per node, a (d-1)-dimensional structure for every contiguous run of
// children. A query on the last axis uses one run at the split node and then
// one suffix run and one prefix run per level on the way down. d = 3 is a
// Full3D.
class DDTree {
 public:
  DDTree(const PointSet& points, std::size_t d, Coord universe, double epsilon = 0.5,
         const RecursionParams& params = RecursionParams::defaults());
  ~DDTree();
  DDTree(DDTree&&) noexcept;
  DDTree& operator=(DDTree&&) noexcept;

  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const;

  std::size_t size() const;
  std::size_t dim() const;
  unsigned fanout() const;  // 0 for d = 3
  unsigned height() const;
  std::size_t structures() const;  // lower-dimensional structures, recursively
  void account(SpaceLedger& ledger) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Insert-only 3D reporting by the binary logarithmic method: inserts fill a
// buffer of `buffer` points; a full buffer is merged with the run of occupied
// slots 0..k-1 into one Full3D in slot k.
class LogMethod {
 public:
  explicit LogMethod(Coord universe, const RecursionParams& params = RecursionParams::defaults(),
                     std::size_t buffer = 64);
  ~LogMethod();
  LogMethod(LogMethod&&) noexcept;
  LogMethod& operator=(LogMethod&&) noexcept;

  void insert(const Point& p);
  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const;

  std::size_t size() const;
  std::size_t buffered() const;
  std::size_t substructures() const;  // occupied slots
  std::vector<std::size_t> slot_sizes() const;
  std::uint64_t rebuild_work() const;  // points passed to Full3D builds so far
  double rebuild_ms() const;
  // Every inserted id sits in exactly one slot or the buffer.
  bool census_ok() const;
  void account(SpaceLedger& ledger) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace orr
