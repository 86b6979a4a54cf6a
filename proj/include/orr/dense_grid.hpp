#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "orr/geometry.hpp"
#include "orr/report_sink.hpp"
#include "orr/space_ledger.hpp"

namespace orr {

struct DenseGridStats {
  std::size_t max_nodes_per_tree = 0;  // over every axis tree touched
  std::size_t probes = 0;
};

// Range tree of constant height over a small grid. Axis j has fanout
// ceil(m_j^eps) and height ceil(log m_j / log b_j). Every node keeps a
// secondary structure for each contiguous run of its children, so a query
// touches at most 2h+1 nodes per axis tree. The last axis is a sorted array
// with a trie of the same fanout for successor search.
class DenseGrid {
 public:
  DenseGrid() = default;
  DenseGrid(const PointSet& points, std::vector<Coord> axis_sizes, double eps = 0.5);
  // Cube [1,m]^d.
  DenseGrid(const PointSet& points, std::size_t d, Coord m, double eps = 0.5);

  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, DenseGridStats& st) const;

  std::size_t dim() const { return sizes_.size(); }
  std::size_t size() const { return points_.size(); }
  std::uint32_t fanout(std::size_t axis) const { return fanout_[axis]; }
  int height(std::size_t axis) const { return height_[axis]; }
  std::size_t words() const;
  void account(SpaceLedger& ledger, int level) const;

  struct Layer;

 private:
  std::vector<Coord> sizes_;
  std::vector<std::uint32_t> fanout_;
  std::vector<int> height_;
  PointSet points_;
  std::shared_ptr<const Layer> root_;
};

// Product grid: per-column lists sorted by the last
// coordinate plus the set M of column minima in a DenseGrid. The column
// axes must satisfy U_1 * ... * U_{d-1} <= kProductSlack * n^(1-eps).
class ColumnMinStructure {
 public:
  static constexpr double kProductSlack = 4.0;

  ColumnMinStructure() = default;
  ColumnMinStructure(const PointSet& points, std::vector<Coord> column_sizes, Coord n,
                     double eps = 0.5);

  // q' covers the column axes; the last axis is UpTo(x). `touched` receives
  // the number of list entries examined.
  std::size_t report(const QueryBox& qprime, Coord x, ReportSink& sink,
                     std::size_t* touched = nullptr) const;

  const PointSet& minima() const { return minima_; }
  void account(SpaceLedger& ledger, int level) const;

 private:
  std::size_t d_ = 0;
  Coord n_ = 0;
  PointSet entries_;  // grouped by column, ascending last coordinate
  std::vector<std::uint32_t> col_begin_;
  PointSet minima_;   // one per nonempty column, id = column index
  std::vector<Coord> min_values_;  // distinct sorted minima, for rank reduction
  DenseGrid grid_;
};

}  // namespace orr
