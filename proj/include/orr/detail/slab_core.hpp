#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/dominance.hpp"
#include "orr/space_ledger.hpp"

namespace orr {
struct RecursionParams;
}

namespace orr::detail {

// Shared state while one recursive structure is built.
struct BuildContext {
  const RecursionParams* params = nullptr;
  std::size_t n_top = 0;
  bool compact = false;
  int period = 1;
  std::size_t terminal_limit = 64;
  int max_level = 0;
  std::size_t nodes = 0;
  std::size_t mappers = 0;

  bool reduces_at(int level) const { return compact || level % period == period - 1; }
};

// Upper slab bounds from sorted distinct coordinates: slab k holds the
// coordinates in (bound[k-1], bound[k]].
std::vector<u32> cut_slabs(const std::vector<u32>& sorted, std::size_t slabs);
std::size_t slab_count(std::size_t m, double target);

// Points in z order; answers a box by binary search on z and a scan.
class Terminal {
 public:
  Terminal() = default;
  explicit Terminal(std::vector<Pt> pts);
  void query(const Box3& q, const Sink& sink, QueryStats& st) const;
  std::size_t size() const { return pts_.size(); }
  void account(SpaceLedger& ledger, int level, u32 universe) const;

 private:
  PackedPts pts_;  // ascending z
};

struct CellEntry {
  u32 i, j;
  Pt p;
};

// Per-cell lists sorted by z, the set of cell minima, and a kd-tree over the
// cell indices that keeps the smallest minimum of each subtree.
class CellTable {
 public:
  CellTable() = default;
  explicit CellTable(std::vector<CellEntry> entries);

  // Reports points of cells i in [ilo, ihi], j in [jlo, jhi] with z <= zmax.
  void query(u32 ilo, u32 ihi, u32 jlo, u32 jhi, u32 zmax, const Sink& sink, QueryStats& st) const;

  std::size_t cells() const { return cell_i_.size(); }
  std::size_t size() const { return pts_.size(); }
  void account(SpaceLedger& ledger, int level, u32 universe, u32 slabs, bool min_only) const;

 private:
  struct Node {
    u32 ilo, ihi, jlo, jhi;
    u32 zmin;
    u32 begin, end;  // cell range in kd order
    u32 left, right;
  };
  static constexpr u32 kNone = 0xffffffffu;
  static constexpr u32 kLeaf = 8;

  u32 build(u32 begin, u32 end);
  void visit(u32 id, u32 ilo, u32 ihi, u32 jlo, u32 jhi, u32 zmax, const Sink& sink,
             QueryStats& st) const;
  void walk(u32 cell, u32 zmax, const Sink& sink, QueryStats& st) const;

  std::vector<u32> cell_i_, cell_j_, cell_begin_;
  PackedPts pts_;  // grouped by cell, ascending z
  std::vector<Node> nodes_;
};

// Translates a box into a slice's rank space; false when it becomes empty.
bool map_box(const AxisRanks* ranks, const Box3& in, Box3& out);

class S211;
class S221;

// Points of one slice, optionally reduced to the slice's rank space.
struct SliceFrame {
  AxisRanks ranks;
  u32 universe = 0;
  bool reduced = false;

  const AxisRanks* mapper() const { return reduced ? &ranks : nullptr; }
};

// (2,1,1)-sided structure: x in [a,b], y <= c, z <= d.
class S211 {
 public:
  S211(std::vector<Pt> pts, u32 universe, int level, BuildContext& ctx);
  S211() = default;
  ~S211();
  S211(S211&&) noexcept;
  S211& operator=(S211&&) noexcept;

  void query(const Box3& q, const Sink& sink, QueryStats& st) const;
  std::size_t size() const { return n_; }
  int depth() const;
  void account(SpaceLedger& ledger) const;

  // Partition view, for tests.
  const std::vector<u32>& x_bounds() const;
  const std::vector<u32>& y_bounds() const;

 private:
  struct XSlice;
  struct YSlice;
  struct Body;

  void to_child(const SliceFrame& f, const S211& child, const Box3& q, const Sink& sink,
                QueryStats& st) const;

  u32 n_ = 0;
  u32 universe_ = 0;
  std::int16_t level_ = 0;
  bool compact_ = false;
  Terminal term_;
  std::unique_ptr<Body> body_;  // null for terminal nodes
};

// (2,2,1)-sided structure: x in [a,b], y in [c,d], z <= e.
class S221 {
 public:
  S221(std::vector<Pt> pts, u32 universe, int level, BuildContext& ctx);
  S221() = default;
  ~S221();
  S221(S221&&) noexcept;
  S221& operator=(S221&&) noexcept;

  void query(const Box3& q, const Sink& sink, QueryStats& st) const;
  std::size_t size() const { return n_; }
  int depth() const;
  void account(SpaceLedger& ledger) const;

  const std::vector<u32>& x_bounds() const;
  const std::vector<u32>& y_bounds() const;

  // Which slice-side (2,1,1) structure a point enters.
  enum class Side { PlusX, MinusX, PlusY, MinusY };

 private:
  struct Slice;
  struct Body;

  void to_side(const Slice& s, Side side, const Box3& q, const Sink& sink, QueryStats& st) const;
  void to_child(const Slice& s, const Box3& q, const Sink& sink, QueryStats& st) const;

  u32 n_ = 0;
  u32 universe_ = 0;
  std::int16_t level_ = 0;
  bool compact_ = false;
  Terminal term_;
  std::unique_ptr<Body> body_;
};

// Point transform of a slice-side (2,1,1) structure and its inverse.
Pt to_side_frame(const Pt& p, S221::Side side, u32 universe);
Pt from_side_frame(const Pt& p, S221::Side side, u32 universe);

}  // namespace orr::detail
