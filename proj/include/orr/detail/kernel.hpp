#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

namespace orr::detail {

using u32 = std::uint32_t;

// Internal 3D point. Per-axis coordinates are distinct within any structure;
// key is the id of the point in the top-level set.
struct Pt {
  std::array<u32, 3> c{};
  u32 key = 0;
};

// Inclusive box. Structures ignore `lo` on their half-open axes.
struct Box3 {
  std::array<u32, 3> lo{1, 1, 1};
  std::array<u32, 3> hi{0, 0, 0};

  bool admits(const Pt& p) const {
    for (int a = 0; a < 3; ++a)
      if (p.c[a] < lo[a] || p.c[a] > hi[a]) return false;
    return true;
  }
  bool empty() const { return lo[0] > hi[0] || lo[1] > hi[1] || lo[2] > hi[2]; }
};

inline u32 reflect(u32 c, u32 universe) { return universe + 1 - c; }

template <class Sig>
class FunctionRef;

template <class R, class... Args>
class FunctionRef<R(Args...)> {
 public:
  template <class F, class = std::enable_if_t<!std::is_same_v<std::decay_t<F>, FunctionRef>>>
  FunctionRef(F& f) : obj_(static_cast<void*>(&f)) {  // NOLINT
    call_ = [](void* o, Args... args) -> R { return (*static_cast<F*>(o))(std::forward<Args>(args)...); };
  }
  R operator()(Args... args) const { return call_(obj_, std::forward<Args>(args)...); }

 private:
  void* obj_;
  R (*call_)(void*, Args...);
};

// Report target. `stop` is shared by every wrapper of one query.
struct Sink {
  FunctionRef<void(const Pt&)> emit;
  bool* stop;

  bool done() const { return *stop; }
  void operator()(const Pt& p) const { emit(p); }
};

// Per-query instrumentation. Counts are cumulative across queries that share it.
struct QueryStats {
  std::uint64_t queries = 0;
  std::uint64_t steps211 = 0, steps221 = 0;
  std::uint64_t max_arity211 = 0, max_arity221 = 0;
  std::uint64_t subqueries = 0;
  std::uint64_t cell_queries = 0, dominance_queries = 0, transfers = 0;
  std::uint64_t terminal_scans = 0;
  std::uint64_t lift_subqueries = 0, max_lift_fanout = 0;
  int max_level = 0;
  std::uint64_t unmap_steps = 0, max_unmap_chain = 0;
  std::uint64_t column_touched = 0, column_reported = 0, columns_walked = 0;
  std::uint64_t ladder_fallbacks = 0, doubling_violations = 0;
  std::map<int, std::uint64_t> ladder_levels;
  std::uint64_t dd_probes = 0, dd_max_probes_per_level = 0;
  std::uint64_t overlap_violations = 0;
  bool check_disjoint = false;  // tag sub-query outputs and count overlaps

  void note_level(int r) { max_level = std::max(max_level, r); }
  void merge(const QueryStats& o);
};

inline void QueryStats::merge(const QueryStats& o) {
  queries += o.queries;
  steps211 += o.steps211;
  steps221 += o.steps221;
  max_arity211 = std::max(max_arity211, o.max_arity211);
  max_arity221 = std::max(max_arity221, o.max_arity221);
  subqueries += o.subqueries;
  cell_queries += o.cell_queries;
  dominance_queries += o.dominance_queries;
  transfers += o.transfers;
  terminal_scans += o.terminal_scans;
  lift_subqueries += o.lift_subqueries;
  max_lift_fanout = std::max(max_lift_fanout, o.max_lift_fanout);
  max_level = std::max(max_level, o.max_level);
  unmap_steps += o.unmap_steps;
  max_unmap_chain = std::max(max_unmap_chain, o.max_unmap_chain);
  column_touched += o.column_touched;
  column_reported += o.column_reported;
  columns_walked += o.columns_walked;
  ladder_fallbacks += o.ladder_fallbacks;
  doubling_violations += o.doubling_violations;
  for (auto [k, v] : o.ladder_levels) ladder_levels[k] += v;
  dd_probes += o.dd_probes;
  dd_max_probes_per_level = std::max(dd_max_probes_per_level, o.dd_max_probes_per_level);
  overlap_violations += o.overlap_violations;
}

// Unsigned values stored at the narrowest of 1, 2 or 4 bytes that fits the
// largest one. Owns one allocation; move-only.
class PackedU32 {
 public:
  PackedU32() = default;
  template <class It>
  PackedU32(It first, It last, u32 max_value) : n_(static_cast<u32>(last - first)) {
    if (n_ == 0) return;
    w_ = max_value <= 0xffu ? 1 : max_value <= 0xffffu ? 2 : 4;
    visit_mut([&](auto* p) { std::copy(first, last, p); });
  }
  PackedU32(PackedU32&& o) noexcept : data_(o.data_), n_(o.n_), w_(o.w_) {
    o.data_ = nullptr;
    o.n_ = 0;
  }
  PackedU32& operator=(PackedU32&& o) noexcept {
    if (this != &o) {
      release();
      data_ = o.data_;
      n_ = o.n_;
      w_ = o.w_;
      o.data_ = nullptr;
      o.n_ = 0;
    }
    return *this;
  }
  PackedU32(const PackedU32&) = delete;
  PackedU32& operator=(const PackedU32&) = delete;
  ~PackedU32() { release(); }

  u32 size() const { return n_; }
  u32 operator[](std::size_t i) const {
    if (w_ == 1) return static_cast<const std::uint8_t*>(data_)[i];
    if (w_ == 2) return static_cast<const std::uint16_t*>(data_)[i];
    return static_cast<const u32*>(data_)[i];
  }
  // Calls f with a typed pointer to the first element.
  template <class F>
  decltype(auto) visit(F&& f) const {
    if (w_ == 1) return f(static_cast<const std::uint8_t*>(data_));
    if (w_ == 2) return f(static_cast<const std::uint16_t*>(data_));
    return f(static_cast<const u32*>(data_));
  }
  std::size_t bytes() const { return std::size_t{n_} * w_; }

 private:
  template <class F>
  void visit_mut(F&& f) {
    if (w_ == 1) {
      auto* p = new std::uint8_t[n_];
      data_ = p;
      f(p);
    } else if (w_ == 2) {
      auto* p = new std::uint16_t[n_];
      data_ = p;
      f(p);
    } else {
      auto* p = new u32[n_];
      data_ = p;
      f(p);
    }
  }
  void release() {
    if (!data_) return;
    if (w_ == 1) delete[] static_cast<std::uint8_t*>(data_);
    else if (w_ == 2) delete[] static_cast<std::uint16_t*>(data_);
    else delete[] static_cast<u32*>(data_);
    data_ = nullptr;
  }

  void* data_ = nullptr;
  u32 n_ = 0;
  std::uint8_t w_ = 4;
};

// Point list with packed coordinates; keys are kept only when some key is
// nonzero.
class PackedPts {
 public:
  PackedPts() = default;
  explicit PackedPts(std::span<const Pt> pts) {
    std::vector<u32> flat;
    flat.reserve(3 * pts.size());
    u32 mx = 0;
    bool keyed = false;
    for (const Pt& p : pts) {
      for (u32 c : p.c) {
        flat.push_back(c);
        mx = std::max(mx, c);
      }
      keyed = keyed || p.key != 0;
    }
    coords_ = PackedU32(flat.begin(), flat.end(), mx);
    if (keyed) {
      u32 kmax = 0;
      flat.clear();
      for (const Pt& p : pts) {
        flat.push_back(p.key);
        kmax = std::max(kmax, p.key);
      }
      keys_ = PackedU32(flat.begin(), flat.end(), kmax);
    }
  }

  u32 size() const { return coords_.size() / 3; }
  bool empty() const { return size() == 0; }
  u32 coord(std::size_t i, int a) const { return coords_[3 * i + a]; }
  Pt operator[](std::size_t i) const {
    Pt p;
    for (int a = 0; a < 3; ++a) p.c[a] = coord(i, a);
    p.key = keys_.size() ? keys_[i] : 0;
    return p;
  }
  std::size_t bytes() const { return coords_.bytes() + keys_.bytes(); }

 private:
  PackedU32 coords_;
  PackedU32 keys_;
};

// Sorted coordinate arrays of a point set, one run per axis. Doubles as a
// rank mapper for distinct coordinates: rank = index + 1.
struct AxisRanks {
  PackedU32 sorted;  // three runs of size() values, axis 0 first

  static AxisRanks of(std::span<const Pt> pts) {
    const std::size_t m = pts.size();
    std::vector<u32> flat(3 * m);
    u32 mx = 0;
    for (int a = 0; a < 3; ++a) {
      auto* out = flat.data() + a * m;
      for (std::size_t i = 0; i < m; ++i) out[i] = pts[i].c[a];
      std::sort(out, out + m);
      if (m) mx = std::max(mx, out[m - 1]);
    }
    AxisRanks r;
    r.sorted = PackedU32(flat.begin(), flat.end(), mx);
    return r;
  }
  u32 size() const { return sorted.size() / 3; }
  // rank of an exact member
  u32 rank(int a, u32 c) const { return lower(a, c); }
  // first rank with coordinate >= c (size+1 if none)
  u32 lower(int a, u32 c) const {
    const u32 m = size();
    return sorted.visit([&](const auto* p) {
      const auto* b = p + static_cast<std::size_t>(a) * m;
      return static_cast<u32>(std::partition_point(b, b + m, [c](u32 v) { return v < c; }) - b) + 1;
    });
  }
  // last rank with coordinate <= c (0 if none)
  u32 upper(int a, u32 c) const {
    const u32 m = size();
    return sorted.visit([&](const auto* p) {
      const auto* b = p + static_cast<std::size_t>(a) * m;
      return static_cast<u32>(std::partition_point(b, b + m, [c](u32 v) { return v <= c; }) - b);
    });
  }
  u32 coord(int a, u32 r) const { return sorted[static_cast<std::size_t>(a) * size() + r - 1]; }
  std::size_t bytes() const { return sorted.bytes(); }
};

}  // namespace orr::detail
