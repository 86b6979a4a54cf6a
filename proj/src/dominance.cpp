#include "orr/dominance.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace orr {

namespace {

double lg(double x) { return x > 1 ? std::log2(x) : 0.0; }

}  // namespace

std::pair<int, int> ladder_range(std::size_t n) {
  const double l1 = lg(static_cast<double>(n));
  const double l2 = lg(l1);
  const double l3 = lg(l2);
  int lo = std::max(1, static_cast<int>(std::ceil(2 * l3)));
  int hi = std::max(1, static_cast<int>(std::ceil(l2 / 2)));
  lo = std::min(lo, hi);
  return {lo, hi};
}

namespace detail {

std::vector<Pt> normalize_ranks(std::span<const Pt> pts, const Orientation& orient, AxisRanks& ranks) {
  const u32 m = static_cast<u32>(pts.size());
  ranks = AxisRanks::of(pts);
  std::vector<Pt> local(pts.begin(), pts.end());
  std::vector<u32> idx(m);
  for (int a = 0; a < 3; ++a) {
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](u32 i, u32 j) {
      return pts[i].c[a] != pts[j].c[a] ? pts[i].c[a] < pts[j].c[a] : pts[i].key < pts[j].key;
    });
    for (u32 r = 0; r < m; ++r) local[idx[r]].c[a] = orient[a] > 0 ? r + 1 : m - r;
  }
  return local;
}

bool local_threshold(const AxisRanks& ranks, const Orientation& orient,
                     const std::array<u32, 3>& q, std::array<u32, 3>& out) {
  const u32 m = ranks.size();
  for (int a = 0; a < 3; ++a) {
    u32 th = orient[a] > 0 ? ranks.lower(a, q[a]) : m + 1 - ranks.upper(a, q[a]);
    if (th > m) return false;
    out[a] = std::max<u32>(th, 1);
  }
  return true;
}

namespace {

class Fenwick {
 public:
  explicit Fenwick(u32 n) : t_(n + 1, 0) {}
  void add(u32 i, int v) {
    for (; i < t_.size(); i += i & -i) t_[i] += v;
  }
  int prefix(u32 i) const {
    int s = 0;
    for (; i > 0; i -= i & -i) s += t_[i];
    return s;
  }

 private:
  std::vector<int> t_;
};

}  // namespace

TBoundCore::TBoundCore(std::span<const Pt> local, u32 t) : m_(static_cast<u32>(local.size())), t_(t) {
  if (t < 1) throw std::invalid_argument("t must be >= 1");
  if (m_ == 0) {
    index_cells();
    return;
  }
  const u32 m = m_;
  const std::size_t cap = kCandFactor * static_cast<std::size_t>(t);
  std::vector<u32> by_x(m), by_y(m);
  for (u32 i = 0; i < m; ++i) {
    by_x[local[i].c[0] - 1] = i;
    by_y[local[i].c[1] - 1] = i;
  }

  struct Active {
    u32 ye, cz, x_hi;
    std::vector<u32> conf;
  };
  std::map<u32, Active> act;  // keyed by ys
  std::vector<char> in_a(m, 0);
  std::vector<u32> inserted;
  std::vector<u32> g;

  auto retire = [&](u32 ys, Active& c, u32 x_lo, u32 newest) {
    if (!c.conf.empty() && c.conf.back() == newest) c.conf.pop_back();
    cells_.push_back({ys, c.ye, c.cz, x_lo, c.x_hi, static_cast<u32>(conflicts_.size()),
                      static_cast<u32>(c.conf.size())});
    max_list_ = std::max(max_list_, c.conf.size());
    conflicts_.insert(conflicts_.end(), c.conf.begin(), c.conf.end());
  };

  // Re-covers [s, e) at sweep position cur; may swallow whole cells after e.
  auto recover = [&](u32 s, u32 e, u32 cur, u32 newest) {
    // g[y - s] = (t+1)-th largest z among inserted points with y' >= y, or 0.
    g.assign(m - s + 2, 0);
    std::priority_queue<u32, std::vector<u32>, std::greater<u32>> heap;
    for (u32 y = m; y >= s; --y) {
      u32 i = by_y[y - 1];
      if (in_a[i]) {
        heap.push(local[i].c[2]);
        if (heap.size() > t_ + 1) heap.pop();
      }
      g[y - s] = heap.size() == t_ + 1 ? heap.top() : 0;
      if (y == 1) break;
    }
    Fenwick fen(m);
    int live = 0;
    for (u32 i : inserted)
      if (local[i].c[1] >= s) fen.add(local[i].c[2], 1), ++live;
    auto count_ge = [&](u32 z) { return live - fen.prefix(z - 1); };
    auto make = [&](u32 ys, u32 ye) {
      Active c{ye, g[ye - 1 - s] + 1, cur, {}};
      for (u32 i : inserted)
        if (local[i].c[1] >= ys && local[i].c[2] >= c.cz) c.conf.push_back(i);
      act.emplace(ys, std::move(c));
    };
    u32 ys = s;
    for (;;) {
      u32 ye = ys + 1;
      while (ye <= m && static_cast<std::size_t>(count_ge(g[ye - s] + 1)) <= 2 * static_cast<std::size_t>(t_))
        ++ye;
      if (ye < e) {
        make(ys, ye);
        for (u32 y = ys; y < ye; ++y) {
          u32 i = by_y[y - 1];
          if (in_a[i]) fen.add(local[i].c[2], -1), --live;
        }
        ys = ye;
        continue;
      }
      u32 end = e;
      for (auto it = act.find(end); it != act.end() && it->second.ye <= ye; it = act.find(end)) {
        retire(it->first, it->second, cur + 1, newest);
        end = it->second.ye;
        act.erase(it);
      }
      make(ys, end);
      break;
    }
  };

  for (u32 cur = m; cur >= 1; --cur) {
    const u32 i = by_x[cur - 1];
    const Pt& p = local[i];
    in_a[i] = 1;
    inserted.push_back(i);
    if (act.empty()) {
      recover(1, m + 1, cur, i);
    } else {
      std::vector<u32> over;
      for (auto it = act.begin(); it != act.end() && it->first <= p.c[1]; ++it) {
        if (it->second.cz <= p.c[2]) {
          it->second.conf.push_back(i);
          if (it->second.conf.size() > cap) over.push_back(it->first);
        }
      }
      for (std::size_t k = 0; k < over.size();) {
        auto it = act.find(over[k]);
        if (it == act.end()) {  // swallowed by an earlier re-cover
          ++k;
          continue;
        }
        // maximal run of consecutive overflowing cells
        u32 s = it->first, e = it->second.ye;
        std::size_t j = k;
        while (true) {
          auto cit = act.find(over[j]);
          e = cit->second.ye;
          retire(cit->first, cit->second, cur + 1, i);
          act.erase(cit);
          if (j + 1 < over.size() && over[j + 1] == e && act.count(e)) {
            ++j;
          } else {
            break;
          }
        }
        recover(s, e, cur, i);
        k = j + 1;
      }
    }
    if (cur == 1) break;
  }
  for (auto& [ys, c] : act) retire(ys, c, 1, std::numeric_limits<u32>::max());
  act.clear();
  index_cells();
}

void TBoundCore::index_cells() {
  seg_size_ = 1;
  while (seg_size_ < std::max<u32>(m_, 1)) seg_size_ <<= 1;
  std::vector<u32> cnt(2 * seg_size_ + 1, 0);
  auto for_nodes = [&](const Cell& c, auto&& f) {
    u32 l = c.x_lo - 1 + seg_size_, r = c.x_hi + seg_size_;
    while (l < r) {
      if (l & 1) f(l++);
      if (r & 1) f(--r);
      l >>= 1;
      r >>= 1;
    }
  };
  for (const Cell& c : cells_) for_nodes(c, [&](u32 v) { ++cnt[v + 1]; });
  for (std::size_t v = 1; v < cnt.size(); ++v) cnt[v] += cnt[v - 1];
  seg_off_ = cnt;
  seg_cells_.assign(cnt.back(), 0);
  for (u32 id = 0; id < cells_.size(); ++id) for_nodes(cells_[id], [&](u32 v) { seg_cells_[cnt[v]++] = id; });
  for (u32 v = 0; v + 1 < seg_off_.size(); ++v)
    std::sort(seg_cells_.begin() + seg_off_[v], seg_cells_.begin() + seg_off_[v + 1],
              [&](u32 a, u32 b) { return cells_[a].ys < cells_[b].ys; });
}

TBoundCore::Result TBoundCore::query(const std::array<u32, 3>& q, std::span<const Pt> local) const {
  Result res;
  if (m_ == 0 || q[0] > m_ || q[1] > m_ || q[2] > m_) return res;
  const Cell* hit = nullptr;
  for (u32 v = q[0] - 1 + seg_size_; v >= 1 && !hit; v >>= 1) {
    auto b = seg_cells_.begin() + seg_off_[v], e = seg_cells_.begin() + seg_off_[v + 1];
    auto it = std::upper_bound(b, e, q[1], [&](u32 y, u32 id) { return y < cells_[id].ys; });
    if (it != b && cells_[*(it - 1)].ye > q[1]) hit = &cells_[*(it - 1)];
  }
  if (!hit) throw std::logic_error("t-bound cells do not cover the query");
  if (q[2] < hit->cz) {
    res.more_than = true;
    return res;
  }
  res.candidates = std::span<const u32>(conflicts_.data() + hit->off, hit->len);
  std::size_t k = 0;
  for (u32 idx : res.candidates) {
    const Pt& p = local[idx];
    k += p.c[0] >= q[0] && p.c[1] >= q[1] && p.c[2] >= q[2];
  }
  if (k > t_) {
    res.more_than = true;
    res.candidates = {};
  }
  return res;
}

std::size_t TBoundCore::words() const {
  return cells_.size() * 7 + conflicts_.size() + seg_off_.size() + seg_cells_.size();
}

std::size_t TBoundCore::bytes() const {
  return vec_bytes(cells_) + vec_bytes(conflicts_) + vec_bytes(seg_off_) + vec_bytes(seg_cells_);
}

KdDominance::KdDominance(std::span<const Pt> local) {
  order_.resize(local.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!local.empty()) {
    nodes_.reserve(local.size() / 4 + 1);
    build(0, static_cast<u32>(local.size()), local);
  }
}

u32 KdDominance::build(u32 begin, u32 end, std::span<const Pt> local) {
  constexpr u32 kLeaf = 8;
  const u32 id = static_cast<u32>(nodes_.size());
  Node nd{{~0u, ~0u, ~0u}, {0, 0, 0}, begin, end, kNone, kNone};
  for (u32 i = begin; i < end; ++i)
    for (int a = 0; a < 3; ++a) {
      nd.lo[a] = std::min(nd.lo[a], local[order_[i]].c[a]);
      nd.hi[a] = std::max(nd.hi[a], local[order_[i]].c[a]);
    }
  nodes_.push_back(nd);
  if (end - begin <= kLeaf) return id;
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (nd.hi[a] - nd.lo[a] > nd.hi[axis] - nd.lo[axis]) axis = a;
  const u32 mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](u32 a, u32 b) { return local[a].c[axis] < local[b].c[axis]; });
  const u32 l = build(begin, mid, local);
  const u32 r = build(mid, end, local);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

// Slabs this small are cheaper to scan than to index.
constexpr std::size_t kScanSlab = 16;

Ladder::Ladder(std::span<const Pt> pts, const Orientation& orient, const LadderOptions& opt)
    : orient_(orient) {
  auto [lo, hi] = opt.levels ? *opt.levels : ladder_range(pts.size());
  if (lo < 1 || hi < lo) throw std::invalid_argument("bad ladder level range");
  i_min_ = static_cast<std::int8_t>(lo);
  i_max_ = static_cast<std::int8_t>(hi);
  auto t_of = [](int i) { return i >= 15 ? (1u << 30) : (1u << (2 * i)); };
  if (!opt.levels && pts.size() <= std::max<std::size_t>(kScanSlab, t_of(lo))) {
    small_ = PackedPts(pts);
    return;
  }
  full_ = std::make_unique<Full>();
  full_->local = normalize_ranks(pts, orient, full_->ranks);
  for (int i = lo; i <= hi; ++i) full_->levels.emplace_back(full_->local, t_of(i));
  // the top level already bounds every query when t >= m
  if (full_->levels.back().t() < full_->local.size()) full_->fallback = KdDominance(full_->local);
}

const std::vector<TBoundCore>& Ladder::levels() const {
  static const std::vector<TBoundCore> none;
  return full_ ? full_->levels : none;
}

Pt Ladder::original(u32 idx) const {
  if (!full_) return small_[idx];
  const u32 m = static_cast<u32>(full_->local.size());
  Pt o;
  o.key = full_->local[idx].key;
  for (int a = 0; a < 3; ++a) {
    u32 r = full_->local[idx].c[a];
    o.c[a] = full_->ranks.coord(a, orient_[a] > 0 ? r : m + 1 - r);
  }
  return o;
}

std::size_t Ladder::report(const std::array<u32, 3>& q, const Sink& sink, QueryStats& st) const {
  auto f = [&](u32 idx) { sink(original(idx)); };
  return report_indices(q, f, st, sink.stop);
}

void Ladder::account(SpaceLedger& ledger, int level, u32 frame_universe) const {
  if (!full_) {
    ledger.add("dominance.scan", level, small_.size(), frame_universe, 3, small_.bytes());
    return;
  }
  const std::uint64_t m = full_->local.size();
  ledger.add("dominance.points", level, m, m, 3, vec_bytes(full_->local));
  ledger.add("dominance.ranks", level, m, frame_universe, 3, full_->ranks.bytes());
  for (const auto& t : full_->levels) ledger.add("dominance.tbound", level, t.words(), m, 1, t.bytes());
  ledger.add("dominance.fallback", level, full_->fallback.words(), m, 1, full_->fallback.bytes());
}

}  // namespace detail

namespace {

std::vector<detail::Pt> to_pts(const PointSet& points) {
  std::vector<detail::Pt> pts;
  pts.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != 3) throw DimensionMismatch("dominance input must be 3D");
    detail::Pt p;
    for (int a = 0; a < 3; ++a) {
      if (points[i][a] > std::numeric_limits<detail::u32>::max())
        throw std::out_of_range("dominance input must be in rank space");
      p.c[a] = static_cast<detail::u32>(points[i][a]);
    }
    p.key = static_cast<detail::u32>(i);
    pts.push_back(p);
  }
  return pts;
}

std::array<detail::u32, 3> q_of(const Point& q) {
  if (q.dim() != 3) throw DimensionMismatch("dominance query must be 3D");
  std::array<detail::u32, 3> out;
  for (int a = 0; a < 3; ++a)
    out[a] = static_cast<detail::u32>(std::min<Coord>(q[a], std::numeric_limits<detail::u32>::max()));
  return out;
}

}  // namespace

TBound::TBound(const PointSet& points, std::size_t t, const Orientation& orient)
    : orient_(orient), originals_(points) {
  if (t < 1) throw std::invalid_argument("t must be >= 1");
  auto pts = to_pts(points);
  local_ = detail::normalize_ranks(pts, orient, ranks_);
  core_ = detail::TBoundCore(local_, static_cast<detail::u32>(t));
}

bool TBound::to_local(const Point& q, std::array<detail::u32, 3>& out) const {
  return detail::local_threshold(ranks_, orient_, q_of(q), out);
}

TBoundResult TBound::query(const Point& q) const {
  TBoundResult out;
  std::array<detail::u32, 3> lq;
  if (local_.empty() || !to_local(q, lq)) return out;
  auto r = core_.query(lq, local_);
  out.more_than = r.more_than;
  for (auto idx : r.candidates) out.candidates.push_back(originals_[local_[idx].key]);
  return out;
}

void TBound::account(SpaceLedger& ledger, int level) const {
  ledger.add("dominance.tbound", level, core_.words(), local_.size(), 1, core_.bytes());
}

FallbackDominance::FallbackDominance(const PointSet& points, const Orientation& orient)
    : originals_(points), orient_(orient) {
  auto pts = to_pts(points);
  local_ = detail::normalize_ranks(pts, orient, ranks_);
  kd_ = detail::KdDominance(local_);
}

std::size_t FallbackDominance::report(const Point& q, ReportSink& sink) const {
  std::array<detail::u32, 3> lq;
  if (local_.empty() || !detail::local_threshold(ranks_, orient_, q_of(q), lq)) return 0;
  auto f = [&](detail::u32 idx) { sink.accept(originals_[local_[idx].key]); };
  return kd_.report(lq, local_, f, &sink.stop_flag());
}

DominanceLadder::DominanceLadder(const PointSet& points, const Orientation& orient,
                                 const detail::LadderOptions& opt)
    : ladder_(to_pts(points), orient, opt), originals_(points) {}

std::size_t DominanceLadder::report(const Point& q, ReportSink& sink) const {
  detail::QueryStats st;
  return report(q, sink, st);
}

std::size_t DominanceLadder::report(const Point& q, ReportSink& sink, detail::QueryStats& st) const {
  auto f = [&](detail::u32 idx) { sink.accept(originals_[ladder_.original(idx).key]); };
  return ladder_.report_indices(q_of(q), f, st, &sink.stop_flag());
}

void DominanceLadder::account(SpaceLedger& ledger, int level) const {
  ladder_.account(ledger, level, static_cast<detail::u32>(originals_.size()));
}

}  // namespace orr
