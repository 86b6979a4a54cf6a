#include "orr/geometry.hpp"

#include <sstream>

#include "orr/rank_mapper.hpp"

namespace orr {

Point::Point(std::initializer_list<Coord> coords, PointId pid) : id(pid) {
  if (coords.size() > kMaxDim) throw DimensionMismatch("point dimension exceeds kMaxDim");
  std::size_t i = 0;
  for (Coord c : coords) coords_[i++] = c;
  dim_ = static_cast<std::uint8_t>(coords.size());
}

Point::Point(const Coord* coords, std::size_t dim, PointId pid) : id(pid) {
  if (dim > kMaxDim) throw DimensionMismatch("point dimension exceeds kMaxDim");
  for (std::size_t i = 0; i < dim; ++i) coords_[i] = coords[i];
  dim_ = static_cast<std::uint8_t>(dim);
}

bool operator==(const Point& a, const Point& b) {
  if (a.dim_ != b.dim_ || a.id != b.id) return false;
  for (std::size_t i = 0; i < a.dim_; ++i)
    if (a.coords_[i] != b.coords_[i]) return false;
  return true;
}

AxisBound AxisBound::closed(Coord lo, Coord hi) {
  if (lo > hi) throw std::invalid_argument("closed bound needs lo <= hi");
  return {Kind::Closed, lo, hi};
}
AxisBound AxisBound::up_to(Coord hi) { return {Kind::UpTo, 1, hi}; }
AxisBound AxisBound::from(Coord lo) { return {Kind::From, lo, lo}; }

bool AxisBound::admits(Coord c) const {
  switch (kind) {
    case Kind::Closed: return lo <= c && c <= hi;
    case Kind::UpTo: return c <= hi;
    case Kind::From: return c >= lo;
  }
  return false;
}

QueryBox::QueryBox(std::initializer_list<AxisBound> bounds) : bounds_(bounds) {}
QueryBox::QueryBox(std::vector<AxisBound> bounds) : bounds_(std::move(bounds)) {}

std::vector<int> QueryBox::sidedness() const {
  std::vector<int> s;
  for (const auto& b : bounds_) s.push_back(b.sidedness());
  return s;
}

bool contains(const QueryBox& q, const Point& p) {
  if (q.dim() != p.dim()) throw DimensionMismatch("query and point dimensions differ");
  for (std::size_t j = 0; j < q.dim(); ++j)
    if (!q[j].admits(p[j])) return false;
  return true;
}

std::string to_string(const Point& p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t j = 0; j < p.dim(); ++j) os << (j ? "," : "") << p[j];
  os << ")#" << p.id;
  return os.str();
}

std::string to_string(const QueryBox& q) {
  std::ostringstream os;
  for (std::size_t j = 0; j < q.dim(); ++j) {
    if (j) os << ' ';
    const auto& b = q[j];
    switch (b.kind) {
      case AxisBound::Kind::Closed: os << b.lo << ':' << b.hi; break;
      case AxisBound::Kind::UpTo: os << "*:" << b.hi; break;
      case AxisBound::Kind::From: os << b.lo << ":*"; break;
    }
  }
  return os.str();
}

std::pair<std::shared_ptr<const RankMapper>, PointSet> rank_reduce(
    const PointSet& points, std::shared_ptr<const RankMapper> parent) {
  if (points.empty()) throw std::invalid_argument("rank_reduce needs a nonempty point set");
  const std::size_t d = points.front().dim();
  std::vector<std::vector<Coord>> axes(d);
  for (const auto& p : points) {
    if (p.dim() != d) throw DimensionMismatch("mixed dimensions in point set");
    for (std::size_t j = 0; j < d; ++j) axes[j].push_back(p[j]);
  }
  for (auto& a : axes) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto mapper = std::make_shared<const RankMapper>(std::move(axes), std::move(parent));
  PointSet out;
  out.reserve(points.size());
  for (const auto& p : points) {
    Point r = p;
    for (std::size_t j = 0; j < d; ++j) r[j] = mapper->rank(j, p[j]);
    out.push_back(r);
  }
  return {std::move(mapper), std::move(out)};
}

std::optional<QueryBox> query_to_rank_space(const QueryBox& q, const RankMapper& m) {
  if (q.dim() != m.dim()) throw DimensionMismatch("query and mapper dimensions differ");
  QueryBox out = q;
  for (std::size_t j = 0; j < q.dim(); ++j) {
    const AxisBound& b = q[j];
    std::optional<std::size_t> lo, hi;
    if (b.kind != AxisBound::Kind::UpTo) {
      lo = m.succ_rank(j, b.lo);
      if (!lo) return std::nullopt;
    }
    if (b.kind != AxisBound::Kind::From) {
      hi = m.pred_rank(j, b.hi);
      if (!hi) return std::nullopt;
    }
    switch (b.kind) {
      case AxisBound::Kind::Closed:
        if (*lo > *hi) return std::nullopt;
        out[j] = AxisBound::closed(*lo, *hi);
        break;
      case AxisBound::Kind::UpTo: out[j] = AxisBound::up_to(*hi); break;
      case AxisBound::Kind::From: out[j] = AxisBound::from(*lo); break;
    }
  }
  return out;
}

Point unmap(const Point& p, const RankMapper& m) {
  if (p.dim() != m.dim()) throw DimensionMismatch("point and mapper dimensions differ");
  Point cur = p;
  for (const RankMapper* level = &m; level; level = level->parent().get())
    for (std::size_t j = 0; j < cur.dim(); ++j) cur[j] = level->coord(j, cur[j]);
  return cur;
}

}  // namespace orr
