#include "orr/oracle.hpp"

#include <algorithm>

namespace orr {

PointSet oracle_report(const PointSet& points, const QueryBox& q) {
  PointSet out;
  for (const auto& p : points)
    if (contains(q, p)) out.push_back(p);
  return out;
}

std::vector<PointId> oracle_ids(const PointSet& points, const QueryBox& q) {
  std::vector<PointId> ids;
  for (const auto& p : points)
    if (contains(q, p)) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::size_t oracle_count(const PointSet& points, const QueryBox& q) {
  std::size_t k = 0;
  for (const auto& p : points) k += contains(q, p);
  return k;
}

QueryBox dominance_box(const Point& q, const Orientation& orient) {
  if (q.dim() != 3) throw DimensionMismatch("dominance is three-dimensional");
  std::vector<AxisBound> b;
  for (std::size_t j = 0; j < 3; ++j)
    b.push_back(orient[j] > 0 ? AxisBound::from(q[j]) : AxisBound::up_to(q[j]));
  return QueryBox(std::move(b));
}

PointSet oracle_dominators(const PointSet& points, const Point& q, const Orientation& orient) {
  return oracle_report(points, dominance_box(q, orient));
}

}  // namespace orr
