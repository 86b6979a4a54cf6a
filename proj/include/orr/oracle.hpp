#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "orr/geometry.hpp"

namespace orr {

// +1 means "p >= q" on that axis, -1 means "p <= q".
using Orientation = std::array<int, 3>;

PointSet oracle_report(const PointSet& points, const QueryBox& q);
std::vector<PointId> oracle_ids(const PointSet& points, const QueryBox& q);
std::size_t oracle_count(const PointSet& points, const QueryBox& q);
PointSet oracle_dominators(const PointSet& points, const Point& q,
                           const Orientation& orient = {1, 1, 1});

// The dominance region of q as a box of From/UpTo bounds.
QueryBox dominance_box(const Point& q, const Orientation& orient);

}  // namespace orr
