#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "orr/geometry.hpp"
#include "orr/oracle.hpp"
#include "orr/report_sink.hpp"

namespace testing_support {

using namespace orr;

inline PointSet random_points(std::mt19937_64& rng, std::size_t n, std::size_t d, Coord U) {
  std::uniform_int_distribution<Coord> dist(1, U);
  PointSet ps;
  for (std::size_t i = 0; i < n; ++i) {
    Point p;
    std::vector<Coord> c(d);
    for (auto& x : c) x = dist(rng);
    ps.emplace_back(c.data(), d, static_cast<PointId>(i));
  }
  return ps;
}

inline AxisBound random_bound(std::mt19937_64& rng, Coord U, int kind) {
  std::uniform_int_distribution<Coord> dist(1, U);
  Coord a = dist(rng), b = dist(rng);
  if (a > b) std::swap(a, b);
  switch (kind) {
    case 0: return AxisBound::closed(a, b);
    case 1: return AxisBound::up_to(b);
    default: return AxisBound::from(a);
  }
}

inline QueryBox random_closed_box(std::mt19937_64& rng, std::size_t d, Coord U) {
  std::vector<AxisBound> b;
  for (std::size_t j = 0; j < d; ++j) b.push_back(random_bound(rng, U, 0));
  return QueryBox(std::move(b));
}

inline std::vector<PointId> sorted(std::vector<PointId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<PointId> ids_of(const PointSet& ps) {
  std::vector<PointId> v;
  for (const auto& p : ps) v.push_back(p.id);
  return sorted(v);
}

}  // namespace testing_support
