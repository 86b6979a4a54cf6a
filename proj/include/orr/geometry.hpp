#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orr {

using Coord = std::uint64_t;
using PointId = std::uint32_t;

inline constexpr std::size_t kMaxDim = 8;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Point {
 public:
  Point() = default;
  Point(std::initializer_list<Coord> coords, PointId id = 0);
  Point(const Coord* coords, std::size_t dim, PointId id);

  std::size_t dim() const { return dim_; }
  Coord operator[](std::size_t axis) const { return coords_[axis]; }
  Coord& operator[](std::size_t axis) { return coords_[axis]; }
  const Coord* data() const { return coords_.data(); }

  PointId id = 0;

  friend bool operator==(const Point& a, const Point& b);

 private:
  std::array<Coord, kMaxDim> coords_{};
  std::uint8_t dim_ = 0;
};

using PointSet = std::vector<Point>;

struct AxisBound {
  enum class Kind : std::uint8_t { Closed, UpTo, From };

  Kind kind = Kind::Closed;
  Coord lo = 1;
  Coord hi = 1;

  static AxisBound closed(Coord lo, Coord hi);
  static AxisBound up_to(Coord hi);
  static AxisBound from(Coord lo);

  bool admits(Coord c) const;
  int sidedness() const { return kind == Kind::Closed ? 2 : 1; }

  friend bool operator==(const AxisBound&, const AxisBound&) = default;
};

class QueryBox {
 public:
  QueryBox() = default;
  QueryBox(std::initializer_list<AxisBound> bounds);
  explicit QueryBox(std::vector<AxisBound> bounds);

  std::size_t dim() const { return bounds_.size(); }
  const AxisBound& operator[](std::size_t axis) const { return bounds_[axis]; }
  AxisBound& operator[](std::size_t axis) { return bounds_[axis]; }
  std::vector<int> sidedness() const;

  friend bool operator==(const QueryBox&, const QueryBox&) = default;

 private:
  std::vector<AxisBound> bounds_;
};

// Throws DimensionMismatch when q and p disagree on d.
bool contains(const QueryBox& q, const Point& p);

std::string to_string(const Point& p);
std::string to_string(const QueryBox& q);

}  // namespace orr
