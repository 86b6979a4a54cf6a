#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "orr/detail/kernel.hpp"
#include "orr/geometry.hpp"
#include "orr/space_ledger.hpp"

namespace orr::cli {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PointsFile {
  std::size_t d = 0;
  Coord universe = 0;  // from the header, else the largest coordinate
  PointSet points;     // id = line number in the file
};

// Optional header `# d=<d> U=<U>`, then one point per line. Other lines
// starting with '#' and blank lines are skipped.
PointsFile read_points(std::istream& in, const std::string& name);
void write_points(std::ostream& out, const PointSet& points, std::size_t d, Coord universe);

// `lo:hi`, `*:hi` or `lo:*`.
AxisBound parse_bound(const std::string& token);
std::string format_bound(const AxisBound& b);

struct QueryLine {
  std::size_t line = 0;
  QueryBox box;
};
std::vector<QueryLine> read_queries(std::istream& in, const std::string& name, std::size_t d);
void write_queries(std::ostream& out, const std::vector<QueryBox>& queries);

enum class Dist { Uniform, Clustered, Diagonal };
Dist parse_dist(const std::string& s);

struct GenInfo {
  std::vector<std::vector<Coord>> centers;  // clustered only
  Coord radius = 0;
};

PointSet generate_points(std::uint64_t seed, std::size_t n, Coord universe, std::size_t d, Dist dist,
                         GenInfo* info = nullptr);
// `closed_only` makes every axis Closed; otherwise a third of the axes are
// half-open on a random side.
std::vector<QueryBox> generate_queries(std::uint64_t seed, std::size_t count, Coord universe, std::size_t d,
                                       bool closed_only);

// One line of `key=value` pairs.
class StatsRecord {
 public:
  template <class T>
  StatsRecord& add(const std::string& key, const T& value) {
    if constexpr (std::is_convertible_v<T, std::string>)
      fields_.emplace_back(key, std::string(value));
    else
      fields_.emplace_back(key, std::to_string(value));
    return *this;
  }
  StatsRecord& add_ms(const std::string& key, double ms);
  void add_stats(const detail::QueryStats& st);
  void add_ledger(const SpaceLedger& ledger);
  std::string line() const;
  const std::vector<std::pair<std::string, std::string>>& fields() const { return fields_; }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

}  // namespace orr::cli
