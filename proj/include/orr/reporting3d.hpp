#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "orr/detail/kernel.hpp"
#include "orr/geometry.hpp"
#include "orr/report_sink.hpp"
#include "orr/slab.hpp"
#include "orr/space_ledger.hpp"

namespace orr {

struct LiftInfo {
  std::size_t n = 0;
  std::size_t structures = 0;  // inner (2,2,1) structures in the lift
  unsigned census = 0;         // most inner structures holding one point
  unsigned height = 0;         // lift tree height
  int depth = 0;               // deepest slab level over all inner structures
  std::size_t nodes = 0;       // slab nodes over all inner structures
  std::size_t mappers = 0;
};

// Closed 3D range reporting over points in [1,U]^3: per-axis predecessor
// search maps a query to positions, then a z-lift over (2,2,1) structures
// answers it. UpTo/From bounds are accepted and tightened on one side only.
class Reporter3D {
 public:
  ~Reporter3D();
  Reporter3D(Reporter3D&&) noexcept;
  Reporter3D& operator=(Reporter3D&&) noexcept;

  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const;
  // Some point of P ∩ Q; stops at the first hit.
  std::optional<Point> report_one(const QueryBox& q) const;
  std::optional<Point> report_one(const QueryBox& q, detail::QueryStats& st) const;
  bool empty(const QueryBox& q) const { return !report_one(q); }

  std::size_t size() const;
  const PointSet& points() const;
  Coord universe() const;
  bool compact() const;
  const LiftInfo& info() const;
  void account(SpaceLedger& ledger) const;

 protected:
  Reporter3D(const PointSet& points, Coord universe, const RecursionParams& params, unsigned bucket);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Full3D : public Reporter3D {
 public:
  static constexpr unsigned kBucket = 8;
  Full3D(const PointSet& points, Coord universe, const RecursionParams& params = RecursionParams::defaults(),
         unsigned bucket = kBucket);
};

// Same interface over compact (2,2,1) structures; report() pays one unmap
// step per level for every output.
class Compact3D : public Reporter3D {
 public:
  static constexpr unsigned kBucket = 8;
  Compact3D(const PointSet& points, Coord universe, int p = 2, double epsilon = 0.5, unsigned bucket = kBucket);
  Compact3D(const PointSet& points, Coord universe, const RecursionParams& params, unsigned bucket = kBucket);
};

// The z-lift over (2,2,1) structures alone, with a binary-search front over
// arbitrary 3D points (ties allowed).
class Lifted221 {
 public:
  explicit Lifted221(const PointSet& points, const RecursionParams& params = RecursionParams::defaults(),
                     unsigned bucket = 8);
  ~Lifted221();
  Lifted221(Lifted221&&) noexcept;

  std::size_t report(const QueryBox& q, ReportSink& sink) const;
  std::size_t report(const QueryBox& q, ReportSink& sink, detail::QueryStats& st) const;
  const LiftInfo& info() const;
  void account(SpaceLedger& ledger) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace orr
